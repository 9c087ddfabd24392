//! Monte Carlo oracle.
//!
//! Quantum quadratures are drawn from the Gaussian Wigner function with
//! ordinary covariance `γ/2`; classical displacements are drawn with
//! covariance `Q̃/2`. Second moments are accumulated and doubled so the
//! estimates are directly comparable with the analytic covariance matrices.
//!
//! Shots are generated in fixed-size batches. Batch `k` uses stream `k` of a
//! ChaCha8 generator seeded with the user seed, and batch sums are merged in
//! batch order, so results do not depend on the thread count.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Serialize, Serializer};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{invalid, Result};
use crate::gaussianops::{
    direct_sum, q_tilde, reduce_modes, squeezed_vacuum_cm, vacuum_cm, Orientation,
};
use crate::par;
use crate::protocols::{recovered_cm, run_improved_protocol, GainMatrix, ProtocolParams};
use crate::symcore::{is_physical, two_mode_lower_nu, CovarianceMatrix, DEFAULT_TOL};

pub const DEFAULT_SHOTS: usize = 1_000_000;
pub const MIN_PROTOCOL_SHOTS: usize = 1_000;
pub const DEFAULT_SIGMA: f64 = 3.0;
/// Relative pivot below which a Cholesky column is treated as zero.
pub const PIVOT_TOL: f64 = 1e-12;
/// Shots per generator stream.
pub const BATCH_SIZE: usize = 8192;

/// Zero-mean Gaussian sampler built from a PSD, possibly singular, covariance.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    dim: usize,
    /// Row-major lower-triangular factor.
    factor: Vec<f64>,
}

impl GaussianSampler {
    /// `cov` is the ordinary covariance. Pivots below `PIVOT_TOL` times the
    /// largest diagonal entry zero their column.
    pub fn new(cov: &DMatrix<f64>) -> Result<Self> {
        let d = cov.nrows();
        if d == 0 || cov.ncols() != d {
            return invalid(format!(
                "covariance must be square and non-empty, got {}x{}",
                d,
                cov.ncols()
            ));
        }
        if cov.iter().any(|v| !v.is_finite()) {
            return invalid("covariance has non-finite entries");
        }
        let scale = (0..d)
            .map(|i| cov[(i, i)].abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut l = vec![0.0f64; d * d];
        for j in 0..d {
            let pivot = cov[(j, j)] - (0..j).map(|k| l[j * d + k].powi(2)).sum::<f64>();
            if pivot <= PIVOT_TOL * scale {
                if pivot < -1e-9 * scale {
                    return invalid(format!(
                        "covariance is not positive semidefinite (pivot {pivot:e})"
                    ));
                }
                continue;
            }
            let root = pivot.sqrt();
            l[j * d + j] = root;
            for i in j + 1..d {
                let s = cov[(i, j)] - (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum::<f64>();
                l[i * d + j] = s / root;
            }
        }
        Ok(Self { dim: d, factor: l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes one draw into `out`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let d = self.dim;
        for z in out[..d].iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        for i in (0..d).rev() {
            let row = &self.factor[i * d..i * d + i + 1];
            out[i] = row.iter().zip(&out[..=i]).map(|(a, b)| a * b).sum();
        }
    }
}

fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

fn batch_bounds(count: usize, batch: usize) -> (usize, usize) {
    let start = batch * BATCH_SIZE;
    (start, (start + BATCH_SIZE).min(count))
}

/// Row-major quadrature samples, one row per draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    dim: usize,
    data: Vec<f64>,
}

impl Samples {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

/// Draws `count` quadrature vectors of a physical state.
pub fn sample_gaussian_state(cm: &CovarianceMatrix, count: usize, seed: u64) -> Result<Samples> {
    if count == 0 {
        return invalid("sample count must be at least 1");
    }
    if !is_physical(cm, DEFAULT_TOL)? {
        return invalid("covariance matrix is not physical");
    }
    let sampler = GaussianSampler::new(&(cm.matrix() * 0.5))?;
    let dim = sampler.dim();
    let chunks = par::map_indexed(count.div_ceil(BATCH_SIZE), |b| {
        let (start, end) = batch_bounds(count, b);
        let mut rng = batch_rng(seed, b);
        let mut chunk = vec![0.0; (end - start) * dim];
        for row in chunk.chunks_exact_mut(dim) {
            sampler.sample(&mut rng, row);
        }
        chunk
    });
    Ok(Samples {
        dim,
        data: chunks.concat(),
    })
}

/// Running sums of `v_j v_k` and `(v_j v_k)²` over the upper triangle.
#[derive(Debug, Clone)]
struct Moments {
    dim: usize,
    n: usize,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        let m = dim * (dim + 1) / 2;
        Self {
            dim,
            n: 0,
            sum: vec![0.0; m],
            sum_sq: vec![0.0; m],
        }
    }

    fn push(&mut self, v: &[f64]) {
        let mut k = 0;
        for i in 0..self.dim {
            for j in i..self.dim {
                let p = v[i] * v[j];
                self.sum[k] += p;
                self.sum_sq[k] += p * p;
                k += 1;
            }
        }
        self.n += 1;
    }

    fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
    }

    fn finish(&self) -> Result<EnsembleEstimate> {
        if self.n < 2 {
            return invalid("at least two samples are needed for an estimate");
        }
        let n = self.n as f64;
        let d = self.dim;
        let mut cm = DMatrix::zeros(d, d);
        let mut se = DMatrix::zeros(d, d);
        let mut k = 0;
        for i in 0..d {
            for j in i..d {
                let mean = self.sum[k] / n;
                let var = ((self.sum_sq[k] / n - mean * mean) * n / (n - 1.0)).max(0.0);
                cm[(i, j)] = 2.0 * mean;
                cm[(j, i)] = 2.0 * mean;
                se[(i, j)] = 2.0 * (var / n).sqrt();
                se[(j, i)] = se[(i, j)];
                k += 1;
            }
        }
        Ok(EnsembleEstimate {
            n: self.n,
            cm: CovarianceMatrix::new(cm)?,
            std_errors: se,
        })
    }
}

/// Sample CM `2⟨v vᵀ⟩` with per-entry standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleEstimate {
    pub n: usize,
    pub cm: CovarianceMatrix,
    #[serde(serialize_with = "serialize_rows")]
    pub std_errors: DMatrix<f64>,
}

fn serialize_rows<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}

/// Estimates the CM of zero-mean samples.
pub fn estimate_cm(samples: &Samples) -> Result<EnsembleEstimate> {
    let mut m = Moments::new(samples.dim());
    for row in samples.rows() {
        m.push(row);
    }
    m.finish()
}

/// Quadratures `(x_A, p_A, x_B, p_B, x_C, p_C)` of one shot after each stage,
/// plus the gain-recovered pair `(A'', C'')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotRecord {
    pub input: [f64; 6],
    pub displacement: [f64; 6],
    pub displaced: [f64; 6],
    pub after_ac: [f64; 6],
    pub after_bc: [f64; 6],
    pub recovered: [f64; 4],
}

impl ShotRecord {
    pub const STAGES: usize = 3;
}

struct ShotSimulator {
    quantum: GaussianSampler,
    classical: GaussianSampler,
    gain: [[f64; 2]; 2],
}

impl ShotSimulator {
    fn new(params: &ProtocolParams, gain: &GainMatrix) -> Result<Self> {
        let sq = params.squeezing;
        let product = direct_sum(&[
            squeezed_vacuum_cm(sq, Orientation::MomentumSqueezed, params.excess)?,
            vacuum_cm(1)?,
            squeezed_vacuum_cm(sq, Orientation::PositionSqueezed, params.excess)?,
        ])?;
        let g = gain.matrix();
        Ok(Self {
            quantum: GaussianSampler::new(&(product.matrix() * 0.5))?,
            classical: GaussianSampler::new(&(q_tilde(params.x())?.effective() * 0.5))?,
            gain: [[g[(0, 0)], g[(0, 1)]], [g[(1, 0)], g[(1, 1)]]],
        })
    }

    fn shot<R: Rng + ?Sized>(&self, rng: &mut R) -> ShotRecord {
        let h = FRAC_1_SQRT_2;
        let mut input = [0.0; 6];
        let mut displacement = [0.0; 6];
        self.quantum.sample(rng, &mut input);
        self.classical.sample(rng, &mut displacement);

        let mut displaced = [0.0; 6];
        for i in 0..6 {
            displaced[i] = input[i] + displacement[i];
        }
        let mut after_ac = displaced;
        let mut after_bc = displaced;
        let mut recovered = [0.0; 4];
        for q in 0..2 {
            let (a, c) = (displaced[q], displaced[4 + q]);
            after_ac[q] = h * (a + c);
            after_ac[4 + q] = h * (a - c);
            after_bc[q] = after_ac[q];
            let (b, c) = (after_ac[2 + q], after_ac[4 + q]);
            after_bc[2 + q] = h * (b + c);
            after_bc[4 + q] = h * (b - c);

            recovered[q] = after_ac[q];
            recovered[2 + q] = after_ac[4 + q]
                + self.gain[q][0] * displacement[2]
                + self.gain[q][1] * displacement[3];
        }
        ShotRecord {
            input,
            displacement,
            displaced,
            after_ac,
            after_bc,
            recovered,
        }
    }
}

/// Individual shots, mainly for inspection and tests.
pub fn simulate_shots(
    params: &ProtocolParams,
    gain: &GainMatrix,
    count: usize,
    seed: u64,
) -> Result<Vec<ShotRecord>> {
    let sim = ShotSimulator::new(params, gain)?;
    let chunks = par::map_indexed(count.div_ceil(BATCH_SIZE), |b| {
        let (start, end) = batch_bounds(count, b);
        let mut rng = batch_rng(seed, b);
        (start..end).map(|_| sim.shot(&mut rng)).collect::<Vec<_>>()
    });
    Ok(chunks.concat())
}

/// Estimates of the step-3 CM and of the gain-recovered two-mode CM.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolEstimate {
    pub seed: u64,
    pub gain: GainMatrix,
    pub gamma3: EnsembleEstimate,
    pub recovery: EnsembleEstimate,
    /// Lower PT eigenvalue of the estimated `γ_{3,AB}`.
    pub nu_ab: f64,
    /// Lower PT eigenvalue of the estimated recovered CM.
    pub nu_ac: f64,
}

/// Shot-by-shot simulation with the optimal gain `G = 𝟙`.
pub fn simulate_improved_protocol_mc(
    params: &ProtocolParams,
    count: usize,
    seed: u64,
) -> Result<ProtocolEstimate> {
    simulate_with_gain(params, &GainMatrix::identity(), count, seed)
}

/// Shot-by-shot simulation with an arbitrary recovery gain.
pub fn simulate_with_gain(
    params: &ProtocolParams,
    gain: &GainMatrix,
    count: usize,
    seed: u64,
) -> Result<ProtocolEstimate> {
    if count < MIN_PROTOCOL_SHOTS {
        return invalid(format!(
            "protocol simulation needs at least {MIN_PROTOCOL_SHOTS} shots, got {count}"
        ));
    }
    let sim = ShotSimulator::new(params, gain)?;
    run_batches(&sim, count, seed, true).and_then(|(g3, rec)| finish_estimate(g3, rec, *gain, seed))
}

/// Same as [`simulate_with_gain`] but always single-threaded. The result is
/// bit-identical to the parallel one.
pub fn simulate_with_gain_sequential(
    params: &ProtocolParams,
    gain: &GainMatrix,
    count: usize,
    seed: u64,
) -> Result<ProtocolEstimate> {
    if count < MIN_PROTOCOL_SHOTS {
        return invalid(format!(
            "protocol simulation needs at least {MIN_PROTOCOL_SHOTS} shots, got {count}"
        ));
    }
    let sim = ShotSimulator::new(params, gain)?;
    run_batches(&sim, count, seed, false)
        .and_then(|(g3, rec)| finish_estimate(g3, rec, *gain, seed))
}

fn run_batches(
    sim: &ShotSimulator,
    count: usize,
    seed: u64,
    pooled: bool,
) -> Result<(Moments, Moments)> {
    let batch = |b: usize| {
        let (start, end) = batch_bounds(count, b);
        let mut rng = batch_rng(seed, b);
        let (mut g3, mut rec) = (Moments::new(6), Moments::new(4));
        for _ in start..end {
            let s = sim.shot(&mut rng);
            g3.push(&s.after_bc);
            rec.push(&s.recovered);
        }
        (g3, rec)
    };
    let batches = count.div_ceil(BATCH_SIZE);
    let parts = if pooled {
        par::map_indexed(batches, batch)
    } else {
        par::map_indexed_sequential(batches, batch)
    };
    let (mut g3, mut rec) = (Moments::new(6), Moments::new(4));
    for (a, b) in &parts {
        g3.merge(a);
        rec.merge(b);
    }
    Ok((g3, rec))
}

fn finish_estimate(
    g3: Moments,
    rec: Moments,
    gain: GainMatrix,
    seed: u64,
) -> Result<ProtocolEstimate> {
    let gamma3 = g3.finish()?;
    let recovery = rec.finish()?;
    let nu_ab = two_mode_lower_nu(&reduce_modes(&gamma3.cm, &[0, 1])?, 1)?;
    let nu_ac = two_mode_lower_nu(&recovery.cm, 1)?;
    Ok(ProtocolEstimate {
        seed,
        gain,
        gamma3,
        recovery,
        nu_ab,
        nu_ac,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntryCheck {
    pub row: usize,
    pub col: usize,
    pub estimate: f64,
    pub reference: f64,
    pub std_error: f64,
    /// `|estimate - reference| / std_error`.
    pub z: f64,
    pub pass: bool,
}

/// Upper-triangle comparison of an estimate with a reference CM.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub sigma_multiplier: f64,
    pub entries: Vec<EntryCheck>,
    pub flagged: usize,
    pub max_z: f64,
    pub pass: bool,
}

impl ComparisonReport {
    pub fn flagged_entries(&self) -> impl Iterator<Item = &EntryCheck> {
        self.entries.iter().filter(|e| !e.pass)
    }
}

/// Flags entries with `|estimate - reference| > sigma_multiplier · SE`.
pub fn compare_estimate(
    estimate: &EnsembleEstimate,
    reference: &CovarianceMatrix,
    sigma_multiplier: f64,
) -> Result<ComparisonReport> {
    if estimate.cm.dim() != reference.dim() {
        return invalid(format!(
            "estimate is {}x{} but reference is {}x{}",
            estimate.cm.dim(),
            estimate.cm.dim(),
            reference.dim(),
            reference.dim()
        ));
    }
    if !(sigma_multiplier > 0.0 && sigma_multiplier.is_finite()) {
        return invalid(format!(
            "sigma multiplier must be positive, got {sigma_multiplier}"
        ));
    }
    let d = reference.dim();
    let mut entries = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in i..d {
            let (est, r, se) = (
                estimate.cm.get(i, j),
                reference.get(i, j),
                estimate.std_errors[(i, j)],
            );
            let diff = (est - r).abs();
            let (z, pass) = if se > 0.0 {
                (diff / se, diff <= sigma_multiplier * se)
            } else {
                let exact = diff <= 1e-12 * 1f64.max(r.abs());
                (if exact { 0.0 } else { f64::INFINITY }, exact)
            };
            entries.push(EntryCheck {
                row: i,
                col: j,
                estimate: est,
                reference: r,
                std_error: se,
                z,
                pass,
            });
        }
    }
    let flagged = entries.iter().filter(|e| !e.pass).count();
    let max_z = entries.iter().map(|e| e.z).fold(0.0, f64::max);
    Ok(ComparisonReport {
        sigma_multiplier,
        entries,
        flagged,
        max_z,
        pass: flagged == 0,
    })
}

/// MC estimates together with their analytic references and comparisons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McValidation {
    pub params: ProtocolParams,
    pub samples: usize,
    pub estimate: ProtocolEstimate,
    pub gamma3_reference: CovarianceMatrix,
    pub recovery_reference: CovarianceMatrix,
    pub gamma3_check: ComparisonReport,
    pub recovery_check: ComparisonReport,
    pub nu_ab_reference: f64,
    pub nu_ac_reference: f64,
    pub pass: bool,
}

/// Runs the simulation and compares both estimates with the analytic
/// pipeline at `sigma_multiplier` standard errors.
pub fn validate_protocol(
    params: &ProtocolParams,
    gain: &GainMatrix,
    count: usize,
    seed: u64,
    sigma_multiplier: f64,
) -> Result<McValidation> {
    let estimate = simulate_with_gain(params, gain, count, seed)?;
    let report = run_improved_protocol(params)?;
    let gamma3_reference = report.step_cm(3).clone();
    let recovery_reference = recovered_cm(params, gain)?;
    let gamma3_check = compare_estimate(&estimate.gamma3, &gamma3_reference, sigma_multiplier)?;
    let recovery_check =
        compare_estimate(&estimate.recovery, &recovery_reference, sigma_multiplier)?;
    let pass = gamma3_check.pass && recovery_check.pass;
    Ok(McValidation {
        params: *params,
        samples: count,
        nu_ab_reference: report.nu(),
        nu_ac_reference: two_mode_lower_nu(&recovery_reference, 1)?,
        estimate,
        gamma3_reference,
        recovery_reference,
        gamma3_check,
        recovery_check,
        pass,
    })
}
