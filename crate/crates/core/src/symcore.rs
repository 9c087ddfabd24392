//! Symplectic linear algebra on small dense covariance matrices and the
//! Gaussian separability criteria built on it.
//!
//! Covariance matrices use the anticommutator convention
//! `γ_jk = <{ξ_j - <ξ_j>, ξ_k - <ξ_k>}>`, so the vacuum is the identity and
//! physical states satisfy `γ - iΩ ≥ 0`. Partial transposition with respect
//! to a mode flips the sign of that mode's momentum row and column.
//!
//! Symplectic eigenvalues are obtained without an eigensolver: the even
//! coefficients of `det(Ωγ - μ𝟙)` are sums of principal minors of `Ωγ`, and for
//! three modes they define a cubic in `s²` that is solved in closed form.

use itertools::Itertools;
use nalgebra::{Complex, DMatrix, Matrix2, SymmetricEigen};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Default tolerance on separability thresholds (eigenvalue and Σ forms).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative tolerance used when checking that a matrix is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Mode indices in the fixed `(A, B, C)` ordering.
pub mod mode {
    pub const A: usize = 0;
    pub const B: usize = 1;
    pub const C: usize = 2;
}

/// Letter used for mode `index` in labels (`0 -> 'A'`).
pub fn mode_name(index: usize) -> char {
    (b'A' + index as u8) as char
}

/// `Ω = J ⊕ J ⊕ …` with `J = [[0, -1], [1, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Builds the standard symplectic form on `n_modes` modes.
pub fn omega(n_modes: usize) -> Result<SymplecticForm> {
    if n_modes == 0 {
        return invalid("symplectic form needs at least one mode");
    }
    Ok(SymplecticForm {
        n_modes,
        matrix: omega_matrix(n_modes),
    })
}

pub(crate) fn omega_matrix(n_modes: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        m[(2 * k, 2 * k + 1)] = -1.0;
        m[(2 * k + 1, 2 * k)] = 1.0;
    }
    m
}

/// Real symmetric `2n × 2n` covariance matrix in vacuum units.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps `entries`, rejecting non-square, odd-sized, non-finite or
    /// asymmetric input.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return invalid(format!(
                "covariance matrix must be square, got {rows}x{cols}"
            ));
        }
        if rows == 0 || rows % 2 != 0 {
            return invalid(format!(
                "covariance matrix dimension must be even and positive, got {rows}"
            ));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return invalid("covariance matrix has non-finite entries");
        }
        for i in 0..rows {
            for j in (i + 1)..rows {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if (a - b).abs() > SYMMETRY_TOL * 1f64.max(a.abs()).max(b.abs()) {
                    return invalid(format!(
                        "covariance matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                    ));
                }
            }
        }
        Ok(Self {
            n_modes: rows / 2,
            entries,
        })
    }

    /// Row-major convenience constructor.
    pub fn from_row_slice(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return invalid(format!(
                "expected {} entries, got {}",
                dim * dim,
                data.len()
            ));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, data))
    }

    /// Averages `m` with its transpose before wrapping it. Used after
    /// congruences, where rounding leaves a last-bit asymmetry.
    pub(crate) fn from_symmetrized(m: DMatrix<f64>) -> Result<Self> {
        let sym = (&m + m.transpose()) * 0.5;
        Self::new(sym)
    }

    pub fn identity(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return invalid("covariance matrix needs at least one mode");
        }
        Ok(Self {
            n_modes,
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// The `2 × 2` block coupling mode `i` (rows) to mode `j` (columns).
    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        let v = &self.entries;
        Matrix2::new(
            v[(2 * i, 2 * j)],
            v[(2 * i, 2 * j + 1)],
            v[(2 * i + 1, 2 * j)],
            v[(2 * i + 1, 2 * j + 1)],
        )
    }

    pub fn det(&self) -> f64 {
        self.entries.clone().determinant()
    }

    /// Largest absolute entry.
    pub fn scale(&self) -> f64 {
        self.entries.amax()
    }

    /// Largest entrywise absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &CovarianceMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        (&self.entries - &other.entries).amax()
    }

    /// Rows as nested vectors, the layout used in serialized reports.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }
}

impl Serialize for CovarianceMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CovarianceMatrix", 2)?;
        s.serialize_field("n_modes", &self.n_modes)?;
        s.serialize_field("rows", &self.rows())?;
        s.end()
    }
}

fn check_mode(cm: &CovarianceMatrix, mode: usize) -> Result<()> {
    if mode >= cm.n_modes() {
        return invalid(format!(
            "mode {mode} out of range for a {}-mode state",
            cm.n_modes()
        ));
    }
    Ok(())
}

/// `Λ_x γ Λ_x`, where `Λ_x` negates the momentum of mode `x`.
pub fn partial_transpose(cm: &CovarianceMatrix, mode: usize) -> Result<CovarianceMatrix> {
    check_mode(cm, mode)?;
    let mut m = cm.entries.clone();
    let p = 2 * mode + 1;
    for k in 0..cm.dim() {
        if k != p {
            m[(p, k)] = -m[(p, k)];
            m[(k, p)] = -m[(k, p)];
        }
    }
    Ok(CovarianceMatrix {
        n_modes: cm.n_modes,
        entries: m,
    })
}

fn principal_minor_sum(m: &DMatrix<f64>, k: usize) -> f64 {
    let n = m.nrows();
    if k == 0 {
        return 1.0;
    }
    if k == n {
        return m.clone().determinant();
    }
    (0..n)
        .combinations(k)
        .map(|idx| {
            if k == 2 {
                m[(idx[0], idx[0])] * m[(idx[1], idx[1])]
                    - m[(idx[0], idx[1])] * m[(idx[1], idx[0])]
            } else {
                m.select_rows(&idx).select_columns(&idx).determinant()
            }
        })
        .sum()
}

/// Coefficients `c_1..c_n` of `det(Ωγ - μ𝟙) = μ^{2n} + c_1 μ^{2n-2} + … + c_n`.
///
/// `c_k` is the elementary symmetric polynomial of degree `k` in the squared
/// symplectic eigenvalues. Odd-degree coefficients vanish for any symmetric
/// `γ`; a residue above `1e-10` of the surrounding scale is reported as a
/// numerical failure.
fn even_char_coefficients(cm: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = cm.n_modes();
    let m = omega_matrix(n) * &cm.entries;
    let mut even = Vec::with_capacity(n);
    let mut prev = 1.0f64;
    for k in 1..=n {
        let odd = principal_minor_sum(&m, 2 * k - 1);
        let cur = principal_minor_sum(&m, 2 * k);
        let scale = 1f64.max(prev.abs()).max(cur.abs());
        if odd.abs() > 1e-10 * scale {
            return Err(Error::NumericalFailure(format!(
                "odd characteristic coefficient of degree {} is {odd:e}, expected zero",
                2 * k - 1
            )));
        }
        even.push(cur);
        prev = cur;
    }
    Ok(even)
}

/// Invariants of a three-mode CM (optionally partially transposed): the
/// coefficients of `det(Ωγ - μ𝟙) = μ⁶ + I₁μ⁴ + I₂μ² + I₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymplecticInvariants {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

impl SymplecticInvariants {
    /// Invariants reconstructed from symplectic eigenvalues `s_j`.
    pub fn from_eigenvalues(s: &[f64; 3]) -> Self {
        let [a, b, c] = s.map(|v| v * v);
        Self {
            i1: a + b + c,
            i2: a * b + a * c + b * c,
            i3: a * b * c,
        }
    }

    /// `Σ = I₃ - I₂ + I₁ - 1 = Π (s_j² - 1)`.
    pub fn sigma(&self) -> f64 {
        self.i3 - self.i2 + self.i1 - 1.0
    }
}

/// Invariants of `Ωγ^{(T_x)}` for a three-mode CM; `transposed_mode = None`
/// uses `γ` itself.
pub fn symplectic_invariants(
    cm: &CovarianceMatrix,
    transposed_mode: Option<usize>,
) -> Result<SymplecticInvariants> {
    if cm.n_modes() != 3 {
        return invalid(format!(
            "symplectic invariants are defined here for three modes, got {}",
            cm.n_modes()
        ));
    }
    let c = match transposed_mode {
        Some(m) => even_char_coefficients(&partial_transpose(cm, m)?)?,
        None => even_char_coefficients(cm)?,
    };
    Ok(SymplecticInvariants {
        i1: c[0],
        i2: c[1],
        i3: c[2],
    })
}

/// Real roots of `λ³ - e1 λ² + e2 λ - e3`, ascending.
///
/// Uses the trigonometric form for three real roots. Near-degenerate cases
/// (`|cos 3θ|` up to `1 + 1e-9`) are clamped. The smallest root is recomputed
/// as `e3 / (λ₂ λ₃)`, which keeps full relative accuracy when the roots span
/// many orders of magnitude.
pub fn cubic_real_roots(e1: f64, e2: f64, e3: f64) -> Result<[f64; 3]> {
    let shift = e1 / 3.0;
    let p = e2 - e1 * e1 / 3.0;
    let q = -2.0 * e1.powi(3) / 27.0 + e1 * e2 / 3.0 - e3;
    let scale = 1f64.max(e1 * e1);

    let mut roots = if p.abs() <= 1e-12 * scale {
        [shift; 3]
    } else if p > 0.0 {
        return Err(Error::NumericalFailure(format!(
            "cubic has complex roots (p = {p:e})"
        )));
    } else {
        let r = 2.0 * (-p / 3.0).sqrt();
        let mut arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        if arg.abs() > 1.0 {
            if arg.abs() - 1.0 > 1e-9 {
                return Err(Error::NumericalFailure(format!(
                    "cubic has complex roots (cos 3θ = {arg})"
                )));
            }
            arg = arg.signum();
        }
        let theta = arg.acos() / 3.0;
        [0, 1, 2].map(|k| r * (theta - 2.0 * PI * k as f64 / 3.0).cos() + shift)
    };
    for r in roots.iter_mut() {
        *r = polish_cubic_root(e1, e2, e3, *r);
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    let upper = roots[1] * roots[2];
    if upper > 0.0 && roots[0].abs() < roots[2] {
        roots[0] = e3 / upper;
    }
    Ok(roots)
}

fn polish_cubic_root(e1: f64, e2: f64, e3: f64, mut r: f64) -> f64 {
    let p = |v: f64| ((v - e1) * v + e2) * v - e3;
    for _ in 0..3 {
        let d = (3.0 * r - 2.0 * e1) * r + e2;
        if d == 0.0 {
            break;
        }
        let next = r - p(r) / d;
        if p(next).abs() >= p(r).abs() {
            break;
        }
        r = next;
    }
    r
}

fn sqrt_nonnegative(v: f64, scale: f64, what: &str) -> Result<f64> {
    if v < -1e-9 * 1f64.max(scale) {
        return Err(Error::NumericalFailure(format!(
            "{what} is negative ({v:e}); input is not a physical covariance matrix"
        )));
    }
    Ok(v.max(0.0).sqrt())
}

/// Symplectic eigenvalues, ascending, for any mode count.
///
/// With `γ = LLᵀ`, the antisymmetric matrix `LᵀΩL` is similar to `Ωγ`, so
/// the Hermitian matrix `i LᵀΩL` has eigenvalues `±s_j`. This route stays
/// accurate when eigenvalues repeat, where the invariant cubic loses half its
/// digits. Input that is not positive definite is reported as a numerical
/// failure.
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = cm.n_modes();
    let l = cm
        .entries
        .clone()
        .cholesky()
        .ok_or_else(|| {
            Error::NumericalFailure("covariance matrix is not positive definite".into())
        })?
        .l();
    let k = l.transpose() * omega_matrix(n) * &l;
    let h = k.map(|v| Complex::new(0.0, v));
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    let mut s: Vec<f64> = ev[n..].iter().map(|v| v.max(0.0)).collect();
    // The product of the spectrum is √det γ; the larger eigenvalues carry full
    // relative accuracy, so this recovers digits lost in the smallest one.
    let root_det = l.diagonal().product();
    let rest: f64 = s[1..].iter().product();
    if n > 1 && rest > 0.0 && root_det.is_finite() && root_det > 0.0 {
        s[0] = (root_det / rest).min(s[1]);
    }
    Ok(s)
}

/// Symplectic eigenvalues from the characteristic-polynomial invariants,
/// ascending: `√det` for one mode, the quadratic in `s²` for two, the
/// trigonometric cubic for three.
pub fn symplectic_eigenvalues_from_invariants(cm: &CovarianceMatrix) -> Result<Vec<f64>> {
    match cm.n_modes() {
        1 => {
            let d = cm.det();
            Ok(vec![sqrt_nonnegative(d, d.abs(), "determinant")?])
        }
        2 => {
            let c = even_char_coefficients(cm)?;
            let (lo, hi) = two_mode_pair(c[0], c[1])?;
            Ok(vec![lo, hi])
        }
        3 => {
            let c = even_char_coefficients(cm)?;
            let roots = cubic_real_roots(c[0], c[1], c[2])?;
            roots
                .iter()
                .map(|&r| sqrt_nonnegative(r, roots[2], "squared symplectic eigenvalue"))
                .collect()
        }
        n => invalid(format!("invariant route supports 1 to 3 modes, got {n}")),
    }
}

/// Roots `s₋ ≤ s₊` of `s⁴ - Δ s² + det = 0`.
fn two_mode_pair(delta: f64, det: f64) -> Result<(f64, f64)> {
    let disc = delta * delta - 4.0 * det;
    if disc < -1e-10 * 1f64.max(delta * delta) {
        return Err(Error::NumericalFailure(format!(
            "two-mode discriminant is negative ({disc:e})"
        )));
    }
    if det <= 0.0 {
        return Err(Error::NumericalFailure(format!(
            "two-mode determinant is not positive ({det:e})"
        )));
    }
    let hi2 = (delta + disc.max(0.0).sqrt()) / 2.0;
    if hi2 <= 0.0 {
        return Err(Error::NumericalFailure(
            "two-mode invariant sum is not positive".into(),
        ));
    }
    Ok(((det / hi2).sqrt(), hi2.sqrt()))
}

/// Lowest symplectic eigenvalue of `γ^{(T_x)}`.
pub fn lowest_pt_eigenvalue(cm: &CovarianceMatrix, mode: usize) -> Result<f64> {
    let s = symplectic_eigenvalues(&partial_transpose(cm, mode)?)?;
    Ok(s[0])
}

/// Lower symplectic eigenvalue of a partially transposed two-mode CM from
/// its blocks: `ν² = (κ - √(κ² - 4 det γ)) / 2` with
/// `κ = det A + det B - 2 det C`.
///
/// Either mode may be named; the result is the same because transposing one
/// side only flips the sign of `det C`.
pub fn two_mode_lower_nu(cm: &CovarianceMatrix, transposed_mode: usize) -> Result<f64> {
    if cm.n_modes() != 2 {
        return invalid(format!(
            "expected a two-mode CM, got {} modes",
            cm.n_modes()
        ));
    }
    check_mode(cm, transposed_mode)?;
    let kappa = cm.block(0, 0).determinant() + cm.block(1, 1).determinant()
        - 2.0 * cm.block(0, 1).determinant();
    let det = cm.det();
    let disc = kappa * kappa - 4.0 * det;
    if disc < -1e-10 * 1f64.max(kappa * kappa) {
        return Err(Error::NumericalFailure(format!(
            "κ² - 4 det γ = {disc:e} is negative; input is unphysical"
        )));
    }
    if det <= 0.0 {
        return Err(Error::NumericalFailure(format!(
            "det γ = {det:e} is not positive; input is unphysical"
        )));
    }
    // Rationalized form of (κ - √disc) / 2, stable when κ² ≫ 4 det.
    let nu2 = 2.0 * det / (kappa + disc.max(0.0).sqrt());
    Ok(nu2.sqrt())
}

/// `E_N = max(0, -log₂ ν)` in ebits.
pub fn log_negativity(nu: f64) -> Result<f64> {
    if nu.is_nan() || nu <= 0.0 || !nu.is_finite() {
        return invalid(format!("logarithmic negativity needs ν > 0, got {nu}"));
    }
    Ok((-nu.log2()).max(0.0))
}

/// True iff `γ` is positive definite and every symplectic eigenvalue is at
/// least `1 - tol`.
pub fn is_physical(cm: &CovarianceMatrix, tol: f64) -> Result<bool> {
    match symplectic_eigenvalues(cm) {
        Ok(s) => Ok(s[0] >= 1.0 - tol),
        Err(Error::NumericalFailure(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Separable,
    Entangled,
    /// Within tolerance of the threshold.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// Lowest symplectic eigenvalue of the partial transpose, threshold 1.
    LowestPtEigenvalue,
    /// Σ from the symplectic invariants, threshold 0.
    Sigma,
}

/// Separability of one mode from the rest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparabilityVerdict {
    pub bipartition: String,
    pub status: VerdictStatus,
    pub witness: f64,
    pub kind: WitnessKind,
    pub tolerance: f64,
}

impl SeparabilityVerdict {
    fn classify(bipartition: String, witness: f64, kind: WitnessKind, tolerance: f64) -> Self {
        let threshold = match kind {
            WitnessKind::LowestPtEigenvalue => 1.0,
            WitnessKind::Sigma => 0.0,
        };
        let status = if (witness - threshold).abs() <= tolerance {
            VerdictStatus::Boundary
        } else if witness > threshold {
            VerdictStatus::Separable
        } else {
            VerdictStatus::Entangled
        };
        Self {
            bipartition,
            status,
            witness,
            kind,
            tolerance,
        }
    }

    /// Whether the verdict certifies separability.
    ///
    /// For the eigenvalue form, PPT is necessary and sufficient for `1 × N`
    /// Gaussian bipartitions, so a boundary value (`s = 1`) still certifies.
    /// A Σ value at the boundary is inconclusive.
    pub fn is_separable(&self) -> bool {
        match self.kind {
            WitnessKind::LowestPtEigenvalue => self.status != VerdictStatus::Entangled,
            WitnessKind::Sigma => self.status == VerdictStatus::Separable,
        }
    }

    pub fn is_entangled(&self) -> bool {
        self.status == VerdictStatus::Entangled
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.bipartition = label.into();
        self
    }
}

/// `"A-(BC)"` style label for mode `mode` against the rest.
pub fn bipartition_label(n_modes: usize, mode: usize) -> String {
    if n_modes == 2 {
        return "A-B".to_string();
    }
    let rest: String = (0..n_modes).filter(|&k| k != mode).map(mode_name).collect();
    if rest.len() == 1 {
        format!("{}-{}", mode_name(mode), rest)
    } else {
        format!("{}-({})", mode_name(mode), rest)
    }
}

/// PPT verdict for `mode` versus the remaining modes.
pub fn ppt_verdict(cm: &CovarianceMatrix, mode: usize, tol: f64) -> Result<SeparabilityVerdict> {
    let witness = lowest_pt_eigenvalue(cm, mode)?;
    Ok(SeparabilityVerdict::classify(
        bipartition_label(cm.n_modes(), mode),
        witness,
        WitnessKind::LowestPtEigenvalue,
        tol,
    ))
}

/// `Σ` of `γ^{(T_x)}` for a three-mode CM. `Σ > 0` is sufficient for
/// separability of mode `x` from the other two.
pub fn sigma_criterion(cm: &CovarianceMatrix, mode: usize) -> Result<f64> {
    Ok(symplectic_invariants(cm, Some(mode))?.sigma())
}

/// Σ-form verdict for `mode` versus the remaining two modes.
pub fn sigma_verdict(cm: &CovarianceMatrix, mode: usize, tol: f64) -> Result<SeparabilityVerdict> {
    let witness = sigma_criterion(cm, mode)?;
    Ok(SeparabilityVerdict::classify(
        bipartition_label(cm.n_modes(), mode),
        witness,
        WitnessKind::Sigma,
        tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_mode_squeezed(e2t: f64) -> CovarianceMatrix {
        let (c, s) = ((e2t + 1.0 / e2t) / 2.0, (e2t - 1.0 / e2t) / 2.0);
        #[rustfmt::skip]
        let m = CovarianceMatrix::from_row_slice(4, &[
            c, 0.0, s, 0.0,
            0.0, c, 0.0, -s,
            s, 0.0, c, 0.0,
            0.0, -s, 0.0, c,
        ]);
        m.unwrap()
    }

    #[test]
    fn omega_single_mode_is_j() {
        let w = omega(1).unwrap();
        assert_eq!(
            w.matrix(),
            &DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
        );
    }

    #[test]
    fn omega_three_modes_is_block_diagonal() {
        let w = omega(3).unwrap();
        assert_eq!(w.matrix().shape(), (6, 6));
        for k in 0..3 {
            assert_eq!(w.matrix()[(2 * k, 2 * k + 1)], -1.0);
            assert_eq!(w.matrix()[(2 * k + 1, 2 * k)], 1.0);
        }
        assert_eq!(w.matrix().iter().filter(|v| **v != 0.0).count(), 6);
    }

    #[test]
    fn omega_squares_to_minus_identity() {
        let w = omega(2).unwrap();
        assert_eq!(w.matrix() * w.matrix(), -DMatrix::<f64>::identity(4, 4));
        assert_eq!(w.matrix().transpose(), -w.matrix());
    }

    #[test]
    fn omega_rejects_zero_modes() {
        assert!(matches!(omega(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let r = CovarianceMatrix::from_row_slice(2, &[1.0, 0.1, 0.2, 1.0]);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        assert!(CovarianceMatrix::from_row_slice(3, &[0.0; 9]).is_err());
    }

    #[test]
    fn physicality_of_simple_states() {
        assert!(is_physical(&CovarianceMatrix::identity(3).unwrap(), DEFAULT_TOL).unwrap());
        let sub = CovarianceMatrix::from_row_slice(2, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(!is_physical(&sub, DEFAULT_TOL).unwrap());
        let neg = CovarianceMatrix::from_row_slice(2, &[-1.0, 0.0, 0.0, -1.0]).unwrap();
        assert!(!is_physical(&neg, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn partial_transpose_fixes_identity_and_is_involution() {
        let id = CovarianceMatrix::identity(3).unwrap();
        assert_eq!(partial_transpose(&id, 1).unwrap(), id);
        let g = two_mode_squeezed(2.0);
        let twice = partial_transpose(&partial_transpose(&g, 1).unwrap(), 1).unwrap();
        assert_eq!(twice, g);
        assert!(partial_transpose(&g, 2).is_err());
    }

    #[test]
    fn partial_transpose_of_two_mode_squeezed_state() {
        // Off-diagonal block sinh(2t)σ_z becomes sinh(2t)𝟙 after flipping p_C.
        let pt = partial_transpose(&two_mode_squeezed(2.0), 1).unwrap();
        let c = pt.block(0, 1);
        assert_abs_diff_eq!(c, Matrix2::new(0.75, 0.0, 0.0, 0.75), epsilon = 1e-15);
        assert_abs_diff_eq!(pt.block(0, 0), Matrix2::identity() * 1.25, epsilon = 1e-15);
    }

    #[test]
    fn vacuum_symplectic_spectrum() {
        let id = CovarianceMatrix::identity(3).unwrap();
        let s = symplectic_eigenvalues(&id).unwrap();
        for v in s {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
        let inv = symplectic_invariants(&id, None).unwrap();
        assert_abs_diff_eq!(inv.i1, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(inv.i2, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(inv.i3, 1.0, epsilon = 1e-12);
        for m in 0..3 {
            assert_abs_diff_eq!(sigma_criterion(&id, m).unwrap(), 0.0, epsilon = 1e-12);
            let v = sigma_verdict(&id, m, DEFAULT_TOL).unwrap();
            assert_eq!(v.status, VerdictStatus::Boundary);
            assert!(!v.is_separable());
        }
    }

    #[test]
    fn two_mode_squeezed_lower_pt_eigenvalue() {
        for e2t in [1.5, 2.0, 10.0, 1e4] {
            let g = two_mode_squeezed(e2t);
            let lo = lowest_pt_eigenvalue(&g, 1).unwrap();
            assert_abs_diff_eq!(lo, 1.0 / e2t, epsilon = 1e-12);
            assert_abs_diff_eq!(
                two_mode_lower_nu(&g, 0).unwrap(),
                1.0 / e2t,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn two_mode_vacuum_nu_is_one() {
        let id = CovarianceMatrix::identity(2).unwrap();
        assert_eq!(two_mode_lower_nu(&id, 1).unwrap(), 1.0);
        assert!(two_mode_lower_nu(&CovarianceMatrix::identity(3).unwrap(), 0).is_err());
    }

    #[test]
    fn single_mode_eigenvalue_is_root_det() {
        let sq = CovarianceMatrix::from_row_slice(2, &[4.0, 0.0, 0.0, 0.25]).unwrap();
        assert_abs_diff_eq!(
            symplectic_eigenvalues(&sq).unwrap()[0],
            1.0,
            epsilon = 1e-15
        );
        let th = CovarianceMatrix::from_row_slice(2, &[3.0, 0.0, 0.0, 3.0]).unwrap();
        assert_abs_diff_eq!(
            symplectic_eigenvalues(&th).unwrap()[0],
            3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn eigenvalue_routes_agree() {
        let g = two_mode_squeezed(3.0);
        let a = symplectic_eigenvalues(&g).unwrap();
        let b = symplectic_eigenvalues_from_invariants(&g).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        #[rustfmt::skip]
        let three = CovarianceMatrix::from_row_slice(6, &[
            2.0, 0.3, 0.5, 0.0, 0.1, 0.0,
            0.3, 1.5, 0.0, -0.4, 0.0, 0.2,
            0.5, 0.0, 3.0, 0.1, 0.3, 0.0,
            0.0, -0.4, 0.1, 2.5, 0.0, 0.1,
            0.1, 0.0, 0.3, 0.0, 1.8, 0.2,
            0.0, 0.2, 0.0, 0.1, 0.2, 2.2,
        ]).unwrap();
        let a = symplectic_eigenvalues(&three).unwrap();
        let b = symplectic_eigenvalues_from_invariants(&three).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn repeated_unit_eigenvalues_are_exact() {
        #[rustfmt::skip]
        let g = CovarianceMatrix::from_row_slice(6, &[
            3.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 1.0 / 3.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 1.0 / 3.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 4.0,
        ]).unwrap();
        let s = symplectic_eigenvalues(&g).unwrap();
        assert_abs_diff_eq!(s[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(s[1], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(s[2], 2.0 / 3.0f64.sqrt(), epsilon = 1e-13);
        assert!(is_physical(&g, 1e-12).unwrap());
    }

    #[test]
    fn four_modes_are_supported_by_eigen_route() {
        let id = CovarianceMatrix::identity(4).unwrap();
        assert_eq!(symplectic_eigenvalues(&id).unwrap().len(), 4);
        assert!(symplectic_eigenvalues_from_invariants(&id).is_err());
        assert!(is_physical(&id, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn log_negativity_values() {
        assert_abs_diff_eq!(log_negativity(0.6589).unwrap(), 0.6019, epsilon = 1e-4);
        assert_eq!(log_negativity(1.0).unwrap(), 0.0);
        assert_eq!(log_negativity(2.5).unwrap(), 0.0);
        assert_abs_diff_eq!(log_negativity(1.0 / 3.0).unwrap(), 1.585, epsilon = 1e-3);
        assert!(log_negativity(0.0).is_err());
        assert!(log_negativity(-1.0).is_err());
        assert!(log_negativity(f64::NAN).is_err());
    }

    #[test]
    fn cubic_roots_known_polynomials() {
        // (λ-1)(λ-4)(λ-9)
        let r = cubic_real_roots(14.0, 49.0, 36.0).unwrap();
        for (got, want) in r.iter().zip([1.0, 4.0, 9.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        // double root (λ-1)²(λ-4)
        let r = cubic_real_roots(6.0, 9.0, 4.0).unwrap();
        assert_abs_diff_eq!(r[0], 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(r[1], 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(r[2], 4.0, epsilon = 1e-12);
        // widely spread (λ-1)(λ-1e6)(λ-1e12)
        let (a, b, c) = (1.0, 1e6, 1e12);
        let r = cubic_real_roots(a + b + c, a * b + a * c + b * c, a * b * c).unwrap();
        assert_abs_diff_eq!(r[0], 1.0, epsilon = 1e-10);
        // λ³ + λ has complex roots
        assert!(cubic_real_roots(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn verdict_classification() {
        let v =
            SeparabilityVerdict::classify("A-B".into(), 0.5, WitnessKind::LowestPtEigenvalue, 1e-9);
        assert_eq!(v.status, VerdictStatus::Entangled);
        assert!(v.is_entangled());
        let v = SeparabilityVerdict::classify(
            "A-B".into(),
            1.0 + 1e-12,
            WitnessKind::LowestPtEigenvalue,
            1e-9,
        );
        assert_eq!(v.status, VerdictStatus::Boundary);
        assert!(v.is_separable());
        let v =
            SeparabilityVerdict::classify("A-B".into(), 1.2, WitnessKind::LowestPtEigenvalue, 1e-9);
        assert_eq!(v.status, VerdictStatus::Separable);
        let v = SeparabilityVerdict::classify("C-(AB)".into(), 1.0, WitnessKind::Sigma, 1e-9);
        assert!(v.is_separable());
        let v = SeparabilityVerdict::classify("C-(AB)".into(), -0.3, WitnessKind::Sigma, 1e-9);
        assert!(v.is_entangled());
    }

    #[test]
    fn labels() {
        assert_eq!(bipartition_label(3, 0), "A-(BC)");
        assert_eq!(bipartition_label(3, 1), "B-(AC)");
        assert_eq!(bipartition_label(3, 2), "C-(AB)");
        assert_eq!(bipartition_label(2, 1), "A-B");
        assert_eq!(bipartition_label(2, 0), "A-B");
    }
}
