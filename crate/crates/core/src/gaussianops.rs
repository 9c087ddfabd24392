//! Gaussian states, balanced beam splitters and correlated classical noise.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{invalid, Result};
use crate::symcore::{mode, omega_matrix, CovarianceMatrix};

/// Squeezing strength, stored as `e^{2t}`. Settings such as `e^{2t} = 2` are
/// represented exactly and large values never pass through `cosh`/`sinh`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Squeezing {
    e2t: f64,
}

impl Squeezing {
    pub fn from_e2t(e2t: f64) -> Result<Self> {
        if !e2t.is_finite() || e2t < 1.0 {
            return invalid(format!("e^(2t) must be finite and at least 1, got {e2t}"));
        }
        Ok(Self { e2t })
    }

    /// From the squeezing parameter `t ≥ 0`.
    pub fn from_t(t: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return invalid(format!(
                "squeezing parameter must be finite and non-negative, got {t}"
            ));
        }
        Self::from_e2t((2.0 * t).exp())
    }

    /// From squeezing in decibels, `e^{2t} = 10^{dB/10}`.
    pub fn from_db(db: f64) -> Result<Self> {
        if !db.is_finite() || db < 0.0 {
            return invalid(format!(
                "squeezing in dB must be finite and non-negative, got {db}"
            ));
        }
        Self::from_e2t(10f64.powf(db / 10.0))
    }

    pub fn none() -> Self {
        Self { e2t: 1.0 }
    }

    pub fn e2t(&self) -> f64 {
        self.e2t
    }

    pub fn e_minus_2t(&self) -> f64 {
        1.0 / self.e2t
    }

    pub fn t(&self) -> f64 {
        self.e2t.ln() / 2.0
    }

    pub fn db(&self) -> f64 {
        10.0 * self.e2t.log10()
    }

    pub fn cosh2t(&self) -> f64 {
        (self.e2t + 1.0 / self.e2t) / 2.0
    }

    pub fn sinh2t(&self) -> f64 {
        (self.e2t - 1.0 / self.e2t) / 2.0
    }
}

/// Which quadrature of a single-mode squeezed vacuum is squeezed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `diag(e^{2t}, e^{-2t})`
    MomentumSqueezed,
    /// `diag(e^{-2t}, e^{2t})`
    PositionSqueezed,
}

/// Real `2n × 2n` matrix with `SΩSᵀ = Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    n_modes: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticTransform {
    /// Validates `SΩSᵀ = Ω` to `1e-12` (relative to `‖S‖²`).
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return invalid(format!(
                "symplectic matrix must be square with even size, got {r}x{c}"
            ));
        }
        let s = Self {
            n_modes: r / 2,
            matrix,
        };
        let tol = 1e-12 * 1f64.max(s.matrix.amax().powi(2));
        let residual = s.symplectic_residual();
        if residual > tol {
            return invalid(format!(
                "matrix is not symplectic, ‖SΩSᵀ - Ω‖_max = {residual:e}"
            ));
        }
        Ok(s)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `‖SΩSᵀ - Ω‖_max`.
    pub fn symplectic_residual(&self) -> f64 {
        let w = omega_matrix(self.n_modes);
        (&self.matrix * &w * self.matrix.transpose() - w).amax()
    }

    /// Composition `self · other` (apply `other` first).
    pub fn then_after(&self, other: &SymplecticTransform) -> Result<Self> {
        if self.n_modes != other.n_modes {
            return invalid("cannot compose transforms on different mode counts");
        }
        Self::new(&self.matrix * &other.matrix)
    }
}

/// Positive-semidefinite classical correlation matrix scaled by a strength.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    strength: f64,
    base: DMatrix<f64>,
}

impl NoiseModel {
    pub fn new(strength: f64, base: DMatrix<f64>) -> Result<Self> {
        if !strength.is_finite() || strength < 0.0 {
            return invalid(format!(
                "noise strength must be finite and non-negative, got {strength}"
            ));
        }
        let (r, c) = base.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return invalid(format!(
                "noise matrix must be square with even size, got {r}x{c}"
            ));
        }
        if (&base - base.transpose()).amax() > 1e-12 * 1f64.max(base.amax()) {
            return invalid("noise matrix is not symmetric");
        }
        let min_eig = min_eigenvalue(&base);
        if min_eig < -1e-10 * 1f64.max(base.amax()) {
            return invalid(format!(
                "noise matrix is not positive semidefinite (λ_min = {min_eig:e})"
            ));
        }
        Ok(Self { strength, base })
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn base(&self) -> &DMatrix<f64> {
        &self.base
    }

    /// `x · base`.
    pub fn effective(&self) -> DMatrix<f64> {
        &self.base * self.strength
    }

    pub fn n_modes(&self) -> usize {
        self.base.nrows() / 2
    }
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

pub fn vacuum_cm(n_modes: usize) -> Result<CovarianceMatrix> {
    CovarianceMatrix::identity(n_modes)
}

/// Single-mode squeezed vacuum. `excess` is added to the antisqueezed
/// variance only.
pub fn squeezed_vacuum_cm(
    squeezing: Squeezing,
    orientation: Orientation,
    excess: f64,
) -> Result<CovarianceMatrix> {
    if !excess.is_finite() || excess < 0.0 {
        return invalid(format!(
            "noise excess must be finite and non-negative, got {excess}"
        ));
    }
    let (hi, lo) = (squeezing.e2t() + excess, squeezing.e_minus_2t());
    let (vx, vp) = match orientation {
        Orientation::MomentumSqueezed => (hi, lo),
        Orientation::PositionSqueezed => (lo, hi),
    };
    CovarianceMatrix::from_row_slice(2, &[vx, 0.0, 0.0, vp])
}

/// Two-mode squeezed vacuum: `cosh(2t)𝟙` diagonal blocks, `sinh(2t)σ_z`
/// off-diagonal blocks.
pub fn two_mode_squeezed_cm(squeezing: Squeezing) -> Result<CovarianceMatrix> {
    let (c, s) = (squeezing.cosh2t(), squeezing.sinh2t());
    #[rustfmt::skip]
    let data = [
        c, 0.0, s, 0.0,
        0.0, c, 0.0, -s,
        s, 0.0, c, 0.0,
        0.0, -s, 0.0, c,
    ];
    CovarianceMatrix::from_row_slice(4, &data)
}

/// Block-diagonal CM of independent subsystems, in the given order.
pub fn direct_sum(parts: &[CovarianceMatrix]) -> Result<CovarianceMatrix> {
    if parts.is_empty() {
        return invalid("direct sum of no covariance matrices");
    }
    let dim: usize = parts.iter().map(|p| p.dim()).sum();
    let mut m = DMatrix::zeros(dim, dim);
    let mut offset = 0;
    for p in parts {
        m.view_mut((offset, offset), (p.dim(), p.dim()))
            .copy_from(p.matrix());
        offset += p.dim();
    }
    CovarianceMatrix::new(m)
}

/// Balanced beam splitter on modes `(i, j)`: `ξ_i → (ξ_i + ξ_j)/√2`,
/// `ξ_j → (ξ_i - ξ_j)/√2`, identity elsewhere. Orthogonal, symmetric and
/// self-inverse.
pub fn balanced_beam_splitter(
    n_modes: usize,
    mode_i: usize,
    mode_j: usize,
) -> Result<SymplecticTransform> {
    if mode_i == mode_j {
        return invalid("beam splitter needs two distinct modes");
    }
    if mode_i >= n_modes || mode_j >= n_modes {
        return invalid(format!(
            "beam splitter modes ({mode_i}, {mode_j}) out of range for {n_modes} modes"
        ));
    }
    let mut u = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let h = FRAC_1_SQRT_2;
    for q in 0..2 {
        let (a, b) = (2 * mode_i + q, 2 * mode_j + q);
        u[(a, a)] = h;
        u[(a, b)] = h;
        u[(b, a)] = h;
        u[(b, b)] = -h;
    }
    SymplecticTransform::new(u)
}

/// `S γ Sᵀ`.
pub fn apply_symplectic(
    cm: &CovarianceMatrix,
    s: &SymplecticTransform,
) -> Result<CovarianceMatrix> {
    if cm.dim() != s.matrix().nrows() {
        return invalid(format!(
            "transform acts on {} modes but the state has {}",
            s.n_modes(),
            cm.n_modes()
        ));
    }
    CovarianceMatrix::from_symmetrized(s.matrix() * cm.matrix() * s.matrix().transpose())
}

/// Noise vector extending the real part of the PT eigenvector to mode B.
pub const NOISE_Q1: [f64; 6] = [0.0, -1.0, 0.0, 2.0, 0.0, -1.0];
/// Noise vector extending the imaginary part of the PT eigenvector to mode B.
pub const NOISE_Q2: [f64; 6] = [1.0, 0.0, 2.0, 0.0, -1.0, 0.0];

/// `P = q₁q₁ᵀ + q₂q₂ᵀ`, the rank-2 noise added on top of `γ_ABC`.
pub fn noise_matrix_p() -> DMatrix<f64> {
    let q1 = DMatrix::from_column_slice(6, 1, &NOISE_Q1);
    let q2 = DMatrix::from_column_slice(6, 1, &NOISE_Q2);
    &q1 * q1.transpose() + &q2 * q2.transpose()
}

/// Displacement correlations of the fully separable input,
/// `Q̃ = x U_ACᵀ P U_AC`, written out in closed block form.
pub fn q_tilde(x: f64) -> Result<NoiseModel> {
    let r = std::f64::consts::SQRT_2;
    // blocks: 𝟙-σ_z = diag(0,2), σ_z-𝟙 = diag(0,-2), σ_z+𝟙 = diag(2,0)
    #[rustfmt::skip]
    let base = DMatrix::from_row_slice(6, 6, &[
        0.0, 0.0,      0.0, 0.0,      0.0, 0.0,
        0.0, 2.0,      0.0, -2.0 * r, 0.0, 0.0,
        0.0, 0.0,      4.0, 0.0,      2.0 * r, 0.0,
        0.0, -2.0 * r, 0.0, 4.0,      0.0, 0.0,
        0.0, 0.0,      2.0 * r, 0.0,  2.0, 0.0,
        0.0, 0.0,      0.0, 0.0,      0.0, 0.0,
    ]);
    NoiseModel::new(x, base)
}

/// `γ + x · base`.
pub fn add_classical_noise(cm: &CovarianceMatrix, noise: &NoiseModel) -> Result<CovarianceMatrix> {
    if noise.base().nrows() != cm.dim() {
        return invalid(format!(
            "noise acts on {} modes but the state has {}",
            noise.n_modes(),
            cm.n_modes()
        ));
    }
    CovarianceMatrix::from_symmetrized(cm.matrix() + noise.effective())
}

/// Principal submatrix on the kept modes, in the given order.
pub fn reduce_modes(cm: &CovarianceMatrix, kept: &[usize]) -> Result<CovarianceMatrix> {
    if kept.is_empty() {
        return invalid("cannot reduce to an empty set of modes");
    }
    for (k, &m) in kept.iter().enumerate() {
        if m >= cm.n_modes() {
            return invalid(format!("mode {m} out of range for {} modes", cm.n_modes()));
        }
        if kept[..k].contains(&m) {
            return invalid(format!("mode {m} listed twice"));
        }
    }
    let idx: Vec<usize> = kept.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    CovarianceMatrix::new(cm.matrix().select_rows(&idx).select_columns(&idx))
}

/// `U_AC` on the three-mode register.
pub fn beam_splitter_ac() -> SymplecticTransform {
    balanced_beam_splitter(3, mode::A, mode::C).expect("fixed valid modes")
}

/// `U_BC` on the three-mode register.
pub fn beam_splitter_bc() -> SymplecticTransform {
    balanced_beam_splitter(3, mode::B, mode::C).expect("fixed valid modes")
}
