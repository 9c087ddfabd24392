//! End-to-end protocol pipelines and their closed-form checkpoints.
//!
//! Parameters are the squeezing `e^{2t}`, the classical noise strength `x`
//! (or `auto`, meaning the separability threshold `x_sep = (e^{2t} - 1)/2`)
//! and an optional noise excess on the antisqueezed input quadratures.

mod improved;
mod recovery;
mod sweep;

pub use improved::{
    run_improved_protocol, ConstructionCertificate, Entanglement, ProtocolReport, StepRecord,
    StepVerdict,
};
pub use recovery::{
    bob_output_equivalence_check, recovered_cm, recovery_cm_closed, run_recovery_protocol,
    GainMatrix, RecoveryReport,
};
pub use sweep::{geometric_grid, sweep, SweepRow, SweepTable};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::gaussianops::Squeezing;
use crate::symcore::CovarianceMatrix;

/// Limit of the distributed lower PT eigenvalue for infinite squeezing at `x = x_sep`.
pub const ASYMPTOTIC_NU: f64 = 1.0 / 3.0;

/// Best lower PT eigenvalue reported for the earlier rotated-squeezing
/// protocol. Kept for comparison only; that protocol is not implemented here.
pub const ORIGINAL_PROTOCOL_NU: f64 = 0.9299;
/// Logarithmic negativity matching [`ORIGINAL_PROTOCOL_NU`].
pub const ORIGINAL_PROTOCOL_LOG_NEGATIVITY: f64 = 0.1048;

/// Classical noise strength: explicit, or the C-(AB) separability threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSetting {
    Auto,
    Fixed(f64),
}

impl NoiseSetting {
    pub fn resolve(&self, squeezing: Squeezing) -> f64 {
        match *self {
            NoiseSetting::Auto => x_sep(squeezing),
            NoiseSetting::Fixed(x) => x,
        }
    }
}

impl fmt::Display for NoiseSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseSetting::Auto => write!(f, "auto"),
            NoiseSetting::Fixed(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for NoiseSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(NoiseSetting::Auto);
        }
        match s.trim().parse::<f64>() {
            Ok(x) if x.is_finite() && x >= 0.0 => Ok(NoiseSetting::Fixed(x)),
            _ => invalid(format!(
                "noise strength must be 'auto' or a non-negative number, got '{s}'"
            )),
        }
    }
}

impl Serialize for NoiseSetting {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NoiseSetting::Auto => serializer.serialize_str("auto"),
            NoiseSetting::Fixed(x) => serializer.serialize_f64(*x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub squeezing: Squeezing,
    pub noise: NoiseSetting,
    /// Extra variance on the antisqueezed quadratures of modes A and C.
    pub excess: f64,
}

impl ProtocolParams {
    pub fn new(squeezing: Squeezing, noise: NoiseSetting, excess: f64) -> Result<Self> {
        if let NoiseSetting::Fixed(x) = noise {
            if !x.is_finite() || x < 0.0 {
                return invalid(format!(
                    "noise strength must be finite and non-negative, got {x}"
                ));
            }
        }
        if !excess.is_finite() || excess < 0.0 {
            return invalid(format!(
                "noise excess must be finite and non-negative, got {excess}"
            ));
        }
        Ok(Self {
            squeezing,
            noise,
            excess,
        })
    }

    /// Operating point `x = x_sep`, no excess.
    pub fn at_threshold(squeezing: Squeezing) -> Self {
        Self {
            squeezing,
            noise: NoiseSetting::Auto,
            excess: 0.0,
        }
    }

    /// Resolved noise strength.
    pub fn x(&self) -> f64 {
        self.noise.resolve(self.squeezing)
    }

    pub fn x_sep(&self) -> f64 {
        x_sep(self.squeezing)
    }

    /// `a = cosh(2t) + x`
    pub fn a(&self) -> f64 {
        self.squeezing.cosh2t() + self.x()
    }

    /// `b = sinh(2t) - x`
    pub fn b(&self) -> f64 {
        self.squeezing.sinh2t() - self.x()
    }
}

impl Serialize for ProtocolParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ProtocolParams", 7)?;
        s.serialize_field("e2t", &self.squeezing.e2t())?;
        s.serialize_field("t", &self.squeezing.t())?;
        s.serialize_field("squeezing_db", &self.squeezing.db())?;
        s.serialize_field("x_setting", &self.noise)?;
        s.serialize_field("x", &self.x())?;
        s.serialize_field("x_sep", &self.x_sep())?;
        s.serialize_field("excess", &self.excess)?;
        s.end()
    }
}

/// Noise threshold above which mode C is separable from (AB) after the
/// first beam splitter: `(e^{2t} - 1) / 2`.
pub fn x_sep(squeezing: Squeezing) -> f64 {
    (squeezing.e2t() - 1.0) / 2.0
}

/// `(S, D, N)` with `S = 1 + 6x + e^{-2t}`, `D = 1 + 2x - e^{-2t}` and
/// `N = 2(2x + e^{-2t} + 4x e^{-2t})`.
fn closed_form_terms(squeezing: Squeezing, x: f64) -> (f64, f64, f64) {
    let em = squeezing.e_minus_2t();
    (
        1.0 + 6.0 * x + em,
        1.0 + 2.0 * x - em,
        2.0 * (2.0 * x + em + 4.0 * x * em),
    )
}

/// Closed form of the lowest symplectic eigenvalue of `γ₂^{(T_C)}`,
/// `(√(S² - 32x²) - D) / 2`, evaluated as `N / (√(S² - 32x²) + D)`.
pub fn tau3_closed(squeezing: Squeezing, x: f64) -> f64 {
    let (s, d, n) = closed_form_terms(squeezing, x);
    let r = 32f64.sqrt() * x;
    n / (((s - r) * (s + r)).sqrt() + d)
}

/// Closed form of the lowest symplectic eigenvalue of `γ₂^{(T_A)}`,
/// `(S - √(D² + 32x²)) / 2`, evaluated as `N / (S + √(D² + 32x²))`.
pub fn omega3_closed(squeezing: Squeezing, x: f64) -> f64 {
    let (s, d, n) = closed_form_terms(squeezing, x);
    n / (s + (d * d + 32.0 * x * x).sqrt())
}

/// Three-mode CM built from diagonal `2 × 2` blocks, given as
/// `(xx, pp)` pairs for the upper triangle.
fn diagonal_block_cm(blocks: [[(f64, f64); 3]; 3]) -> Result<CovarianceMatrix> {
    let mut data = [0.0; 36];
    for i in 0..3 {
        for j in 0..3 {
            let (xx, pp) = if i <= j { blocks[i][j] } else { blocks[j][i] };
            data[(2 * i) * 6 + 2 * j] = xx;
            data[(2 * i + 1) * 6 + 2 * j + 1] = pp;
        }
    }
    CovarianceMatrix::from_row_slice(6, &data)
}

/// `γ_ABC`: two-mode squeezed vacuum on (A, C) and vacuum on B.
pub fn gamma_abc(squeezing: Squeezing) -> Result<CovarianceMatrix> {
    let (c, s) = (squeezing.cosh2t(), squeezing.sinh2t());
    diagonal_block_cm([
        [(c, c), (0.0, 0.0), (s, -s)],
        [(0.0, 0.0), (1.0, 1.0), (0.0, 0.0)],
        [(0.0, 0.0), (0.0, 0.0), (c, c)],
    ])
}

/// Explicit step-2 CM `γ₂ = γ_ABC + xP`.
pub fn gamma2_closed(squeezing: Squeezing, x: f64) -> Result<CovarianceMatrix> {
    let a = squeezing.cosh2t() + x;
    let b = squeezing.sinh2t() - x;
    diagonal_block_cm([
        [(a, a), (2.0 * x, -2.0 * x), (b, -b)],
        [
            (0.0, 0.0),
            (1.0 + 4.0 * x, 1.0 + 4.0 * x),
            (-2.0 * x, -2.0 * x),
        ],
        [(0.0, 0.0), (0.0, 0.0), (a, a)],
    ])
}

/// Explicit step-3 CM `γ₃ = U_BC γ₂ U_BCᵀ`.
pub fn gamma3_closed(squeezing: Squeezing, x: f64) -> Result<CovarianceMatrix> {
    let a = squeezing.cosh2t() + x;
    let b = squeezing.sinh2t() - x;
    let r = std::f64::consts::SQRT_2;
    let ab = (2.0 * x + b) / r;
    let ac = (2.0 * x - b) / r;
    let bb = (1.0 + a) / 2.0;
    let bc = (1.0 + 4.0 * x - a) / 2.0;
    let cc = (1.0 + 8.0 * x + a) / 2.0;
    diagonal_block_cm([
        [(a, a), (ab, -ab), (ac, -ac)],
        [(0.0, 0.0), (bb, bb), (bc, bc)],
        [(0.0, 0.0), (0.0, 0.0), (cc, cc)],
    ])
}
