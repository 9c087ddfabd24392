//! Gain-based recovery of the A-C entanglement.
//!
//! Instead of mixing C with a displaced vacuum, Bob displaces C directly by
//! `G ξ̄_B`, where `ξ̄_B` is the classical displacement that would have gone
//! to his vacuum mode. In the Heisenberg picture
//!
//! ```text
//! ξ_A'' = (ξ_A + ξ̄_A + ξ_C + ξ̄_C) / √2
//! ξ_C'' = (ξ_A + ξ̄_A - ξ_C - ξ̄_C) / √2 + G ξ̄_B
//! ```
//!
//! and `G = 𝟙` cancels the noise on C exactly.

use nalgebra::{DMatrix, Matrix2};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::f64::consts::FRAC_1_SQRT_2;

use super::improved::run_improved_protocol;
use super::ProtocolParams;
use crate::error::{Error, Result};
use crate::gaussianops::{
    apply_symplectic, balanced_beam_splitter, direct_sum, q_tilde, reduce_modes,
    squeezed_vacuum_cm, vacuum_cm, Orientation, Squeezing,
};
use crate::symcore::{
    log_negativity, ppt_verdict, two_mode_lower_nu, CovarianceMatrix, SeparabilityVerdict,
    DEFAULT_TOL,
};

/// Electronic feed-forward gain applied to the communicated displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainMatrix(pub Matrix2<f64>);

impl GainMatrix {
    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    pub fn zero() -> Self {
        Self(Matrix2::zeros())
    }

    pub fn from_row_major(v: [f64; 4]) -> Self {
        Self(Matrix2::new(v[0], v[1], v[2], v[3]))
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }
}

impl Serialize for GainMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_seq(Some(2))?;
        s.serialize_element(&[self.0[(0, 0)], self.0[(0, 1)]])?;
        s.serialize_element(&[self.0[(1, 0)], self.0[(1, 1)]])?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub params: ProtocolParams,
    pub gain: GainMatrix,
    /// CM of (A'', C'').
    pub cm: CovarianceMatrix,
    /// Lower symplectic eigenvalue of the CM transposed on C.
    pub nu_ac: f64,
    pub log_negativity: f64,
    /// `det γ`; equals one only for a pure state.
    pub purity_det: f64,
    pub verdict: SeparabilityVerdict,
}

/// Closed-form recovered CM without noise excess:
/// `A = a𝟙`, `Γ = σ_z(b𝟙 + 2xGᵀ)`, `C = a𝟙 + 4xGGᵀ - 2x(G + Gᵀ)`.
pub fn recovery_cm_closed(
    squeezing: Squeezing,
    x: f64,
    gain: &GainMatrix,
) -> Result<CovarianceMatrix> {
    let a = squeezing.cosh2t() + x;
    let b = squeezing.sinh2t() - x;
    let g = gain.matrix();
    let id = Matrix2::<f64>::identity();
    let sz = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let blk_a = id * a;
    let blk_g = sz * (id * b + g.transpose() * (2.0 * x));
    let blk_c = id * a + g * g.transpose() * (4.0 * x) - (g + g.transpose()) * (2.0 * x);
    let mut m = DMatrix::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(&blk_a);
    m.view_mut((0, 2), (2, 2)).copy_from(&blk_g);
    m.view_mut((2, 0), (2, 2)).copy_from(&blk_g.transpose());
    m.view_mut((2, 2), (2, 2)).copy_from(&blk_c);
    CovarianceMatrix::from_symmetrized(m)
}

/// Recovered CM from the linear quadrature map applied to the joint
/// covariance of the quantum inputs `(ξ_A, ξ_C)` and the classical
/// displacements `(ξ̄_A, ξ̄_B, ξ̄_C)`. Handles noise excess.
pub fn recovered_cm(params: &ProtocolParams, gain: &GainMatrix) -> Result<CovarianceMatrix> {
    let sq = params.squeezing;
    let quantum = direct_sum(&[
        squeezed_vacuum_cm(sq, Orientation::MomentumSqueezed, params.excess)?,
        squeezed_vacuum_cm(sq, Orientation::PositionSqueezed, params.excess)?,
    ])?;
    let classical = q_tilde(params.x())?.effective();

    // Input order: ξ_A, ξ_C (quantum, 4) then ξ̄_A, ξ̄_B, ξ̄_C (classical, 6).
    let mut cov = DMatrix::zeros(10, 10);
    cov.view_mut((0, 0), (4, 4)).copy_from(quantum.matrix());
    cov.view_mut((4, 4), (6, 6)).copy_from(&classical);

    let h = FRAC_1_SQRT_2;
    let g = gain.matrix();
    let mut map = DMatrix::zeros(4, 10);
    for q in 0..2 {
        // A''
        map[(q, q)] = h;
        map[(q, 2 + q)] = h;
        map[(q, 4 + q)] = h;
        map[(q, 8 + q)] = h;
        // C''
        map[(2 + q, q)] = h;
        map[(2 + q, 2 + q)] = -h;
        map[(2 + q, 4 + q)] = h;
        map[(2 + q, 8 + q)] = -h;
        for r in 0..2 {
            map[(2 + q, 6 + r)] = g[(q, r)];
        }
    }
    CovarianceMatrix::from_symmetrized(&map * cov * map.transpose())
}

/// Recovered two-mode state for the given gain, with its entanglement and
/// purity. Without excess the quadrature-map result is checked against the
/// closed form.
pub fn run_recovery_protocol(params: &ProtocolParams, gain: &GainMatrix) -> Result<RecoveryReport> {
    let cm = recovered_cm(params, gain)?;
    if params.excess == 0.0 {
        let closed = recovery_cm_closed(params.squeezing, params.x(), gain)?;
        let dev = cm.max_abs_diff(&closed);
        if dev > 1e-10 * 1f64.max(closed.scale()) {
            return Err(Error::ConsistencyFailure(format!(
                "recovered CM deviates from closed form by {dev:e}"
            )));
        }
    }
    let nu_ac = two_mode_lower_nu(&cm, 1)?;
    let verdict = ppt_verdict(&cm, 1, DEFAULT_TOL)?.with_label("A-C");
    let log_neg = if verdict.is_entangled() {
        log_negativity(nu_ac)?
    } else {
        0.0
    };
    Ok(RecoveryReport {
        params: *params,
        gain: *gain,
        purity_det: cm.det(),
        cm,
        nu_ac,
        log_negativity: log_neg,
        verdict,
    })
}

/// Checks that Bob's output mode in the three-step protocol equals the
/// optimally recovered mode C'' mixed with a vacuum on a balanced beam
/// splitter.
///
/// Route 1 is the full protocol's `γ_{3,AB}`. Route 2 takes the `G = 𝟙`
/// recovered CM, appends a vacuum mode, mixes C'' with it and keeps
/// (A, first output). Returns `Ok(true)` when the two agree entrywise to
/// `1e-10` (relative to the CM scale) and a consistency failure otherwise.
pub fn bob_output_equivalence_check(params: &ProtocolParams) -> Result<bool> {
    let direct = run_improved_protocol(params)?.reduced_ab;

    let recovered = recovered_cm(params, &GainMatrix::identity())?;
    let with_vacuum = direct_sum(&[recovered, vacuum_cm(1)?])?;
    let mixed = apply_symplectic(&with_vacuum, &balanced_beam_splitter(3, 1, 2)?)?;
    let via_recovery = reduce_modes(&mixed, &[0, 1])?;

    let dev = direct.max_abs_diff(&via_recovery);
    if dev > 1e-10 * 1f64.max(direct.scale()) {
        return Err(Error::ConsistencyFailure(format!(
            "Bob's output CM and the recovered-then-mixed CM differ by {dev:e}"
        )));
    }
    Ok(true)
}
