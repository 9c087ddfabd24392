//! Gaussian continuous-variable entanglement distribution by separable states.
//!
//! The crate works entirely in the covariance-matrix (CM) picture, with the
//! vacuum normalized to the identity and the quadrature ordering
//! `(x_A, p_A, x_B, p_B, x_C, p_C)`.
//!
//! - [`symcore`]: symplectic form, partial transposition, symplectic eigenvalues
//!   and invariants, PPT and Σ separability verdicts, logarithmic negativity.
//! - [`gaussianops`]: squeezed and vacuum states, balanced beam splitters and the
//!   correlated classical noise that makes the carrier mode separable.
//! - [`protocols`]: the three-step distribution protocol, the gain-based
//!   recovery scheme, closed-form thresholds and squeezing sweeps.
//! - [`mcoracle`]: a shot-by-shot phase-space Monte Carlo that re-derives the
//!   analytic CMs from sampled quadratures.
//!
//! Sweeps and Monte Carlo batches run on rayon when the `parallel` feature is
//! enabled (the default) and sequentially otherwise. Both paths produce
//! bit-identical results.

pub mod error;
pub mod gaussianops;
pub mod mcoracle;
pub mod par;
pub mod protocols;
pub mod symcore;

pub use error::{Error, Result};
pub use gaussianops::{
    balanced_beam_splitter, NoiseModel, Orientation, Squeezing, SymplecticTransform,
};
pub use mcoracle::{
    compare_estimate, sample_gaussian_state, simulate_improved_protocol_mc, validate_protocol,
    EnsembleEstimate,
};
pub use protocols::{
    run_improved_protocol, run_recovery_protocol, GainMatrix, NoiseSetting, ProtocolParams,
    ProtocolReport, RecoveryReport,
};
pub use symcore::{CovarianceMatrix, SeparabilityVerdict, VerdictStatus};
