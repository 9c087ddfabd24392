mod common;

use cvdist::gaussianops::{
    add_classical_noise, apply_symplectic, balanced_beam_splitter, direct_sum, q_tilde,
    squeezed_vacuum_cm, vacuum_cm, NoiseModel, Orientation,
};
use cvdist::mcoracle::{
    compare_estimate, estimate_cm, sample_gaussian_state, simulate_improved_protocol_mc,
};
use cvdist::protocols::{
    bob_output_equivalence_check, omega3_closed, run_improved_protocol, run_recovery_protocol,
    tau3_closed, x_sep, GainMatrix, NoiseSetting, ProtocolParams,
};
use cvdist::symcore::{
    lowest_pt_eigenvalue, partial_transpose, ppt_verdict, symplectic_eigenvalues,
    symplectic_eigenvalues_from_invariants, symplectic_invariants, two_mode_lower_nu,
    SymplecticInvariants, DEFAULT_TOL,
};
use cvdist::{CovarianceMatrix, Squeezing};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn cm_from_seed(seed: u64, n_modes: usize) -> CovarianceMatrix {
    common::random_cm(&mut common::seeded(seed), n_modes, 1.0, 3.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(b.abs())
}

fn params(t: f64, x: f64) -> ProtocolParams {
    ProtocolParams::new(Squeezing::from_t(t).unwrap(), NoiseSetting::Fixed(x), 0.0).unwrap()
}

/// `t ∈ (0, 3]` and `x ≥ x_sep(t)`.
fn above_threshold() -> impl Strategy<Value = ProtocolParams> {
    (0.01f64..3.0, 1.0f64..4.0, 0.0f64..2.0).prop_map(|(t, f, extra)| {
        let sq = Squeezing::from_t(t).unwrap();
        params(t, x_sep(sq) * f + extra)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_transpose_is_symmetric_involution(seed: u64, mode in 0usize..3) {
        let g = cm_from_seed(seed, 3);
        let pt = partial_transpose(&g, mode).unwrap();
        prop_assert_eq!(pt.matrix(), &pt.matrix().transpose());
        prop_assert_eq!(&partial_transpose(&pt, mode).unwrap(), &g);
        prop_assert!(rel(pt.det(), g.det()) < 1e-12);
    }

    #[test]
    fn invariants_match_eigenvalue_symmetric_polynomials(seed: u64, mode in proptest::option::of(0usize..3)) {
        let g = cm_from_seed(seed, 3);
        let target = match mode {
            Some(m) => partial_transpose(&g, m).unwrap(),
            None => g.clone(),
        };
        let inv = symplectic_invariants(&g, mode).unwrap();
        let s = symplectic_eigenvalues(&target).unwrap();
        let rebuilt = SymplecticInvariants::from_eigenvalues(&[s[0], s[1], s[2]]);
        prop_assert!(rel(rebuilt.i1, inv.i1) < 1e-9);
        prop_assert!(rel(rebuilt.i2, inv.i2) < 1e-9);
        prop_assert!(rel(rebuilt.i3, inv.i3) < 1e-9);
        prop_assert!(rel(inv.i3, g.det()) < 1e-9);
    }

    #[test]
    fn eigenvalue_routes_agree(seed: u64, n in 1usize..=3) {
        let g = cm_from_seed(seed, n);
        let a = symplectic_eigenvalues(&g).unwrap();
        let b = symplectic_eigenvalues_from_invariants(&g).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(rel(*x, *y) < 1e-7, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn spectrum_is_symplectic_invariant(seed: u64, n in 1usize..=3) {
        let mut rng = common::seeded(seed);
        let g = common::random_cm(&mut rng, n, 0.8, 3.0);
        let s = common::random_symplectic(&mut rng, n, 0.8);
        let before = symplectic_eigenvalues(&g).unwrap();
        let after = symplectic_eigenvalues(&apply_symplectic(&g, &s).unwrap()).unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!(rel(*x, *y) < 1e-9);
        }
    }

    #[test]
    fn two_mode_closed_form_matches_general_routine(seed: u64, mode in 0usize..2) {
        let g = cm_from_seed(seed, 2);
        let closed = two_mode_lower_nu(&g, mode).unwrap();
        let general = lowest_pt_eigenvalue(&g, mode).unwrap();
        prop_assert!((closed - general).abs() < 1e-10);
    }

    #[test]
    fn product_states_are_ppt_separable(e1 in 1.0f64..50.0, e2 in 1.0f64..50.0, n1 in 1.0f64..3.0, mode in 0usize..3) {
        let a = squeezed_vacuum_cm(Squeezing::from_e2t(e1).unwrap(), Orientation::MomentumSqueezed, 0.0).unwrap();
        let c = squeezed_vacuum_cm(Squeezing::from_e2t(e2).unwrap(), Orientation::PositionSqueezed, 0.0).unwrap();
        let b = CovarianceMatrix::new(DMatrix::identity(2, 2) * n1).unwrap();
        let g = direct_sum(&[a, b, c]).unwrap();
        prop_assert!(ppt_verdict(&g, mode, DEFAULT_TOL).unwrap().is_separable());
    }

    #[test]
    fn classical_noise_never_lowers_symplectic_eigenvalues(seed: u64, x in 0.0f64..5.0) {
        let g = cm_from_seed(seed, 3);
        let noisy = add_classical_noise(&g, &q_tilde(x).unwrap()).unwrap();
        let before = symplectic_eigenvalues(&g).unwrap();
        let after = symplectic_eigenvalues(&noisy).unwrap();
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(*a >= *b - 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn random_psd_noise_never_lowers_symplectic_eigenvalues(seed: u64, k in 1usize..4) {
        let mut rng = common::seeded(seed);
        let g = common::random_cm(&mut rng, 2, 0.8, 2.0);
        let v = common::random_cm(&mut rng, 2, 0.5, 2.0);
        let base = v.matrix().columns(0, k).into_owned();
        let noise = NoiseModel::new(0.3, &base * base.transpose()).unwrap();
        let before = symplectic_eigenvalues(&g).unwrap();
        let after = symplectic_eigenvalues(&add_classical_noise(&g, &noise).unwrap()).unwrap();
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(*a >= *b - 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn balanced_beam_splitter_is_an_involution(n in 2usize..5, i in 0usize..4, j in 0usize..4) {
        prop_assume!(i < n && j < n && i != j);
        let s = balanced_beam_splitter(n, i, j).unwrap();
        prop_assert!(s.symplectic_residual() < 1e-12);
        let sq = s.matrix() * s.matrix();
        prop_assert!((sq - DMatrix::identity(2 * n, 2 * n)).amax() < 1e-15);
    }

    #[test]
    fn closed_forms_are_spectrum_branches(t in 0.0f64..4.0, x in 0.0f64..20.0) {
        let p = params(t, x);
        let g2 = run_improved_protocol(&p).unwrap().step_cm(2).clone();
        let e2t = p.squeezing.e2t();
        for (mode, closed) in [(2, tau3_closed(p.squeezing, x)), (0, omega3_closed(p.squeezing, x))] {
            let s = symplectic_eigenvalues(&partial_transpose(&g2, mode).unwrap()).unwrap();
            let tol = 1e-10 * 1f64.max(g2.scale());
            prop_assert!(s.iter().any(|v| (v - closed).abs() < tol), "{closed} not in {s:?}");
            prop_assert!((s[0] - closed.min(e2t)).abs() < tol);
        }
    }

    #[test]
    fn distribution_succeeds_above_threshold(p in above_threshold()) {
        let r = run_improved_protocol(&p).unwrap();
        prop_assert!(r.ppt(2, 1).is_separable());
        prop_assert!(r.ppt(2, 2).is_separable());
        prop_assert!(r.ppt(2, 0).is_entangled());
        prop_assert!(r.sigma(3, 2).is_separable());
        prop_assert!(r.entanglement.sigma > 0.0);
        prop_assert!(r.nu() < 1.0);
        prop_assert!(r.carrier_separable);
    }

    #[test]
    fn recovery_restores_input_and_beats_protocol(t in 0.01f64..5.0, x in 0.0f64..50.0) {
        let p = params(t, x);
        let rec = run_recovery_protocol(&p, &GainMatrix::identity()).unwrap();
        prop_assert!((rec.nu_ac - p.squeezing.e_minus_2t()).abs() < 1e-12 * 1f64.max(rec.cm.scale()));
        let prot = run_improved_protocol(&p).unwrap();
        prop_assert!(rec.log_negativity >= prot.log_negativity() - 1e-12);
    }

    #[test]
    fn bob_output_equivalence_holds(p in above_threshold()) {
        prop_assert!(bob_output_equivalence_check(&p).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sampling_round_trips_the_convention(seed: u64, n in 1usize..=2) {
        let g = cm_from_seed(seed, n);
        let est = estimate_cm(&sample_gaussian_state(&g, 40_000, seed).unwrap()).unwrap();
        let report = compare_estimate(&est, &g, 5.0).unwrap();
        prop_assert!(report.pass, "max z {}", report.max_z);
    }

    #[test]
    fn bob_output_variance_decomposes(t in 0.1f64..1.5, f in 1.0f64..2.0, seed: u64) {
        let sq = Squeezing::from_t(t).unwrap();
        let p = params(t, x_sep(sq) * f);
        let e = simulate_improved_protocol_mc(&p, 40_000, seed).unwrap();
        for q in 0..2 {
            let bob = e.gamma3.cm.get(2 + q, 2 + q);
            let rec = e.recovery.cm.get(2 + q, 2 + q);
            let se = e.gamma3.std_errors[(2 + q, 2 + q)] + 0.5 * e.recovery.std_errors[(2 + q, 2 + q)];
            prop_assert!((bob - (0.5 * rec + 0.5)).abs() < 5.0 * se);
        }
    }

    #[test]
    fn classical_noise_alone_never_fakes_entanglement(x in 0.0f64..10.0, seed: u64) {
        let p = ProtocolParams::new(Squeezing::none(), NoiseSetting::Fixed(x), 0.0).unwrap();
        let e = simulate_improved_protocol_mc(&p, 40_000, seed).unwrap();
        let se = e.gamma3.std_errors.view((0, 0), (4, 4)).amax();
        prop_assert!(e.nu_ab > 1.0 - 3.0 * se, "nu {} se {se}", e.nu_ab);
    }
}

#[test]
fn vacuum_product_is_physical_and_separable() {
    let g = vacuum_cm(3).unwrap();
    for m in 0..3 {
        assert!(ppt_verdict(&g, m, DEFAULT_TOL).unwrap().is_separable());
    }
}
