#![allow(dead_code)]

use cvdist::{CovarianceMatrix, SymplecticTransform};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn embed(n_modes: usize, op: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for &(i, j, v) in op {
        m[(i, j)] = v;
    }
    m
}

/// Product of random squeezers, phase rotations and beam splitters.
pub fn random_symplectic(
    rng: &mut impl Rng,
    n_modes: usize,
    max_squeeze: f64,
) -> SymplecticTransform {
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for _ in 0..4 * n_modes {
        let k = rng.random_range(0..n_modes);
        let (x, p) = (2 * k, 2 * k + 1);
        let op = match rng.random_range(0..3) {
            0 => {
                let r = rng.random_range(-max_squeeze..=max_squeeze);
                embed(n_modes, &[(x, x, (-r).exp()), (p, p, r.exp())])
            }
            1 => {
                let (sn, cs) = rng.random_range(0.0..std::f64::consts::TAU).sin_cos();
                embed(n_modes, &[(x, x, cs), (x, p, sn), (p, x, -sn), (p, p, cs)])
            }
            _ if n_modes > 1 => {
                let l = (k + rng.random_range(1..n_modes)) % n_modes;
                let (sn, cs) = rng.random_range(0.0..std::f64::consts::PI).sin_cos();
                let mut ops = Vec::new();
                for q in 0..2 {
                    let (a, b) = (2 * k + q, 2 * l + q);
                    ops.extend([(a, a, cs), (a, b, sn), (b, a, -sn), (b, b, cs)]);
                }
                embed(n_modes, &ops)
            }
            _ => DMatrix::identity(2 * n_modes, 2 * n_modes),
        };
        s = op * s;
    }
    SymplecticTransform::new(s).expect("products of symplectic maps are symplectic")
}

/// `S diag(ν_k 𝟙) Sᵀ` with thermal factors `ν_k ∈ [1, max_thermal]`.
pub fn random_cm(
    rng: &mut impl Rng,
    n_modes: usize,
    max_squeeze: f64,
    max_thermal: f64,
) -> CovarianceMatrix {
    let s = random_symplectic(rng, n_modes, max_squeeze);
    let mut d = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        let nu = rng.random_range(1.0..=max_thermal);
        d[(2 * k, 2 * k)] = nu;
        d[(2 * k + 1, 2 * k + 1)] = nu;
    }
    let m = s.matrix() * d * s.matrix().transpose();
    CovarianceMatrix::new((&m + m.transpose()) * 0.5).expect("symmetric by construction")
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
