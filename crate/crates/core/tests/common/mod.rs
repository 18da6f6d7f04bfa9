#![allow(dead_code)]

use gausep::linalg::{expm, Mat, Vector};
use gausep::symplectic::omega;
use gausep::{CouplingSpec, CovarianceMatrix, ModeLayout, NoiseSpectrum, SystemModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Mat {
    let a = Mat::from_fn(n, n, |_, _| rng.gen_range(-scale..scale));
    (&a + a.transpose()) * 0.5
}

/// Positive definite with spectrum bounded below by `floor`.
pub fn pd(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> Mat {
    let a = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose() + Mat::identity(n, n) * floor
}

pub fn vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        if v.norm() > 0.2 {
            return v;
        }
    }
}

/// `e^{ΩH}` for a random symmetric `H`.
pub fn symplectic(rng: &mut ChaCha8Rng, modes: usize, scale: f64) -> Mat {
    let h = symmetric(rng, 2 * modes, scale);
    expm(&(omega(modes) * h))
}

/// `S diag(ν) Sᵀ` with `ν ∈ [½, ν_max]`.
pub fn physical(rng: &mut ChaCha8Rng, layout: ModeLayout, nu_max: f64) -> CovarianceMatrix {
    let s = symplectic(rng, layout.modes(), 0.6);
    let nu: Vec<f64> = (0..layout.modes())
        .flat_map(|_| {
            let x = rng.gen_range(0.5..nu_max);
            [x, x]
        })
        .collect();
    let d = Mat::from_diagonal(&Vector::from_vec(nu));
    CovarianceMatrix::new(layout, &s * d * s.transpose()).unwrap()
}

pub fn rank1(rng: &mut ChaCha8Rng, n_a: usize, n_b: usize, k: f64, s_a: f64, s_b: f64, s_ab: f64) -> SystemModel {
    SystemModel::new(
        ModeLayout::new(n_a, n_b).unwrap(),
        pd(rng, 2 * n_a, 0.3),
        pd(rng, 2 * n_b, 0.3),
        CouplingSpec::Rank1 {
            k_g: k,
            u_a: vector(rng, 2 * n_a),
            u_b: vector(rng, 2 * n_b),
        },
        NoiseSpectrum::ScalarWhite { s_a, s_b, s_ab },
    )
    .unwrap()
}

/// General coupling and full-rank matrix noise.
pub fn general(rng: &mut ChaCha8Rng, n_a: usize, n_b: usize, coupling: f64) -> SystemModel {
    SystemModel::new(
        ModeLayout::new(n_a, n_b).unwrap(),
        pd(rng, 2 * n_a, 0.3),
        pd(rng, 2 * n_b, 0.3),
        CouplingSpec::General {
            q_g: Mat::from_fn(2 * n_a, 2 * n_b, |_, _| rng.gen_range(-coupling..coupling)),
        },
        NoiseSpectrum::MatrixWhite {
            q_a: pd(rng, 2 * n_a, 0.1) * 0.3,
            q_b: pd(rng, 2 * n_b, 0.1) * 0.3,
        },
    )
    .unwrap()
}

pub fn max_abs(m: &Mat) -> f64 {
    gausep::linalg::max_abs(m)
}
