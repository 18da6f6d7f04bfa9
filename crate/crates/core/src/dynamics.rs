//! Covariance evolution: exact Lyapunov propagation and the first-order expansion in the
//! doubly rotated frame.

use crate::error::{dim_mismatch, Error, Result};
use crate::generator::{build_generator, GkslGenerator};
use crate::linalg::{self, Mat, Vector};
use crate::model::{CouplingSpec, SystemModel};
use crate::symplectic::{omega, williamson, CovarianceMatrix};

/// Largest admissible `rate · t` for the first-order expansion.
pub const PERTURBATIVE_LIMIT: f64 = 0.1;
/// Default tolerance on the normalized cross-component of a rotated coupling vector.
pub const TOL_PARALLEL: f64 = 1e-8;

/// `Φ(t) = e^{At}` and `∫₀ᵗ Φ(u) D Φᵀ(u) du`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorSolution {
    pub phi: Mat,
    pub accumulated_noise: Mat,
}

impl PropagatorSolution {
    /// `Φ V₀ Φᵀ + ∫ Φ D Φᵀ`.
    pub fn apply(&self, v0: &Mat) -> Mat {
        linalg::symmetrize(&(&self.phi * v0 * self.phi.transpose() + &self.accumulated_noise))
    }
}

pub fn propagator_solution(gen: &GkslGenerator, t: f64) -> PropagatorSolution {
    let (phi, accumulated_noise) = linalg::lyapunov_propagator(&gen.drift, &gen.diffusion, t);
    PropagatorSolution {
        phi,
        accumulated_noise,
    }
}

fn check_input(gen: &GkslGenerator, v0: &CovarianceMatrix, t: f64) -> Result<()> {
    if v0.layout != gen.layout {
        return Err(dim_mismatch(
            format!("{:?}", gen.layout),
            format!("{:?}", v0.layout),
        ));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidModel(format!("evolution time must be finite and ≥ 0, got {t}")));
    }
    if !linalg::is_finite(&v0.matrix) {
        return Err(Error::NonFinite("initial covariance"));
    }
    Ok(())
}

/// Evolves `V₀` for time `t` in `steps` equal chunks of one exact propagator.
pub fn evolve(gen: &GkslGenerator, v0: &CovarianceMatrix, t: f64, steps: usize) -> Result<CovarianceMatrix> {
    Ok(evolve_series(gen, v0, t, steps)?.pop().expect("non-empty series"))
}

/// `V(k·t/steps)` for `k = 0..=steps`.
pub fn evolve_series(
    gen: &GkslGenerator,
    v0: &CovarianceMatrix,
    t: f64,
    steps: usize,
) -> Result<Vec<CovarianceMatrix>> {
    check_input(gen, v0, t)?;
    let steps = steps.max(1);
    let (e, w) = linalg::lyapunov_propagator(&gen.drift, &gen.diffusion, t / steps as f64);
    let et = e.transpose();
    let mut v = v0.matrix.clone();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(v0.clone());
    for _ in 0..steps {
        v = linalg::symmetrize(&(&e * &v * &et + &w));
        if !linalg::is_finite(&v) {
            return Err(Error::NonFinite("evolved covariance"));
        }
        out.push(CovarianceMatrix {
            layout: v0.layout,
            matrix: v.clone(),
        });
    }
    Ok(out)
}

/// Evolves `V₀` under the generator of `model`.
pub fn evolve_model(model: &SystemModel, v0: &CovarianceMatrix, t: f64, steps: usize) -> Result<CovarianceMatrix> {
    evolve(&build_generator(model)?, v0, t, steps)
}

/// Local symplectic frame of a pure product state.
///
/// `S = S_A ⊕ S_B` brings `V₀` to `½I`, and `M′ = S M S⁻¹` is the local drift seen from it.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedFrame {
    pub s: Mat,
    pub s_inv: Mat,
    pub m_rot: Mat,
}

impl RotatedFrame {
    pub fn new(model: &SystemModel, v0: &CovarianceMatrix) -> Result<Self> {
        if v0.layout != model.layout {
            return Err(dim_mismatch(
                format!("{:?}", model.layout),
                format!("{:?}", v0.layout),
            ));
        }
        let scale = linalg::max_abs(&v0.matrix).max(1.0);
        let cross = linalg::max_abs(&v0.block_ab());
        if cross > 1e-10 * scale {
            return Err(Error::NotProduct(cross));
        }
        let wa = williamson(&v0.block_a())?;
        let wb = williamson(&v0.block_b())?;
        for nu in wa.nu.iter().chain(&wb.nu) {
            if (nu - 0.5).abs() > 1e-8 * scale {
                return Err(Error::NotPure(*nu));
            }
        }
        let s = linalg::direct_sum(&wa.s, &wb.s);
        // Symplectic inverse: S⁻¹ = −Ω Sᵀ Ω.
        let om = omega(model.layout.modes());
        let s_inv = -(&om * s.transpose() * &om);
        let local = &om * model.local_hamiltonian();
        let m_rot = &s * local * &s_inv;
        Ok(Self { s, s_inv, m_rot })
    }

    /// `T(t) = e^{−M′t} S`, mapping lab covariances to the rotated frame.
    pub fn transform(&self, t: f64) -> Mat {
        linalg::expm(&(-&self.m_rot * t)) * &self.s
    }

    /// `T(t)⁻¹ = S⁻¹ e^{M′t}`.
    pub fn inverse_transform(&self, t: f64) -> Mat {
        &self.s_inv * linalg::expm(&(&self.m_rot * t))
    }
}

/// First-order covariance in the rotated frame together with the frame that defines it.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbativeSolution {
    /// `Ṽ(t) = ½I + ½(J + Jᵀ) + ∫₀ᵗ e^{−M′s} F̃ e^{−M′ᵀs} ds`.
    pub rotated: CovarianceMatrix,
    pub frame: RotatedFrame,
    pub t: f64,
    /// Coupling part `½(J + Jᵀ)` alone.
    pub coupling_term: Mat,
    /// Noise part alone.
    pub thermal_term: Mat,
}

impl PerturbativeSolution {
    /// `T⁻¹ Ṽ T⁻ᵀ`.
    pub fn lab(&self) -> CovarianceMatrix {
        let ti = self.frame.inverse_transform(self.t);
        CovarianceMatrix {
            layout: self.rotated.layout,
            matrix: linalg::symmetrize(&(&ti * &self.rotated.matrix * ti.transpose())),
        }
    }
}

pub(crate) fn regime_guard(model: &SystemModel, t: f64) -> Result<()> {
    let (k, sa, sb) = model.rates();
    for (quantity, rate) in [("K_g·t", k), ("S_A·t", sa), ("S_B·t", sb)] {
        let value = rate * t;
        if !(value <= PERTURBATIVE_LIMIT) {
            return Err(Error::OutOfRegime {
                quantity,
                value,
                limit: PERTURBATIVE_LIMIT,
            });
        }
    }
    Ok(())
}

/// First-order expansion in the coupling and noise rates around the free local motion.
pub fn perturbative_v(model: &SystemModel, v0: &CovarianceMatrix, t: f64) -> Result<PerturbativeSolution> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidModel(format!("evolution time must be finite and ≥ 0, got {t}")));
    }
    model.validate()?;
    regime_guard(model, t)?;
    let frame = RotatedFrame::new(model, v0)?;
    let gen = build_generator(model)?;
    let om = omega(model.layout.modes());
    let local_drift = &om * model.local_hamiltonian();
    let coupling_drift = &gen.drift - local_drift;

    let c_rot = &frame.s * coupling_drift * &frame.s_inv;
    let f_rot = &frame.s * &gen.diffusion * frame.s.transpose();
    let neg = -&frame.m_rot;
    let j = linalg::sandwich_integral(&neg, &c_rot, &frame.m_rot, t);
    let coupling_term = (&j + j.transpose()) * 0.5;
    let thermal_term = linalg::symmetrize(&linalg::sandwich_integral(&neg, &f_rot, &neg.transpose(), t));
    let n = model.layout.dim();
    let rotated = Mat::identity(n, n) * 0.5 + &coupling_term + &thermal_term;
    Ok(PerturbativeSolution {
        rotated: CovarianceMatrix {
            layout: model.layout,
            matrix: rotated,
        },
        frame,
        t,
        coupling_term,
        thermal_term,
    })
}

/// Shape functions of a parallel rotated dynamics: `v′_i(s) = f_i(s) w_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeFunctions {
    pub times: Vec<f64>,
    pub f_a: Vec<f64>,
    pub f_b: Vec<f64>,
    pub i_a: f64,
    pub i_b: f64,
    pub i_ab: f64,
    pub rho_sq: f64,
}

impl ShapeFunctions {
    /// Integrates equally spaced samples on `[0, t]` with composite Simpson.
    pub fn from_samples(t: f64, f_a: Vec<f64>, f_b: Vec<f64>) -> Result<Self> {
        if f_a.len() != f_b.len() || f_a.len() < 2 {
            return Err(dim_mismatch(
                "two equal sample vectors of length ≥ 2",
                format!("{} and {}", f_a.len(), f_b.len()),
            ));
        }
        let n = f_a.len();
        let h = t / (n - 1) as f64;
        let prod = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(a, b)| a * b).collect() };
        let i_a = linalg::simpson(&prod(&f_a, &f_a), h);
        let i_b = linalg::simpson(&prod(&f_b, &f_b), h);
        let i_ab = linalg::simpson(&prod(&f_a, &f_b), h);
        let denom = i_a * i_b;
        let rho_sq = if denom > 0.0 {
            (i_ab * i_ab / denom).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Ok(Self {
            times: (0..n).map(|k| k as f64 * h).collect(),
            f_a,
            f_b,
            i_a,
            i_b,
            i_ab,
            rho_sq,
        })
    }
}

/// Shape functions from the vacuum.
pub fn shape_functions(model: &SystemModel, t: f64, samples: usize) -> Result<ShapeFunctions> {
    shape_functions_from(model, &CovarianceMatrix::vacuum(model.layout), t, samples)
}

/// Samples `f_i(s) = v′_i(s)·w_i / |w_i|²` with `v′_i(s) = e^{M′ᵢᵀs} w_i`, `w_i = S_i⁻ᵀ u_i`.
pub fn shape_functions_from(
    model: &SystemModel,
    v0: &CovarianceMatrix,
    t: f64,
    samples: usize,
) -> Result<ShapeFunctions> {
    let CouplingSpec::Rank1 { u_a, u_b, .. } = &model.coupling else {
        return Err(Error::Unsupported("shape functions need a rank-one coupling".into()));
    };
    let frame = RotatedFrame::new(model, v0)?;
    let da = model.layout.dim_a();
    let db = model.layout.dim_b();
    let samples = samples.max(3);
    let h = t / (samples - 1) as f64;

    let mut f = [Vec::with_capacity(samples), Vec::with_capacity(samples)];
    let mut max_deviation = 0.0_f64;
    for (side, (u, off, d)) in [(u_a, 0, da), (u_b, da, db)].into_iter().enumerate() {
        let s_i = frame.s.view((off, off), (d, d)).into_owned();
        let w: Vector = s_i
            .try_inverse()
            .ok_or(Error::NotPositiveDefinite(0.0))?
            .transpose()
            * u;
        let m_t = frame.m_rot.view((off, off), (d, d)).transpose();
        let step = linalg::expm(&(&m_t * h));
        let w2 = w.norm_squared();
        let mut v = w.clone();
        for k in 0..samples {
            if k > 0 {
                v = &step * v;
            }
            let fk = v.dot(&w) / w2;
            let perp = (&v - &w * fk).norm();
            let vn = v.norm();
            if vn > 0.0 {
                max_deviation = max_deviation.max(perp / vn);
            }
            f[side].push(fk);
        }
    }
    if max_deviation > TOL_PARALLEL {
        return Err(Error::NotParallel {
            max_deviation,
            max_angle: max_deviation.min(1.0).asin(),
        });
    }
    let [f_a, f_b] = f;
    ShapeFunctions::from_samples(t, f_a, f_b)
}
