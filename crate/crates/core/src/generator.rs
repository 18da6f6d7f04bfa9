//! GKSL generators in moment form: `dV/dt = A V + V Aᵀ + D`.

use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{self, Mat};
use crate::model::{mat_rows, CouplingSpec, NoiseSpectrum, SystemModel};
use crate::symplectic::{build_form, eta, ModeLayout};

/// Drift and diffusion of a quadratic GKSL generator, together with the quadratic forms
/// they were derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GkslGenerator {
    pub layout: ModeLayout,
    #[serde(with = "mat_rows")]
    pub drift: Mat,
    #[serde(with = "mat_rows")]
    pub diffusion: Mat,
    #[serde(with = "mat_rows")]
    pub hamiltonian: Mat,
    #[serde(with = "mat_rows")]
    pub kossakowski: Mat,
}

impl GkslGenerator {
    /// Generator of `H = ½ ξᵀGξ` and dissipator with Kossakowski matrix `Q`.
    pub fn from_quadratic(layout: ModeLayout, g: &Mat, q: &Mat) -> Result<Self> {
        let n = layout.dim();
        for (name, m) in [("hamiltonian", g), ("kossakowski", q)] {
            if m.shape() != (n, n) {
                return Err(dim_mismatch(
                    format!("{name} {n}x{n}"),
                    format!("{}x{}", m.nrows(), m.ncols()),
                ));
            }
            if !linalg::is_finite(m) {
                return Err(Error::NonFinite("generator"));
            }
        }
        let omega = build_form(layout).matrix;
        let g = linalg::symmetrize(g);
        let q = linalg::symmetrize(q);
        Ok(Self {
            layout,
            drift: &omega * &g,
            diffusion: linalg::symmetrize(&(&omega * &q * omega.transpose())),
            hamiltonian: g,
            kossakowski: q,
        })
    }

    /// Right-hand side of the covariance equation.
    pub fn moment_rhs(&self, v: &Mat) -> Mat {
        moment_equations(self, v)
    }

    /// Largest absolute entry difference of drift and diffusion.
    pub fn distance(&self, other: &Self) -> f64 {
        linalg::max_abs(&(&self.drift - &other.drift))
            .max(linalg::max_abs(&(&self.diffusion - &other.diffusion)))
    }
}

/// `A V + V Aᵀ + D`.
pub fn moment_equations(gen: &GkslGenerator, v: &Mat) -> Mat {
    &gen.drift * v + v * gen.drift.transpose() + &gen.diffusion
}

/// Generator of a rank-one model, assembled directly from `u_A`, `u_B` and the scalar spectrum.
///
/// The coupling drift is `K_g [[0, η u_A u_Bᵀ], [η u_B u_Aᵀ, 0]]` and the noise diffusion is
/// `S_α η u_α u_αᵀ ηᵀ` on each party, with cross block `S_AB η u_A u_Bᵀ ηᵀ`.
pub fn build_rank1_generator(model: &SystemModel) -> Result<GkslGenerator> {
    model.validate()?;
    let (CouplingSpec::Rank1 { k_g, u_a, u_b }, NoiseSpectrum::ScalarWhite { s_a, s_b, s_ab }) =
        (&model.coupling, &model.noise)
    else {
        return Err(Error::Unsupported(
            "rank-one generator needs rank-one coupling and scalar noise".into(),
        ));
    };
    let layout = model.layout;
    let (da, db) = (layout.dim_a(), layout.dim_b());
    let oa = crate::symplectic::omega(layout.n_a());
    let ob = crate::symplectic::omega(layout.n_b());
    let wa = &oa * u_a;
    let wb = &ob * u_b;

    let mut drift = linalg::direct_sum(&(&oa * &model.m_a), &(&ob * &model.m_b));
    drift
        .view_mut((0, da), (da, db))
        .copy_from(&(&wa * u_b.transpose() * *k_g));
    drift
        .view_mut((da, 0), (db, da))
        .copy_from(&(&wb * u_a.transpose() * *k_g));

    let mut diffusion = linalg::direct_sum(&(&wa * wa.transpose() * *s_a), &(&wb * wb.transpose() * *s_b));
    let cross = &wa * wb.transpose() * *s_ab;
    diffusion.view_mut((0, da), (da, db)).copy_from(&cross);
    diffusion.view_mut((da, 0), (db, da)).copy_from(&cross.transpose());

    Ok(GkslGenerator {
        layout,
        drift,
        diffusion,
        hamiltonian: model.hamiltonian(),
        kossakowski: model.kossakowski(),
    })
}

/// Generator of a model with general coupling `Q_G` and matrix-valued noise `Q_A ⊕ Q_B`.
pub fn build_general_generator(model: &SystemModel) -> Result<GkslGenerator> {
    model.validate()?;
    if !matches!(
        (&model.coupling, &model.noise),
        (CouplingSpec::General { .. }, NoiseSpectrum::MatrixWhite { .. })
    ) {
        return Err(Error::Unsupported(
            "general generator needs general coupling and matrix noise".into(),
        ));
    }
    GkslGenerator::from_quadratic(model.layout, &model.hamiltonian(), &model.kossakowski())
}

/// Dispatches on the model kind; mixed kinds go through the quadratic-form route.
pub fn build_generator(model: &SystemModel) -> Result<GkslGenerator> {
    match (&model.coupling, &model.noise) {
        (CouplingSpec::Rank1 { .. }, NoiseSpectrum::ScalarWhite { .. }) => build_rank1_generator(model),
        (CouplingSpec::General { .. }, NoiseSpectrum::MatrixWhite { .. }) => {
            build_general_generator(model)
        }
        _ => {
            model.validate()?;
            GkslGenerator::from_quadratic(model.layout, &model.hamiltonian(), &model.kossakowski())
        }
    }
}

/// Single-mode `η`, re-exported for callers building rotated coupling vectors.
pub fn single_mode_form() -> Mat {
    eta()
}
