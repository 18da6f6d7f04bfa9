//! System models: local quadratic Hamiltonians, bilinear coupling and white thermal noise.
//!
//! The Hamiltonian is `H = ½ ξᵀ G ξ` with `G = [[M_A, G_AB], [G_ABᵀ, M_B]]`, where `G_AB` is
//! `K_g u_A u_Bᵀ` (rank one) or an arbitrary `Q_G`. Noise enters through the dissipator
//! `Σ Q_ij (ξ_i ρ ξ_j − ½{ξ_j ξ_i, ρ})`; the scalar spectrum `S_α` on `u_αᵀξ_α` means
//! `Q_α = S_α u_α u_αᵀ`.
//!
//! # JSON schema
//!
//! ```json
//! {
//!   "layout": {"n_a": 1, "n_b": 1},
//!   "m_a": [[1.0, 0.0], [0.0, 1.0]],
//!   "m_b": [[1.0, 0.0], [0.0, 1.0]],
//!   "coupling": {"kind": "rank1", "k_g": 0.1, "u_a": [1.0, 0.0], "u_b": [1.0, 0.0]},
//!   "noise": {"kind": "scalar_white", "s_a": 0.2, "s_b": 0.2, "s_ab": 0.0}
//! }
//! ```
//!
//! Matrices are arrays of rows. The alternatives are `{"kind": "general", "q_g": [[…]]}` and
//! `{"kind": "matrix_white", "q_a": [[…]], "q_b": [[…]]}`.

use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::symplectic::ModeLayout;

pub(crate) mod mat_rows {
    use super::{Mat, Vector};
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = (0..m.nrows())
            .map(|i| m.row(i).iter().copied().collect())
            .collect();
        serde::Serialize::serialize(&rows, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Mat, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        from_rows(&rows).map_err(D::Error::custom)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Mat, String> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err("ragged matrix rows".into());
        }
        Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub mod vector {
        use super::Vector;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
            let xs: Vec<f64> = v.iter().copied().collect();
            serde::Serialize::serialize(&xs, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
            let xs: Vec<f64> = Vec::deserialize(d)?;
            Ok(Vector::from_vec(xs))
        }
    }
}

pub use mat_rows::from_rows as matrix_from_rows;

/// Bipartite coupling block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingSpec {
    Rank1 {
        k_g: f64,
        #[serde(with = "mat_rows::vector")]
        u_a: Vector,
        #[serde(with = "mat_rows::vector")]
        u_b: Vector,
    },
    General {
        #[serde(with = "mat_rows")]
        q_g: Mat,
    },
}

/// White thermal noise spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpectrum {
    ScalarWhite {
        s_a: f64,
        s_b: f64,
        #[serde(default)]
        s_ab: f64,
    },
    MatrixWhite {
        #[serde(with = "mat_rows")]
        q_a: Mat,
        #[serde(with = "mat_rows")]
        q_b: Mat,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemModel {
    pub layout: ModeLayout,
    #[serde(with = "mat_rows")]
    pub m_a: Mat,
    #[serde(with = "mat_rows")]
    pub m_b: Mat,
    pub coupling: CouplingSpec,
    pub noise: NoiseSpectrum,
}

fn check_shape(name: &str, m: &Mat, r: usize, c: usize) -> Result<()> {
    if m.shape() != (r, c) {
        return Err(dim_mismatch(
            format!("{name} {r}x{c}"),
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    if !linalg::is_finite(m) {
        return Err(Error::NonFinite("model matrix"));
    }
    Ok(())
}

fn check_symmetric(name: &str, m: &Mat) -> Result<()> {
    let asym = linalg::max_abs(&(m - m.transpose()));
    if asym > 1e-12 * linalg::max_abs(m).max(1.0) {
        return Err(Error::InvalidModel(format!("{name} is not symmetric ({asym:e})")));
    }
    Ok(())
}

fn check_psd(name: &str, m: &Mat) -> Result<()> {
    let min = linalg::min_eigenvalue(m);
    if min < -1e-12 * linalg::max_abs(m).max(1.0) {
        return Err(Error::InvalidModel(format!(
            "{name} is not positive semidefinite (min eigenvalue {min:e})"
        )));
    }
    Ok(())
}

impl SystemModel {
    pub fn new(
        layout: ModeLayout,
        m_a: Mat,
        m_b: Mat,
        coupling: CouplingSpec,
        noise: NoiseSpectrum,
    ) -> Result<Self> {
        let model = Self {
            layout,
            m_a,
            m_b,
            coupling,
            noise,
        };
        model.validate()?;
        Ok(model)
    }

    /// Two unit-frequency oscillators (`M = I`) coupled through `K_g x_A x_B`.
    pub fn position_coupled_oscillators(k_g: f64, s_a: f64, s_b: f64, s_ab: f64) -> Result<Self> {
        Self::position_coupled(Mat::identity(2, 2), k_g, s_a, s_b, s_ab)
    }

    /// 1+1 modes with identical local block `m`, position coupling and position-noise.
    pub fn position_coupled(m: Mat, k_g: f64, s_a: f64, s_b: f64, s_ab: f64) -> Result<Self> {
        let x = Vector::from_vec(vec![1.0, 0.0]);
        Self::new(
            ModeLayout::new(1, 1)?,
            m.clone(),
            m,
            CouplingSpec::Rank1 {
                k_g,
                u_a: x.clone(),
                u_b: x,
            },
            NoiseSpectrum::ScalarWhite { s_a, s_b, s_ab },
        )
    }

    pub fn validate(&self) -> Result<()> {
        let (da, db) = (self.layout.dim_a(), self.layout.dim_b());
        if self.layout.n_b() == 0 {
            return Err(Error::InvalidLayout("a bipartite model needs at least one B mode".into()));
        }
        check_shape("m_a", &self.m_a, da, da)?;
        check_shape("m_b", &self.m_b, db, db)?;
        check_symmetric("m_a", &self.m_a)?;
        check_symmetric("m_b", &self.m_b)?;
        match &self.coupling {
            CouplingSpec::Rank1 { k_g, u_a, u_b } => {
                if !k_g.is_finite() {
                    return Err(Error::NonFinite("k_g"));
                }
                if u_a.len() != da || u_b.len() != db {
                    return Err(dim_mismatch(
                        format!("u_a[{da}], u_b[{db}]"),
                        format!("u_a[{}], u_b[{}]", u_a.len(), u_b.len()),
                    ));
                }
                if !(u_a.norm() > 0.0 && u_b.norm() > 0.0) {
                    return Err(Error::InvalidModel("coupling vectors must be nonzero".into()));
                }
            }
            CouplingSpec::General { q_g } => check_shape("q_g", q_g, da, db)?,
        }
        match &self.noise {
            NoiseSpectrum::ScalarWhite { s_a, s_b, s_ab } => {
                if !(s_a.is_finite() && s_b.is_finite() && s_ab.is_finite()) {
                    return Err(Error::NonFinite("noise spectrum"));
                }
                if *s_a < 0.0 || *s_b < 0.0 {
                    return Err(Error::InvalidModel("noise strengths must be nonnegative".into()));
                }
                if s_ab * s_ab > s_a * s_b * (1.0 + 1e-12) {
                    return Err(Error::InvalidModel(format!(
                        "correlated noise violates S_AB² ≤ S_A S_B ({s_ab}² > {s_a}·{s_b})"
                    )));
                }
                if !matches!(self.coupling, CouplingSpec::Rank1 { .. }) {
                    return Err(Error::Unsupported(
                        "scalar noise needs the rank-one coupling vectors".into(),
                    ));
                }
            }
            NoiseSpectrum::MatrixWhite { q_a, q_b } => {
                check_shape("q_a", q_a, da, da)?;
                check_shape("q_b", q_b, db, db)?;
                check_symmetric("q_a", q_a)?;
                check_symmetric("q_b", q_b)?;
                check_psd("q_a", q_a)?;
                check_psd("q_b", q_b)?;
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn from_value(v: serde_json::Value) -> Result<Self> {
        let m: Self = serde_json::from_value(v)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    /// Off-diagonal Hamiltonian block `G_AB`.
    pub fn coupling_block(&self) -> Mat {
        match &self.coupling {
            CouplingSpec::Rank1 { k_g, u_a, u_b } => u_a * u_b.transpose() * *k_g,
            CouplingSpec::General { q_g } => q_g.clone(),
        }
    }

    /// Full symmetric Hamiltonian matrix `G`.
    pub fn hamiltonian(&self) -> Mat {
        let da = self.layout.dim_a();
        let db = self.layout.dim_b();
        let mut g = linalg::direct_sum(&self.m_a, &self.m_b);
        let c = self.coupling_block();
        g.view_mut((0, da), (da, db)).copy_from(&c);
        g.view_mut((da, 0), (db, da)).copy_from(&c.transpose());
        g
    }

    pub fn local_hamiltonian(&self) -> Mat {
        linalg::direct_sum(&self.m_a, &self.m_b)
    }

    /// Local noise blocks `(Q_A, Q_B)` and the cross block `Q_AB`.
    pub fn noise_blocks(&self) -> (Mat, Mat, Mat) {
        match (&self.noise, &self.coupling) {
            (NoiseSpectrum::ScalarWhite { s_a, s_b, s_ab }, CouplingSpec::Rank1 { u_a, u_b, .. }) => (
                u_a * u_a.transpose() * *s_a,
                u_b * u_b.transpose() * *s_b,
                u_a * u_b.transpose() * *s_ab,
            ),
            (NoiseSpectrum::MatrixWhite { q_a, q_b }, _) => (
                q_a.clone(),
                q_b.clone(),
                Mat::zeros(self.layout.dim_a(), self.layout.dim_b()),
            ),
            _ => unreachable!("validated model"),
        }
    }

    /// Full Kossakowski matrix of the noise dissipator.
    pub fn kossakowski(&self) -> Mat {
        let (qa, qb, qab) = self.noise_blocks();
        let da = self.layout.dim_a();
        let db = self.layout.dim_b();
        let mut q = linalg::direct_sum(&qa, &qb);
        q.view_mut((0, da), (da, db)).copy_from(&qab);
        q.view_mut((da, 0), (db, da)).copy_from(&qab.transpose());
        q
    }

    /// The same physics written with a `General` coupling and `MatrixWhite` noise.
    ///
    /// Correlated scalar noise has no block-diagonal matrix form and is rejected.
    pub fn general_embedding(&self) -> Result<Self> {
        if let NoiseSpectrum::ScalarWhite { s_ab, .. } = self.noise {
            if s_ab != 0.0 {
                return Err(Error::Unsupported(
                    "correlated scalar noise has no block-diagonal matrix form".into(),
                ));
            }
        }
        let (q_a, q_b, _) = self.noise_blocks();
        Self::new(
            self.layout,
            self.m_a.clone(),
            self.m_b.clone(),
            CouplingSpec::General {
                q_g: self.coupling_block(),
            },
            NoiseSpectrum::MatrixWhite { q_a, q_b },
        )
    }

    /// Characteristic rates `(coupling, noise_A, noise_B)` used by the perturbative guards.
    ///
    /// For the rank-one scalar model these are `|K_g|`, `S_A`, `S_B`; otherwise operator norms.
    pub fn rates(&self) -> (f64, f64, f64) {
        match (&self.coupling, &self.noise) {
            (CouplingSpec::Rank1 { k_g, .. }, NoiseSpectrum::ScalarWhite { s_a, s_b, .. }) => {
                (k_g.abs(), *s_a, *s_b)
            }
            _ => {
                let (qa, qb, _) = self.noise_blocks();
                (
                    linalg::op_norm(&self.coupling_block()),
                    linalg::op_norm(&qa),
                    linalg::op_norm(&qb),
                )
            }
        }
    }
}
