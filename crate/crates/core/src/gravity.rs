//! Newtonian gravity scenarios in SI units.
//!
//! Each mode `i` of mass `m_i` at a common mechanical frequency `ω` is written in the
//! dimensionless quadratures `X = x √(mω/ħ)`, `P = p / √(mħω)` and time `τ = ωt`. A bilinear
//! spring `K x_i x_j` then becomes `K / (ω² √(m_i m_j)) X_i X_j` and a white force spectrum
//! `S = 2 γ m k_B T` becomes the momentum-diffusion rate `2 γ k_B T / (ħ ω²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use crate::model::{CouplingSpec, NoiseSpectrum, SystemModel};
use crate::separability::{self, ThresholdVerdict, TOL_MARGIN};
use crate::symplectic::ModeLayout;

/// Newtonian constant of gravitation, m³ kg⁻¹ s⁻² (CODATA 2018).
pub const G: f64 = 6.674_30e-11;
/// Reduced Planck constant, J s (CODATA 2018, exact by definition of h).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;

/// Optional description of the far oscillator `B` in a mediator setup.
///
/// Missing values default to a copy of `A` placed symmetrically on the other side of `C`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarOscillator {
    #[serde(default)]
    pub mass_kg: Option<f64>,
    #[serde(default)]
    pub damping_rate_per_s: Option<f64>,
    /// Distance between `C` and `B`.
    #[serde(default)]
    pub separation_cb_m: Option<f64>,
    /// Distance between `A` and `B`, only used when the A–B coupling is switched on.
    #[serde(default)]
    pub separation_ab_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhysicalScenario {
    TwoMass {
        mass_kg: f64,
        separation_m: f64,
        damping_rate_per_s: f64,
        temperature_k: f64,
    },
    Mediator {
        mass_a_kg: f64,
        mass_c_kg: f64,
        separation_ac_m: f64,
        damping_rate_a_per_s: f64,
        damping_rate_c_per_s: f64,
        temperature_k: f64,
        #[serde(default)]
        include_ab_coupling: bool,
        #[serde(default)]
        far: FarOscillator,
    },
    SphereMediator {
        mass_a_kg: f64,
        density_c_kg_m3: f64,
        mass_c_kg: f64,
        damping_rate_a_per_s: f64,
        damping_rate_c_per_s: f64,
        temperature_k: f64,
        #[serde(default)]
        include_ab_coupling: bool,
        #[serde(default)]
        far: FarOscillator,
    },
}

/// Verdict of an SI-level criterion `lhs > rhs ⇔ entanglement possible`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GravityVerdict {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; non-negative when separability is preserved.
    pub margin: f64,
    pub entanglement_possible: bool,
}

impl GravityVerdict {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            margin: rhs - lhs,
            entanglement_possible: lhs > rhs,
        }
    }
}

/// What is needed to turn dimensionless model quantities back into SI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitRecord {
    pub omega_rad_s: f64,
    /// Mass of each mode in model order (A modes first).
    pub masses_kg: Vec<f64>,
}

impl UnitRecord {
    pub fn seconds(&self, tau: f64) -> f64 {
        tau / self.omega_rad_s
    }

    pub fn dimensionless_time(&self, seconds: f64) -> f64 {
        seconds * self.omega_rad_s
    }

    /// Spring constant (N/m) of a dimensionless coupling between modes `i` and `j`.
    pub fn spring_constant(&self, k: f64, i: usize, j: usize) -> f64 {
        k * self.omega_rad_s.powi(2) * (self.masses_kg[i] * self.masses_kg[j]).sqrt()
    }

    /// Force spectrum (N² s) of a dimensionless momentum-diffusion rate on mode `i`.
    pub fn force_spectrum(&self, s: f64, i: usize) -> f64 {
        s * HBAR * self.omega_rad_s.powi(2) * self.masses_kg[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledModel {
    pub model: SystemModel,
    pub units: UnitRecord,
}

impl ScaledModel {
    /// Model-level threshold with the margin tolerance scaled to the model's rates.
    pub fn threshold(&self) -> ThresholdVerdict {
        let (k, sa, sb) = self.model.rates();
        let scale = k.max(sa).max(sb);
        let scale = match self.model.coupling {
            CouplingSpec::Rank1 { .. } => scale * scale,
            CouplingSpec::General { .. } => scale,
        };
        separability::threshold_tol(&self.model, TOL_MARGIN * scale.max(f64::MIN_POSITIVE))
    }
}

/// Gravitational spring constant `2 G m_1 m_2 / d³`.
pub fn gravitational_spring(m1: f64, m2: f64, d: f64) -> f64 {
    2.0 * G * m1 * m2 / d.powi(3)
}

/// Radius of a uniform sphere of mass `m` and density `rho`.
pub fn sphere_radius(m: f64, rho: f64) -> f64 {
    (3.0 * m / (4.0 * std::f64::consts::PI * rho)).cbrt()
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{name} must be non-negative, got {v}")))
    }
}

/// Mediator geometry with all defaults resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediatorParams {
    pub mass_a: f64,
    pub mass_c: f64,
    pub mass_b: f64,
    pub d_ac: f64,
    pub d_cb: f64,
    pub d_ab: f64,
    pub gamma_a: f64,
    pub gamma_c: f64,
    pub gamma_b: f64,
    pub temperature: f64,
    pub include_ab_coupling: bool,
}

impl PhysicalScenario {
    pub fn from_json(s: &str) -> Result<Self> {
        let sc: Self = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_value(v: serde_json::Value) -> Result<Self> {
        let sc: Self = serde_json::from_value(v)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::TwoMass {
                mass_kg,
                separation_m,
                damping_rate_per_s,
                temperature_k,
            } => {
                positive("mass_kg", *mass_kg)?;
                positive("separation_m", *separation_m)?;
                non_negative("damping_rate_per_s", *damping_rate_per_s)?;
                non_negative("temperature_k", *temperature_k)
            }
            Self::SphereMediator { density_c_kg_m3, .. } => {
                positive("density_c_kg_m3", *density_c_kg_m3)?;
                self.mediator_params().map(|_| ())
            }
            Self::Mediator { .. } => self.mediator_params().map(|_| ()),
        }
    }

    /// Resolved mediator parameters; the sphere variant sets `d_AC` to the mediator radius.
    pub fn mediator_params(&self) -> Result<MediatorParams> {
        let (mass_a, mass_c, d_ac, gamma_a, gamma_c, temperature, include_ab_coupling, far) = match self {
            Self::Mediator {
                mass_a_kg,
                mass_c_kg,
                separation_ac_m,
                damping_rate_a_per_s,
                damping_rate_c_per_s,
                temperature_k,
                include_ab_coupling,
                far,
            } => (
                *mass_a_kg,
                *mass_c_kg,
                *separation_ac_m,
                *damping_rate_a_per_s,
                *damping_rate_c_per_s,
                *temperature_k,
                *include_ab_coupling,
                far,
            ),
            Self::SphereMediator {
                mass_a_kg,
                density_c_kg_m3,
                mass_c_kg,
                damping_rate_a_per_s,
                damping_rate_c_per_s,
                temperature_k,
                include_ab_coupling,
                far,
            } => (
                *mass_a_kg,
                *mass_c_kg,
                sphere_radius(*mass_c_kg, *density_c_kg_m3),
                *damping_rate_a_per_s,
                *damping_rate_c_per_s,
                *temperature_k,
                *include_ab_coupling,
                far,
            ),
            Self::TwoMass { .. } => {
                return Err(Error::Unsupported("two-mass scenario has no mediator".into()))
            }
        };
        let mass_b = far.mass_kg.unwrap_or(mass_a);
        let d_cb = far.separation_cb_m.unwrap_or(d_ac);
        let p = MediatorParams {
            mass_a,
            mass_c,
            mass_b,
            d_ac,
            d_cb,
            d_ab: far.separation_ab_m.unwrap_or(d_ac + d_cb),
            gamma_a,
            gamma_c,
            gamma_b: far.damping_rate_per_s.unwrap_or(gamma_a),
            temperature,
            include_ab_coupling,
        };
        positive("mass_a_kg", p.mass_a)?;
        positive("mass_c_kg", p.mass_c)?;
        positive("far.mass_kg", p.mass_b)?;
        positive("separation_ac_m", p.d_ac)?;
        positive("far.separation_cb_m", p.d_cb)?;
        positive("far.separation_ab_m", p.d_ab)?;
        non_negative("damping_rate_a_per_s", p.gamma_a)?;
        non_negative("damping_rate_c_per_s", p.gamma_c)?;
        non_negative("far.damping_rate_per_s", p.gamma_b)?;
        non_negative("temperature_k", p.temperature)?;
        Ok(p)
    }

    /// SI-level criterion for this scenario.
    pub fn verdict(&self) -> Result<GravityVerdict> {
        self.validate()?;
        match self {
            Self::TwoMass { .. } => two_mass_threshold(self),
            _ => mediator_threshold(self),
        }
    }

    /// Nondimensionalized model at mechanical frequency `omega` (rad/s).
    ///
    /// Two masses give a rank-one position-coupled 1+1 model. A mediator gives the 1+2 model
    /// `A | (C, B)` with the A–C spring across the cut, the C–B spring inside the `B` side and
    /// the A–B spring only when `include_ab_coupling` is set.
    pub fn to_model(&self, omega: f64) -> Result<ScaledModel> {
        self.validate()?;
        positive("omega_rad_s", omega)?;
        let w2 = omega * omega;
        let diffusion = |gamma: f64, t: f64| 2.0 * gamma * K_B * t / (HBAR * w2);
        let spring = |k: f64, m1: f64, m2: f64| k / (w2 * (m1 * m2).sqrt());
        match self {
            Self::TwoMass {
                mass_kg: m,
                separation_m: d,
                damping_rate_per_s: gamma,
                temperature_k: t,
            } => {
                let k = spring(gravitational_spring(*m, *m, *d), *m, *m);
                let s = diffusion(*gamma, *t);
                Ok(ScaledModel {
                    model: SystemModel::position_coupled_oscillators(k, s, s, 0.0)?,
                    units: UnitRecord {
                        omega_rad_s: omega,
                        masses_kg: vec![*m, *m],
                    },
                })
            }
            _ => {
                let p = self.mediator_params()?;
                let k_ac = spring(gravitational_spring(p.mass_a, p.mass_c, p.d_ac), p.mass_a, p.mass_c);
                let k_cb = spring(gravitational_spring(p.mass_c, p.mass_b, p.d_cb), p.mass_c, p.mass_b);
                let k_ab = if p.include_ab_coupling {
                    spring(gravitational_spring(p.mass_a, p.mass_b, p.d_ab), p.mass_a, p.mass_b)
                } else {
                    0.0
                };
                let m_a = Mat::identity(2, 2);
                let mut m_b = Mat::identity(4, 4);
                m_b[(0, 2)] = k_cb;
                m_b[(2, 0)] = k_cb;
                let mut q_g = Mat::zeros(2, 4);
                q_g[(0, 0)] = k_ac;
                q_g[(0, 2)] = k_ab;
                let q_a = Mat::from_diagonal(&Vector::from_vec(vec![diffusion(p.gamma_a, p.temperature), 0.0]));
                let q_b = Mat::from_diagonal(&Vector::from_vec(vec![
                    diffusion(p.gamma_c, p.temperature),
                    0.0,
                    diffusion(p.gamma_b, p.temperature),
                    0.0,
                ]));
                let model = SystemModel::new(
                    ModeLayout::new(1, 2)?,
                    m_a,
                    m_b,
                    CouplingSpec::General { q_g },
                    NoiseSpectrum::MatrixWhite { q_a, q_b },
                )?;
                Ok(ScaledModel {
                    model,
                    units: UnitRecord {
                        omega_rad_s: omega,
                        masses_kg: vec![p.mass_a, p.mass_c, p.mass_b],
                    },
                })
            }
        }
    }
}

/// `ħ G m / d³` against `γ k_B T` for two equal masses.
pub fn two_mass_threshold(scenario: &PhysicalScenario) -> Result<GravityVerdict> {
    match scenario {
        PhysicalScenario::TwoMass {
            mass_kg,
            separation_m,
            damping_rate_per_s,
            temperature_k,
        } => {
            scenario.validate()?;
            Ok(GravityVerdict::new(
                HBAR * G * mass_kg / separation_m.powi(3),
                damping_rate_per_s * K_B * temperature_k,
            ))
        }
        _ => Err(Error::Unsupported("expected a two-mass scenario".into())),
    }
}

/// Largest `γ T` (K/s) compatible with entanglement at effective density `m / d³`.
pub fn gamma_t_bound(density_kg_m3: f64) -> f64 {
    HBAR * G * density_kg_m3 / K_B
}

/// `ħ G M_A M_C / d_AC³` against `√(M_A M_C) √(γ_A γ_C) k_B T` across the cut `A | CB`.
///
/// With the A–B spring switched on the left side picks up the factor
/// `√(1 + M_B γ_C d_AC⁶ / (M_C γ_B d_AB⁶))`, the norm of the whitened 1×2 coupling.
pub fn mediator_threshold(scenario: &PhysicalScenario) -> Result<GravityVerdict> {
    let p = scenario.mediator_params()?;
    let mut lhs = HBAR * G * p.mass_a * p.mass_c / p.d_ac.powi(3);
    if p.include_ab_coupling {
        let r = (p.mass_b * p.gamma_c * p.d_ac.powi(6)) / (p.mass_c * p.gamma_b * p.d_ab.powi(6));
        lhs *= (1.0 + r).sqrt();
    }
    let rhs = (p.mass_a * p.mass_c).sqrt() * (p.gamma_a * p.gamma_c).sqrt() * K_B * p.temperature;
    Ok(GravityVerdict::new(lhs, rhs))
}

/// Closed form of the spherical-mediator criterion,
/// `(4π ħ G ρ_C / 3) √(M_A / M_C)` against `√(γ_A γ_C) k_B T`.
pub fn sphere_mediator_threshold(scenario: &PhysicalScenario) -> Result<GravityVerdict> {
    match scenario {
        PhysicalScenario::SphereMediator {
            mass_a_kg,
            density_c_kg_m3,
            mass_c_kg,
            damping_rate_a_per_s,
            damping_rate_c_per_s,
            temperature_k,
            ..
        } => {
            scenario.validate()?;
            Ok(GravityVerdict::new(
                4.0 * std::f64::consts::PI * HBAR * G * density_c_kg_m3 / 3.0
                    * (mass_a_kg / mass_c_kg).sqrt(),
                (damping_rate_a_per_s * damping_rate_c_per_s).sqrt() * K_B * temperature_k,
            ))
        }
        _ => Err(Error::Unsupported("expected a sphere-mediator scenario".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn two_mass(m: f64, d: f64, gamma: f64, t: f64) -> PhysicalScenario {
        PhysicalScenario::TwoMass {
            mass_kg: m,
            separation_m: d,
            damping_rate_per_s: gamma,
            temperature_k: t,
        }
    }

    fn mediator(ma: f64, mc: f64, d: f64, ga: f64, gc: f64, t: f64) -> PhysicalScenario {
        PhysicalScenario::Mediator {
            mass_a_kg: ma,
            mass_c_kg: mc,
            separation_ac_m: d,
            damping_rate_a_per_s: ga,
            damping_rate_c_per_s: gc,
            temperature_k: t,
            include_ab_coupling: false,
            far: FarOscillator::default(),
        }
    }

    #[test]
    fn dense_solid_bound() {
        let b = gamma_t_bound(1e4);
        assert!(b > 1e-18 && b < 1e-17, "{b:e}");
        assert_relative_eq!(b, 1.054571817e-34 * 6.6743e-11 * 1e4 / 1.380649e-23, max_relative = 1e-15);
        // A kilogram at 4.64 cm has m/d³ ≈ 10⁴ kg/m³.
        let d = (1.0f64 / 1e4).cbrt();
        let v = two_mass_threshold(&two_mass(1.0, d, 1.0, b * 0.999)).unwrap();
        assert!(v.entanglement_possible);
        let v = two_mass_threshold(&two_mass(1.0, d, 1.0, b * 1.001)).unwrap();
        assert!(!v.entanglement_possible);
    }

    #[test]
    fn torsion_balance_temperature_scale() {
        let t = gamma_t_bound(1e4) / 1e-10;
        assert!(t > 1e-8 && t < 1e-6, "{t:e}");
    }

    #[test]
    fn zero_temperature_always_possible() {
        let v = two_mass_threshold(&two_mass(1e-3, 1.0, 1.0, 0.0)).unwrap();
        assert!(v.entanglement_possible);
        assert_eq!(v.rhs, 0.0);
    }

    #[test]
    fn far_apart_masses_decouple() {
        let sm = two_mass(1.0, 1e6, 1e-3, 1.0).to_model(1.0).unwrap();
        let (k, _, _) = sm.model.rates();
        assert!(k < 1e-27);
    }

    #[test]
    fn two_mass_model_is_position_coupled() {
        let sm = two_mass(0.1, 0.05, 1e-9, 1e-6).to_model(2.0).unwrap();
        match (&sm.model.coupling, &sm.model.noise) {
            (CouplingSpec::Rank1 { k_g, u_a, u_b }, NoiseSpectrum::ScalarWhite { s_a, s_b, s_ab }) => {
                assert_eq!(u_a.as_slice(), &[1.0, 0.0]);
                assert_eq!(u_b.as_slice(), &[1.0, 0.0]);
                assert_eq!(s_a, s_b);
                assert_eq!(*s_ab, 0.0);
                assert_relative_eq!(
                    sm.units.spring_constant(*k_g, 0, 1),
                    gravitational_spring(0.1, 0.1, 0.05),
                    max_relative = 1e-14
                );
                assert_relative_eq!(
                    sm.units.force_spectrum(*s_a, 0),
                    2.0 * 1e-9 * 0.1 * K_B * 1e-6,
                    max_relative = 1e-14
                );
            }
            _ => panic!("expected a rank-one model"),
        }
        assert_eq!(sm.model.m_a, Mat::identity(2, 2));
        assert_relative_eq!(sm.units.seconds(sm.units.dimensionless_time(3.0)), 3.0);
    }

    #[test]
    fn model_margin_is_proportional_to_si() {
        let omega = 3.0;
        let sc = two_mass(1.0, 0.1, 1e-10, 1e-7);
        let sm = sc.to_model(omega).unwrap();
        let v = two_mass_threshold(&sc).unwrap();
        let tv = sm.threshold();
        let factor = 4.0 / (HBAR * HBAR * omega.powi(4));
        assert_relative_eq!(tv.margin, factor * (v.rhs * v.rhs - v.lhs * v.lhs), max_relative = 1e-9);
        assert_eq!(tv.satisfied, !v.entanglement_possible);
    }

    #[test]
    fn mediator_cross_coupling_only_a_to_c() {
        let sm = mediator(1.0, 10.0, 0.2, 1e-9, 1e-9, 1e-6).to_model(1.0).unwrap();
        let q_g = sm.model.coupling_block();
        assert_eq!(q_g.shape(), (2, 4));
        assert!(q_g[(0, 0)] > 0.0);
        for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 0), (1, 1), (1, 2), (1, 3)] {
            assert_eq!(q_g[(i, j)], 0.0);
        }
        // C–B spring stays inside the B side.
        assert!(sm.model.m_b[(0, 2)] > 0.0);
    }

    #[test]
    fn symmetric_mediator_reduces_to_two_mass() {
        let (m, d, g, t) = (2.0, 0.07, 3e-10, 4e-8);
        let a = mediator_threshold(&mediator(m, m, d, g, g, t)).unwrap();
        let b = two_mass_threshold(&two_mass(m, d, g, t)).unwrap();
        assert_relative_eq!(a.lhs / m, b.lhs, max_relative = 1e-14);
        assert_relative_eq!(a.rhs / m, b.rhs, max_relative = 1e-14);
        assert_eq!(a.entanglement_possible, b.entanglement_possible);
    }

    #[test]
    fn quiet_mediator_always_possible() {
        let v = mediator_threshold(&mediator(1.0, 5.0, 0.3, 1e-3, 0.0, 300.0)).unwrap();
        assert!(v.entanglement_possible);
    }

    #[test]
    fn sphere_closed_form_matches_radius_geometry() {
        let sc = PhysicalScenario::SphereMediator {
            mass_a_kg: 0.5,
            density_c_kg_m3: 2.2e4,
            mass_c_kg: 30.0,
            damping_rate_a_per_s: 1e-9,
            damping_rate_c_per_s: 4e-10,
            temperature_k: 1e-6,
            include_ab_coupling: false,
            far: FarOscillator::default(),
        };
        let general = mediator_threshold(&sc).unwrap();
        let closed = sphere_mediator_threshold(&sc).unwrap();
        let scale = (0.5f64 * 30.0).sqrt();
        assert_relative_eq!(general.lhs / scale, closed.lhs, max_relative = 1e-12);
        assert_relative_eq!(general.rhs / scale, closed.rhs, max_relative = 1e-12);
        assert_eq!(general.entanglement_possible, closed.entanglement_possible);
    }

    #[test]
    fn heavier_sphere_does_not_help() {
        let lhs = |mc: f64| {
            let sc = PhysicalScenario::SphereMediator {
                mass_a_kg: 1.0,
                density_c_kg_m3: 1.9e4,
                mass_c_kg: mc,
                damping_rate_a_per_s: 1e-9,
                damping_rate_c_per_s: 1e-9,
                temperature_k: 1e-6,
                include_ab_coupling: false,
                far: FarOscillator::default(),
            };
            sphere_mediator_threshold(&sc).unwrap().lhs
        };
        let mut prev = lhs(1.0);
        for mc in [10.0, 100.0, 1e3, 1e4] {
            let next = lhs(mc);
            assert!(next <= prev);
            prev = next;
        }
    }

    #[test]
    fn ab_toggle_matches_whitened_norm() {
        let mut sc = mediator(1.0, 3.0, 0.1, 1e-9, 2e-9, 1e-7);
        if let PhysicalScenario::Mediator { include_ab_coupling, .. } = &mut sc {
            *include_ab_coupling = true;
        }
        let sm = sc.to_model(1.0).unwrap();
        let (q_a, q_b, _) = sm.model.noise_blocks();
        let w = crate::locc::whiten_coupling(&q_a, &q_b, &sm.model.coupling_block());
        let v = mediator_threshold(&sc).unwrap();
        // lhs/rhs equals the largest whitened singular value.
        assert_relative_eq!(v.lhs / v.rhs, w.max_singular_value(), max_relative = 1e-9);
        assert!(sm.model.coupling_block()[(0, 2)] > 0.0);
    }

    #[test]
    fn json_round_trip_with_units() {
        let s = r#"{"kind":"sphere_mediator","mass_a_kg":1.0,"density_c_kg_m3":19300.0,
                    "mass_c_kg":10.0,"damping_rate_a_per_s":1e-10,"damping_rate_c_per_s":1e-10,
                    "temperature_k":1e-7}"#;
        let sc = PhysicalScenario::from_json(s).unwrap();
        let back = PhysicalScenario::from_json(&serde_json::to_string(&sc).unwrap()).unwrap();
        assert_eq!(sc, back);
        assert!(PhysicalScenario::from_json(r#"{"kind":"two_mass","mass_kg":-1,"separation_m":1,
            "damping_rate_per_s":0,"temperature_k":0}"#)
        .is_err());
        assert!(PhysicalScenario::from_json(r#"{"kind":"two_mass","mass":1}"#).is_err());
    }
}
