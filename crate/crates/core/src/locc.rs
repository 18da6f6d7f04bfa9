//! Measurement-and-feedback (LOCC) protocols whose averaged dynamics reproduce a target
//! GKSL generator.
//!
//! A rank-one channel weakly measures `X_A = aᵀξ_A` and `X_B = bᵀξ_B` with strengths `γ_A`, `γ_B`
//! and feeds the records back through `U_A = exp(−i(κ_A y_A + λ y_B) X_A dt)` and its mirror.
//! Averaged over records this is the generator with
//!
//! * Hamiltonian `½κ_A X_A² + λ X_A X_B + ½κ_B X_B²`,
//! * dissipators `Γ_A = γ_A + λ²/(4γ_B) + κ_A²/(4γ_A)` on `X_A` (and mirror on `X_B`),
//! * cross Kossakowski coefficient `Γ_AB = λκ_A/(4γ_A) + λκ_B/(4γ_B)`.
//!
//! The κ Hamiltonians are removed again by the protocol's local unitary.

use serde::{Deserialize, Serialize};

use crate::dynamics::evolve;
use crate::error::{dim_mismatch, Error, Result};
use crate::generator::{build_generator, GkslGenerator};
use crate::linalg::{self, Mat, Vector};
use crate::model::{mat_rows, CouplingSpec, NoiseSpectrum, SystemModel};
use crate::separability::{general_block, BoundKind, ThresholdVerdict, TOL_MARGIN};
use crate::symplectic::{omega, CovarianceMatrix, ModeLayout};

/// Relative eigenvalue cutoff for the whitening pseudo-inverses.
pub const RANK_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rank1Channel {
    #[serde(with = "mat_rows::vector")]
    pub x_a: Vector,
    #[serde(with = "mat_rows::vector")]
    pub x_b: Vector,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub lambda: f64,
    #[serde(default)]
    pub kappa_a: f64,
    #[serde(default)]
    pub kappa_b: f64,
}

/// Dissipator and cross coefficients induced by one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelCoefficients {
    pub gamma_eff_a: f64,
    pub gamma_eff_b: f64,
    pub gamma_ab: f64,
}

impl Rank1Channel {
    pub fn validate(&self, layout: ModeLayout) -> Result<()> {
        if self.x_a.len() != layout.dim_a() || self.x_b.len() != layout.dim_b() {
            return Err(dim_mismatch(
                format!("x_a[{}], x_b[{}]", layout.dim_a(), layout.dim_b()),
                format!("x_a[{}], x_b[{}]", self.x_a.len(), self.x_b.len()),
            ));
        }
        let scalars = [self.gamma_a, self.gamma_b, self.lambda, self.kappa_a, self.kappa_b];
        if !scalars.iter().all(|v| v.is_finite())
            || !self.x_a.iter().chain(self.x_b.iter()).all(|v| v.is_finite())
        {
            return Err(Error::NonFinite("channel"));
        }
        if !(self.gamma_a > 0.0 && self.gamma_b > 0.0) {
            return Err(Error::InvalidModel(format!(
                "measurement strengths must be positive (γ_A = {}, γ_B = {})",
                self.gamma_a, self.gamma_b
            )));
        }
        Ok(())
    }

    pub fn coefficients(&self) -> ChannelCoefficients {
        let (ga, gb, l) = (self.gamma_a, self.gamma_b, self.lambda);
        ChannelCoefficients {
            gamma_eff_a: ga + l * l / (4.0 * gb) + self.kappa_a * self.kappa_a / (4.0 * ga),
            gamma_eff_b: gb + l * l / (4.0 * ga) + self.kappa_b * self.kappa_b / (4.0 * gb),
            gamma_ab: l * self.kappa_a / (4.0 * ga) + l * self.kappa_b / (4.0 * gb),
        }
    }

    /// `(G, Q)` of the averaged channel on the full phase space.
    pub fn quadratic_forms(&self, layout: ModeLayout) -> (Mat, Mat) {
        let da = layout.dim_a();
        let mut z = Vector::zeros(layout.dim());
        z.rows_mut(0, da).copy_from(&self.x_a);
        z.rows_mut(da, layout.dim_b()).copy_from(&self.x_b);
        let za = {
            let mut v = z.clone();
            v.rows_mut(da, layout.dim_b()).fill(0.0);
            v
        };
        let zb = &z - &za;
        let c = self.coefficients();
        let cross = &za * zb.transpose();
        let g = &za * za.transpose() * self.kappa_a
            + &zb * zb.transpose() * self.kappa_b
            + (&cross + cross.transpose()) * self.lambda;
        let q = &za * za.transpose() * c.gamma_eff_a
            + &zb * zb.transpose() * c.gamma_eff_b
            + (&cross + cross.transpose()) * c.gamma_ab;
        (g, q)
    }

    /// Generator of the averaged channel, including its κ Hamiltonian.
    pub fn generator(&self, layout: ModeLayout) -> Result<GkslGenerator> {
        let (g, q) = self.quadratic_forms(layout);
        GkslGenerator::from_quadratic(layout, &g, &q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoccProtocol {
    pub layout: ModeLayout,
    pub channels: Vec<Rank1Channel>,
    /// Local Hamiltonian applied after the channels: `H_HO` minus the κ terms.
    #[serde(with = "mat_rows")]
    pub local_unitary_generator: Mat,
    pub trotter_steps: usize,
}

impl LoccProtocol {
    pub fn validate(&self) -> Result<()> {
        for ch in &self.channels {
            ch.validate(self.layout)?;
        }
        let n = self.layout.dim();
        if self.local_unitary_generator.shape() != (n, n) {
            return Err(dim_mismatch(
                format!("local generator {n}x{n}"),
                format!("{:?}", self.local_unitary_generator.shape()),
            ));
        }
        let g = &self.local_unitary_generator;
        let da = self.layout.dim_a();
        if linalg::max_abs(&g.view((0, da), (da, self.layout.dim_b())).into_owned()) > 0.0 {
            return Err(Error::InvalidModel("local unitary generator couples A and B".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("protocol serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}

/// Per-channel provenance of the assembled generator.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveGenerator {
    pub generator: GkslGenerator,
    pub contributions: Vec<ChannelCoefficients>,
}

/// Sums the channel generators and the local unitary into one moment-level generator.
pub fn effective_generator(protocol: &LoccProtocol) -> Result<EffectiveGenerator> {
    protocol.validate()?;
    let n = protocol.layout.dim();
    let mut g = protocol.local_unitary_generator.clone();
    let mut q = Mat::zeros(n, n);
    let mut contributions = Vec::with_capacity(protocol.channels.len());
    for ch in &protocol.channels {
        let (gc, qc) = ch.quadratic_forms(protocol.layout);
        g += gc;
        q += qc;
        contributions.push(ch.coefficients());
    }
    Ok(EffectiveGenerator {
        generator: GkslGenerator::from_quadratic(protocol.layout, &g, &q)?,
        contributions,
    })
}

/// Which root of the matching quadratic to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// A synthesis result or the reason it does not exist.
#[derive(Debug, Clone, PartialEq)]
pub enum Synthesis<T> {
    Feasible(T),
    Infeasible { reason: String, margin: f64 },
}

impl<T> Synthesis<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Synthesis::Feasible(_))
    }

    pub fn feasible(self) -> Option<T> {
        match self {
            Synthesis::Feasible(t) => Some(t),
            Synthesis::Infeasible { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricSolution {
    pub gamma_a: f64,
    pub gamma_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedSolution {
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
}

/// `γ_i = (S_i/2)(1 ± √(1 − K_g²/(S_A S_B)))`, solving `γ_A + K_g²/(4γ_B) = S_A` and its mirror.
pub fn solve_symmetric(s_a: f64, s_b: f64, k_g: f64, branch: Branch) -> Result<Synthesis<SymmetricSolution>> {
    if !(s_a > 0.0 && s_b > 0.0) {
        return Err(Error::InvalidModel(format!(
            "measurement matching needs S_A, S_B > 0 (got {s_a}, {s_b})"
        )));
    }
    if !k_g.is_finite() {
        return Err(Error::NonFinite("K_g"));
    }
    let margin = s_a * s_b - k_g * k_g;
    if margin < 0.0 {
        return Ok(Synthesis::Infeasible {
            reason: format!("S_A S_B < K_g² ({} < {})", s_a * s_b, k_g * k_g),
            margin,
        });
    }
    if branch == Branch::Minus && k_g == 0.0 {
        return Err(Error::Unsupported("the minus branch degenerates at K_g = 0".into()));
    }
    let root = (margin / (s_a * s_b)).sqrt();
    let f = 0.5 * (1.0 + branch.sign() * root);
    Ok(Synthesis::Feasible(SymmetricSolution {
        gamma_a: s_a * f,
        gamma_b: s_b * f,
    }))
}

/// Self-feedback scheme for correlated noise, with `κ_i = 2γ_i S_AB / K_g`.
pub fn solve_correlated(
    s_a: f64,
    s_b: f64,
    s_ab: f64,
    k_g: f64,
    branch: Branch,
) -> Result<Synthesis<CorrelatedSolution>> {
    if s_ab == 0.0 {
        return Ok(match solve_symmetric(s_a, s_b, k_g, branch)? {
            Synthesis::Feasible(s) => Synthesis::Feasible(CorrelatedSolution {
                gamma_a: s.gamma_a,
                gamma_b: s.gamma_b,
                kappa_a: 0.0,
                kappa_b: 0.0,
            }),
            Synthesis::Infeasible { reason, margin } => Synthesis::Infeasible { reason, margin },
        });
    }
    if k_g == 0.0 {
        return Err(Error::Unsupported(
            "correlated noise without coupling has no self-feedback solution".into(),
        ));
    }
    let k_eff = (k_g * k_g + s_ab * s_ab).sqrt();
    let tilde = match solve_symmetric(s_a, s_b, k_eff, branch)? {
        Synthesis::Feasible(s) => s,
        Synthesis::Infeasible { margin, .. } => {
            return Ok(Synthesis::Infeasible {
                reason: format!(
                    "S_A S_B < K_g² + S_AB² ({} < {})",
                    s_a * s_b,
                    k_eff * k_eff
                ),
                margin,
            })
        }
    };
    let scale = 1.0 + s_ab * s_ab / (k_g * k_g);
    let gamma_a = tilde.gamma_a / scale;
    let gamma_b = tilde.gamma_b / scale;
    Ok(Synthesis::Feasible(CorrelatedSolution {
        gamma_a,
        gamma_b,
        kappa_a: 2.0 * gamma_a * s_ab / k_g,
        kappa_b: 2.0 * gamma_b * s_ab / k_g,
    }))
}

fn local_generator(model: &SystemModel, channels: &[Rank1Channel]) -> Mat {
    let mut g = model.local_hamiltonian();
    for ch in channels {
        g -= &ch.x_a.clone().insert_rows(ch.x_a.len(), ch.x_b.len(), 0.0)
            * ch.x_a.clone().insert_rows(ch.x_a.len(), ch.x_b.len(), 0.0).transpose()
            * ch.kappa_a;
        g -= &ch.x_b.clone().insert_rows(0, ch.x_a.len(), 0.0)
            * ch.x_b.clone().insert_rows(0, ch.x_a.len(), 0.0).transpose()
            * ch.kappa_b;
    }
    g
}

/// Single-channel protocol for a rank-one model with scalar (possibly correlated) noise.
pub fn rank1_protocol(model: &SystemModel, branch: Branch) -> Result<Synthesis<LoccProtocol>> {
    model.validate()?;
    let (CouplingSpec::Rank1 { k_g, u_a, u_b }, NoiseSpectrum::ScalarWhite { s_a, s_b, s_ab }) =
        (&model.coupling, &model.noise)
    else {
        return Err(Error::Unsupported(
            "rank-one protocol needs rank-one coupling and scalar noise".into(),
        ));
    };
    let sol = match solve_correlated(*s_a, *s_b, *s_ab, *k_g, branch)? {
        Synthesis::Feasible(s) => s,
        Synthesis::Infeasible { reason, margin } => return Ok(Synthesis::Infeasible { reason, margin }),
    };
    let ch = Rank1Channel {
        x_a: u_a.clone(),
        x_b: u_b.clone(),
        gamma_a: sol.gamma_a,
        gamma_b: sol.gamma_b,
        lambda: *k_g,
        kappa_a: sol.kappa_a,
        kappa_b: sol.kappa_b,
    };
    let channels = vec![ch];
    Ok(Synthesis::Feasible(LoccProtocol {
        layout: model.layout,
        local_unitary_generator: local_generator(model, &channels),
        channels,
        trotter_steps: 1,
    }))
}

/// `Q̃_G = Q_A^{+1/2} Q_G Q_B^{+1/2}` and its SVD.
#[derive(Debug, Clone, PartialEq)]
pub struct WhitenedCoupling {
    pub x: Mat,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub u: Mat,
    pub v: Mat,
    pub sqrt_a: Mat,
    pub sqrt_b: Mat,
    pub rank_a: usize,
    pub rank_b: usize,
    /// `‖Q_A^{1/2} X Q_B^{1/2} − Q_G‖_max`: nonzero when `Q_G` leaves the ranges of the noise blocks.
    pub range_residual: f64,
}

impl WhitenedCoupling {
    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// `‖X‖_op ≤ 1` and `Q_G` inside the noise ranges.
    pub fn is_contraction(&self, tol: f64) -> bool {
        let scale = linalg::max_abs(&self.sqrt_a).max(linalg::max_abs(&self.sqrt_b)).max(1.0);
        self.max_singular_value() <= 1.0 + tol && self.range_residual <= tol * scale * scale
    }
}

pub fn whiten_coupling(q_a: &Mat, q_b: &Mat, q_g: &Mat) -> WhitenedCoupling {
    let (sqrt_a, pinv_a, rank_a) = linalg::psd_sqrt_pinv(q_a, RANK_CUTOFF);
    let (sqrt_b, pinv_b, rank_b) = linalg::psd_sqrt_pinv(q_b, RANK_CUTOFF);
    let x = &pinv_a * q_g * &pinv_b;
    let range_residual = linalg::max_abs(&(&sqrt_a * &x * &sqrt_b - q_g));
    let svd = x.clone().svd(true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let su = svd.u.expect("u requested");
    let sv = svd.v_t.expect("v requested").transpose();
    let u = Mat::from_fn(su.nrows(), order.len(), |r, c| su[(r, order[c])]);
    let v = Mat::from_fn(sv.nrows(), order.len(), |r, c| sv[(r, order[c])]);
    WhitenedCoupling {
        singular_values: order.iter().map(|&i| svd.singular_values[i]).collect(),
        x,
        u,
        v,
        sqrt_a,
        sqrt_b,
        rank_a,
        rank_b,
        range_residual,
    }
}

/// Whitened-SVD protocol for a general coupling with block-diagonal matrix noise.
///
/// Each nonzero singular value `s_k` becomes a channel on `a_k = Q_A^{1/2}U_k`, `b_k = Q_B^{1/2}V_k`
/// with `λ = s_k` and `γ = ½(1 ± √(1 − s_k²))`; whatever local noise is left over is reproduced by
/// pure measurement channels (`λ = 0`, `γ = 1`). Zero singular values get no channel.
pub fn synthesize_general(model: &SystemModel, branch: Branch) -> Result<Synthesis<(LoccProtocol, WhitenedCoupling)>> {
    model.validate()?;
    let model = match (&model.coupling, &model.noise) {
        (CouplingSpec::General { .. }, NoiseSpectrum::MatrixWhite { .. }) => model.clone(),
        _ => model.general_embedding()?,
    };
    let (q_a, q_b, _) = model.noise_blocks();
    let q_g = model.coupling_block();
    let w = whiten_coupling(&q_a, &q_b, &q_g);
    let block_margin = linalg::min_eigenvalue(&general_block(&model));
    let tol = 1e-10;
    if !w.is_contraction(tol) {
        let reason = if w.max_singular_value() > 1.0 + tol {
            format!("whitened coupling has singular value {} > 1", w.max_singular_value())
        } else {
            format!(
                "coupling leaves the range of the local noise (residual {:e})",
                w.range_residual
            )
        };
        return Ok(Synthesis::Infeasible {
            reason,
            margin: block_margin,
        });
    }

    let layout = model.layout;
    let (da, db) = (layout.dim_a(), layout.dim_b());
    let cut = RANK_CUTOFF * w.max_singular_value().max(1.0);
    let mut channels = Vec::new();
    let mut used_a = Mat::zeros(da, da);
    let mut used_b = Mat::zeros(db, db);
    for (k, &s) in w.singular_values.iter().enumerate() {
        if s <= cut {
            continue;
        }
        let s = s.min(1.0);
        if branch == Branch::Minus && s == 0.0 {
            continue;
        }
        let gamma = 0.5 * (1.0 + branch.sign() * (1.0 - s * s).max(0.0).sqrt());
        let a = &w.sqrt_a * w.u.column(k);
        let b = &w.sqrt_b * w.v.column(k);
        used_a += &a * a.transpose();
        used_b += &b * b.transpose();
        channels.push(Rank1Channel {
            x_a: a,
            x_b: b,
            gamma_a: gamma,
            gamma_b: gamma,
            lambda: s,
            kappa_a: 0.0,
            kappa_b: 0.0,
        });
    }
    // Leftover local dissipators: Q − Σ a_k a_kᵀ is PSD, diagonalize it.
    for (rest, side_a, d) in [(&q_a - used_a, true, da), (&q_b - used_b, false, db)] {
        let (vals, vecs) = linalg::sym_eigen(&rest);
        let scale = linalg::max_abs(&rest).max(linalg::max_abs(if side_a { &q_a } else { &q_b }));
        for i in (0..d).rev() {
            if vals[i] <= RANK_CUTOFF * scale.max(1e-300) * 1e2 {
                continue;
            }
            let z = vecs.column(i) * vals[i].sqrt();
            let (x_a, x_b) = if side_a {
                (z, Vector::zeros(db))
            } else {
                (Vector::zeros(da), z)
            };
            channels.push(Rank1Channel {
                x_a,
                x_b,
                gamma_a: 1.0,
                gamma_b: 1.0,
                lambda: 0.0,
                kappa_a: 0.0,
                kappa_b: 0.0,
            });
        }
    }
    let protocol = LoccProtocol {
        layout,
        local_unitary_generator: model.local_hamiltonian(),
        channels,
        trotter_steps: 1,
    };
    Ok(Synthesis::Feasible((protocol, w)))
}

/// Protocol for any model kind.
pub fn synthesize(model: &SystemModel, branch: Branch) -> Result<Synthesis<LoccProtocol>> {
    match (&model.coupling, &model.noise) {
        (CouplingSpec::Rank1 { .. }, NoiseSpectrum::ScalarWhite { .. }) => rank1_protocol(model, branch),
        _ => Ok(match synthesize_general(model, branch)? {
            Synthesis::Feasible((p, _)) => Synthesis::Feasible(p),
            Synthesis::Infeasible { reason, margin } => Synthesis::Infeasible { reason, margin },
        }),
    }
}

/// One protocol step at the Gaussian level.
///
/// Each averaged channel is applied exactly, in protocol order, followed by the local unitary.
pub fn channel_step(
    protocol: &LoccProtocol,
    v: &CovarianceMatrix,
    mean: &Vector,
    dt: f64,
) -> Result<(CovarianceMatrix, Vector)> {
    let steps = StepMaps::new(protocol, dt)?;
    steps.apply(v, mean)
}

/// Precomputed `(E, W)` pairs of one protocol step.
struct StepMaps {
    maps: Vec<(Mat, Mat)>,
    layout: ModeLayout,
}

impl StepMaps {
    fn new(protocol: &LoccProtocol, dt: f64) -> Result<Self> {
        protocol.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidModel(format!("step must be positive, got {dt}")));
        }
        let mut maps = Vec::with_capacity(protocol.channels.len() + 1);
        for ch in &protocol.channels {
            let g = ch.generator(protocol.layout)?;
            maps.push(linalg::lyapunov_propagator(&g.drift, &g.diffusion, dt));
        }
        let om = omega(protocol.layout.modes());
        let n = protocol.layout.dim();
        maps.push((
            linalg::expm(&(&om * &protocol.local_unitary_generator * dt)),
            Mat::zeros(n, n),
        ));
        Ok(Self {
            maps,
            layout: protocol.layout,
        })
    }

    fn apply(&self, v: &CovarianceMatrix, mean: &Vector) -> Result<(CovarianceMatrix, Vector)> {
        if v.layout != self.layout || mean.len() != self.layout.dim() {
            return Err(dim_mismatch(format!("{:?}", self.layout), format!("{:?}", v.layout)));
        }
        let mut m = v.matrix.clone();
        let mut x = mean.clone();
        for (e, w) in &self.maps {
            m = linalg::symmetrize(&(e * &m * e.transpose() + w));
            x = e * x;
        }
        Ok((
            CovarianceMatrix {
                layout: self.layout,
                matrix: m,
            },
            x,
        ))
    }
}

/// Composes `n` protocol steps of size `t/n`.
pub fn protocol_evolve(
    protocol: &LoccProtocol,
    v0: &CovarianceMatrix,
    mean0: &Vector,
    t: f64,
    n: usize,
) -> Result<(CovarianceMatrix, Vector)> {
    let n = n.max(1);
    let maps = StepMaps::new(protocol, t / n as f64)?;
    let mut state = (v0.clone(), mean0.clone());
    for _ in 0..n {
        state = maps.apply(&state.0, &state.1)?;
    }
    Ok(state)
}

/// Distance of the protocol composition from exact evolution under `target`.
pub fn trotter_error(
    protocol: &LoccProtocol,
    target: &GkslGenerator,
    v0: &CovarianceMatrix,
    t: f64,
    n: usize,
) -> Result<f64> {
    let mean = Vector::zeros(protocol.layout.dim());
    let (v, _) = protocol_evolve(protocol, v0, &mean, t, n)?;
    let exact = evolve(target, v0, t, 1)?;
    Ok(linalg::max_abs(&(v.matrix - exact.matrix)))
}

/// Empirical convergence order `log₂(err(n)/err(2n))`.
pub fn trotter_order(
    protocol: &LoccProtocol,
    target: &GkslGenerator,
    v0: &CovarianceMatrix,
    t: f64,
    n: usize,
) -> Result<f64> {
    let e1 = trotter_error(protocol, target, v0, t, n)?;
    let e2 = trotter_error(protocol, target, v0, t, 2 * n)?;
    Ok((e1 / e2).log2())
}

/// Effective Ohmic coefficients `d_AA, d_AB, d_BA, d_BB`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OhmicCoefficients {
    pub d_aa: f64,
    pub d_ab: f64,
    pub d_ba: f64,
    pub d_bb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OhmicOutcome {
    Parallel(OhmicCoefficients),
    NotParallel { block: &'static str, max_deviation: f64 },
}

/// `d_αβ` from the propagator derivative `Φ̇(0) = A`: `−A_αβᵀ u_α` must be parallel to `u_β`,
/// and `d_αβ = C₂ (−A_αβᵀ u_α)·u_β / |u_β|²`.
pub fn ohmic_d_coefficients(model: &SystemModel, c2: f64) -> Result<OhmicOutcome> {
    let CouplingSpec::Rank1 { u_a, u_b, .. } = &model.coupling else {
        return Err(Error::Unsupported("Ohmic coefficients need a rank-one coupling".into()));
    };
    let gen = build_generator(model)?;
    let (da, db) = (model.layout.dim_a(), model.layout.dim_b());
    let blocks: [(&'static str, usize, usize, usize, usize, &Vector, &Vector); 4] = [
        ("AA", 0, 0, da, da, u_a, u_a),
        ("AB", 0, da, da, db, u_a, u_b),
        ("BA", da, 0, db, da, u_b, u_a),
        ("BB", da, da, db, db, u_b, u_b),
    ];
    let mut d = [0.0; 4];
    for (k, (name, r, c, nr, nc, u_al, u_be)) in blocks.into_iter().enumerate() {
        let a = gen.drift.view((r, c), (nr, nc)).into_owned();
        let rvec = -(a.transpose() * u_al);
        let rn = rvec.norm();
        let un2 = u_be.norm_squared();
        let proj = rvec.dot(u_be) / un2;
        let dev = if rn > 0.0 {
            (&rvec - u_be * proj).norm() / rn
        } else {
            0.0
        };
        if dev > crate::dynamics::TOL_PARALLEL {
            return Ok(OhmicOutcome::NotParallel {
                block: name,
                max_deviation: dev,
            });
        }
        d[k] = c2 * proj;
    }
    Ok(OhmicOutcome::Parallel(OhmicCoefficients {
        d_aa: d[0],
        d_ab: d[1],
        d_ba: d[2],
        d_bb: d[3],
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub enum DampedOutcome {
    Verdict(ThresholdVerdict),
    Infeasible { reason: String },
}

/// `(S_A − 2|d_AA|)(S_B − 2|d_BB|) ≥ (K_g + |d_AB| + |d_BA|)²`.
pub fn damped_bound(model: &SystemModel, d: OhmicCoefficients) -> Result<DampedOutcome> {
    let (CouplingSpec::Rank1 { k_g, .. }, NoiseSpectrum::ScalarWhite { s_a, s_b, s_ab }) =
        (&model.coupling, &model.noise)
    else {
        return Err(Error::Unsupported("the damped bound needs a rank-one scalar model".into()));
    };
    if *s_ab != 0.0 {
        return Err(Error::Unsupported("the damped bound assumes uncorrelated baths".into()));
    }
    let left_a = s_a - 2.0 * d.d_aa.abs();
    let left_b = s_b - 2.0 * d.d_bb.abs();
    for (name, v) in [("S_A − 2|d_AA|", left_a), ("S_B − 2|d_BB|", left_b)] {
        if v <= 0.0 {
            return Ok(DampedOutcome::Infeasible {
                reason: format!("{name} = {v} is not positive"),
            });
        }
    }
    let right = k_g.abs() + d.d_ab.abs() + d.d_ba.abs();
    Ok(DampedOutcome::Verdict(ThresholdVerdict::with_tol(
        left_a * left_b - right * right,
        BoundKind::Damped,
        TOL_MARGIN,
    )))
}
