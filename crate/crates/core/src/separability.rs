//! PPT tests, threshold predicates and the explicit first-order separability certificate.

use serde::{Deserialize, Serialize};

use crate::dynamics::{perturbative_v, regime_guard, RotatedFrame, ShapeFunctions};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::model::{CouplingSpec, NoiseSpectrum, SystemModel};
use crate::symplectic::{
    omega, partial_transpose, physicality_margin, symplectic_spectrum, CovarianceMatrix,
};

/// Default absolute tolerance on threshold margins.
pub const TOL_MARGIN: f64 = 1e-10;
/// Default tolerance on PPT symplectic eigenvalues.
pub const TOL_PPT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModePpt {
    pub nu_tilde_minus: f64,
    pub nu_tilde_plus: f64,
    pub separable: bool,
}

/// Closed-form PPT test for 1+1 modes.
pub fn ppt_two_mode(v: &CovarianceMatrix) -> Result<TwoModePpt> {
    ppt_two_mode_tol(v, TOL_PPT)
}

pub fn ppt_two_mode_tol(v: &CovarianceMatrix, tol: f64) -> Result<TwoModePpt> {
    if v.layout.n_a() != 1 || v.layout.n_b() != 1 {
        return Err(Error::InvalidLayout(format!(
            "closed-form PPT needs 1+1 modes, got {}+{}",
            v.layout.n_a(),
            v.layout.n_b()
        )));
    }
    let det_a = v.block_a().determinant();
    let det_b = v.block_b().determinant();
    let det_c = v.block_ab().determinant();
    let det_v = v.matrix.determinant();
    let delta = det_a + det_b - 2.0 * det_c;
    let root = (delta * delta - 4.0 * det_v).max(0.0).sqrt();
    let nu_tilde_minus = ((delta - root) * 0.5).max(0.0).sqrt();
    let nu_tilde_plus = ((delta + root) * 0.5).max(0.0).sqrt();
    Ok(TwoModePpt {
        nu_tilde_minus,
        nu_tilde_plus,
        separable: nu_tilde_minus >= 0.5 - tol,
    })
}

/// Outcome of the PPT criterion for a general bipartition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PptVerdict {
    /// Negative partial transpose: entangled.
    Npt,
    /// PPT with one side a single mode, where PPT is equivalent to separability.
    Separable,
    /// PPT with at least two modes on each side.
    PptInconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultimodePpt {
    pub min_sympl_eig: f64,
    pub npt: bool,
    pub verdict: PptVerdict,
}

pub fn ppt_multimode(v: &CovarianceMatrix) -> Result<MultimodePpt> {
    ppt_multimode_tol(v, TOL_PPT)
}

pub fn ppt_multimode_tol(v: &CovarianceMatrix, tol: f64) -> Result<MultimodePpt> {
    let spec = pt_spectrum(v)?;
    let min_sympl_eig = spec.first().copied().unwrap_or(f64::INFINITY);
    let npt = min_sympl_eig < 0.5 - tol;
    let verdict = if npt {
        PptVerdict::Npt
    } else if v.layout.n_a() == 1 || v.layout.n_b() == 1 {
        PptVerdict::Separable
    } else {
        PptVerdict::PptInconclusive
    };
    Ok(MultimodePpt {
        min_sympl_eig,
        npt,
        verdict,
    })
}

fn pt_spectrum(v: &CovarianceMatrix) -> Result<Vec<f64>> {
    symplectic_spectrum(&partial_transpose(v)?.matrix)
}

/// Logarithmic negativity `Σ max(0, −log₂ 2ν̃_k)` over the partially transposed spectrum.
pub fn log_negativity(v: &CovarianceMatrix) -> Result<f64> {
    Ok(pt_spectrum(v)?
        .iter()
        .map(|&nu| (-(2.0 * nu).log2()).max(0.0))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Rank1,
    Rank1Correlated,
    GeneralMatrix,
    Damped,
    StringentNs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdVerdict {
    pub satisfied: bool,
    pub margin: f64,
    pub bound_kind: BoundKind,
    /// Set when the bound is also necessary for PPT of the evolved state.
    pub necessary_and_sufficient: bool,
}

impl ThresholdVerdict {
    pub fn new(margin: f64, bound_kind: BoundKind) -> Self {
        Self::with_tol(margin, bound_kind, TOL_MARGIN)
    }

    pub fn with_tol(margin: f64, bound_kind: BoundKind, tol: f64) -> Self {
        Self {
            satisfied: margin >= -tol,
            margin,
            bound_kind,
            necessary_and_sufficient: false,
        }
    }
}

/// Block matrix `[[Q_A, Q_G], [Q_Gᵀ, Q_B]]` of the general bound.
pub fn general_block(model: &SystemModel) -> Mat {
    let (qa, qb, _) = model.noise_blocks();
    let qg = model.coupling_block();
    let (da, db) = (qa.nrows(), qb.nrows());
    let mut m = linalg::direct_sum(&qa, &qb);
    m.view_mut((0, da), (da, db)).copy_from(&qg);
    m.view_mut((da, 0), (db, da)).copy_from(&qg.transpose());
    m
}

/// Separability-preservation bound for the model.
///
/// Rank-one scalar noise gives `S_A S_B − K_g² − S_AB²`; every other model is judged by the
/// smallest eigenvalue of the general block matrix.
pub fn threshold(model: &SystemModel) -> ThresholdVerdict {
    threshold_tol(model, TOL_MARGIN)
}

pub fn threshold_tol(model: &SystemModel, tol: f64) -> ThresholdVerdict {
    match (&model.coupling, &model.noise) {
        (CouplingSpec::Rank1 { k_g, .. }, NoiseSpectrum::ScalarWhite { s_a, s_b, s_ab }) => {
            if *s_ab == 0.0 {
                ThresholdVerdict::with_tol(s_a * s_b - k_g * k_g, BoundKind::Rank1, tol)
            } else {
                ThresholdVerdict::with_tol(
                    s_a * s_b - k_g * k_g - s_ab * s_ab,
                    BoundKind::Rank1Correlated,
                    tol,
                )
            }
        }
        _ => ThresholdVerdict::with_tol(
            linalg::min_eigenvalue(&general_block(model)),
            BoundKind::GeneralMatrix,
            tol,
        ),
    }
}

/// `S_A S_B ≥ ρ² (K_g² + S_AB²)` for parallel rotated dynamics.
pub fn stringent_ns_check(shapes: &ShapeFunctions, s_a: f64, s_b: f64, s_ab: f64, k_g: f64) -> ThresholdVerdict {
    let mut v = ThresholdVerdict::new(
        s_a * s_b - shapes.rho_sq * (k_g * k_g + s_ab * s_ab),
        BoundKind::StringentNs,
    );
    v.necessary_and_sufficient = (1.0 - shapes.rho_sq).abs() <= 1e-12;
    v
}

/// Decomposition `V = (σ_A ⊕ σ_B) + N` of the first-order covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityCertificate {
    /// Local states in the lab frame.
    pub sigma_a: CovarianceMatrix,
    pub sigma_b: CovarianceMatrix,
    /// PSD remainder in the lab frame.
    pub n: Mat,
    /// First-order covariance in the lab frame.
    pub v: CovarianceMatrix,
    pub frame: CertificateFrame,
    /// Largest entry of `Ṽ − σ_Final − N` in the rotated frame.
    pub residual: f64,
    /// Amount by which `σ_Final` misses physicality; second order in the rates.
    pub first_order_defect: f64,
    /// 2×2 blocks tested at the sampled times, with their Gram weights.
    pub lemma_blocks: Vec<Mat>,
    /// Dense cross-check: smallest eigenvalue of the weighted 4×4 integrand block.
    pub dense_min_eigenvalue: f64,
}

/// Rotated frame in which the certificate is assembled: `Ṽ = T V Tᵀ` with `T = e^{−M′t} S`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateFrame {
    pub transform: Mat,
    pub sigma_final: Mat,
    pub n_rotated: Mat,
    pub v_rotated: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck {
    pub sigma_a_physical: bool,
    pub sigma_b_physical: bool,
    pub n_min_eigenvalue: f64,
    pub residual: f64,
    pub holds: bool,
}

impl SeparabilityCertificate {
    pub fn verify(&self, tol: f64) -> CertificateCheck {
        let scale = linalg::max_abs(&self.n).max(1.0);
        let n_min_eigenvalue = linalg::min_eigenvalue(&self.n);
        let sigma_a_physical = crate::symplectic::is_physical(&self.sigma_a, tol);
        let sigma_b_physical = crate::symplectic::is_physical(&self.sigma_b, tol);
        let recon = linalg::direct_sum(&self.sigma_a.matrix, &self.sigma_b.matrix) + &self.n;
        let residual = linalg::max_abs(&(&self.v.matrix - recon)).max(self.residual);
        CertificateCheck {
            sigma_a_physical,
            sigma_b_physical,
            n_min_eigenvalue,
            residual,
            holds: sigma_a_physical
                && sigma_b_physical
                && n_min_eigenvalue >= -tol * scale
                && residual <= tol * linalg::max_abs(&self.v.matrix).max(1.0),
        }
    }
}

/// The construction's pointwise PSD test failed on this block.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateFailure {
    pub block: Mat,
    pub min_eigenvalue: f64,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertificateOutcome {
    Certified(Box<SeparabilityCertificate>),
    Refused(CertificateFailure),
}

/// `∫ R L Rᵀ` for `R = (x, Ω_x x)`, `Rᵀ`-side `(y, Ω_y y)`, given `P = ∫ x yᵀ`.
fn basis_integral(p: &Mat, l: &Mat, oa: &Mat, ob: &Mat) -> Mat {
    p * l[(0, 0)] + p * ob.transpose() * l[(0, 1)] + oa * p * l[(1, 0)] + oa * p * ob.transpose() * l[(1, 1)]
}

fn psd_2x2(b: &Mat, tol: f64) -> f64 {
    let tr = b[(0, 0)] + b[(1, 1)];
    let det = b[(0, 0)] * b[(1, 1)] - b[(0, 1)] * b[(1, 0)];
    let disc = (tr * tr * 0.25 - det).max(0.0).sqrt();
    let min = tr * 0.5 - disc;
    if min.abs() <= tol * tr.abs().max(1e-300) {
        0.0
    } else {
        min
    }
}

/// Builds the first-order certificate from the vacuum.
pub fn certificate_first_order(model: &SystemModel, t: f64) -> Result<CertificateOutcome> {
    certificate_first_order_from(model, &CovarianceMatrix::vacuum(model.layout), t)
}

/// Builds `V = (σ_A ⊕ σ_B) + N` from a pure product initial state.
///
/// In the basis `R_i = (v′_i, Ω v′_i)` with `v′_i(s) = e^{M′ᵢᵀs} S_i⁻ᵀ u_i` the first-order integrand
/// is `diag(R_A, R_B) [[diag(0,S_A), X], [Xᵀ, diag(0,S_B)]] diag(R_A, R_B)ᵀ` with
/// `X = [[0, K_g/2], [K_g/2, S_AB]]`. Writing `X = U Σ Wᵀ`, the choice
/// `L_A = S_A/τ · UΣUᵀ`, `L_B = S_B/τ · WΣWᵀ`, `τ = tr Σ = √(K_g² + S_AB²)` keeps the local traces
/// and makes the `N` integrand PSD exactly when `S_A S_B ≥ τ²`.
pub fn certificate_first_order_from(
    model: &SystemModel,
    v0: &CovarianceMatrix,
    t: f64,
) -> Result<CertificateOutcome> {
    let (CouplingSpec::Rank1 { k_g, u_a, u_b }, NoiseSpectrum::ScalarWhite { s_a, s_b, s_ab }) =
        (&model.coupling, &model.noise)
    else {
        return Err(Error::Unsupported(
            "the certificate needs rank-one coupling and scalar noise".into(),
        ));
    };
    regime_guard(model, t)?;
    let pert = perturbative_v(model, v0, t)?;
    let frame: &RotatedFrame = &pert.frame;
    let layout = model.layout;
    let (da, db) = (layout.dim_a(), layout.dim_b());
    let oa = omega(layout.n_a());
    let ob = omega(layout.n_b());

    let s_inv_a = frame.s_inv.view((0, 0), (da, da)).into_owned();
    let s_inv_b = frame.s_inv.view((da, da), (db, db)).into_owned();
    let w_a: Vector = s_inv_a.transpose() * u_a;
    let w_b: Vector = s_inv_b.transpose() * u_b;
    let m_a = frame.m_rot.view((0, 0), (da, da)).into_owned();
    let m_b = frame.m_rot.view((da, da), (db, db)).into_owned();
    let p_aa = linalg::sandwich_integral(&m_a.transpose(), &(&w_a * w_a.transpose()), &m_a, t);
    let p_bb = linalg::sandwich_integral(&m_b.transpose(), &(&w_b * w_b.transpose()), &m_b, t);
    let p_ab = linalg::sandwich_integral(&m_a.transpose(), &(&w_a * w_b.transpose()), &m_b, t);

    let x = Mat::from_row_slice(2, 2, &[0.0, 0.5 * k_g, 0.5 * k_g, *s_ab]);
    let svd = x.clone().svd(true, true);
    let (uu, sig, wt) = (
        svd.u.expect("u requested"),
        svd.singular_values,
        svd.v_t.expect("v requested"),
    );
    let tau = sig.sum();
    let (l_a, l_b) = if tau > 0.0 {
        let sm = Mat::from_diagonal(&sig);
        (
            &uu * &sm * uu.transpose() * (s_a / tau),
            wt.transpose() * &sm * &wt * (s_b / tau),
        )
    } else {
        (Mat::identity(2, 2) * (0.5 * s_a), Mat::identity(2, 2) * (0.5 * s_b))
    };

    // Pointwise PSD test of the weighted integrand block at sampled times.
    let weights = |s: f64| -> (f64, f64) {
        let va = linalg::expm(&(m_a.transpose() * s)) * &w_a;
        let vb = linalg::expm(&(m_b.transpose() * s)) * &w_b;
        (va.norm_squared(), vb.norm_squared())
    };
    let mut lemma_blocks = Vec::new();
    let mut dense_min_eigenvalue = f64::INFINITY;
    let mut y = Mat::zeros(4, 4);
    y.view_mut((0, 0), (2, 2)).copy_from(&l_a);
    y.view_mut((2, 2), (2, 2)).copy_from(&l_b);
    y.view_mut((0, 2), (2, 2)).copy_from(&x);
    y.view_mut((2, 0), (2, 2)).copy_from(&x.transpose());
    for s in [0.0, 0.5 * t, t] {
        let (ga, gb) = weights(s);
        let g = Mat::from_diagonal(&Vector::from_vec(vec![ga, ga, gb, gb]));
        let g_half = g.map(f64::sqrt);
        let gsg = &g_half * &y * &g_half;
        let dense = linalg::min_eigenvalue(&gsg);
        dense_min_eigenvalue = dense_min_eigenvalue.min(dense / linalg::max_abs(&gsg).max(1e-300));
        for k in 0..2 {
            let sk = sig[k];
            let block = if tau > 0.0 {
                Mat::from_row_slice(
                    2,
                    2,
                    &[
                        ga * s_a / tau * sk,
                        (ga * gb).sqrt() * sk,
                        (ga * gb).sqrt() * sk,
                        gb * s_b / tau * sk,
                    ],
                )
            } else {
                Mat::from_row_slice(2, 2, &[ga * 0.5 * s_a, 0.0, 0.0, gb * 0.5 * s_b])
            };
            let min = psd_2x2(&block, 1e-12);
            if min < 0.0 {
                return Ok(CertificateOutcome::Refused(CertificateFailure {
                    block,
                    min_eigenvalue: min,
                    time: s,
                }));
            }
            lemma_blocks.push(block);
        }
    }

    let diag_s = |s: f64| Mat::from_row_slice(2, 2, &[0.0, 0.0, 0.0, s]);
    let n_aa = basis_integral(&p_aa, &l_a, &oa, &oa);
    let n_bb = basis_integral(&p_bb, &l_b, &ob, &ob);
    let n_ab = basis_integral(&p_ab, &x, &oa, &ob);
    let dv_a = basis_integral(&p_aa, &(&l_a - diag_s(*s_a)), &oa, &oa);
    let dv_b = basis_integral(&p_bb, &(&l_b - diag_s(*s_b)), &ob, &ob);

    let mut n_rot = linalg::direct_sum(&n_aa, &n_bb);
    n_rot.view_mut((0, da), (da, db)).copy_from(&n_ab);
    n_rot.view_mut((da, 0), (db, da)).copy_from(&n_ab.transpose());
    let n_rot = linalg::symmetrize(&n_rot);
    let sig_a = linalg::symmetrize(&(Mat::identity(da, da) * 0.5 - dv_a));
    let sig_b = linalg::symmetrize(&(Mat::identity(db, db) * 0.5 - dv_b));
    let sigma_final = linalg::direct_sum(&sig_a, &sig_b);
    let v_rot = pert.rotated.matrix.clone();
    let residual = linalg::max_abs(&(&v_rot - &sigma_final - &n_rot));
    let first_order_defect = (-physicality_margin(&sig_a)).max(-physicality_margin(&sig_b)).max(0.0);

    let ti = frame.inverse_transform(t);
    let lab = |m: &Mat| linalg::symmetrize(&(&ti * m * ti.transpose()));
    let sigma_lab = lab(&sigma_final);
    let sigma_a = CovarianceMatrix::new(
        crate::symplectic::ModeLayout::new(layout.n_a(), 0)?,
        sigma_lab.view((0, 0), (da, da)).into_owned(),
    )?;
    let sigma_b = CovarianceMatrix::new(
        crate::symplectic::ModeLayout::new(layout.n_b(), 0)?,
        sigma_lab.view((da, da), (db, db)).into_owned(),
    )?;
    Ok(CertificateOutcome::Certified(Box::new(SeparabilityCertificate {
        sigma_a,
        sigma_b,
        n: lab(&n_rot),
        v: pert.lab(),
        frame: CertificateFrame {
            transform: frame.transform(t),
            sigma_final,
            n_rotated: n_rot,
            v_rotated: v_rot,
        },
        residual,
        first_order_defect,
        lemma_blocks,
        dense_min_eigenvalue,
    })))
}
