//! Brute-force density-matrix oracle in a truncated Fock basis.
//!
//! Modes are ordered A first, then B; the basis index is `Σ n_k c^{M−1−k}` with cutoff `c`, so the
//! A factor is the major index of every operator.

use std::num::NonZeroUsize;

use gauss_quad::GaussHermite;
use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{self, CMat, Mat, Vector};
use crate::locc::{LoccProtocol, Rank1Channel};
use crate::symplectic::{CovarianceMatrix, ModeLayout};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Truncation and integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockConfig {
    pub cutoff: usize,
    /// Upper bound on the RK4 step; the integrator also keeps `h · (largest coefficient) ≤ 1e−3`.
    pub max_step: f64,
    pub leakage_limit: f64,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            cutoff: 12,
            max_step: 1e-3,
            leakage_limit: 1e-6,
        }
    }
}

impl FockConfig {
    pub fn with_cutoff(cutoff: usize) -> Self {
        Self {
            cutoff,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<()> {
        if self.cutoff < 4 {
            return Err(Error::InvalidModel(format!("Fock cutoff must be at least 4, got {}", self.cutoff)));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidModel("integrator step must be positive".into()));
        }
        Ok(())
    }
}

/// Row-compressed sparse complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseOp {
    pub fn from_dense(m: &CMat) -> Self {
        let n = m.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if v != ZERO {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `out += c · S ρ`.
    fn left_mul_add(&self, rho: &CMat, c: Complex64, out: &mut CMat) {
        let n = self.n;
        let src = rho.as_slice();
        let column = |(j, dst): (usize, &mut [Complex64])| {
            let col = &src[j * n..(j + 1) * n];
            for (i, d) in dst.iter_mut().enumerate() {
                let mut acc = ZERO;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.vals[k] * col[self.cols[k]];
                }
                *d += c * acc;
            }
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            out.as_mut_slice().par_chunks_mut(n).enumerate().for_each(column);
        }
        #[cfg(not(feature = "parallel"))]
        out.as_mut_slice().chunks_mut(n).enumerate().for_each(column);
    }

    fn mul(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.n, self.n);
        self.left_mul_add(rho, ONE, &mut out);
        out
    }
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Truncated single-mode `(x, p)` with `x = (a + a†)/√2`, `p = −i(a − a†)/√2`.
pub fn single_mode_quadratures(cutoff: usize) -> (CMat, CMat) {
    let mut a = CMat::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = (&a + &ad) * Complex64::new(s, 0.0);
    let p = (&a - &ad) * Complex64::new(0.0, -s);
    (x, p)
}

/// Quadratures `ξ_0 … ξ_{2M−1}` of `modes` modes, embedded in the full tensor space.
pub fn quadratures(modes: usize, cutoff: usize) -> Vec<CMat> {
    let (x, p) = single_mode_quadratures(cutoff);
    let id = CMat::identity(cutoff, cutoff);
    let mut out = Vec::with_capacity(2 * modes);
    for k in 0..modes {
        for op in [&x, &p] {
            let mut m = CMat::identity(1, 1);
            for j in 0..modes {
                m = kron(&m, if j == k { op } else { &id });
            }
            out.push(m);
        }
    }
    out
}

/// Dense complex density matrix on `layout` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub layout: ModeLayout,
    pub cutoff: usize,
    pub data: CMat,
}

impl DensityMatrix {
    fn dim(layout: ModeLayout, cutoff: usize) -> usize {
        cutoff.pow(layout.modes() as u32)
    }

    pub fn from_ket(layout: ModeLayout, cutoff: usize, psi: &[Complex64]) -> Result<Self> {
        let n = Self::dim(layout, cutoff);
        if psi.len() != n {
            return Err(dim_mismatch(n, psi.len()));
        }
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        let v = v / Complex64::new(norm, 0.0);
        Ok(Self {
            layout,
            cutoff,
            data: &v * v.adjoint(),
        })
    }

    /// Tensor product of single-mode kets, A modes first.
    pub fn product(layout: ModeLayout, cutoff: usize, kets: &[Vec<Complex64>]) -> Result<Self> {
        if kets.len() != layout.modes() || kets.iter().any(|k| k.len() != cutoff) {
            return Err(dim_mismatch(
                format!("{} kets of length {cutoff}", layout.modes()),
                format!("{} kets", kets.len()),
            ));
        }
        let mut psi = nalgebra::DVector::from_element(1, ONE);
        for k in kets {
            psi = psi.kronecker(&nalgebra::DVector::from_column_slice(k));
        }
        Self::from_ket(layout, cutoff, psi.as_slice())
    }

    pub fn vacuum(layout: ModeLayout, cutoff: usize) -> Self {
        let n = Self::dim(layout, cutoff);
        let mut data = CMat::zeros(n, n);
        data[(0, 0)] = ONE;
        Self {
            layout,
            cutoff,
            data,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    /// Largest population sitting in the top Fock level of any mode.
    pub fn leakage(&self) -> f64 {
        let n = self.data.nrows();
        let c = self.cutoff;
        let modes = self.layout.modes();
        let mut worst = 0.0_f64;
        for m in 0..modes {
            let stride = c.pow((modes - 1 - m) as u32);
            let pop: f64 = (0..n)
                .filter(|i| (i / stride) % c == c - 1)
                .map(|i| self.data[(i, i)].re)
                .sum();
            worst = worst.max(pop);
        }
        worst
    }
}

/// Truncated coherent-state amplitudes `e^{−|α|²/2} αⁿ/√n!`.
pub fn coherent_ket(alpha: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(cutoff);
    let mut c = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..cutoff {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        out.push(c);
    }
    out
}

/// Squeezed vacuum with `⟨x²⟩ = e^{−2r}/2`.
pub fn squeezed_vacuum_ket(r: f64, cutoff: usize) -> Vec<Complex64> {
    let th = -r.tanh();
    let mut out = vec![ZERO; cutoff];
    // c_{2n} = (−tanh r)ⁿ √((2n)!) / (2ⁿ n! √cosh r), built by the ratio c_{2n}/c_{2n−2}.
    let mut c = 1.0 / r.cosh().sqrt();
    let mut n = 0;
    while 2 * n < cutoff {
        out[2 * n] = Complex64::new(c, 0.0);
        n += 1;
        let m = 2 * n;
        c *= th * ((m * (m - 1)) as f64).sqrt() / (2.0 * n as f64);
    }
    out
}

/// Two-mode squeezed vacuum `Σ tanhⁿr/cosh r |n, n⟩` on 1+1 modes.
pub fn two_mode_squeezed_rho(r: f64, cutoff: usize) -> DensityMatrix {
    let layout = ModeLayout::new(1, 1).expect("valid layout");
    let mut psi = vec![ZERO; cutoff * cutoff];
    for n in 0..cutoff {
        psi[n * cutoff + n] = Complex64::new(r.tanh().powi(n as i32) / r.cosh(), 0.0);
    }
    DensityMatrix::from_ket(layout, cutoff, &psi).expect("matching dimension")
}

/// Sparse Lindblad generator `−i[H, ·] + Σ_k q_k (L_k · L_k − ½{L_k², ·})`.
#[derive(Debug, Clone)]
pub struct FockGenerator {
    pub layout: ModeLayout,
    pub cutoff: usize,
    /// `H − (i/2) Σ q_k L_k²`.
    effective: SparseOp,
    jumps: Vec<(f64, SparseOp)>,
    scale: f64,
}

impl FockGenerator {
    /// Truncated generator of `H = ½ξᵀGξ` and Kossakowski matrix `Q`.
    pub fn from_quadratic(layout: ModeLayout, cutoff: usize, g: &Mat, q: &Mat) -> Result<Self> {
        let n = layout.dim();
        if g.shape() != (n, n) || q.shape() != (n, n) {
            return Err(dim_mismatch(format!("{n}x{n}"), format!("{:?}, {:?}", g.shape(), q.shape())));
        }
        let xi = quadratures(layout.modes(), cutoff);
        let dim = xi[0].nrows();
        let mut h = CMat::zeros(dim, dim);
        for i in 0..n {
            for j in 0..n {
                if g[(i, j)] != 0.0 {
                    h += &xi[i] * &xi[j] * Complex64::new(0.5 * g[(i, j)], 0.0);
                }
            }
        }
        let (vals, vecs) = linalg::sym_eigen(&linalg::symmetrize(q));
        let qscale = linalg::max_abs(q);
        let mut jumps = Vec::new();
        for k in 0..n {
            if vals[k].abs() <= 1e-15 * qscale.max(1e-300) {
                continue;
            }
            let mut l = CMat::zeros(dim, dim);
            for i in 0..n {
                if vecs[(i, k)] != 0.0 {
                    l += &xi[i] * Complex64::new(vecs[(i, k)], 0.0);
                }
            }
            h -= &l * &l * Complex64::new(0.0, 0.5 * vals[k]);
            jumps.push((vals[k], SparseOp::from_dense(&l)));
        }
        Ok(Self {
            layout,
            cutoff,
            effective: SparseOp::from_dense(&h),
            jumps,
            scale: linalg::max_abs(g).max(qscale).max(1.0),
        })
    }

    pub fn from_gaussian(gen: &crate::generator::GkslGenerator, cutoff: usize) -> Result<Self> {
        Self::from_quadratic(gen.layout, cutoff, &gen.hamiltonian, &gen.kossakowski)
    }

    /// `dρ/dt` for Hermitian `ρ`.
    ///
    /// With `X = −i H_eff ρ` the generator is `X + X† + Σ q_k L_k (L_k ρ)†`.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let n = rho.nrows();
        let mut x = CMat::zeros(n, n);
        self.effective.left_mul_add(rho, -I, &mut x);
        let mut out = &x + x.adjoint();
        for (q, l) in &self.jumps {
            let lr = l.mul(rho).adjoint();
            l.left_mul_add(&lr, Complex64::new(*q, 0.0), &mut out);
        }
        out
    }
}

/// Result of a Fock-space integration.
#[derive(Debug, Clone)]
pub struct FockRun {
    pub rho: DensityMatrix,
    pub steps: usize,
    pub max_leakage: f64,
    /// False once the top-level population exceeded the configured limit.
    pub trusted: bool,
}

/// Classical RK4 on the density matrix.
pub fn lindblad_integrate(gen: &FockGenerator, rho0: &DensityMatrix, t: f64, cfg: &FockConfig) -> Result<FockRun> {
    cfg.check()?;
    if rho0.layout != gen.layout || rho0.cutoff != gen.cutoff {
        return Err(dim_mismatch(
            format!("{:?} at cutoff {}", gen.layout, gen.cutoff),
            format!("{:?} at cutoff {}", rho0.layout, rho0.cutoff),
        ));
    }
    let initial = rho0.leakage();
    if initial > cfg.leakage_limit {
        return Err(Error::Leakage {
            leakage: initial,
            limit: cfg.leakage_limit,
        });
    }
    let h_max = cfg.max_step.min(1e-3 / gen.scale);
    let steps = if t > 0.0 { (t / h_max).ceil() as usize } else { 0 };
    let h = if steps > 0 { t / steps as f64 } else { 0.0 };
    let hc = Complex64::new(h, 0.0);
    let mut rho = rho0.data.clone();
    let mut max_leakage = initial;
    for _ in 0..steps {
        let k1 = gen.apply(&rho);
        let k2 = gen.apply(&(&rho + &k1 * (hc * 0.5)));
        let k3 = gen.apply(&(&rho + &k2 * (hc * 0.5)));
        let k4 = gen.apply(&(&rho + &k3 * hc));
        let two = Complex64::new(2.0, 0.0);
        rho += (k1 + k2 * two + k3 * two + k4) * (hc / 6.0);
        let probe = DensityMatrix {
            layout: rho0.layout,
            cutoff: rho0.cutoff,
            data: rho.clone(),
        };
        max_leakage = max_leakage.max(probe.leakage());
    }
    if !rho.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("density matrix"));
    }
    let herm = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(FockRun {
        rho: DensityMatrix {
            layout: rho0.layout,
            cutoff: rho0.cutoff,
            data: herm,
        },
        steps,
        max_leakage,
        trusted: max_leakage <= cfg.leakage_limit,
    })
}

/// First moments and symmetrized, centred second moments.
pub fn extract_covariance(rho: &DensityMatrix) -> (CovarianceMatrix, Vector) {
    let xi = quadratures(rho.layout.modes(), rho.cutoff);
    let n = xi.len();
    let tr = rho.trace().re;
    let ops: Vec<SparseOp> = xi.iter().map(SparseOp::from_dense).collect();
    let mean = Vector::from_iterator(n, ops.iter().map(|o| o.mul(&rho.data).trace().re / tr));
    let mut v = Mat::zeros(n, n);
    for i in 0..n {
        let xr = ops[i].mul(&rho.data);
        for j in i..n {
            // ½⟨{ξ_i, ξ_j}⟩ = Re tr(ξ_j ξ_i ρ).
            let val = ops[j].mul(&xr).trace().re / tr - mean[i] * mean[j];
            v[(i, j)] = val;
            v[(j, i)] = val;
        }
    }
    (
        CovarianceMatrix {
            layout: rho.layout,
            matrix: v,
        },
        mean,
    )
}

/// `log₂ ‖ρ^{T_B}‖₁`.
pub fn log_negativity_dense(rho: &DensityMatrix) -> f64 {
    let c = rho.cutoff;
    let da = c.pow(rho.layout.n_a() as u32);
    let db = c.pow(rho.layout.n_b() as u32);
    let pt = CMat::from_fn(da * db, da * db, |r, s| {
        let (a, b) = (r / db, r % db);
        let (a2, b2) = (s / db, s % db);
        rho.data[(a * db + b2, a2 * db + b)]
    });
    let tr = rho.trace().re;
    let norm: f64 = linalg::hermitian_eigenvalues(&pt).iter().map(|v| v.abs()).sum();
    (norm / tr).log2().max(0.0)
}

/// Operator `Σ z_i ξ_i` on the modes of one party.
fn party_operator(z: &Vector, modes: usize, cutoff: usize) -> CMat {
    let xi = quadratures(modes, cutoff);
    let dim = cutoff.pow(modes as u32);
    let mut m = CMat::zeros(dim, dim);
    for (i, op) in xi.iter().enumerate() {
        if z[i] != 0.0 {
            m += op * Complex64::new(z[i], 0.0);
        }
    }
    m
}

fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new((m + m.adjoint()) * Complex64::new(0.5, 0.0));
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Outcome of one record-averaged Kraus step.
#[derive(Debug, Clone)]
pub struct KrausStep {
    pub rho: DensityMatrix,
    /// `|1 − tr|` before renormalization.
    pub trace_defect: f64,
    /// Gauss-Hermite order that met the tolerance.
    pub quadrature_order: usize,
}

/// Quadrature tolerance of the record integrals.
pub const KRAUS_QUAD_TOL: f64 = 1e-14;
const KRAUS_ORDERS: [usize; 3] = [20, 40, 60];

/// `(1/√π) ∫ e^{−z²} e^{−iβz} dz` for each `β` by Gauss-Hermite of the given order.
fn gh_characteristic(order: usize, betas: &[f64]) -> Vec<Complex64> {
    let rule = GaussHermite::new(NonZeroUsize::new(order).expect("positive order"));
    let pairs = rule.as_node_weight_pairs();
    let norm = 1.0 / std::f64::consts::PI.sqrt();
    betas
        .iter()
        .map(|&b| {
            pairs
                .iter()
                .map(|&(z, w)| Complex64::from_polar(w * norm, -b * z))
                .sum()
        })
        .collect()
}

/// Averages `Σ_y K(y) ρ K(y)†` over measurement records for one channel.
///
/// In the joint eigenbasis of `X_A ⊗ 1` and `1 ⊗ X_B` every Kraus operator is diagonal, so each
/// matrix element picks up a factor that splits into one record integral per party. The Gaussian
/// envelope and the phase at the centre of each integral are exact; the remaining oscillatory
/// integral is evaluated by Gauss-Hermite quadrature with increasing order until it settles.
pub fn kraus_average_step(channel: &Rank1Channel, rho: &DensityMatrix, dt: f64) -> Result<KrausStep> {
    channel.validate(rho.layout)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidModel(format!("step must be positive, got {dt}")));
    }
    let c = rho.cutoff;
    let (na, nb) = (rho.layout.n_a(), rho.layout.n_b());
    let (alpha, wa) = hermitian_eigen(&party_operator(&channel.x_a, na, c));
    let (beta, wb) = hermitian_eigen(&party_operator(&channel.x_b, nb, c));
    let (da, db) = (alpha.len(), beta.len());
    let w = wa.kronecker(&wb);
    let rot = w.adjoint() * &rho.data * &w;

    let n = da * db;
    let (ga, gb, lam, ka, kb) = (
        channel.gamma_a,
        channel.gamma_b,
        channel.lambda,
        channel.kappa_a,
        channel.kappa_b,
    );
    let sa = (2.0 * ga * dt).sqrt();
    let sb = (2.0 * gb * dt).sqrt();
    let mut envelope = vec![ZERO; n * n];
    let mut betas_a = vec![0.0; n * n];
    let mut betas_b = vec![0.0; n * n];
    for s in 0..n {
        let (ja, jb) = (s / db, s % db);
        for r in 0..n {
            let (ia, ib) = (r / db, r % db);
            let del_a = alpha[ia] - alpha[ja];
            let del_b = beta[ib] - beta[jb];
            let cen_a = 0.5 * (alpha[ia] + alpha[ja]);
            let cen_b = 0.5 * (beta[ib] + beta[jb]);
            let om_a = dt * (ka * del_a + lam * del_b);
            let om_b = dt * (lam * del_a + kb * del_b);
            let decay = -0.5 * dt * (ga * del_a * del_a + gb * del_b * del_b);
            let k = s * n + r;
            envelope[k] = Complex64::from_polar(decay.exp(), -(om_a * cen_a + om_b * cen_b));
            betas_a[k] = om_a / sa;
            betas_b[k] = om_b / sb;
        }
    }

    let mut prev: Option<(Vec<Complex64>, Vec<Complex64>)> = None;
    let mut accepted = None;
    let mut last_change = f64::INFINITY;
    for order in KRAUS_ORDERS {
        let cur = (gh_characteristic(order, &betas_a), gh_characteristic(order, &betas_b));
        if let Some((pa, pb)) = &prev {
            let change = cur
                .0
                .iter()
                .zip(pa)
                .chain(cur.1.iter().zip(pb))
                .map(|(x, y)| (x - y).norm())
                .fold(0.0_f64, f64::max);
            last_change = change;
            if change <= KRAUS_QUAD_TOL {
                accepted = Some((order, cur));
                break;
            }
        }
        prev = Some(cur);
    }
    let Some((order, (ia, ib))) = accepted else {
        return Err(Error::Quadrature {
            order: *KRAUS_ORDERS.last().expect("orders"),
            change: last_change,
        });
    };

    let mut out = rot.clone();
    for s in 0..n {
        for r in 0..n {
            let k = s * n + r;
            out[(r, s)] *= envelope[k] * ia[k] * ib[k];
        }
    }
    let back = &w * out * w.adjoint();
    let tr = back.trace().re;
    let data = (&back + back.adjoint()) * Complex64::new(0.5 / tr, 0.0);
    Ok(KrausStep {
        rho: DensityMatrix {
            layout: rho.layout,
            cutoff: c,
            data,
        },
        trace_defect: (1.0 - tr).abs(),
        quadrature_order: order,
    })
}

/// `e^{−iHt}` for `H = ½ξᵀGξ` on the truncated space.
pub fn quadratic_unitary(layout: ModeLayout, cutoff: usize, g: &Mat, t: f64) -> CMat {
    let xi = quadratures(layout.modes(), cutoff);
    let dim = xi[0].nrows();
    let mut h = CMat::zeros(dim, dim);
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            if g[(i, j)] != 0.0 {
                h += &xi[i] * &xi[j] * Complex64::new(0.5 * g[(i, j)], 0.0);
            }
        }
    }
    let (vals, vecs) = hermitian_eigen(&h);
    let phases = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        vals.iter().map(|e| Complex64::from_polar(1.0, -e * t)),
    ));
    &vecs * phases * vecs.adjoint()
}

/// All channels of the protocol in order, then its local unitary.
pub fn kraus_protocol_step(protocol: &LoccProtocol, rho: &DensityMatrix, dt: f64) -> Result<KrausStep> {
    protocol.validate()?;
    let mut cur = rho.clone();
    let mut trace_defect = 0.0_f64;
    let mut quadrature_order = 0;
    for ch in &protocol.channels {
        let step = kraus_average_step(ch, &cur, dt)?;
        trace_defect = trace_defect.max(step.trace_defect);
        quadrature_order = quadrature_order.max(step.quadrature_order);
        cur = step.rho;
    }
    let u = quadratic_unitary(protocol.layout, rho.cutoff, &protocol.local_unitary_generator, dt);
    cur.data = &u * &cur.data * u.adjoint();
    Ok(KrausStep {
        rho: cur,
        trace_defect,
        quadrature_order,
    })
}

/// Trace distance `½‖ρ − σ‖₁`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    0.5 * linalg::hermitian_eigenvalues(&(&a.data - &b.data))
        .iter()
        .map(|v| v.abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve;
    use crate::generator::build_generator;
    use crate::model::SystemModel;
    use approx::assert_abs_diff_eq;

    fn one_mode() -> ModeLayout {
        ModeLayout::new(1, 0).unwrap()
    }

    #[test]
    fn canonical_commutator_below_cutoff() {
        let (x, p) = single_mode_quadratures(8);
        let comm = &x * &p - &p * &x;
        for n in 0..7 {
            assert_abs_diff_eq!(comm[(n, n)].im, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn vacuum_moments() {
        let rho = DensityMatrix::vacuum(ModeLayout::new(1, 1).unwrap(), 6);
        let (v, m) = extract_covariance(&rho);
        assert!(linalg::max_abs(&(v.matrix - Mat::identity(4, 4) * 0.5)) < 1e-14);
        assert!(m.amax() < 1e-15);
    }

    #[test]
    fn coherent_state_mean() {
        let c = 20;
        let alpha = Complex64::new(0.6, -0.3);
        let rho = DensityMatrix::product(one_mode(), c, &[coherent_ket(alpha, c)]).unwrap();
        let (v, m) = extract_covariance(&rho);
        assert_abs_diff_eq!(m[0], 2.0_f64.sqrt() * 0.6, epsilon = 1e-10);
        assert_abs_diff_eq!(m[1], 2.0_f64.sqrt() * -0.3, epsilon = 1e-10);
        assert!(linalg::max_abs(&(v.matrix - Mat::identity(2, 2) * 0.5)) < 1e-9);
    }

    #[test]
    fn squeezed_vacuum_variances() {
        let (r, c) = (0.3, 30);
        let rho = DensityMatrix::product(one_mode(), c, &[squeezed_vacuum_ket(r, c)]).unwrap();
        let (v, _) = extract_covariance(&rho);
        assert_abs_diff_eq!(v.matrix[(0, 0)], (-2.0 * r).exp() / 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(v.matrix[(1, 1)], (2.0 * r).exp() / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn tmsv_log_negativity() {
        let (r, c) = (0.5_f64, 20);
        let rho = two_mode_squeezed_rho(r, c);
        // Truncated Schmidt coefficients tanhⁿr give ‖ρ^T‖₁ = (Σ tanhⁿr)² / Σ tanh²ⁿr.
        let th = r.tanh();
        let s1: f64 = (0..c).map(|n| th.powi(n as i32)).sum();
        let s2: f64 = (0..c).map(|n| th.powi(2 * n as i32)).sum();
        let ln = log_negativity_dense(&rho);
        assert_abs_diff_eq!(ln, (s1 * s1 / s2).log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(ln, 1.0 / std::f64::consts::LN_2, epsilon = 1e-5);
    }

    #[test]
    fn position_noise_normalization() {
        // Q = S e_x e_xᵀ heats ⟨p²⟩ at rate S; this fixes the Gaussian diffusion D = ΩQΩᵀ.
        let s = 0.4;
        let g = Mat::zeros(2, 2);
        let q = Mat::from_row_slice(2, 2, &[s, 0.0, 0.0, 0.0]);
        let gen = FockGenerator::from_quadratic(one_mode(), 24, &g, &q).unwrap();
        let run = lindblad_integrate(
            &gen,
            &DensityMatrix::vacuum(one_mode(), 24),
            0.5,
            &FockConfig::with_cutoff(24),
        )
        .unwrap();
        let (v, _) = extract_covariance(&run.rho);
        assert_abs_diff_eq!(v.matrix[(1, 1)], 0.5 + s * 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(v.matrix[(0, 0)], 0.5, epsilon = 1e-9);
    }

    #[test]
    fn gaussian_and_fock_agree() {
        let model = SystemModel::position_coupled_oscillators(0.2, 0.1, 0.15, 0.05).unwrap();
        let gen = build_generator(&model).unwrap();
        let fgen = FockGenerator::from_gaussian(&gen, 12).unwrap();
        let rho0 = DensityMatrix::vacuum(model.layout, 12);
        let run = lindblad_integrate(&fgen, &rho0, 1.0, &FockConfig::default()).unwrap();
        assert!(run.trusted);
        let (v, _) = extract_covariance(&run.rho);
        let exact = evolve(&gen, &CovarianceMatrix::vacuum(model.layout), 1.0, 1).unwrap();
        let err = linalg::max_abs(&(v.matrix - exact.matrix));
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn leakage_guard() {
        let c = 6;
        let rho = DensityMatrix::product(one_mode(), c, &[coherent_ket(Complex64::new(2.0, 0.0), c)]).unwrap();
        let gen = FockGenerator::from_quadratic(one_mode(), c, &Mat::identity(2, 2), &Mat::zeros(2, 2)).unwrap();
        assert!(matches!(
            lindblad_integrate(&gen, &rho, 0.1, &FockConfig::with_cutoff(c)),
            Err(Error::Leakage { .. })
        ));
    }

    #[test]
    fn characteristic_matches_closed_form() {
        let betas = [0.0, 0.3, 1.0, 2.5];
        let got = gh_characteristic(40, &betas);
        for (b, g) in betas.iter().zip(got) {
            assert_abs_diff_eq!(g.re, (-b * b / 4.0).exp(), epsilon = 1e-14);
            assert_abs_diff_eq!(g.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn kraus_channel_is_its_semigroup() {
        let layout = ModeLayout::new(1, 1).unwrap();
        let ch = Rank1Channel {
            x_a: Vector::from_vec(vec![1.0, 0.0]),
            x_b: Vector::from_vec(vec![0.6, 0.8]),
            gamma_a: 0.7,
            gamma_b: 0.4,
            lambda: 0.5,
            kappa_a: 0.2,
            kappa_b: -0.1,
        };
        let c = 10;
        let rho = DensityMatrix::product(
            layout,
            c,
            &[coherent_ket(Complex64::new(0.3, 0.1), c), coherent_ket(Complex64::new(-0.2, 0.2), c)],
        )
        .unwrap();
        let dt = 0.01;
        let step = kraus_average_step(&ch, &rho, dt).unwrap();
        let (g, q) = ch.quadratic_forms(layout);
        let gen = FockGenerator::from_quadratic(layout, c, &g, &q).unwrap();
        let cfg = FockConfig {
            cutoff: c,
            max_step: 1e-4,
            leakage_limit: 1.0,
        };
        let run = lindblad_integrate(&gen, &rho, dt, &cfg).unwrap();
        let d = trace_distance(&step.rho, &run.rho);
        assert!(d < 1e-11, "{d}");
        assert!(step.trace_defect < 1e-12);
    }
}
