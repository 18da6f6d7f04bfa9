//! Symplectic forms, physicality, Williamson normal form and partial transposition.
//!
//! Quadratures are interleaved per mode, `(x₁, p₁, …, x_n, p_n)`, with the `A` modes first.
//! Units have ħ = 1, so the vacuum covariance is `½·I`.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{self, CMat, Mat};

/// Default physicality tolerance, relative to `‖V‖_max`.
pub const TOL_PSD: f64 = 1e-9;

/// Split of the modes into the two parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLayout", into = "RawLayout")]
pub struct ModeLayout {
    n_a: usize,
    n_b: usize,
}

#[derive(Serialize, Deserialize)]
struct RawLayout {
    n_a: usize,
    n_b: usize,
}

impl TryFrom<RawLayout> for ModeLayout {
    type Error = Error;
    fn try_from(r: RawLayout) -> Result<Self> {
        ModeLayout::new(r.n_a, r.n_b)
    }
}

impl From<ModeLayout> for RawLayout {
    fn from(l: ModeLayout) -> Self {
        RawLayout { n_a: l.n_a, n_b: l.n_b }
    }
}

impl ModeLayout {
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        if n_a == 0 {
            return Err(Error::InvalidLayout("subsystem A needs at least one mode".into()));
        }
        Ok(Self { n_a, n_b })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn modes(&self) -> usize {
        self.n_a + self.n_b
    }

    /// Phase-space dimension `2(n_A + n_B)`.
    pub fn dim(&self) -> usize {
        2 * self.modes()
    }

    pub fn dim_a(&self) -> usize {
        2 * self.n_a
    }

    pub fn dim_b(&self) -> usize {
        2 * self.n_b
    }
}

/// The 2×2 block `[[0, 1], [−1, 0]]`.
pub fn eta() -> Mat {
    Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])
}

/// `η ⊕ … ⊕ η` over `n` modes.
pub fn omega(n: usize) -> Mat {
    let mut m = Mat::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(2 * k, 2 * k + 1)] = 1.0;
        m[(2 * k + 1, 2 * k)] = -1.0;
    }
    m
}

/// The symplectic form of a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    pub matrix: Mat,
}

pub fn build_form(layout: ModeLayout) -> SymplecticForm {
    SymplecticForm {
        matrix: omega(layout.modes()),
    }
}

/// Second-moment matrix of a bipartite Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub layout: ModeLayout,
    pub matrix: Mat,
}

impl CovarianceMatrix {
    /// Wraps `matrix`, checking shape and symmetry (relative tolerance 1e-10).
    pub fn new(layout: ModeLayout, matrix: Mat) -> Result<Self> {
        let n = layout.dim();
        if matrix.shape() != (n, n) {
            return Err(dim_mismatch(format!("{n}x{n}"), format!("{:?}", matrix.shape())));
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::NonFinite("covariance matrix"));
        }
        let asym = linalg::max_abs(&(&matrix - matrix.transpose()));
        if asym > 1e-10 * linalg::max_abs(&matrix).max(1.0) {
            return Err(Error::InvalidModel(format!(
                "covariance matrix is not symmetric (max asymmetry {asym:e})"
            )));
        }
        Ok(Self {
            layout,
            matrix: linalg::symmetrize(&matrix),
        })
    }

    pub fn vacuum(layout: ModeLayout) -> Self {
        let n = layout.dim();
        Self {
            layout,
            matrix: Mat::identity(n, n) * 0.5,
        }
    }

    pub fn block_a(&self) -> Mat {
        let a = self.layout.dim_a();
        self.matrix.view((0, 0), (a, a)).into_owned()
    }

    pub fn block_b(&self) -> Mat {
        let a = self.layout.dim_a();
        let b = self.layout.dim_b();
        self.matrix.view((a, a), (b, b)).into_owned()
    }

    pub fn block_ab(&self) -> Mat {
        let a = self.layout.dim_a();
        let b = self.layout.dim_b();
        self.matrix.view((0, a), (a, b)).into_owned()
    }
}

/// Returns true iff `V + (i/2)Ω ⪰ −tol·‖V‖_max`.
pub fn is_physical(v: &CovarianceMatrix, tol: f64) -> bool {
    physicality_margin(&v.matrix) >= -tol * linalg::max_abs(&v.matrix).max(1.0)
}

/// Same check on a bare matrix; errors on a non-square or odd-sized input.
pub fn is_physical_matrix(v: &Mat, tol: f64) -> Result<bool> {
    let (r, c) = v.shape();
    if r != c || r % 2 != 0 {
        return Err(dim_mismatch("square matrix of even size", format!("{r}x{c}")));
    }
    Ok(physicality_margin(v) >= -tol * linalg::max_abs(v).max(1.0))
}

/// Smallest eigenvalue of the Hermitian matrix `V + (i/2)Ω`.
pub fn physicality_margin(v: &Mat) -> f64 {
    let n = v.nrows();
    if n == 0 {
        return 0.0;
    }
    let om = omega(n / 2);
    let h = CMat::from_fn(n, n, |i, j| Complex64::new(v[(i, j)], 0.5 * om[(i, j)]));
    linalg::hermitian_min_eigenvalue(&h)
}

/// Williamson normal form `S V Sᵀ = diag(ν₁, ν₁, …, ν_n, ν_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonDecomposition {
    pub s: Mat,
    /// Symplectic eigenvalues, descending.
    pub nu: Vec<f64>,
}

/// Computes the Williamson decomposition of a positive-definite matrix.
///
/// With `K = V^{-1/2} Ω V^{-1/2}`, the Hermitian matrix `iK` has eigenvalues `±1/ν`. For each
/// positive eigenvector `z = x + iy` the rows `√2·y`, `√2·x` form an orthonormal basis `O` in which
/// `K` is `⊕ ν⁻¹ η`, and `S = D^{1/2} O V^{-1/2}`.
pub fn williamson(v: &Mat) -> Result<WilliamsonDecomposition> {
    let dim = v.nrows();
    if v.ncols() != dim || dim % 2 != 0 {
        return Err(dim_mismatch("square matrix of even size", format!("{:?}", v.shape())));
    }
    let n = dim / 2;
    let (vals, vecs) = linalg::sym_eigen(v);
    if vals.len() > 0 && vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite(vals[0]));
    }
    let inv_sqrt = &vecs * Mat::from_diagonal(&vals.map(|x| 1.0 / x.sqrt())) * vecs.transpose();
    let k = &inv_sqrt * omega(n) * &inv_sqrt;
    let ik = CMat::from_fn(dim, dim, |i, j| Complex64::new(0.0, k[(i, j)]));
    let eig = SymmetricEigen::new(ik);

    // Positive eigenvalues, largest ν (smallest μ) first.
    let mut pos: Vec<usize> = (0..dim).filter(|&i| eig.eigenvalues[i] > 0.0).collect();
    if pos.len() != n {
        return Err(Error::NotPositiveDefinite(vals[0]));
    }
    pos.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut rows: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(dim);
    let mut nu = Vec::with_capacity(n);
    for &idx in &pos {
        let mut z = eig.eigenvectors.column(idx).into_owned();
        z /= Complex64::new(z.norm(), 0.0);
        // Phase convention: the largest component becomes positive imaginary.
        let mut best = 0;
        for i in 1..dim {
            if z[i].norm() > z[best].norm() * (1.0 + 1e-12) {
                best = i;
            }
        }
        let ph = z[best] / Complex64::new(z[best].norm(), 0.0);
        z *= Complex64::new(0.0, 1.0) / ph;
        let x = z.map(|c| c.re * std::f64::consts::SQRT_2);
        let y = z.map(|c| c.im * std::f64::consts::SQRT_2);
        rows.push(y);
        rows.push(x);
        nu.push(1.0 / eig.eigenvalues[idx]);
    }
    // Modified Gram-Schmidt on the basis rows.
    for i in 0..rows.len() {
        for j in 0..i {
            let proj = rows[i].dot(&rows[j]);
            let rj = rows[j].clone();
            rows[i] -= rj * proj;
        }
        let norm = rows[i].norm();
        rows[i] /= norm;
    }
    let mut o = Mat::zeros(dim, dim);
    for (i, r) in rows.iter().enumerate() {
        o.set_row(i, &r.transpose());
    }
    let d_sqrt = Mat::from_fn(dim, dim, |i, j| if i == j { nu[i / 2].sqrt() } else { 0.0 });
    Ok(WilliamsonDecomposition {
        s: d_sqrt * o * inv_sqrt,
        nu,
    })
}

/// Symplectic eigenvalues, ascending, each reported once.
///
/// They are the singular values of the antisymmetric matrix `V^{1/2} Ω V^{1/2}`, which come in
/// equal pairs.
pub fn symplectic_spectrum(v: &Mat) -> Result<Vec<f64>> {
    let dim = v.nrows();
    if v.ncols() != dim || dim % 2 != 0 {
        return Err(dim_mismatch("square matrix of even size", format!("{:?}", v.shape())));
    }
    if dim == 0 {
        return Ok(Vec::new());
    }
    let r = linalg::sqrtm_psd(v);
    let k = &r * omega(dim / 2) * &r;
    let mut sv: Vec<f64> = k.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    Ok(sv
        .chunks(2)
        .map(|pair| 0.5 * (pair[0] + pair[1]))
        .collect())
}

/// Momentum-flip matrix on the B modes.
pub fn pt_flip(layout: ModeLayout) -> Mat {
    let n = layout.dim();
    Mat::from_fn(n, n, |i, j| {
        if i != j {
            0.0
        } else if i >= layout.dim_a() && i % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    })
}

/// `P V P` with `p_B → −p_B`.
pub fn partial_transpose(v: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if v.layout.n_b() == 0 {
        return Err(Error::InvalidLayout(
            "partial transpose needs at least one B mode".into(),
        ));
    }
    let a = v.layout.dim_a();
    let mut m = v.matrix.clone();
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            let fi = i >= a && i % 2 == 1;
            let fj = j >= a && j % 2 == 1;
            if fi != fj {
                m[(i, j)] = -m[(i, j)];
            }
        }
    }
    Ok(CovarianceMatrix {
        layout: v.layout,
        matrix: m,
    })
}

/// Two-mode squeezed vacuum covariance with squeezing `r` (1+1 modes).
pub fn two_mode_squeezed(r: f64) -> CovarianceMatrix {
    let c = (2.0 * r).cosh() * 0.5;
    let s = (2.0 * r).sinh() * 0.5;
    let m = Mat::from_row_slice(
        4,
        4,
        &[
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        ],
    );
    CovarianceMatrix {
        layout: ModeLayout::new(1, 1).expect("valid layout"),
        matrix: m,
    }
}

/// Applies a symplectic matrix: `S V Sᵀ`.
pub fn congruence(s: &Mat, v: &Mat) -> Mat {
    linalg::symmetrize(&(s * v * s.transpose()))
}
