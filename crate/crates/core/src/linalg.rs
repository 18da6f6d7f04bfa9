//! Small dense linear-algebra helpers shared by the Gaussian and Fock modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type CMat = DMatrix<Complex64>;

/// ½(M + Mᵀ).
pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn is_finite(m: &Mat) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Matrix exponential (scaling and squaring with Padé approximants up to degree 13).
pub fn expm(m: &Mat) -> Mat {
    if m.nrows() == 0 {
        return m.clone();
    }
    m.clone().exp()
}

/// Eigen-decomposition of a real symmetric matrix with eigenvalues sorted ascending.
pub fn sym_eigen(m: &Mat) -> (Vector, Mat) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Mat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    sym_eigen(m).0[0]
}

/// Smallest eigenvalue of a Hermitian complex matrix.
pub fn hermitian_min_eigenvalue(m: &CMat) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v))
}

/// Eigenvalues of a Hermitian complex matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_fn(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (vals, vecs) = sym_eigen(m);
    let d = Mat::from_diagonal(&vals.map(f));
    &vecs * d * vecs.transpose()
}

/// Principal square root of a symmetric PSD matrix; tiny negative eigenvalues are clamped.
pub fn sqrtm_psd(m: &Mat) -> Mat {
    sym_fn(m, |x| x.max(0.0).sqrt())
}

/// Square root and Moore-Penrose inverse square root of a PSD matrix.
///
/// Eigenvalues below `rel_cutoff · ‖M‖` count as zero. Returns `(M^{1/2}, M^{+1/2}, rank)`.
pub fn psd_sqrt_pinv(m: &Mat, rel_cutoff: f64) -> (Mat, Mat, usize) {
    let (vals, vecs) = sym_eigen(m);
    let scale = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let cut = rel_cutoff * scale;
    let n = vals.len();
    let mut s = Mat::zeros(n, n);
    let mut p = Mat::zeros(n, n);
    let mut rank = 0;
    for i in 0..n {
        if vals[i] > cut && vals[i] > 0.0 {
            let r = vals[i].sqrt();
            s[(i, i)] = r;
            p[(i, i)] = 1.0 / r;
            rank += 1;
        }
    }
    (
        &vecs * s * vecs.transpose(),
        &vecs * p * vecs.transpose(),
        rank,
    )
}

/// Largest singular value.
pub fn op_norm(m: &Mat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |a, &v| a.max(v))
}

/// Block-diagonal direct sum.
pub fn direct_sum(a: &Mat, b: &Mat) -> Mat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = Mat::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// `∫₀ᵗ e^{As} B e^{Cs} ds` from one augmented exponential.
///
/// The upper-right block of `exp([[−A, B], [0, C]] t)` equals `e^{−At} ∫₀ᵗ e^{As} B e^{Cs} ds`.
pub fn sandwich_integral(a: &Mat, b: &Mat, c: &Mat, t: f64) -> Mat {
    let (n, m) = b.shape();
    let mut aug = Mat::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(-a * t));
    aug.view_mut((0, n), (n, m)).copy_from(&(b * t));
    aug.view_mut((n, n), (m, m)).copy_from(&(c * t));
    let e = expm(&aug);
    expm(&(a * t)) * e.view((0, n), (n, m))
}

/// One exact step of `dV/dt = AV + VAᵀ + D`: returns `(E, W)` with `V(h) = E V Eᵀ + W`.
pub fn lyapunov_propagator(a: &Mat, d: &Mat, h: f64) -> (Mat, Mat) {
    let n = a.nrows();
    let mut aug = Mat::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * h));
    aug.view_mut((0, n), (n, n)).copy_from(&(d * h));
    aug.view_mut((n, n), (n, n)).copy_from(&(-a.transpose() * h));
    let e = expm(&aug);
    let phi = e.view((0, 0), (n, n)).into_owned();
    let w = symmetrize(&(e.view((0, n), (n, n)) * phi.transpose()));
    (phi, w)
}

/// Composite Simpson rule on equally spaced samples; an even count closes with the 3/8 rule.
pub fn simpson(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (samples[0] + samples[1]),
        _ if n % 2 == 1 => simpson_odd(samples, h),
        _ => {
            let s = &samples[n - 4..];
            simpson_odd(&samples[..n - 3], h)
                + 3.0 * h / 8.0 * (s[0] + 3.0 * s[1] + 3.0 * s[2] + s[3])
        }
    }
}

fn simpson_odd(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    if n < 3 {
        return 0.0;
    }
    let inner: f64 = samples[1..n - 1]
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v })
        .sum();
    (samples[0] + samples[n - 1] + inner) * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sandwich_matches_quadrature() {
        let a = Mat::from_row_slice(2, 2, &[0.1, 1.0, -1.0, 0.2]);
        let b = Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 2.0]);
        let c = Mat::from_row_slice(2, 2, &[-0.3, 0.0, 0.4, 0.1]);
        let t = 0.7;
        let got = sandwich_integral(&a, &b, &c, t);
        let n = 2001;
        let h = t / (n - 1) as f64;
        for i in 0..2 {
            for j in 0..2 {
                let s: Vec<f64> = (0..n)
                    .map(|k| {
                        let s = k as f64 * h;
                        (expm(&(&a * s)) * &b * expm(&(&c * s)))[(i, j)]
                    })
                    .collect();
                assert_abs_diff_eq!(got[(i, j)], simpson(&s, h), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn simpson_exact_for_cubics() {
        for n in 4..9 {
            let h = 1.0 / (n - 1) as f64;
            let s: Vec<f64> = (0..n).map(|k| (k as f64 * h).powi(3)).collect();
            assert_abs_diff_eq!(simpson(&s, h), 0.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn pinv_sqrt_on_rank_one() {
        let u = Vector::from_vec(vec![3.0, 4.0]);
        let q = &u * u.transpose();
        let (s, p, r) = psd_sqrt_pinv(&q, 1e-12);
        assert_eq!(r, 1);
        assert_abs_diff_eq!(max_abs(&(&s * &s - &q)), 0.0, epsilon = 1e-12);
        let proj = &s * &p;
        assert_abs_diff_eq!((&proj * &u - &u).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn lyapunov_step_zero_drift() {
        let a = Mat::zeros(2, 2);
        let d = Mat::from_diagonal(&Vector::from_vec(vec![0.0, 2.0]));
        let (e, w) = lyapunov_propagator(&a, &d, 0.25);
        assert_abs_diff_eq!(max_abs(&(e - Mat::identity(2, 2))), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[(1, 1)], 0.5, epsilon = 1e-15);
    }
}
