//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    // column-major fill keeps the draw order independent of nalgebra internals
    let mut m = CMat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

/// Thin SVD `m = u * diag(s) * v_t`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v_t: CMat,
}

impl Svd {
    fn recompose_error(&self, m: &CMat) -> f64 {
        let mut us = self.u.clone();
        for (k, mut col) in us.column_iter_mut().enumerate() {
            col *= c(self.s[k], 0.0);
        }
        (us * &self.v_t - m).norm()
    }

    fn sorted(mut self) -> Self {
        let mut idx: Vec<usize> = (0..self.s.len()).collect();
        idx.sort_by(|&a, &b| self.s[b].total_cmp(&self.s[a]));
        if idx.iter().enumerate().any(|(i, &k)| i != k) {
            self.u = CMat::from_columns(&idx.iter().map(|&k| self.u.column(k).into_owned()).collect::<Vec<_>>());
            self.v_t = CMat::from_rows(&idx.iter().map(|&k| self.v_t.row(k).into_owned()).collect::<Vec<_>>());
            self.s = idx.iter().map(|&k| self.s[k]).collect();
        }
        self
    }
}

fn raw_svd(m: &CMat) -> Svd {
    let svd = m.clone().svd(true, true);
    Svd {
        u: svd.u.expect("left singular vectors requested"),
        s: svd.singular_values.iter().copied().collect(),
        v_t: svd.v_t.expect("right singular vectors requested"),
    }
}

/// SVD with a reconstruction check.
///
/// nalgebra's complex SVD occasionally converges to an inaccurate
/// factorization; the adjoint and a row-reversed copy are tried as fallbacks
/// and the most accurate result is kept.
pub fn svd(m: &CMat) -> Svd {
    let bound = 1e-11 * (1.0 + m.norm()) * (m.nrows().max(m.ncols()) as f64).sqrt();
    let direct = raw_svd(m);
    let err = direct.recompose_error(m);
    if err <= bound {
        return direct.sorted();
    }
    let mut best = (err, direct);

    let adj = raw_svd(&m.adjoint());
    let candidate = Svd { u: adj.v_t.adjoint(), s: adj.s, v_t: adj.u.adjoint() };
    let err = candidate.recompose_error(m);
    if err < best.0 {
        best = (err, candidate);
    }
    if best.0 > bound {
        let rows = m.nrows();
        let flipped = CMat::from_fn(rows, m.ncols(), |i, j| m[(rows - 1 - i, j)]);
        let mut candidate = raw_svd(&flipped);
        let u = candidate.u.clone();
        candidate.u = CMat::from_fn(rows, u.ncols(), |i, j| u[(rows - 1 - i, j)]);
        let err = candidate.recompose_error(m);
        if err < best.0 {
            best = (err, candidate);
        }
    }
    best.1.sorted()
}

/// Singular values in descending order. Empty for a matrix with a zero dimension.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    svd(m).s
}

/// Number of singular values above `rel_tol * scale`, where `scale` defaults to
/// the largest singular value of `m`.
pub fn numerical_rank(m: &CMat, rel_tol: f64, scale: Option<f64>) -> usize {
    let s = singular_values(m);
    let reference = scale.unwrap_or_else(|| s.first().copied().unwrap_or(0.0));
    if reference <= 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * reference).count()
}

pub fn is_full_rank(m: &CMat, rel_tol: f64) -> bool {
    numerical_rank(m, rel_tol, None) == m.nrows().min(m.ncols())
}

/// Orthonormal basis of the null space of `m` (columns), using the singular
/// value threshold `rel_tol * sigma_max`.
pub fn null_space(m: &CMat, rel_tol: f64) -> CMat {
    let n = m.ncols();
    if n == 0 {
        return CMat::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMat::identity(n, n);
    }
    // pad to at least n rows so the SVD returns a full set of right vectors
    let rows = m.nrows().max(n);
    let mut padded = CMat::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let dec = svd(&padded);
    let v_t = &dec.v_t;
    let smax = dec.s.first().copied().unwrap_or(0.0);
    let cols: Vec<usize> = (0..dec.s.len())
        .filter(|&k| smax <= 0.0 || dec.s[k] <= rel_tol * smax)
        .collect();
    let mut basis = CMat::zeros(n, cols.len());
    for (out, &k) in cols.iter().enumerate() {
        for i in 0..n {
            basis[(i, out)] = v_t[(k, i)].conj();
        }
    }
    basis
}

/// Orthonormalizes the columns of `m` with a thin QR factorization.
pub fn orthonormal_columns(m: &CMat) -> CMat {
    if m.ncols() == 0 {
        return CMat::zeros(m.nrows(), 0);
    }
    m.clone().qr().q().columns(0, m.ncols()).into_owned()
}

pub fn hstack(blocks: &[&CMat]) -> CMat {
    let rows = blocks.iter().map(|b| b.nrows()).max().unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        if b.ncols() > 0 {
            assert_eq!(b.nrows(), rows, "hstack row mismatch");
            out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        }
        at += b.ncols();
    }
    out
}

pub fn vstack(top: &CMat, bottom: &CMat) -> CMat {
    let cols = top.ncols().max(bottom.ncols());
    let mut out = CMat::zeros(top.nrows() + bottom.nrows(), cols);
    if top.nrows() > 0 {
        out.view_mut((0, 0), (top.nrows(), cols)).copy_from(top);
    }
    if bottom.nrows() > 0 {
        out.view_mut((top.nrows(), 0), (bottom.nrows(), cols)).copy_from(bottom);
    }
    out
}

/// Outcome of a minimum-norm solve of an underdetermined system.
#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub x: CVec,
    /// Smallest over largest singular value of the system matrix.
    pub conditioning: f64,
    pub residual: f64,
}

/// Minimum-norm solution of `a x = b` through the SVD of `a`.
///
/// Singular values below `rel_tol * sigma_max` are dropped; `conditioning`
/// reports the unclipped ratio so callers can reject deficient systems.
pub fn min_norm_solve(a: &CMat, b: &CVec, rel_tol: f64) -> MinNormSolution {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return MinNormSolution { x: CVec::zeros(n), conditioning: 1.0, residual: b.norm() };
    }
    let dec = svd(a);
    let (u, v_t, s) = (&dec.u, &dec.v_t, &dec.s);
    let smax = s.first().copied().unwrap_or(0.0);
    let smin = s.last().copied().unwrap_or(0.0);
    let apply_pinv = |rhs: &CVec| {
        let ub = u.adjoint() * rhs;
        let mut scaled = CVec::zeros(s.len());
        for k in 0..s.len() {
            if s[k] > rel_tol * smax {
                scaled[k] = ub[k] / s[k];
            }
        }
        v_t.adjoint() * scaled
    };
    let mut x = apply_pinv(b);
    // a couple of refinement steps recover accuracy on poorly scaled systems
    for _ in 0..2 {
        let r = b - a * &x;
        x += apply_pinv(&r);
    }
    let residual = (a * &x - b).norm();
    let conditioning = if smax > 0.0 { smin / smax } else { 0.0 };
    MinNormSolution { x, conditioning, residual }
}

/// `log2 det(I + X^H K^{-1} X)`; `k` must be Hermitian positive definite.
pub fn log2det_gain(k: &CMat, x: &CMat) -> f64 {
    if x.ncols() == 0 {
        return 0.0;
    }
    let chol = k.clone().cholesky().expect("noise covariance must be positive definite");
    let kinv_x = chol.solve(x);
    let gram = x.adjoint() * kinv_x;
    log2det_identity_plus(&gram)
}

/// `log2 det(I + M)` for a Hermitian positive semi-definite `m`.
pub fn log2det_identity_plus(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    eig.eigenvalues.iter().map(|&l| (1.0 + l.max(0.0)).log2()).sum()
}

/// Largest entry magnitude of a sub-block (zero for an empty block).
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
