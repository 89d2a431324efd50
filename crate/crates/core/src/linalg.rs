//! Dense complex linear algebra shared by every module: SVD with a
//! recorded rank threshold, kernels, images and small helpers.

use nalgebra::DMatrix;
use ndarray::Array2;
use ndarray_linalg::{EigValsh, SVD, UPLO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// How the numerical rank of a matrix is decided.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub enum RankTolerance {
    /// `max(rows, cols) * f64::EPSILON * sigma_max`.
    #[default]
    Relative,
    /// Singular values strictly above this value count toward the rank.
    Absolute(f64),
}

impl RankTolerance {
    pub fn threshold(self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        match self {
            RankTolerance::Relative => rows.max(cols) as f64 * f64::EPSILON * sigma_max,
            RankTolerance::Absolute(t) => t,
        }
    }
}

/// Singular value decomposition with a full right factor.
///
/// `left` holds one column per entry of `singular_values` (the thin factor);
/// `right` is square, so its trailing columns span the kernel.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub rows: usize,
    pub cols: usize,
    /// Descending, length `min(rows, cols)`.
    pub singular_values: Vec<f64>,
    pub left: CMat,
    pub right: CMat,
    pub threshold: f64,
    pub rank: usize,
}

impl Decomposition {
    pub fn new(m: &CMat, tol: RankTolerance) -> Self {
        Self::with_scale(m, tol, 0.0)
    }

    /// Like [`Decomposition::new`], but a relative threshold is taken against
    /// `max(sigma_max, scale)`. A matrix whose entries are rounding residue of
    /// larger terms then reads as zero rather than as full rank.
    pub fn with_scale(m: &CMat, tol: RankTolerance, scale: f64) -> Self {
        let (rows, cols) = m.shape();
        let k = rows.min(cols);
        if k == 0 {
            return Self {
                rows,
                cols,
                singular_values: Vec::new(),
                left: CMat::zeros(rows, 0),
                right: CMat::identity(cols, cols),
                threshold: tol.threshold(rows, cols, scale),
                rank: 0,
            };
        }
        let (u, s, v_t) = to_array(m).svd(true, true).expect("LAPACK SVD failed to converge");
        let u = from_array(&u.expect("left factor requested"));
        let v_t = from_array(&v_t.expect("right factor requested"));
        let u = u.columns(0, k).into_owned();
        let s: Vec<f64> = s.to_vec();
        let sigma_max = s.first().copied().unwrap_or(0.0);
        let threshold = tol.threshold(rows, cols, sigma_max.max(scale));
        let rank = s.iter().filter(|&&x| x > threshold).count();
        Self {
            rows,
            cols,
            singular_values: s,
            left: u,
            right: v_t.adjoint(),
            threshold,
            rank,
        }
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Smallest singular value above the rank threshold, `None` for a numerically zero map.
    pub fn smallest_positive(&self) -> Option<f64> {
        if self.rank == 0 {
            None
        } else {
            Some(self.singular_values[self.rank - 1])
        }
    }

    /// Largest singular value treated as zero, if any.
    pub fn largest_discarded(&self) -> Option<f64> {
        self.singular_values.get(self.rank).copied()
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank
    }

    /// Orthonormal basis of the kernel (columns).
    pub fn kernel(&self) -> CMat {
        self.right.columns(self.rank, self.cols - self.rank).into_owned()
    }

    /// Orthonormal basis of the row space, i.e. the orthogonal complement of the kernel.
    pub fn coimage(&self) -> CMat {
        self.right.columns(0, self.rank).into_owned()
    }

    /// Orthonormal basis of the image.
    pub fn image(&self) -> CMat {
        self.left.columns(0, self.rank).into_owned()
    }
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let (_, s, _) = to_array(m).svd(false, false).expect("LAPACK SVD failed to converge");
    s.to_vec()
}

fn to_array(m: &CMat) -> Array2<C64> {
    Array2::from_shape_fn(m.shape(), |(i, j)| m[(i, j)])
}

fn from_array(a: &Array2<C64>) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value over all `min(rows, cols)` values; `+inf` for an
/// operator on the zero space, 0 when the matrix has fewer rows than columns.
pub fn min_gain(m: &CMat) -> f64 {
    if m.ncols() == 0 {
        return f64::INFINITY;
    }
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn real_spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let a = Array2::from_shape_fn(m.shape(), |(i, j)| m[(i, j)]);
    let (_, s, _) = a.svd(false, false).expect("LAPACK SVD failed to converge");
    s.iter().copied().fold(0.0, f64::max)
}

/// Ratio of extreme singular values; `+inf` for singular matrices.
pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev = to_array(&h).eigvalsh(UPLO::Lower).expect("LAPACK eigensolver failed").to_vec();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn block_diagonal(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMat::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

pub fn max_abs_entry(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_diagonal(m: &CMat) -> bool {
    m.iter()
        .enumerate()
        .all(|(idx, z)| idx % m.nrows() == idx / m.nrows() || *z == C64::new(0.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn wide_matrix_kernel_is_complete() {
        let m = CMat::from_row_slice(1, 3, &[c(1.0), c(1.0), c(0.0)]);
        let d = Decomposition::new(&m, RankTolerance::Relative);
        assert_eq!(d.rank, 1);
        assert_eq!(d.singular_values.len(), 1);
        let k = d.kernel();
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).norm() < 1e-14);
        assert!((k.adjoint() * &k - CMat::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn empty_shapes() {
        let m = CMat::zeros(0, 3);
        let d = Decomposition::new(&m, RankTolerance::Relative);
        assert_eq!(d.rank, 0);
        assert_eq!(d.kernel().ncols(), 3);
        assert_eq!(d.smallest_positive(), None);
        assert_eq!(spectral_norm(&m), 0.0);
    }

    #[test]
    fn absolute_threshold_overrides() {
        let m = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0), c(1e-3)]));
        assert_eq!(Decomposition::new(&m, RankTolerance::Relative).rank, 2);
        let d = Decomposition::new(&m, RankTolerance::Absolute(1e-2));
        assert_eq!(d.rank, 1);
        assert_eq!(d.largest_discarded(), Some(1e-3));
    }

    #[test]
    fn scale_floors_relative_threshold() {
        let m = CMat::from_element(1, 1, c(1e-16));
        assert_eq!(Decomposition::new(&m, RankTolerance::Relative).rank, 1);
        assert_eq!(Decomposition::with_scale(&m, RankTolerance::Relative, 3.0).rank, 0);
    }
}
