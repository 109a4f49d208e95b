use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;

use super::Rng;
use crate::error::{ensure_finite, invalid, Error, Result};

/// Dense complex double-precision matrix, column-major.
///
/// Dimensions are fixed at construction and every public constructor rejects
/// non-finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from column-major entries.
    pub fn from_column_slice(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_column_slice(rows, cols, entries))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::from_dmatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(Self(m))
        } else {
            Err(Error::NonFinite("matrix entry"))
        }
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Column `k` as a contiguous slice.
    pub fn column(&self, k: usize) -> &[Complex64] {
        let m = self.rows();
        &self.0.as_slice()[k * m..(k + 1) * m]
    }

    pub(crate) fn column_mut(&mut self, k: usize) -> &mut [Complex64] {
        let m = self.rows();
        &mut self.0.as_mut_slice()[k * m..(k + 1) * m]
    }

    pub fn column_norm_sqr(&self, k: usize) -> f64 {
        self.column(k).iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self(&self.0 * &rhs.0))
    }

    /// `self† · rhs`, without materializing the adjoint.
    pub fn adjoint_mul(&self, rhs: &Self) -> Result<Self> {
        if self.rows() != rhs.rows() {
            return Err(Error::DimensionMismatch(format!(
                "adjoint of {}x{} times {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(Self(self.0.ad_mul(&rhs.0)))
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self(&self.0 - &rhs.0))
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self(&self.0 + &rhs.0))
    }

    fn same_shape(&self, rhs: &Self) -> Result<()> {
        if self.rows() == rhs.rows() && self.cols() == rhs.cols() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )))
        }
    }
}

/// Matrix of i.i.d. circularly-symmetric complex Gaussians with the given
/// per-entry variance (real and imaginary parts each `variance / 2`).
///
/// Entries are drawn in column-major order, real part first.
pub fn sample_complex_gaussian(rows: usize, cols: usize, variance: f64, rng: &mut Rng) -> Result<ComplexMatrix> {
    ensure_finite("variance", variance)?;
    if variance < 0.0 {
        return Err(invalid("variance", format!("must be >= 0, got {variance}")));
    }
    let sd = (variance / 2.0).sqrt();
    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re = rng.normal();
        let im = rng.normal();
        entries.push(Complex64::new(sd * re, sd * im));
    }
    Ok(ComplexMatrix(DMatrix::from_vec(rows, cols, entries)))
}

/// Solves `A·X = B` for Hermitian positive-definite `A` via Cholesky.
pub fn hermitian_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch(format!("A is {}x{}, not square", n, a.cols())));
    }
    if b.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "A is {n}x{n} but B has {} rows",
            b.rows()
        )));
    }
    let scale = a.frobenius_norm();
    let skew: f64 = (&a.0 - a.0.adjoint()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if skew > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(invalid("A", "matrix is not Hermitian"));
    }
    let chol = Cholesky::new(a.0.clone()).ok_or(Error::NotPositiveDefinite)?;
    // The complex square root never fails, so a non-positive pivot shows up
    // as a diagonal factor entry off the positive real axis.
    let l = chol.l_dirty();
    if (0..n).any(|i| {
        let d = l[(i, i)];
        d.re.is_nan() || d.re <= 0.0 || d.im.abs() > 1e-8 * d.re
    }) {
        return Err(Error::NotPositiveDefinite);
    }
    ComplexMatrix::from_dmatrix(chol.solve(&b.0)).map_err(|_| Error::NotPositiveDefinite)
}
