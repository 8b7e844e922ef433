//! Dense complex matrices in row-major storage.
//!
//! Everything downstream (vessels, transfer functions, kernels) works on
//! matrices of size at most a few dozen, so a plain `Vec<Complex64>` with
//! straightforward O(n^3) arithmetic is the right tool; no blocking, no
//! sparsity.

use num_complex::Complex64;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Shorthand constructor for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::default(); rows * cols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c64(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from nested rows of complex entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        assert!(!rows.is_empty() && !rows[0].is_empty());
        let cols = rows[0].len();
        let mut m = CMatrix::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    /// Builds a matrix from nested rows of real entries.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let complex: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| c64(v, 0.0)).collect())
            .collect();
        CMatrix::from_rows(&complex)
    }

    /// Square diagonal matrix from the given entries.
    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = CMatrix::zeros(entries.len(), entries.len());
        for (i, v) in entries.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// Column vector from a slice.
    pub fn col_vec(entries: &[Complex64]) -> Self {
        let mut m = CMatrix::zeros(entries.len(), 1);
        for (i, v) in entries.iter().enumerate() {
            m[(i, 0)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::default() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// `self + scale * rhs`, shapes must agree.
    pub fn add_scaled(&self, scale: Complex64, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(rhs.data.iter()) {
            *o += scale * r;
        }
        out
    }

    /// Scalar multiple.
    pub fn scale(&self, s: Complex64) -> CMatrix {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= s;
        }
        out
    }

    /// Largest entry magnitude.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-norm of `self - rhs`.
    pub fn max_diff(&self, rhs: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-norm deviation from the conjugate transpose, `max |M - M^H|`.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// True iff `max |M - M^H| <= tol` elementwise.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= tol
    }

    /// Replaces the matrix by its Hermitian part `(M + M^H)/2`.
    pub fn symmetrize_hermitian(&mut self) {
        assert!(self.is_square());
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)].conj());
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
            let d = self[(i, i)];
            self[(i, i)] = c64(d.re, 0.0);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Checks finiteness, returning an error naming `context` otherwise.
    pub fn ensure_finite(&self, context: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(context.to_string()))
        }
    }

    /// Extracts column `j` as an n-by-1 matrix.
    pub fn column(&self, j: usize) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, 1);
        for i in 0..self.rows {
            out[(i, 0)] = self[(i, j)];
        }
        out
    }

    /// Writes `block` into `self` with upper-left corner at `(i0, j0)`.
    pub fn set_block(&mut self, i0: usize, j0: usize, block: &CMatrix) {
        assert!(i0 + block.rows <= self.rows && j0 + block.cols <= self.cols);
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(i0 + i, j0 + j)] = block[(i, j)];
            }
        }
    }

    /// Trace of a square matrix.
    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.add_scaled(c64(1.0, 0.0), rhs)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.add_scaled(c64(-1.0, 0.0), rhs)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(c64(-1.0, 0.0))
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let v = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i  ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_adjoint() {
        let a = CMatrix::from_rows(&[
            vec![c64(1.0, 1.0), c64(0.0, 2.0)],
            vec![c64(3.0, 0.0), c64(-1.0, 0.5)],
        ]);
        let id = CMatrix::identity(2);
        assert_eq!(a.matmul(&id), a);
        let aa = a.adjoint().adjoint();
        assert!(aa.max_diff(&a) == 0.0);
        // (AB)^H = B^H A^H
        let b = CMatrix::from_rows(&[
            vec![c64(0.5, -1.0), c64(2.0, 0.0)],
            vec![c64(0.0, 0.0), c64(1.0, 1.0)],
        ]);
        let lhs = a.matmul(&b).adjoint();
        let rhs = b.adjoint().matmul(&a.adjoint());
        assert!(lhs.max_diff(&rhs) < 1e-15);
    }

    #[test]
    fn hermitian_check_is_elementwise_max() {
        let mut m = CMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(2.0, 1.0)],
            vec![c64(2.0, -1.0), c64(3.0, 0.0)],
        ]);
        assert!(m.is_hermitian(0.0));
        m[(0, 1)] += c64(0.0, 5e-7);
        assert!(!m.is_hermitian(1e-8));
        assert!(m.is_hermitian(1e-6));
        m.symmetrize_hermitian();
        assert!(m.is_hermitian(0.0));
    }

    #[test]
    fn finiteness_guard() {
        let mut m = CMatrix::identity(2);
        assert!(m.ensure_finite("test").is_ok());
        m[(0, 0)] = c64(f64::NAN, 0.0);
        assert!(matches!(
            m.ensure_finite("test"),
            Err(Error::NonFinite(_))
        ));
    }
}
