//! LU factorization with partial pivoting for complex matrices, plus the
//! determinant utilities built on it.
//!
//! The log-determinant accumulates the argument of every pivot (and a pi per
//! row swap) instead of reducing mod 2*pi, so determinant chains that stay
//! real-positive report a vanishing imaginary part.

use num_complex::Complex64;

use super::matrix::{c64, CMatrix};
use crate::error::{Error, Result};

/// Relative pivot threshold below which a matrix is reported singular.
pub const SINGULAR_PIVOT_REL: f64 = 1e-12;

/// LU factors of a square matrix with row pivoting.
pub struct LuFactors {
    n: usize,
    lu: CMatrix,
    perm: Vec<usize>,
    swaps: usize,
    min_pivot: f64,
}

impl LuFactors {
    /// Factors `m`; fails when the smallest pivot falls below
    /// `SINGULAR_PIVOT_REL * max|m|`.
    pub fn factor(m: &CMatrix) -> Result<LuFactors> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "LU requires a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        m.ensure_finite("LU input")?;
        let n = m.rows();
        let threshold = SINGULAR_PIVOT_REL * m.norm_max();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0usize;
        let mut min_pivot = f64::INFINITY;

        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[(k, k)];
            min_pivot = min_pivot.min(pivot.norm());
            if pivot.norm() <= threshold {
                return Err(Error::Singular {
                    pivot: pivot.norm(),
                    threshold,
                });
            }
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in (k + 1)..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }

        Ok(LuFactors {
            n,
            lu,
            perm,
            swaps,
            min_pivot,
        })
    }

    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Solves `M * X = rhs` for a matrix right-hand side.
    pub fn solve(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(rhs.rows(), self.n, "solve: rhs rows mismatch");
        let m = rhs.cols();
        let mut x = CMatrix::zeros(self.n, m);
        // apply permutation, then forward/back substitution
        for c in 0..m {
            for i in 0..self.n {
                x[(i, c)] = rhs[(self.perm[i], c)];
            }
        }
        for c in 0..m {
            for i in 1..self.n {
                let mut acc = x[(i, c)];
                for k in 0..i {
                    acc -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = acc;
            }
            for i in (0..self.n).rev() {
                let mut acc = x[(i, c)];
                for k in (i + 1)..self.n {
                    acc -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = acc / self.lu[(i, i)];
            }
        }
        x
    }

    /// Determinant from the pivot product.
    pub fn det(&self) -> Complex64 {
        let mut d = if self.swaps % 2 == 0 {
            c64(1.0, 0.0)
        } else {
            c64(-1.0, 0.0)
        };
        for i in 0..self.n {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// Log-determinant; imaginary part is the plain sum of pivot arguments
    /// plus pi per row swap, deliberately not wrapped to (-pi, pi].
    pub fn log_det(&self) -> Complex64 {
        let mut re = 0.0;
        let mut im = if self.swaps % 2 == 0 {
            0.0
        } else {
            std::f64::consts::PI
        };
        for i in 0..self.n {
            let p = self.lu[(i, i)];
            re += p.norm().ln();
            im += p.arg();
        }
        c64(re, im)
    }

    pub fn inverse(&self) -> CMatrix {
        self.solve(&CMatrix::identity(self.n))
    }
}

/// One-shot solve of `M X = rhs`.
pub fn solve(m: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    Ok(LuFactors::factor(m)?.solve(rhs))
}

/// Solves `X M = rhs` (right division by `M`).
pub fn right_solve(rhs: &CMatrix, m: &CMatrix) -> Result<CMatrix> {
    Ok(LuFactors::factor(&m.transpose())?
        .solve(&rhs.transpose())
        .transpose())
}

/// One-shot inverse.
pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    Ok(LuFactors::factor(m)?.inverse())
}

/// One-shot determinant.
pub fn det(m: &CMatrix) -> Result<Complex64> {
    Ok(LuFactors::factor(m)?.det())
}

/// One-shot log-determinant with argument accumulation.
pub fn log_det(m: &CMatrix) -> Result<Complex64> {
    Ok(LuFactors::factor(m)?.log_det())
}
