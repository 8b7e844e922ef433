//! Eigenvalue routines sized for this crate: cyclic Jacobi for Hermitian
//! matrices (values and vectors) and a shifted-QR iteration on the Hessenberg
//! form for general complex spectra.

use num_complex::Complex64;

use super::matrix::{c64, CMatrix};
use crate::error::{Error, Result};

/// Eigenvalues of a Hermitian matrix, ascending. The input is symmetrized
/// first; callers are expected to pass matrices that are Hermitian up to
/// rounding.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Full Hermitian eigendecomposition `(values ascending, vectors as columns)`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    assert!(m.is_square(), "hermitian_eigen requires a square matrix");
    let n = m.rows();
    let mut a = m.clone();
    a.symmetrize_hermitian();
    let mut v = CMatrix::identity(n);
    let scale = a.norm_fro().max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> =
        (0..n).map(|i| (a[(i, i)].re, i)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
        for i in 0..n {
            vectors[(i, new_col)] = v[(i, old_col)];
        }
    }
    (values, vectors)
}

fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b <= 1e-300 {
        return;
    }
    let phase = apq / b;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cth = 1.0 / (1.0 + t * t).sqrt();
    let sth = t * cth;
    // unitary J: J[p,p] = c, J[p,q] = s*phase, J[q,p] = -s*conj(phase), J[q,q] = c
    let s_pos = c64(sth, 0.0) * phase;
    let n = a.rows();
    // A <- J^H A (rows p, q)
    for j in 0..n {
        let rp = a[(p, j)];
        let rq = a[(q, j)];
        a[(p, j)] = c64(cth, 0.0) * rp - s_pos * rq;
        a[(q, j)] = s_pos.conj() * rp + c64(cth, 0.0) * rq;
    }
    // A <- A J (cols p, q)
    for i in 0..n {
        let cp = a[(i, p)];
        let cq = a[(i, q)];
        a[(i, p)] = c64(cth, 0.0) * cp - s_pos.conj() * cq;
        a[(i, q)] = s_pos * cp + c64(cth, 0.0) * cq;
    }
    a[(p, q)] = c64(0.0, 0.0);
    a[(q, p)] = c64(0.0, 0.0);
    a[(p, p)] = c64(a[(p, p)].re, 0.0);
    a[(q, q)] = c64(a[(q, q)].re, 0.0);
    // V <- V J
    for i in 0..v.rows() {
        let cp = v[(i, p)];
        let cq = v[(i, q)];
        v[(i, p)] = c64(cth, 0.0) * cp - s_pos.conj() * cq;
        v[(i, q)] = s_pos * cp + c64(cth, 0.0) * cq;
    }
}

/// Square root of a positive definite Hermitian matrix together with its
/// inverse, via the eigendecomposition.
pub fn hermitian_sqrt_with_inverse(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let (values, vectors) = hermitian_eigen(m);
    let min = values.first().copied().unwrap_or(0.0);
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite(min));
    }
    let n = m.rows();
    let mut root = CMatrix::zeros(n, n);
    let mut root_inv = CMatrix::zeros(n, n);
    for k in 0..n {
        let s = values[k].sqrt();
        for i in 0..n {
            for j in 0..n {
                let outer = vectors[(i, k)] * vectors[(j, k)].conj();
                root[(i, j)] += outer * c64(s, 0.0);
                root_inv[(i, j)] += outer * c64(1.0 / s, 0.0);
            }
        }
    }
    root.symmetrize_hermitian();
    root_inv.symmetrize_hermitian();
    Ok((root, root_inv))
}

/// Numerical rank from the Gram spectrum: eigenvalues of `M M^H` (or
/// `M^H M`, whichever is smaller) above `rel_tol^2` times the largest.
///
/// Columns are equilibrated to unit norm first; the diagonal scaling is
/// rank-preserving and strips artificial scale spread (e.g. the growth of
/// matrix powers in a Krylov block).
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let mut scaled = m.clone();
    for j in 0..scaled.cols() {
        let norm: f64 = (0..scaled.rows())
            .map(|i| scaled[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm > 0.0 {
            for i in 0..scaled.rows() {
                let v = scaled[(i, j)] / norm;
                scaled[(i, j)] = v;
            }
        }
    }
    let gram = if scaled.rows() <= scaled.cols() {
        scaled.matmul(&scaled.adjoint())
    } else {
        scaled.adjoint().matmul(&scaled)
    };
    let values = hermitian_eigenvalues(&gram);
    let top = values.last().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0;
    }
    values
        .iter()
        .filter(|&&v| v > rel_tol * rel_tol * top)
        .count()
}

/// Eigenvalues of a general complex matrix via Hessenberg reduction and
/// shifted QR with deflation.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    assert!(m.is_square());
    m.ensure_finite("eigenvalue input")?;
    let n = m.rows();
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let mut h = hessenberg(m);
    let mut eigs: Vec<Complex64> = Vec::with_capacity(n);
    let scale = h.norm_fro().max(f64::MIN_POSITIVE);
    let eps = 1e-15;

    let mut hi = n - 1; // active block is rows/cols 0..=hi
    let mut iters_since_deflation = 0usize;
    let mut total_iters = 0usize;
    let max_total = 60 * n;

    loop {
        // zero out negligible subdiagonals
        for i in 1..=hi {
            let small = eps * (h[(i - 1, i - 1)].norm() + h[(i, i)].norm()).max(eps * scale);
            if h[(i, i - 1)].norm() <= small {
                h[(i, i - 1)] = c64(0.0, 0.0);
            }
        }
        // deflate from the bottom
        while hi > 0 && h[(hi, hi - 1)] == c64(0.0, 0.0) {
            eigs.push(h[(hi, hi)]);
            hi -= 1;
            iters_since_deflation = 0;
        }
        if hi == 0 {
            eigs.push(h[(0, 0)]);
            break;
        }
        // start of the active block
        let mut lo = hi;
        while lo > 0 && h[(lo, lo - 1)] != c64(0.0, 0.0) {
            lo -= 1;
        }
        if hi == lo + 1 {
            let (e1, e2) = two_by_two_eigs(
                h[(lo, lo)],
                h[(lo, hi)],
                h[(hi, lo)],
                h[(hi, hi)],
            );
            eigs.push(e2);
            eigs.push(e1);
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            iters_since_deflation = 0;
            continue;
        }

        total_iters += 1;
        iters_since_deflation += 1;
        if total_iters > max_total {
            return Err(Error::NoConvergence {
                iters: total_iters,
                delta: h[(hi, hi - 1)].norm(),
            });
        }
        let shift = if iters_since_deflation % 12 == 0 {
            // exceptional shift to break symmetry-induced stalls
            h[(hi, hi)] + c64(1.5 * h[(hi, hi - 1)].norm(), 0.5 * h[(hi, hi - 1)].norm())
        } else {
            let (e1, e2) = two_by_two_eigs(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            );
            let d = h[(hi, hi)];
            if (e1 - d).norm() <= (e2 - d).norm() {
                e1
            } else {
                e2
            }
        };
        qr_step(&mut h, lo, hi, shift);
    }

    Ok(eigs)
}

/// Householder reduction to upper Hessenberg form.
fn hessenberg(m: &CMatrix) -> CMatrix {
    let n = m.rows();
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the diagonal
        let mut norm = 0.0f64;
        for i in (k + 1)..n {
            norm += h[(i, k)].norm_sqr();
        }
        let norm = norm.sqrt();
        if norm <= 1e-300 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let alpha = if x0.norm() > 0.0 {
            -(x0 / x0.norm()) * norm
        } else {
            c64(-norm, 0.0)
        };
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| if i > k { h[(i, k)] } else { c64(0.0, 0.0) })
            .collect();
        v[k + 1] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 <= 1e-300 {
            continue;
        }
        // H <- P H with P = I - 2 v v^H / |v|^2
        for j in 0..n {
            let mut dot = c64(0.0, 0.0);
            for i in (k + 1)..n {
                dot += v[i].conj() * h[(i, j)];
            }
            let f = dot * c64(2.0 / vnorm2, 0.0);
            for i in (k + 1)..n {
                let sub = f * v[i];
                h[(i, j)] -= sub;
            }
        }
        // H <- H P
        for i in 0..n {
            let mut dot = c64(0.0, 0.0);
            for j in (k + 1)..n {
                dot += h[(i, j)] * v[j];
            }
            let f = dot * c64(2.0 / vnorm2, 0.0);
            for j in (k + 1)..n {
                let sub = f * v[j].conj();
                h[(i, j)] -= sub;
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = c64(0.0, 0.0);
        }
    }
    h
}

fn two_by_two_eigs(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
) -> (Complex64, Complex64) {
    let half_tr = (a + d) * c64(0.5, 0.0);
    let det = a * d - b * c;
    let disc = (half_tr * half_tr - det).sqrt();
    (half_tr + disc, half_tr - disc)
}

/// Explicit single-shift QR step on the Hessenberg block `lo..=hi`.
fn qr_step(h: &mut CMatrix, lo: usize, hi: usize, shift: Complex64) {
    let n = h.cols();
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    // factor by Givens rotations, saving them for the RQ pass
    let mut rotations: Vec<(usize, f64, Complex64)> = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let a = h[(i, i)];
        let b = h[(i + 1, i)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if r <= 1e-300 {
            rotations.push((i, 1.0, c64(0.0, 0.0)));
            continue;
        }
        let (cg, sg) = if a.norm() > 0.0 {
            (a.norm() / r, (a / a.norm()) * (b.conj() / r))
        } else {
            (0.0, b.conj() / b.norm())
        };
        // rows i, i+1: G = [[c, s], [-conj(s), c]]
        for j in i..n.min(hi + 1).max(i + 1) {
            let top = h[(i, j)];
            let bot = h[(i + 1, j)];
            h[(i, j)] = c64(cg, 0.0) * top + sg * bot;
            h[(i + 1, j)] = -sg.conj() * top + c64(cg, 0.0) * bot;
        }
        rotations.push((i, cg, sg));
    }
    // right-multiply by G^H in order
    for &(i, cg, sg) in &rotations {
        let row_end = (i + 2).min(hi + 1);
        for r in lo..row_end.max(lo) {
            let left = h[(r, i)];
            let right = h[(r, i + 1)];
            h[(r, i)] = left * c64(cg, 0.0) + right * sg.conj();
            h[(r, i + 1)] = -left * sg + right * c64(cg, 0.0);
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::lu;

    fn sort_complex(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| {
            (a.re, a.im)
                .partial_cmp(&(b.re, b.im))
                .unwrap()
        });
        v
    }

    #[test]
    fn jacobi_diagonalizes_known_hermitian() {
        let m = CMatrix::from_rows(&[
            vec![c64(2.0, 0.0), c64(0.0, 1.0)],
            vec![c64(0.0, -1.0), c64(2.0, 0.0)],
        ]);
        let (values, vectors) = hermitian_eigen(&m);
        assert!((values[0] - 1.0).abs() < 1e-12);
        assert!((values[1] - 3.0).abs() < 1e-12);
        // reconstruct
        let lam = CMatrix::diag(&[c64(values[0], 0.0), c64(values[1], 0.0)]);
        let rebuilt = vectors.matmul(&lam).matmul(&vectors.adjoint());
        assert!(rebuilt.max_diff(&m) < 1e-12);
        // unitarity
        let vv = vectors.adjoint().matmul(&vectors);
        assert!(vv.max_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn jacobi_on_random_hermitian_reconstructs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [3usize, 6, 11] {
            let mut m = CMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            let herm = &m + &m.adjoint();
            let (values, vectors) = hermitian_eigen(&herm);
            let lam = CMatrix::diag(
                &values.iter().map(|&v| c64(v, 0.0)).collect::<Vec<_>>(),
            );
            let rebuilt = vectors.matmul(&lam).matmul(&vectors.adjoint());
            assert!(rebuilt.max_diff(&herm) < 1e-11, "n = {n}");
        }
    }

    #[test]
    fn sqrt_of_positive_definite() {
        let m = CMatrix::from_rows(&[
            vec![c64(4.0, 0.0), c64(1.0, 1.0)],
            vec![c64(1.0, -1.0), c64(3.0, 0.0)],
        ]);
        let (root, root_inv) = hermitian_sqrt_with_inverse(&m).unwrap();
        assert!(root.matmul(&root).max_diff(&m) < 1e-12);
        assert!(root.matmul(&root_inv).max_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let m = CMatrix::diag(&[c64(1.0, 0.0), c64(-0.5, 0.0)]);
        assert!(matches!(
            hermitian_sqrt_with_inverse(&m),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn general_eigenvalues_of_diagonal() {
        let d = CMatrix::diag(&[c64(0.0, 1.0), c64(0.0, 4.0), c64(2.0, -1.0)]);
        let eigs = sort_complex(eigenvalues(&d).unwrap());
        let expect = sort_complex(vec![c64(0.0, 1.0), c64(0.0, 4.0), c64(2.0, -1.0)]);
        for (e, x) in eigs.iter().zip(expect.iter()) {
            assert!((e - x).norm() < 1e-12);
        }
    }

    #[test]
    fn general_eigenvalues_of_companion_matrix() {
        // companion of (z - 1)(z - i)(z + 2) = z^3 + (1 - i) z^2 - (2 + i) z + 2i
        // coefficients: z^3 + c2 z^2 + c1 z + c0
        let c2 = c64(1.0, -1.0);
        let c1 = c64(-2.0, -1.0);
        let c0 = c64(0.0, 2.0);
        let m = CMatrix::from_rows(&[
            vec![-c2, -c1, -c0],
            vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
            vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)],
        ]);
        let eigs = sort_complex(eigenvalues(&m).unwrap());
        let expect = sort_complex(vec![c64(1.0, 0.0), c64(0.0, 1.0), c64(-2.0, 0.0)]);
        for (e, x) in eigs.iter().zip(expect.iter()) {
            assert!((e - x).norm() < 1e-10, "{e} vs {x}");
        }
    }

    #[test]
    fn general_eigenvalues_match_trace_and_det() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in [2usize, 5, 8] {
            let mut m = CMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            let eigs = eigenvalues(&m).unwrap();
            let sum: Complex64 = eigs.iter().sum();
            assert!((sum - m.trace()).norm() < 1e-9, "trace mismatch n={n}");
            let prod: Complex64 = eigs.iter().product();
            let d = lu::det(&m).unwrap();
            assert!((prod - d).norm() < 1e-8 * d.norm().max(1.0), "det mismatch n={n}");
        }
    }

    #[test]
    fn hermitian_cross_check_against_jacobi() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 6;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let herm = &m + &m.adjoint();
        let jac = hermitian_eigenvalues(&herm);
        let mut qr: Vec<f64> = eigenvalues(&herm).unwrap().iter().map(|z| z.re).collect();
        qr.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in jac.iter().zip(qr.iter()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn krylov_rank_of_vandermonde_pair() {
        // [B, AB] for A = diag(i, 4i), B = [1; 1] has Vandermonde structure
        let krylov = CMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(0.0, 1.0)],
            vec![c64(1.0, 0.0), c64(0.0, 4.0)],
        ]);
        assert_eq!(numerical_rank(&krylov, 1e-8), 2);
        let degenerate = CMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(0.0, 1.0)],
            vec![c64(1.0, 0.0), c64(0.0, 1.0)],
        ]);
        assert_eq!(numerical_rank(&degenerate, 1e-8), 1);
        let zero = CMatrix::zeros(2, 3);
        assert_eq!(numerical_rank(&zero, 1e-8), 0);
    }
}
