//! Sturm-Liouville specifics: the explicit input fundamental matrix, the
//! Gelfand-Levitan kernels and equation, the Jost diagnostics `h`, `Theta_h`
//! and `K_S`, the Jost solution `phi`, and an independent Volterra-iteration
//! oracle for Jost solutions of a given potential.
//!
//! Conventions: the spectral square root satisfies `s^2 = -i lambda`; all
//! Jost routines take `s` as the primary input and derive `lambda = i s^2`,
//! which keeps the branch choice out of the computation entirely.

use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;

use crate::error::{Error, Result};
use crate::numerics::{
    c64, gauss_legendre, lu, scalar_derivative_at, second_derivative_at, simpson_weights,
    unwrap_phases, CMatrix,
};
use crate::params::Family;
use crate::vessel::Vessel;

/// Fundamental matrix of the trivial Sturm-Liouville input equation:
/// `[[cos(s d), i sin(s d)/s], [i s sin(s d), cos(s d)]]` with
/// `d = x - x0` and `s^2 = -i lambda`. Entire в `lambda` (only even/odd
/// combinations of `s` appear), so the branch of the root is irrelevant;
/// `s = 0` is handled by the `sin(s d)/s -> d` limit.
pub fn phi_input(lambda: Complex64, x: f64, x0: f64) -> CMatrix {
    let d = x - x0;
    let s2 = -Complex64::i() * lambda;
    let s = s2.sqrt();
    let sd = s * d;
    let cos = sd.cos();
    let sinc = if sd.norm() < 1e-6 {
        // sin(sd)/s = d (1 - (sd)^2/6 + (sd)^4/120 - ...)
        let z2 = sd * sd;
        (Complex64::new(1.0, 0.0) - z2 / 6.0 + z2 * z2 / 120.0) * d
    } else {
        sd.sin() / s
    };
    let s_sin = s2 * sinc; // s * sin(s d)
    CMatrix::from_rows(&[
        vec![cos, Complex64::i() * sinc],
        vec![Complex64::i() * s_sin, cos],
    ])
}

fn ensure_sl(v: &Vessel) -> Result<()> {
    v.require_family(Family::SL)
}

/// The Gelfand-Levitan kernels of a Sturm-Liouville vessel:
/// `Omega(x, y) = e1^T B(x)^H X(x0)^{-1} B(y) e1` and
/// `K(x, y) = -e1^T B(x)^H X(x)^{-1} B(y) e1`.
pub struct GlKernels<'a> {
    vessel: &'a Vessel,
    gram0_inv: CMatrix,
}

/// Builds the kernel pair; Sturm-Liouville vessels only.
pub fn gl_kernels(v: &Vessel) -> Result<GlKernels<'_>> {
    ensure_sl(v)?;
    let gram0_inv = lu::inverse(v.gram_base())?;
    Ok(GlKernels {
        vessel: v,
        gram0_inv,
    })
}

impl<'a> GlKernels<'a> {
    fn first_column(&self, x: f64) -> Result<CMatrix> {
        Ok(self.vessel.b_at(x)?.column(0))
    }

    /// `Omega(x, y)`; real up to rounding for Hermitian `X(x0)`.
    pub fn omega(&self, x: f64, y: f64) -> Result<f64> {
        let bx = self.first_column(x)?;
        let by = self.first_column(y)?;
        Ok(bx.adjoint().matmul(&self.gram0_inv).matmul(&by)[(0, 0)].re)
    }

    /// `K(x, y)`.
    pub fn k(&self, x: f64, y: f64) -> Result<f64> {
        let bx = self.first_column(x)?;
        let by = self.first_column(y)?;
        let gram = self.vessel.gram_at(x)?;
        Ok(-bx.adjoint().matmul(&lu::solve(&gram, &by)?)[(0, 0)].re)
    }

    /// Hermitian-symmetry defect `|Omega(x, y) - conj(Omega(y, x))|`,
    /// including the discarded imaginary parts.
    pub fn omega_symmetry_defect(&self, x: f64, y: f64) -> Result<f64> {
        let bx = self.first_column(x)?;
        let by = self.first_column(y)?;
        let fwd = bx.adjoint().matmul(&self.gram0_inv).matmul(&by)[(0, 0)];
        let bwd = by.adjoint().matmul(&self.gram0_inv).matmul(&bx)[(0, 0)];
        Ok((fwd - bwd.conj()).norm())
    }

    /// Residual of the Gelfand-Levitan equation
    /// `|K(x,y) + Omega(x,y) + int_{x0}^{x} K(x,t) Omega(t,y) dt|`
    /// with the integral evaluated by `quad_n`-point Gauss quadrature.
    pub fn gl_residual(&self, x: f64, y: f64, quad_n: usize) -> Result<f64> {
        let x0 = self.vessel.base_point();
        if !(x0 <= y && y <= x) {
            return Err(Error::InvalidArgument(format!(
                "Gelfand-Levitan residual needs x0 <= y <= x, got y = {y}, x = {x}"
            )));
        }
        if x == x0 {
            return Ok((self.k(x, y)? + self.omega(x, y)?).abs());
        }
        let (nodes, weights) = gauss_legendre(quad_n, x0, x)?;
        let mut integral = 0.0f64;
        for (&t, &w) in nodes.iter().zip(&weights) {
            integral += w * self.k(x, t)? * self.omega(t, y)?;
        }
        Ok((self.k(x, y)? + self.omega(x, y)? + integral).abs())
    }

    /// Potential from the diagonal of `K`: `q(x) = 2 d/dx K(x, x)` by a
    /// five-point stencil.
    pub fn q_from_k(&self, x: f64) -> Result<f64> {
        let (window, local) = self.vessel.stencil_window(x)?;
        let h = self.vessel.grid_step();
        let diag: Vec<f64> = window
            .iter()
            .map(|&j| {
                let t = self.vessel.grid()[j];
                self.k(t, t)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(2.0 * scalar_derivative_at(&diag, h, local))
    }
}

/// One GL-residual sample for report emission.
#[derive(Clone, Debug, Serialize)]
pub struct GlSample {
    pub x: f64,
    pub y: f64,
    pub residual: f64,
}

/// Gelfand-Levitan verification report (serialized to JSON by the CLI).
#[derive(Clone, Debug, Serialize)]
pub struct GlReport {
    pub quad_n: usize,
    pub max_residual: f64,
    pub samples: Vec<GlSample>,
}

/// Runs the GL residual over a rectangular `(x, y)` sample with `y <= x`.
pub fn gl_report(v: &Vessel, xs: &[f64], quad_n: usize) -> Result<GlReport> {
    let kernels = gl_kernels(v)?;
    let mut samples = Vec::new();
    let mut max_residual = 0.0f64;
    for &x in xs {
        for &y in xs {
            if y > x {
                continue;
            }
            let residual = kernels.gl_residual(x, y, quad_n)?;
            max_residual = max_residual.max(residual);
            samples.push(GlSample { x, y, residual });
        }
    }
    Ok(GlReport {
        quad_n,
        max_residual,
        samples,
    })
}

/// Jost diagnostics at one point: `h = e1^T S(lambda, x) [1; s]`, its
/// unwrapped phase, and the sesquilinear form `K_S`.
#[derive(Clone, Debug)]
pub struct JostDiagnostics {
    pub s: Complex64,
    pub lambda: Complex64,
    pub h: Complex64,
    /// Phase of `h`, unwrapped along the cache grid from the base point.
    pub theta_h: f64,
    pub k_s: f64,
    /// Whether `Im s > m(A)`, the regime in which the asymptotic statements
    /// about `h` apply.
    pub asymptotic_regime: bool,
}

/// `h`, `Theta_h` and `K_S` tabulated along the vessel's cache grid.
pub struct JostSweep {
    pub s: Complex64,
    pub lambda: Complex64,
    pub xs: Vec<f64>,
    pub h: Vec<Complex64>,
    pub theta: Vec<f64>,
    pub k_s: Vec<f64>,
}

impl JostSweep {
    /// Emits `x,re_h,im_h,abs_h,theta_h,K_S` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,re_h,im_h,abs_h,theta_h,K_S")?;
        for i in 0..self.xs.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.xs[i],
                self.h[i].re,
                self.h[i].im,
                self.h[i].norm(),
                self.theta[i],
                self.k_s[i]
            )?;
        }
        Ok(())
    }
}

/// `K_S(x, s)` through the resolvent form of the kernel `K_1`, which keeps
/// the purely imaginary `lambda` direction (`lambda + conj(lambda) = 0`)
/// removable: `K_S = 1/(i(s - conj(s))) - v^H K_1(lambda, lambda, x) v`
/// with `v = [1; s]`.
fn k_s_value(v: &Vessel, s: Complex64, lambda: Complex64, x: f64) -> Result<f64> {
    let k1 = v.kernel_k1(lambda, lambda, x)?;
    let vec = CMatrix::col_vec(&[c64(1.0, 0.0), s]);
    let quad = vec.adjoint().matmul(&k1).matmul(&vec)[(0, 0)];
    let constant = (Complex64::i() * (s - s.conj())).inv();
    Ok((constant - quad).re)
}

fn h_value(v: &Vessel, lambda: Complex64, s: Complex64, x: f64) -> Result<Complex64> {
    let sm = v.transfer_matrix(lambda, x)?;
    Ok(sm[(0, 0)] + sm[(0, 1)] * s)
}

/// Tabulates `h`, the unwrapped phase and `K_S` on the cache grid.
pub fn jost_sweep(v: &Vessel, s: Complex64) -> Result<JostSweep> {
    ensure_sl(v)?;
    let lambda = Complex64::i() * s * s;
    v.guard_spectrum(lambda)?;
    let xs = v.grid().to_vec();
    let mut h = Vec::with_capacity(xs.len());
    let mut k_s = Vec::with_capacity(xs.len());
    for &x in &xs {
        h.push(h_value(v, lambda, s, x)?);
        k_s.push(k_s_value(v, s, lambda, x)?);
    }
    let raw: Vec<f64> = h.iter().map(|z| z.arg()).collect();
    let mut theta = unwrap_phases(&raw);
    // seed the unwrap at the base point with the principal value
    let base = v
        .grid()
        .iter()
        .position(|&t| t == v.base_point())
        .unwrap_or(0);
    let offset = theta[base] - raw[base];
    for t in theta.iter_mut() {
        *t -= offset;
    }
    Ok(JostSweep {
        s,
        lambda,
        xs,
        h,
        theta,
        k_s,
    })
}

/// Jost diagnostics at `x` (phase unwrapped along the grid).
pub fn jost_h(v: &Vessel, s: Complex64, x: f64) -> Result<JostDiagnostics> {
    let sweep = jost_sweep(v, s)?;
    let i = v.nearest_grid_index(x);
    let h = h_value(v, sweep.lambda, s, x)?;
    // continue the phase from the nearest grid sample
    let mut delta = h.arg() - sweep.h[i].arg();
    while delta > std::f64::consts::PI {
        delta -= 2.0 * std::f64::consts::PI;
    }
    while delta < -std::f64::consts::PI {
        delta += 2.0 * std::f64::consts::PI;
    }
    let m_a = v
        .spectrum()
        .iter()
        .map(|z| z.im)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(JostDiagnostics {
        s,
        lambda: sweep.lambda,
        h,
        theta_h: sweep.theta[i] + delta,
        k_s: k_s_value(v, s, sweep.lambda, x)?,
        asymptotic_regime: s.im > m_a,
    })
}

/// Residuals of the three structural identities for `h`.
#[derive(Clone, Copy, Debug)]
pub struct HIdentityResiduals {
    /// `|conj(h(x, -conj(s))) - h(x, s) det S(lambda, x0)|`
    pub conjugation: f64,
    /// `||h|^2 - (dK_S/dx + i(s - conj(s)) K_S)|`
    pub modulus: f64,
    /// `|2 dTheta_h/dx + (s + conj(s)) (dK_S/dx) / |h|^2|`
    pub phase: f64,
}

impl HIdentityResiduals {
    pub fn max(&self) -> f64 {
        self.conjugation.max(self.modulus).max(self.phase)
    }
}

/// Checks the three identities at `x`; derivatives use five-point stencils
/// on the cache grid.
pub fn check_h_identities(v: &Vessel, s: Complex64, x: f64) -> Result<HIdentityResiduals> {
    let sweep = jost_sweep(v, s)?;
    let i = v.nearest_grid_index(x);
    let h = sweep.h[i];

    // part 1: conjugation symmetry against the mirrored root
    let s_mirror = -s.conj();
    let lambda_mirror = Complex64::i() * s_mirror * s_mirror;
    v.guard_spectrum(lambda_mirror)?;
    let h_mirror = h_value(v, lambda_mirror, s_mirror, sweep.xs[i])?;
    let det_base = lu::det(&v.transfer_matrix(sweep.lambda, v.base_point())?)?;
    let conjugation = (h_mirror.conj() - h * det_base).norm();

    // parts 2 and 3 need dK_S/dx and dTheta/dx
    let h_step = v.grid_step();
    let dk = scalar_derivative_at(&sweep.k_s, h_step, i);
    let modulus_target = dk + (Complex64::i() * (s - s.conj())).re * sweep.k_s[i];
    let modulus = (h.norm_sqr() - modulus_target).abs();

    if h.norm() < 1e-10 {
        return Err(Error::PhaseUndefined(h.norm()));
    }
    let dtheta = scalar_derivative_at(&sweep.theta, h_step, i);
    let phase = (2.0 * dtheta + (s + s.conj()).re * dk / h.norm_sqr()).abs();

    Ok(HIdentityResiduals {
        conjugation,
        modulus,
        phase,
    })
}

/// The Jost solution `phi(x, lambda) = e1^T Phi_*(lambda, x, x0) [0; -i]`,
/// normalized by `phi(x0) = 0`, `phi'(x0) = 1`. Entire in `lambda`.
pub fn jost_phi(v: &Vessel, lambda: Complex64, x: f64) -> Result<Complex64> {
    ensure_sl(v)?;
    let sweep = jost_phi_sweep(v, lambda)?;
    let i = v.nearest_grid_index(x);
    if (x - v.grid()[i]).abs() <= 1e-13 * (1.0 + x.abs()) {
        return Ok(sweep.1[i]);
    }
    Err(Error::InvalidArgument(format!(
        "jost_phi evaluates on the cache grid; {x} is not a grid point"
    )))
}

/// `phi(x, lambda)` along the whole cache grid.
pub fn jost_phi_sweep(v: &Vessel, lambda: Complex64) -> Result<(Vec<f64>, Vec<Complex64>)> {
    ensure_sl(v)?;
    let phi_star = v.fundamental_output(lambda)?;
    let pick = CMatrix::col_vec(&[c64(0.0, 0.0), c64(0.0, -1.0)]);
    let values: Vec<Complex64> = phi_star
        .values()
        .iter()
        .map(|m| m.matmul(&pick)[(0, 0)])
        .collect();
    Ok((v.grid().to_vec(), values))
}

/// Scalar Schrodinger residual of the intertwined output: for
/// `y = S(lambda, .) Phi(lambda, .) u0`, returns
/// `|-y_1'' + q y_1 + i lambda y_1|` at `x` with `q` from the trace
/// formula route.
pub fn schrodinger_residual(
    v: &Vessel,
    lambda: Complex64,
    x: f64,
    u0: &CMatrix,
) -> Result<f64> {
    ensure_sl(v)?;
    let phi = v.fundamental_input(lambda)?;
    let (window, local) = v.stencil_window_n(x, 6)?;
    let h = v.grid_step();
    let ys: Vec<CMatrix> = window
        .iter()
        .map(|&j| {
            let sm = v.transfer_matrix(lambda, v.grid()[j])?;
            Ok(sm.matmul(&phi.value(j).matmul(u0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let y1: Vec<CMatrix> = ys
        .iter()
        .map(|y| CMatrix::from_rows(&[vec![y[(0, 0)]]]))
        .collect();
    let ypp = second_derivative_at(&y1, h, local)[(0, 0)];
    let xg = v.grid()[window[local]];
    let q = -2.0 * v.tau_logderiv_prime(xg)?;
    let y = y1[local][(0, 0)];
    Ok((-ypp + (c64(q, 0.0) + Complex64::i() * lambda) * y).norm())
}

/// Output of the Volterra-iteration Jost oracle.
pub struct VolterraJost {
    pub s: Complex64,
    pub xs: Vec<f64>,
    /// The Jost iterate `f` itself.
    pub f: Vec<Complex64>,
    /// The scaled iterate `g = f e^{-i s x}` (bounded, used internally).
    pub g: Vec<Complex64>,
    pub iterations: usize,
    pub last_delta: f64,
    /// `(integral of |q| over [x_max, 4 x_max]) / |s|`, the reported
    /// truncation bound.
    pub tail_bound: f64,
}

/// Picard iteration for the Jost solution of `-f'' + q f = s^2 f` on
/// `[0, x_max]` with the integral equation truncated at `x_max`:
/// `f(x) = e^{isx} + int_x^{x_max} sin(s(y-x))/s q(y) f(y) dy`.
///
/// Internally iterates the bounded scaled form `g = f e^{-isx}`,
/// `g(x) = 1 + int_x^{x_max} (e^{2is(y-x)} - 1)/(2is) q(y) g(y) dy`,
/// so nothing overflows for strongly decaying `f`. Converges when the sup
/// change drops below 1e-10, else errors after `iters` passes.
pub fn volterra_jost_oracle(
    q: &dyn Fn(f64) -> f64,
    s: Complex64,
    x_max: f64,
    iters: usize,
) -> Result<VolterraJost> {
    volterra_jost_oracle_with_density(q, s, x_max, iters, 64)
}

/// Same oracle with an explicit grid density (points per unit length).
pub fn volterra_jost_oracle_with_density(
    q: &dyn Fn(f64) -> f64,
    s: Complex64,
    x_max: f64,
    iters: usize,
    density: usize,
) -> Result<VolterraJost> {
    if s.im <= 0.0 {
        return Err(Error::InvalidArgument(
            "the Jost oracle needs Im s > 0".into(),
        ));
    }
    if iters == 0 || x_max <= 0.0 || density == 0 {
        return Err(Error::InvalidArgument(
            "oracle needs iters >= 1, x_max > 0 and density >= 1".into(),
        ));
    }
    let n = (x_max * density as f64).ceil() as usize;
    let h = x_max / n as f64;
    let xs: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let qs: Vec<f64> = xs.iter().map(|&x| q(x)).collect();
    if qs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("potential sample".into()));
    }
    let two_is = 2.0 * Complex64::i() * s;

    let kernel = |u: f64| -> Complex64 {
        // (e^{2isu} - 1) / (2is), u >= 0
        let z = two_is * u;
        if z.norm() < 1e-6 {
            u * (Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0)
        } else {
            (z.exp() - 1.0) / two_is
        }
    };

    let mut g = vec![Complex64::new(1.0, 0.0); n + 1];
    let mut iterations = 0;
    let mut last_delta = f64::INFINITY;
    while iterations < iters {
        iterations += 1;
        let mut next = vec![Complex64::new(1.0, 0.0); n + 1];
        for i in 0..n {
            let len = n + 1 - i;
            if len < 2 {
                continue;
            }
            let w = simpson_weights(len, h);
            let mut acc = Complex64::default();
            for j in i..=n {
                acc += w[j - i] * kernel(xs[j] - xs[i]) * qs[j] * g[j];
            }
            next[i] += acc;
        }
        last_delta = g
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        g = next;
        if last_delta <= 1e-10 {
            break;
        }
    }
    if last_delta > 1e-10 {
        return Err(Error::NoConvergence {
            iters: iterations,
            delta: last_delta,
        });
    }

    let f: Vec<Complex64> = xs
        .iter()
        .zip(g.iter())
        .map(|(&x, &gv)| gv * (Complex64::i() * s * x).exp())
        .collect();

    // truncation diagnostic: remaining |q| mass over [x_max, 4 x_max]
    let tail_n = 3 * n;
    let tail_h = (3.0 * x_max) / tail_n as f64;
    let tw = simpson_weights(tail_n + 1, tail_h);
    let tail_integral: f64 = (0..=tail_n)
        .map(|i| tw[i] * q(x_max + i as f64 * tail_h).abs())
        .sum();
    let tail_bound = tail_integral / s.norm();

    Ok(VolterraJost {
        s,
        xs,
        f,
        g,
        iterations,
        last_delta,
        tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn phi_input_examples() {
        // lambda = 0 collapses to the shear [[1, i(x-x0)], [0, 1]]
        let m = phi_input(c64(0.0, 0.0), 2.0, 0.5);
        assert!((m[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((m[(0, 1)] - c64(0.0, 1.5)).norm() < 1e-12);
        assert!(m[(1, 0)].norm() < 1e-12);

        // lambda = i gives s = 1; at d = pi/2 the matrix is [[0, i], [i, 0]]
        let m = phi_input(c64(0.0, 1.0), std::f64::consts::FRAC_PI_2, 0.0);
        let expect = CMatrix::from_rows(&[
            vec![c64(0.0, 0.0), c64(0.0, 1.0)],
            vec![c64(0.0, 1.0), c64(0.0, 0.0)],
        ]);
        assert!(m.max_diff(&expect) < 1e-12);
    }

    #[test]
    fn phi_input_has_unit_determinant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let lambda = c64(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let x = rng.gen_range(-2.0..2.0);
            let m = phi_input(lambda, x, 0.0);
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            assert!((det - c64(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn phi_input_matches_integrated_fundamental() {
        let v = fixtures::rank1();
        let lambda = c64(0.7, -0.9);
        let phi = v.fundamental_input(lambda).unwrap();
        let i = v.nearest_grid_index(1.5);
        let closed = phi_input(lambda, v.grid()[i], v.base_point());
        assert!(phi.value(i).max_diff(&closed) < 1e-9);
    }

    #[test]
    fn gl_kernels_closed_forms() {
        let v = fixtures::rank1();
        let kernels = gl_kernels(&v).unwrap();
        assert!((kernels.omega(0.0, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((kernels.k(0.0, 0.0).unwrap() + 1.0).abs() < 1e-12);
        for &(x, y) in &[(1.0, 0.5), (2.0, 1.0), (3.0, 2.5)] {
            let omega = kernels.omega(x, y).unwrap();
            assert!((omega - x.cos() * y.cos()).abs() < 1e-9);
            let tau = 1.0 + x / 2.0 + (2.0 * x).sin() / 4.0;
            let k = kernels.k(x, y).unwrap();
            assert!((k + x.cos() * y.cos() / tau).abs() < 1e-9);
            assert!(kernels.omega_symmetry_defect(x, y).unwrap() < 1e-10);
        }
    }

    #[test]
    fn gl_identity_residuals() {
        let v = fixtures::rank1();
        let kernels = gl_kernels(&v).unwrap();
        assert!(kernels.gl_residual(2.0, 1.0, 32).unwrap() <= 1e-9);
        let d = fixtures::diag2();
        let kd = gl_kernels(&d).unwrap();
        assert!(kd.gl_residual(1.0, 0.5, 32).unwrap() <= 1e-7);
        let z = fixtures::zero();
        let kz = gl_kernels(&z).unwrap();
        assert!(kz.gl_residual(2.0, 1.0, 16).unwrap() == 0.0);
        assert!(kz.gl_residual(0.5, 1.0, 16).is_err());
    }

    #[test]
    fn q_from_k_matches_potential() {
        let v = fixtures::rank1();
        let kernels = gl_kernels(&v).unwrap();
        let q0 = kernels.q_from_k(0.0).unwrap();
        assert!((q0 - 2.0).abs() < 1e-5, "q(0) = {q0}");
        let profile = v.potential(&[3.0]).unwrap();
        let q3 = kernels.q_from_k(3.0).unwrap();
        assert!((q3 - profile.q[0]).abs() < 1e-5);
        let z = fixtures::zero();
        let kz = gl_kernels(&z).unwrap();
        assert!(kz.q_from_k(1.0).unwrap().abs() < 1e-10);
    }

    #[test]
    fn jost_h_closed_form_at_base() {
        let v = fixtures::rank1();
        let s = c64(0.4, 1.7);
        let d = jost_h(&v, s, 0.0).unwrap();
        // h = 1 + i s / (s^2 - 1) from the closed-form S(lambda, 0)
        let expect = c64(1.0, 0.0) + Complex64::i() * s / (s * s - 1.0);
        assert!((d.h - expect).norm() < 1e-12);
        assert!(d.asymptotic_regime);
        let z = fixtures::zero();
        let dz = jost_h(&z, c64(0.3, 1.2), 5.0).unwrap();
        assert!((dz.h - c64(1.0, 0.0)).norm() < 1e-13);
        assert!(dz.theta_h.abs() < 1e-12);
    }

    #[test]
    fn h_identities_for_trivial_vessel() {
        let z = fixtures::zero();
        let r = check_h_identities(&z, c64(0.6, 1.1), 3.0).unwrap();
        assert!(r.conjugation < 1e-12, "{r:?}");
        assert!(r.modulus < 1e-10, "{r:?}");
        assert!(r.phase < 1e-10, "{r:?}");
    }

    #[test]
    fn h_identities_on_rank1() {
        let v = fixtures::rank1();
        let r = check_h_identities(&v, c64(0.2, 1.8), 1.0).unwrap();
        assert!(r.max() <= 1e-5, "{r:?}");
        // purely imaginary s forces a constant phase
        let r = check_h_identities(&v, c64(0.0, 2.0), 2.0).unwrap();
        assert!(r.phase <= 1e-5, "{r:?}");
    }

    #[test]
    fn conjugation_identity_pointwise() {
        let v = fixtures::rank1();
        let s = c64(0.3, 2.0);
        let r = check_h_identities(&v, s, 1.0).unwrap();
        assert!(r.conjugation <= 1e-7, "{r:?}");
    }

    #[test]
    fn jost_phi_normalization() {
        let v = fixtures::rank1();
        let lambda = c64(0.8, 2.2);
        let (xs, phis) = jost_phi_sweep(&v, lambda).unwrap();
        assert!(phis[0].norm() == 0.0);
        let h = xs[1] - xs[0];
        let wrapped: Vec<CMatrix> = phis[..6]
            .iter()
            .map(|&z| CMatrix::from_rows(&[vec![z]]))
            .collect();
        let dphi = crate::numerics::derivative_at(&wrapped, h, 0)[(0, 0)];
        assert!((dphi - c64(1.0, 0.0)).norm() < 1e-9, "phi'(x0) = {dphi}");
    }

    #[test]
    fn jost_phi_trivial_output_is_sine() {
        let z = fixtures::zero();
        let lambda = c64(0.0, 1.0); // s = 1
        let (xs, phis) = jost_phi_sweep(&z, lambda).unwrap();
        for (i, &x) in xs.iter().enumerate().step_by(97) {
            assert!((phis[i] - c64(x.sin(), 0.0)).norm() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn jost_phi_solves_output_schrodinger() {
        let v = fixtures::rank1();
        let lambda = c64(0.0, 4.0);
        let (xs, phis) = jost_phi_sweep(&v, lambda).unwrap();
        let i = v.nearest_grid_index(1.0);
        let h = xs[1] - xs[0];
        let window: Vec<CMatrix> = (i - 2..=i + 2)
            .map(|j| CMatrix::from_rows(&[vec![phis[j]]]))
            .collect();
        let phi_pp = crate::numerics::second_derivative_at(
            &[
                window[0].clone(),
                window[1].clone(),
                window[2].clone(),
                window[3].clone(),
                window[4].clone(),
                CMatrix::from_rows(&[vec![phis[i + 3]]]),
            ],
            h,
            2,
        )[(0, 0)];
        let q = -2.0 * v.tau_logderiv_prime(xs[i]).unwrap();
        let residual = (-phi_pp + (c64(q, 0.0) + Complex64::i() * lambda) * phis[i]).norm();
        assert!(residual <= 1e-5, "residual {residual}");
    }

    #[test]
    fn volterra_oracle_trivial_potential() {
        let oracle = volterra_jost_oracle(&|_| 0.0, c64(0.0, 2.0), 10.0, 3).unwrap();
        assert_eq!(oracle.iterations, 1);
        for (i, &x) in oracle.xs.iter().enumerate().step_by(50) {
            let expect = (Complex64::i() * c64(0.0, 2.0) * x).exp();
            assert!((oracle.f[i] - expect).norm() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn volterra_oracle_requires_upper_half_plane() {
        assert!(volterra_jost_oracle(&|_| 0.0, c64(1.0, -0.5), 5.0, 4).is_err());
    }

    #[test]
    fn volterra_oracle_solves_the_ode() {
        // RANK1 potential from the closed-form tau
        let q = |x: f64| {
            let tau = 1.0 + x / 2.0 + (2.0 * x).sin() / 4.0;
            let tau_p = 0.5 + (2.0 * x).cos() / 2.0;
            let tau_pp = -(2.0 * x).sin();
            -2.0 * (tau_pp * tau - tau_p * tau_p) / (tau * tau)
        };
        let s = c64(0.0, 2.0);
        let oracle = volterra_jost_oracle(&q, s, 40.0, 60).unwrap();
        let h = oracle.xs[1] - oracle.xs[0];
        let s2 = s * s;
        let mut worst = 0.0f64;
        for i in 2..oracle.xs.len() - 2 {
            let x = oracle.xs[i];
            if x > 30.0 {
                break;
            }
            let fpp = (-oracle.f[i - 2] + 16.0 * oracle.f[i - 1] - 30.0 * oracle.f[i]
                + 16.0 * oracle.f[i + 1]
                - oracle.f[i + 2])
                / (12.0 * h * h);
            let residual = (-fpp + q(x) * oracle.f[i] - s2 * oracle.f[i]).norm();
            worst = worst.max(residual);
        }
        assert!(worst <= 1e-4, "worst ODE residual {worst}");
        // Jost asymptotics at the window edge, truncation-limited
        let i30 = (30.0 / h).round() as usize;
        assert!((oracle.g[i30] - c64(1.0, 0.0)).norm() < 2e-2);
    }
}
