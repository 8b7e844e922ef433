//! The tau function `tau(x) = det(X(x0)^{-1} X(x))`, its logarithmic
//! derivative through the trace formula, and the Sturm-Liouville potential
//! generated by a vessel.
//!
//! The trace formula `tau'/tau = tr(sigma_2 B^H X^{-1} B)` is the
//! definition used throughout; agreement with a numerical derivative of
//! `log tau` is a test, never the implementation. Where a derivative of the
//! trace formula itself is needed it is expanded by the product rule with
//! `B'` taken from the evolution equation, eliminating one discretization
//! layer.

use std::io::Write;

use crate::error::{Error, Result};
use crate::numerics::{c64, lu, scalar_derivative_at, CMatrix};
use crate::params::Family;
use crate::vessel::Vessel;

/// Tau, its logarithmic derivative, `beta` and the potential sampled on a
/// grid.
#[derive(Clone, Debug)]
pub struct TauProfile {
    pub grid: Vec<f64>,
    pub tau: Vec<f64>,
    /// `tau'/tau` from the trace formula.
    pub logderiv: Vec<f64>,
    /// `beta = -tau'/tau`.
    pub beta: Vec<f64>,
    /// `q = 2 beta'` by five-point differences.
    pub q: Vec<f64>,
}

impl TauProfile {
    /// Emits `x,tau,logderiv,beta,q` rows at full shortest-round-trip
    /// precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,tau,logderiv,beta,q")?;
        for i in 0..self.grid.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                self.grid[i], self.tau[i], self.logderiv[i], self.beta[i], self.q[i]
            )?;
        }
        Ok(())
    }
}

impl Vessel {
    /// `tau(x) = det(X(x0)^{-1} X(x))` with an argument-accumulated
    /// log-determinant; returns the value and the relative size of the
    /// imaginary part that was discarded.
    pub fn tau_with_diagnostic(&self, x: f64) -> Result<(f64, f64)> {
        let gram = self.gram_at(x)?;
        let ratio = lu::solve(self.gram_base(), &gram)?;
        let ld = lu::log_det(&ratio)?;
        let magnitude = ld.re.exp();
        let value = magnitude * ld.im.cos();
        let imag = magnitude * ld.im.sin();
        let diag = imag.abs() / value.abs().max(1.0);
        Ok((value, diag))
    }

    /// `tau(x)`, real for Hermitian chains.
    pub fn tau(&self, x: f64) -> Result<f64> {
        Ok(self.tau_with_diagnostic(x)?.0)
    }

    /// `tau'/tau = tr(sigma_2 B^H X^{-1} B)` (the trace formula, not a
    /// numerical derivative).
    pub fn tau_logderiv(&self, x: f64) -> Result<f64> {
        let (b, gram) = self.state_at(x)?;
        let m = moment(&b, &gram)?;
        Ok(self.params().sigma2(x).matmul(&m).trace().re)
    }

    /// Derivative of the trace formula by the product rule:
    /// `t' = tr(X'' X^{-1}) - tr((X' X^{-1})^2)` with `X' = B sigma_2 B^H`
    /// and `B'` from the evolution equation.
    pub fn tau_logderiv_prime(&self, x: f64) -> Result<f64> {
        let (b, gram) = self.state_at(x)?;
        let (b_prime, x_prime) = self.bx_derivative_pub(x, &b, &gram)?;
        let s2 = self.params().sigma2(x);
        let s2_prime = self.sigma2_prime(x);
        // X'' = B' sigma_2 B^H + B sigma_2' B^H + B sigma_2 B'^H
        let mut x_second = b_prime.matmul(&s2).matmul(&b.adjoint());
        x_second = x_second.add_scaled(c64(1.0, 0.0), &b.matmul(&s2_prime).matmul(&b.adjoint()));
        x_second = x_second.add_scaled(
            c64(1.0, 0.0),
            &b.matmul(&s2).matmul(&b_prime.adjoint()),
        );
        let gram_lu = lu::LuFactors::factor(&gram)?;
        let first = gram_lu.solve(&x_second).trace();
        let xp_xinv = gram_lu.solve(&x_prime);
        // tr((X' X^{-1})^2): X' X^{-1} has the same trace as X^{-1} X'
        let second = xp_xinv.matmul(&xp_xinv).trace();
        Ok((first - second).re)
    }

    /// Numerical derivative of the coefficient `sigma_2`; identically zero
    /// for the constant built-in families.
    fn sigma2_prime(&self, x: f64) -> CMatrix {
        match self.params().family() {
            Family::Custom => {
                let h = 1e-4;
                let plus = self.params().sigma2(x + h);
                let minus = self.params().sigma2(x - h);
                (&plus - &minus).scale(c64(0.5 / h, 0.0))
            }
            _ => CMatrix::zeros(self.dim_e(), self.dim_e()),
        }
    }

    /// Samples tau, its logarithmic derivative, `beta` and the potential
    /// `q = 2 beta'` on `grid`. Sturm-Liouville vessels only.
    ///
    /// `beta'` comes from the product-rule derivative of the trace formula,
    /// so closed-form values (such as `q = 2` at the rank-one base point)
    /// come out exact; the finite-difference route `2 d(beta)/dx` remains
    /// available through [`Vessel::potential_fd`] as a cross-check.
    pub fn potential(&self, grid: &[f64]) -> Result<TauProfile> {
        self.require_family(Family::SL)?;
        let (lo, hi) = self.valid_interval();
        let mut tau = Vec::with_capacity(grid.len());
        let mut logderiv = Vec::with_capacity(grid.len());
        let mut beta = Vec::with_capacity(grid.len());
        let mut q = Vec::with_capacity(grid.len());
        for &x in grid {
            if x < lo - 1e-12 || x > hi + 1e-12 {
                return Err(Error::OutsideInterval { x, lo, hi });
            }
            let (t, _) = self.tau_with_diagnostic(x)?;
            let ld = scrub_zero(self.tau_logderiv(x)?);
            tau.push(t);
            logderiv.push(ld);
            beta.push(scrub_zero(-ld));
            q.push(scrub_zero(-2.0 * self.tau_logderiv_prime(x)?));
        }
        Ok(TauProfile {
            grid: grid.to_vec(),
            tau,
            logderiv,
            beta,
            q,
        })
    }

    /// The potential by five-point differences of `beta` on the cache
    /// spacing; an independent discretization of the same quantity.
    pub fn potential_fd(&self, grid: &[f64]) -> Result<Vec<f64>> {
        self.require_family(Family::SL)?;
        let h = self.grid_step();
        let (lo, hi) = self.valid_interval();
        grid.iter()
            .map(|&x| {
                if x < lo - 1e-12 || x > hi + 1e-12 {
                    return Err(Error::OutsideInterval { x, lo, hi });
                }
                let (points, local) = stencil_points(x, h, lo, hi);
                let betas: Vec<f64> = points
                    .iter()
                    .map(|&t| Ok(-self.tau_logderiv(t)?))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(2.0 * scalar_derivative_at(&betas, h, local))
            })
            .collect()
    }

    /// Residual of the tau-formula for `gamma_*`:
    /// `|gamma_*(x) - gamma - [[i tau''/tau, tau'/tau], [-tau'/tau, 0]]|`,
    /// with the tau derivatives taken from the trace formula.
    pub fn check_gamma_star_formula(&self, x: f64) -> Result<f64> {
        self.require_family(Family::SL)?;
        let t = self.tau_logderiv(x)?;
        let tp = self.tau_logderiv_prime(x)?;
        // tau''/tau = t' + t^2
        let tau2 = tp + t * t;
        let formula = CMatrix::from_rows(&[
            vec![c64(0.0, tau2), c64(t, 0.0)],
            vec![c64(-t, 0.0), c64(0.0, 0.0)],
        ]);
        let expected = &self.params().gamma(x) + &formula;
        let actual = self.gamma_star_at(x)?;
        Ok(actual.max_diff(&expected))
    }

    pub(crate) fn require_family(&self, family: Family) -> Result<()> {
        if self.params().family() == family {
            Ok(())
        } else {
            Err(Error::WrongFamily {
                expected: family.to_string(),
                found: self.params().family().to_string(),
            })
        }
    }
}

/// Maps `-0.0` to `+0.0` so emitted profiles never show a signed zero.
fn scrub_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// `M = B^H X^{-1} B`, Hermitian part enforced.
fn moment(b: &CMatrix, gram: &CMatrix) -> Result<CMatrix> {
    let mut m = b.adjoint().matmul(&lu::solve(gram, b)?);
    m.symmetrize_hermitian();
    Ok(m)
}

/// Five consecutive stencil points spaced `h` around `x`, shifted inward at
/// the interval boundary; returns the points and the index of `x` in them.
fn stencil_points(x: f64, h: f64, lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let mut offset: isize = -2;
    if x + (offset as f64) * h < lo {
        offset = ((lo - x) / h).ceil() as isize;
    }
    if x + (offset as f64 + 4.0) * h > hi {
        offset = (((hi - x) / h).floor() as isize) - 4;
    }
    let points: Vec<f64> = (0..5).map(|k| x + (offset + k) as f64 * h).collect();
    let local = (-offset) as usize;
    (points, local)
}
