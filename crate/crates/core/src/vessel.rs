//! Vessel state and the standard construction.
//!
//! A vessel ties a dynamics matrix `A`, an input map `B(x)` and a Hermitian
//! operator `X(x)` to the coefficient quadruple through four conditions:
//!
//! * evolution of `B`:   `d/dx (B sigma_1) + A B sigma_2 + B gamma = 0`
//! * Lyapunov equation:  `A X + X A^H + B sigma_1 B^H = 0`
//! * derivative of `X`:  `X' = B sigma_2 B^H`
//! * linkage:            `gamma_* = gamma + sigma_2 M sigma_1 - sigma_1 M sigma_2`
//!   with `M = B^H X^{-1} B`
//!
//! The standard construction starts from `(A, B(x0), X(x0))` satisfying the
//! Lyapunov equation at the base point, evolves `B` as a matrix ODE, obtains
//! `X` by integrating its derivative, and defines `gamma_*` by linkage. The
//! Lyapunov condition then propagates along `x` on its own; the residual
//! checkers below measure how well the discretization preserves it.
//!
//! `B` and `X` are cached on a uniform grid. Off-grid queries re-integrate
//! the evolution equations from the nearest cached point; nothing is ever
//! interpolated.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    c64, derivative_at, eigenvalues, hermitian_eigenvalues, hermitian_sqrt_with_inverse, lu,
    numerical_rank, rk4_step, steps_for, CMatrix, DEFAULT_STEPS_PER_UNIT,
};
use crate::params::VesselParameters;

/// Absolute floor on the smallest singular value of `X(x)` along the sweep.
pub const GRAM_MIN_SIGMA: f64 = 1e-10;

/// Relative tolerance for the Lyapunov precondition at the base point.
pub const LYAPUNOV_TOL: f64 = 1e-10;

/// Rank tolerance used by the minimality test.
pub const RANK_TOL: f64 = 1e-8;

/// Guard distance around the spectrum of `A` for resolvent evaluations.
pub const SPECTRUM_GUARD: f64 = 1e-8;

/// Norms of the four vessel-condition residuals at a point.
#[derive(Clone, Copy, Debug)]
pub struct ConditionResiduals {
    /// `|d/dx (B sigma_1) + A B sigma_2 + B gamma|`
    pub b_evolution: f64,
    /// `|A X + X A^H + B sigma_1 B^H|`
    pub lyapunov: f64,
    /// `|X' - B sigma_2 B^H|`
    pub gram_derivative: f64,
    /// `|gamma_* - gamma - sigma_2 M sigma_1 + sigma_1 M sigma_2|`
    pub linkage: f64,
}

impl ConditionResiduals {
    pub fn max(&self) -> f64 {
        self.b_evolution
            .max(self.lyapunov)
            .max(self.gram_derivative)
            .max(self.linkage)
    }
}

/// Coarse classification of a vessel.
#[derive(Clone, Debug)]
pub struct VesselClassification {
    /// `X(x) > 0` at every sampled grid point.
    pub dissipative: bool,
    /// Krylov span of `B(x0)` under `A` fills the state space.
    pub minimal: bool,
    /// Largest imaginary part over the spectrum of `A`.
    pub m_a: f64,
}

/// Record of a sweep stopping early because `X(x)` lost invertibility.
#[derive(Clone, Copy, Debug)]
pub struct Truncation {
    pub requested: (f64, f64),
    /// Smallest singular value seen at the point that failed.
    pub sigma_min: f64,
}

/// A vessel constructed from initial data and swept over its interval.
///
/// Immutable after construction; evaluation methods are read-only.
pub struct Vessel {
    params: VesselParameters,
    dim_h: usize,
    a: CMatrix,
    base_point: f64,
    b_base: CMatrix,
    gram_base: CMatrix,
    density: usize,
    grid: Vec<f64>,
    base_index: usize,
    b_cache: Vec<CMatrix>,
    gram_cache: Vec<CMatrix>,
    gamma_star_cache: Vec<CMatrix>,
    spectrum: Vec<Complex64>,
    truncation: Option<Truncation>,
}

impl Vessel {
    /// Standard construction at the default grid density.
    ///
    /// Requires `gram0` Hermitian and invertible and the Lyapunov residual at
    /// `x0` below tolerance; `gamma_*` is produced by the linkage formula.
    /// If `X(x)` loses invertibility inside the requested interval the sweep
    /// stops there and the truncation is recorded on the vessel.
    pub fn construct(
        params: VesselParameters,
        a: CMatrix,
        b0: CMatrix,
        gram0: CMatrix,
        x0: f64,
    ) -> Result<Vessel> {
        Self::construct_with_density(params, a, b0, gram0, x0, DEFAULT_STEPS_PER_UNIT)
    }

    /// Standard construction with `density` grid steps per unit length.
    pub fn construct_with_density(
        params: VesselParameters,
        a: CMatrix,
        b0: CMatrix,
        gram0: CMatrix,
        x0: f64,
        density: usize,
    ) -> Result<Vessel> {
        if density == 0 {
            return Err(Error::InvalidArgument("grid density must be >= 1".into()));
        }
        if !a.is_square() {
            return Err(Error::DimensionMismatch("A must be square".into()));
        }
        let dim_h = a.rows();
        if b0.rows() != dim_h || b0.cols() != params.dim_e() {
            return Err(Error::DimensionMismatch(format!(
                "B0 must be {}x{}, got {}x{}",
                dim_h,
                params.dim_e(),
                b0.rows(),
                b0.cols()
            )));
        }
        if gram0.rows() != dim_h || !gram0.is_square() {
            return Err(Error::DimensionMismatch("X0 must be square of order dim_H".into()));
        }
        let (lo, hi) = params.interval();
        if !(lo <= x0 && x0 <= hi) {
            return Err(Error::OutsideInterval { x: x0, lo, hi });
        }
        let sample: Vec<f64> = (0..=4).map(|k| lo + (hi - lo) * k as f64 / 4.0).collect();
        params.validate(&sample)?;

        let scale = 1.0 + gram0.norm_max();
        if gram0.hermitian_defect() > 1e-10 * scale {
            return Err(Error::InvalidArgument(format!(
                "X0 is not Hermitian (defect {:.3e})",
                gram0.hermitian_defect()
            )));
        }
        let gram_lu = lu::LuFactors::factor(&gram0)?;
        drop(gram_lu);

        let s1 = params.sigma1(x0);
        let lyap = lyapunov_defect(&a, &gram0, &b0, &s1);
        let lyap_scale = 1.0
            + a.norm_max() * gram0.norm_max()
            + b0.norm_max() * b0.norm_max() * s1.norm_max();
        if lyap > LYAPUNOV_TOL * lyap_scale {
            return Err(Error::LyapunovResidual {
                residual: lyap,
                tolerance: LYAPUNOV_TOL * lyap_scale,
            });
        }

        let spectrum = eigenvalues(&a)?;

        let mut vessel = Vessel {
            params,
            dim_h,
            a,
            base_point: x0,
            b_base: b0,
            gram_base: gram0,
            density,
            grid: Vec::new(),
            base_index: 0,
            b_cache: Vec::new(),
            gram_cache: Vec::new(),
            gamma_star_cache: Vec::new(),
            spectrum,
            truncation: None,
        };
        vessel.sweep()?;
        Ok(vessel)
    }

    /// Populates the caches in both directions from the base point, stopping
    /// a direction early when `sigma_min(X)` falls under [`GRAM_MIN_SIGMA`].
    fn sweep(&mut self) -> Result<()> {
        let (lo, hi) = self.params.interval();
        let h = 1.0 / self.density as f64;
        let up_steps = ((hi - self.base_point) / h + 1e-9).floor() as usize;
        let down_steps = ((self.base_point - lo) / h + 1e-9).floor() as usize;

        // an eigenvalue of X crossing zero between steps also means the
        // interval of invertibility ended, even if |X| recovered afterwards
        let base_signature = negative_count(&self.gram_base);

        let mut up: Vec<(f64, CMatrix, CMatrix)> = Vec::with_capacity(up_steps + 1);
        let mut state = vec![self.b_base.clone(), self.gram_base.clone()];
        let mut x = self.base_point;
        for k in 0..up_steps {
            let next = self.step_bx(x, h, &state)?;
            let eigs = hermitian_eigenvalues(&next[1]);
            let sigma_min = eigs.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
            let signature = eigs.iter().filter(|&&v| v < 0.0).count();
            if sigma_min <= GRAM_MIN_SIGMA || signature != base_signature {
                self.truncation = Some(Truncation {
                    requested: (lo, hi),
                    sigma_min,
                });
                break;
            }
            x = self.base_point + (k + 1) as f64 * h;
            state = next;
            up.push((x, state[0].clone(), state[1].clone()));
        }

        let mut down: Vec<(f64, CMatrix, CMatrix)> = Vec::with_capacity(down_steps + 1);
        state = vec![self.b_base.clone(), self.gram_base.clone()];
        x = self.base_point;
        for k in 0..down_steps {
            let next = self.step_bx(x, -h, &state)?;
            let eigs = hermitian_eigenvalues(&next[1]);
            let sigma_min = eigs.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
            let signature = eigs.iter().filter(|&&v| v < 0.0).count();
            if sigma_min <= GRAM_MIN_SIGMA || signature != base_signature {
                self.truncation = Some(Truncation {
                    requested: (lo, hi),
                    sigma_min,
                });
                break;
            }
            x = self.base_point - (k + 1) as f64 * h;
            state = next;
            down.push((x, state[0].clone(), state[1].clone()));
        }

        let mut entries: Vec<(f64, CMatrix, CMatrix)> = Vec::new();
        entries.extend(down.into_iter().rev());
        entries.push((
            self.base_point,
            self.b_base.clone(),
            self.gram_base.clone(),
        ));
        entries.extend(up);

        self.base_index = entries
            .iter()
            .position(|(t, _, _)| *t == self.base_point)
            .expect("base point present");
        self.grid = entries.iter().map(|e| e.0).collect();
        self.b_cache = entries.iter().map(|e| e.1.clone()).collect();
        self.gram_cache = entries.iter().map(|e| e.2.clone()).collect();
        self.gamma_star_cache = entries
            .iter()
            .map(|(t, b, g)| self.linkage(*t, b, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(())
    }

    /// One RK4 step of the joint `(B, X)` system, Hermitian part of `X`
    /// enforced after the step.
    fn step_bx(&self, x: f64, h: f64, state: &[CMatrix]) -> Result<Vec<CMatrix>> {
        let deriv = |t: f64, s: &[CMatrix]| self.bx_derivative(t, s);
        let mut next = rk4_step(x, h, state, &deriv)?;
        next[1].symmetrize_hermitian();
        next[0].ensure_finite("B sweep")?;
        Ok(next)
    }

    /// Derivative of the joint state: `B' = -(A B sigma_2 + B (gamma +
    /// sigma_1')) sigma_1^{-1}` and `X' = B sigma_2 B^H`.
    fn bx_derivative(&self, x: f64, state: &[CMatrix]) -> Result<Vec<CMatrix>> {
        let b = &state[0];
        let s1 = self.params.sigma1(x);
        let s2 = self.params.sigma2(x);
        let g = self.params.gamma(x);
        let s1p = self.params.sigma1_prime(x);
        let ab_s2 = self.a.matmul(b).matmul(&s2);
        let b_g = b.matmul(&(&g + &s1p));
        let numerator = (&ab_s2 + &b_g).scale(c64(-1.0, 0.0));
        let b_prime = lu::right_solve(&numerator, &s1)?;
        let mut x_prime = b.matmul(&s2).matmul(&b.adjoint());
        x_prime.symmetrize_hermitian();
        Ok(vec![b_prime, x_prime])
    }

    /// `gamma_*` from the linkage formula at `x` given `B(x)` and `X(x)`.
    fn linkage(&self, x: f64, b: &CMatrix, gram: &CMatrix) -> Result<CMatrix> {
        let s1 = self.params.sigma1(x);
        let s2 = self.params.sigma2(x);
        let g = self.params.gamma(x);
        let mut m = b.adjoint().matmul(&lu::solve(gram, b)?);
        m.symmetrize_hermitian();
        let t = &s2.matmul(&m).matmul(&s1) - &s1.matmul(&m).matmul(&s2);
        Ok(&g + &t)
    }

    pub(crate) fn bx_derivative_pub(
        &self,
        x: f64,
        b: &CMatrix,
        gram: &CMatrix,
    ) -> Result<(CMatrix, CMatrix)> {
        let mut v = self.bx_derivative(x, &[b.clone(), gram.clone()])?;
        let second = v.pop().unwrap();
        let first = v.pop().unwrap();
        Ok((first, second))
    }

    pub(crate) fn linkage_pub(&self, x: f64, b: &CMatrix, gram: &CMatrix) -> Result<CMatrix> {
        self.linkage(x, b, gram)
    }

    pub(crate) fn base_index_pub(&self) -> usize {
        self.base_index
    }

    pub fn params(&self) -> &VesselParameters {
        &self.params
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn dim_e(&self) -> usize {
        self.params.dim_e()
    }

    pub fn dynamics(&self) -> &CMatrix {
        &self.a
    }

    pub fn base_point(&self) -> f64 {
        self.base_point
    }

    pub fn b_base(&self) -> &CMatrix {
        &self.b_base
    }

    pub fn gram_base(&self) -> &CMatrix {
        &self.gram_base
    }

    pub fn density(&self) -> usize {
        self.density
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn grid_step(&self) -> f64 {
        1.0 / self.density as f64
    }

    /// Sub-interval on which `X(x)` stayed numerically invertible.
    pub fn valid_interval(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().unwrap())
    }

    pub fn truncation(&self) -> Option<&Truncation> {
        self.truncation.as_ref()
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// Distance from `lambda` to the spectrum of `A`.
    pub fn spectrum_distance(&self, lambda: Complex64) -> f64 {
        self.spectrum
            .iter()
            .map(|&mu| (lambda - mu).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Errors out when `lambda` is too close to an eigenvalue of `A`.
    pub fn guard_spectrum(&self, lambda: Complex64) -> Result<()> {
        let d = self.spectrum_distance(lambda);
        if d < SPECTRUM_GUARD {
            Err(Error::NearSpectrum {
                lambda,
                distance: d,
            })
        } else {
            Ok(())
        }
    }

    fn check_inside(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.valid_interval();
        let slack = 1e-12 * (1.0 + x.abs());
        if x < lo - slack || x > hi + slack {
            Err(Error::OutsideInterval { x, lo, hi })
        } else {
            Ok(())
        }
    }

    /// Index of the nearest cached grid point.
    pub fn nearest_grid_index(&self, x: f64) -> usize {
        let h = self.grid_step();
        let raw = ((x - self.grid[0]) / h).round() as isize;
        raw.clamp(0, self.grid.len() as isize - 1) as usize
    }

    /// `(B(x), X(x))`, taken from the cache on grid points and otherwise
    /// integrated from the nearest cached point.
    pub fn state_at(&self, x: f64) -> Result<(CMatrix, CMatrix)> {
        self.check_inside(x)?;
        let i = self.nearest_grid_index(x);
        let xg = self.grid[i];
        if (x - xg).abs() <= 1e-13 * (1.0 + x.abs()) {
            return Ok((self.b_cache[i].clone(), self.gram_cache[i].clone()));
        }
        let steps = steps_for((x - xg).abs(), self.density * 4);
        let deriv = |t: f64, s: &[CMatrix]| self.bx_derivative(t, s);
        let mut state = vec![self.b_cache[i].clone(), self.gram_cache[i].clone()];
        let h = (x - xg) / steps as f64;
        let mut t = xg;
        for _ in 0..steps {
            state = rk4_step(t, h, &state, &deriv)?;
            state[1].symmetrize_hermitian();
            t += h;
        }
        Ok((state.swap_remove(0), state.swap_remove(0)))
    }

    /// `B(x)` from the cache-backed evolution.
    pub fn b_at(&self, x: f64) -> Result<CMatrix> {
        Ok(self.state_at(x)?.0)
    }

    /// `X(x)` from the cache-backed evolution.
    pub fn gram_at(&self, x: f64) -> Result<CMatrix> {
        Ok(self.state_at(x)?.1)
    }

    /// `B(x)` integrated directly from the base point in `steps` RK4 steps,
    /// bypassing the cache. Used for convergence studies and as a
    /// cross-check of the cached sweep.
    pub fn b_from_base(&self, x: f64, steps: usize) -> Result<CMatrix> {
        if steps == 0 {
            return Err(Error::InvalidArgument("step count must be >= 1".into()));
        }
        self.check_inside(x)?;
        let deriv = |t: f64, s: &[CMatrix]| self.bx_derivative(t, s);
        let mut state = vec![self.b_base.clone(), self.gram_base.clone()];
        if x == self.base_point {
            return Ok(state.swap_remove(0));
        }
        let h = (x - self.base_point) / steps as f64;
        let mut t = self.base_point;
        for _ in 0..steps {
            state = rk4_step(t, h, &state, &deriv)?;
            state[1].symmetrize_hermitian();
            t += h;
        }
        Ok(state.swap_remove(0))
    }

    /// `gamma_*(x)` defined by the linkage formula.
    pub fn gamma_star_at(&self, x: f64) -> Result<CMatrix> {
        let i = self.nearest_grid_index(x);
        if (x - self.grid[i]).abs() <= 1e-13 * (1.0 + x.abs()) {
            return Ok(self.gamma_star_cache[i].clone());
        }
        let (b, gram) = self.state_at(x)?;
        self.linkage(x, &b, &gram)
    }

    /// Norms of the four vessel-condition residuals, measured at the cache
    /// grid point nearest to `x` (the derivative stencils live on the grid).
    pub fn residuals(&self, x: f64) -> Result<ConditionResiduals> {
        self.check_inside(x)?;
        let n = self.grid.len();
        if n < 6 {
            return Err(Error::InvalidArgument(
                "grid too short for residual stencils".into(),
            ));
        }
        let i = self.nearest_grid_index(x);
        let h = self.grid_step();
        let xg = self.grid[i];
        let b = &self.b_cache[i];
        let gram = &self.gram_cache[i];
        let s1 = self.params.sigma1(xg);
        let s2 = self.params.sigma2(xg);
        let g = self.params.gamma(xg);

        // window of six consecutive samples around i
        let start = i.saturating_sub(2).min(n - 6);
        let local = i - start;
        let bs1: Vec<CMatrix> = (start..start + 6)
            .map(|j| self.b_cache[j].matmul(&self.params.sigma1(self.grid[j])))
            .collect();
        let d_bs1 = derivative_at(&bs1, h, local);
        let b_evolution = (&(&d_bs1 + &self.a.matmul(b).matmul(&s2)) + &b.matmul(&g)).norm_max();

        let lyapunov = lyapunov_defect(&self.a, gram, b, &s1);

        let grams: Vec<CMatrix> = (start..start + 6)
            .map(|j| self.gram_cache[j].clone())
            .collect();
        let d_gram = derivative_at(&grams, h, local);
        let gram_derivative = (&d_gram - &b.matmul(&s2).matmul(&b.adjoint())).norm_max();

        // linkage: the vessel's gamma_* against a fresh evaluation of the
        // formula (and against a provided gamma_* when the parameters fix one)
        let fresh = self.linkage(xg, b, gram)?;
        let reference = match self.params.gamma_star(xg) {
            Some(given) => given,
            None => self.gamma_star_cache[i].clone(),
        };
        let linkage = reference.max_diff(&fresh);

        Ok(ConditionResiduals {
            b_evolution,
            lyapunov,
            gram_derivative,
            linkage,
        })
    }

    /// Krylov block `[B(x), A B(x), ..., A^{n-1} B(x)]`.
    fn krylov(&self, b: &CMatrix) -> CMatrix {
        let n = self.dim_h;
        let e = self.dim_e();
        let mut block = CMatrix::zeros(n, n * e);
        let mut cur = b.clone();
        for k in 0..n {
            block.set_block(0, k * e, &cur);
            if k + 1 < n {
                cur = self.a.matmul(&cur);
            }
        }
        block
    }

    /// Numerical rank of the Krylov block at `x`.
    pub fn krylov_rank(&self, x: f64) -> Result<usize> {
        let b = self.b_at(x)?;
        Ok(numerical_rank(&self.krylov(&b), RANK_TOL))
    }

    /// Dissipativity, minimality and `m(A) = max Im spec(A)` over a grid of
    /// sample points.
    pub fn classify(&self, sample: &[f64]) -> Result<VesselClassification> {
        let mut dissipative = true;
        for &x in sample {
            let gram = self.gram_at(x)?;
            let eigs = hermitian_eigenvalues(&gram);
            if eigs.first().copied().unwrap_or(0.0) <= 0.0 {
                dissipative = false;
                break;
            }
        }
        let minimal = self.krylov_rank(self.base_point)? == self.dim_h;
        let m_a = self
            .spectrum
            .iter()
            .map(|z| z.im)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(VesselClassification {
            dissipative,
            minimal,
            m_a,
        })
    }

    /// Signature report: number of negative eigenvalues of `X(x)` per sample
    /// point. No constancy along `x` is asserted.
    pub fn sign_counts(&self, sample: &[f64]) -> Result<Vec<(f64, usize)>> {
        sample
            .iter()
            .map(|&x| {
                let gram = self.gram_at(x)?;
                let neg = hermitian_eigenvalues(&gram)
                    .into_iter()
                    .filter(|&v| v < 0.0)
                    .count();
                Ok((x, neg))
            })
            .collect()
    }

    /// Similarity transform bringing `X(x0)` to the identity: `V = sqrt(X0)`,
    /// `A -> V^{-1} A V`, `B0 -> V^{-1} B0`. The transfer function is
    /// unchanged; requires a positive definite `X(x0)`.
    pub fn normalize_gram(&self) -> Result<Vessel> {
        let (root, v_inv) = hermitian_sqrt_with_inverse(&self.gram_base)?;
        let a = v_inv.matmul(&self.a).matmul(&root);
        let b0 = v_inv.matmul(&self.b_base);
        let mut gram0 = v_inv.matmul(&self.gram_base).matmul(&v_inv);
        gram0.symmetrize_hermitian();
        Vessel::construct_with_density(
            self.params.clone(),
            a,
            b0,
            gram0,
            self.base_point,
            self.density,
        )
    }
}

/// `|A X + X A^H + B sigma_1 B^H|` in the max norm.
pub fn lyapunov_defect(a: &CMatrix, gram: &CMatrix, b: &CMatrix, sigma1: &CMatrix) -> f64 {
    let ax = a.matmul(gram);
    let xa = gram.matmul(&a.adjoint());
    let bsb = b.matmul(sigma1).matmul(&b.adjoint());
    (&(&ax + &xa) + &bsb).norm_max()
}

/// Number of negative eigenvalues of a Hermitian matrix.
fn negative_count(m: &CMatrix) -> usize {
    hermitian_eigenvalues(m)
        .into_iter()
        .filter(|&v| v < 0.0)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn rank1_b_matches_closed_form() {
        let v = fixtures::rank1();
        for &x in &[0.3, 1.0, std::f64::consts::FRAC_PI_2, 2.5] {
            let b = v.b_at(x).unwrap();
            let expect = CMatrix::from_rows(&[vec![c64(x.cos(), 0.0), c64(0.0, -x.sin())]]);
            assert!(b.max_diff(&expect) < 1e-9, "x = {x}");
        }
        // B(pi/2) = [0, -i]
        let b = v.b_at(std::f64::consts::FRAC_PI_2).unwrap();
        assert!(b[(0, 0)].norm() < 1e-9);
        assert!((b[(0, 1)] - c64(0.0, -1.0)).norm() < 1e-9);
    }

    #[test]
    fn zero_initial_data_stays_zero() {
        let v = fixtures::zero();
        let b = v.b_at(4.0).unwrap();
        assert!(b.norm_max() == 0.0);
        let gram = v.gram_at(7.5).unwrap();
        assert!(gram.max_diff(v.gram_base()) == 0.0);
        let r = v.residuals(3.3). unwrap();
        assert!(r.max() <= 1e-13, "residuals {:?}", r);
    }

    #[test]
    fn rank1_gram_matches_closed_form() {
        let v = fixtures::rank1();
        for &x in &[0.5, 1.5, std::f64::consts::PI, 3.0] {
            let gram = v.gram_at(x).unwrap();
            let expect = 1.0 + x / 2.0 + (2.0 * x).sin() / 4.0;
            assert!((gram[(0, 0)].re - expect).abs() < 1e-9, "x = {x}");
        }
    }

    #[test]
    fn rank1_gamma_star_at_base() {
        let v = fixtures::rank1();
        let gs = v.gamma_star_at(0.0).unwrap();
        let expect = CMatrix::from_rows(&[
            vec![c64(0.0, 0.0), c64(1.0, 0.0)],
            vec![c64(-1.0, 0.0), c64(0.0, 1.0)],
        ]);
        assert!(gs.max_diff(&expect) < 1e-10, "{gs:?}");
    }

    #[test]
    fn residuals_small_at_base_and_inside() {
        let v = fixtures::rank1();
        let r0 = v.residuals(0.0).unwrap();
        assert!(r0.max() <= 1e-10, "{r0:?}");
        let r3 = v.residuals(3.0).unwrap();
        assert!(r3.max() <= 1e-6, "{r3:?}");
    }

    #[test]
    fn diag2_construction_and_classification() {
        let v = fixtures::diag2();
        // off-diagonal Lyapunov residual vanishes for the forced-diagonal X0
        let r = v.residuals(0.0).unwrap();
        assert!(r.lyapunov <= 1e-12);
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
        let c = v.classify(&grid).unwrap();
        assert!(c.dissipative);
        assert!(c.minimal);
        assert!((c.m_a - 4.0).abs() < 1e-8);
    }

    #[test]
    fn rank1_classification() {
        let v = fixtures::rank1();
        let grid: Vec<f64> = (0..=10).map(|k| k as f64).collect();
        let c = v.classify(&grid).unwrap();
        assert!(c.dissipative);
        assert!(c.minimal);
        assert!((c.m_a - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zero_vessel_is_not_minimal() {
        let v = fixtures::zero();
        let c = v.classify(&[0.0, 1.0]).unwrap();
        assert!(!c.minimal);
        assert!(c.dissipative);
    }

    #[test]
    fn lyapunov_precondition_enforced() {
        let params = VesselParameters::sturm_liouville(0.0, 1.0);
        let a = CMatrix::from_rows(&[vec![c64(1.0, 0.0)]]); // A + A^H != 0
        let b0 = CMatrix::from_rows(&[vec![c64(1.0, 0.0), c64(0.0, 0.0)]]);
        let gram0 = CMatrix::identity(1);
        match Vessel::construct(params, a, b0, gram0, 0.0) {
            Err(Error::LyapunovResidual { residual, .. }) => assert!(residual > 1.0),
            other => panic!("expected Lyapunov error, got {:?}", other.is_ok()),
        }
    }

    #[test]
    fn normalize_gram_examples() {
        // X0 = diag(4), A = [i], B0 = [2, 0]  ->  A unchanged, B0 halved
        let params = VesselParameters::sturm_liouville(0.0, 4.0);
        let a = CMatrix::from_rows(&[vec![c64(0.0, 1.0)]]);
        let b0 = CMatrix::from_rows(&[vec![c64(2.0, 0.0), c64(0.0, 0.0)]]);
        let gram0 = CMatrix::diag(&[c64(4.0, 0.0)]);
        let v = Vessel::construct(params, a, b0, gram0, 0.0).unwrap();
        let nv = v.normalize_gram().unwrap();
        assert!((nv.dynamics()[(0, 0)] - c64(0.0, 1.0)).norm() < 1e-12);
        assert!((nv.b_base()[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!(nv.gram_base().max_diff(&CMatrix::identity(1)) < 1e-12);

        // already normalized vessel is unchanged
        let v = fixtures::rank1();
        let nv = v.normalize_gram().unwrap();
        assert!(nv.b_base().max_diff(v.b_base()) < 1e-12);

        // diag(1, 9) scales the rows of B0 by 1 and 1/3
        let params = VesselParameters::sturm_liouville(0.0, 4.0);
        let a = CMatrix::diag(&[c64(0.0, 1.0), c64(0.0, 4.0)]);
        let b0 = CMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(0.0, 0.0)],
            vec![c64(1.0, 0.0), c64(0.0, 0.0)],
        ]);
        let gram0 = CMatrix::diag(&[c64(1.0, 0.0), c64(9.0, 0.0)]);
        let v = Vessel::construct(params, a, b0, gram0, 0.0).unwrap();
        let nv = v.normalize_gram().unwrap();
        assert!((nv.b_base()[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((nv.b_base()[(1, 0)] - c64(1.0 / 3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn normalize_gram_requires_positive_definite() {
        let params = VesselParameters::sturm_liouville(-1.0, 1.0);
        let a = CMatrix::from_rows(&[vec![c64(0.0, 1.0)]]);
        // X0 = [-1] with B0 chosen so the Lyapunov equation still holds
        let b0 = CMatrix::from_rows(&[vec![c64(0.0, 0.0), c64(0.0, 0.0)]]);
        let gram0 = CMatrix::diag(&[c64(-1.0, 0.0)]);
        let v = Vessel::construct(params, a, b0, gram0, 0.0).unwrap();
        assert!(matches!(
            v.normalize_gram(),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn convergence_order_of_b_evolution() {
        let v = fixtures::rank1();
        let x = 1.0;
        let fine = v.b_from_base(x, 4096).unwrap();
        let coarse = v.b_from_base(x, 32).unwrap();
        let halved = v.b_from_base(x, 64).unwrap();
        let e1 = coarse.max_diff(&fine);
        let e2 = halved.max_diff(&fine);
        assert!(e1 / e2 >= 8.0, "ratio {:.2}", e1 / e2);
    }

    #[test]
    fn interval_guarantee_for_dissipative_fixture() {
        // sweep must cover at least 1 / |X0^{-1}| past the base point
        let v = fixtures::rank1();
        let guarantee: f64 = 1.0; // X0 = [1]
        let (_, hi) = v.valid_interval();
        assert!(hi - v.base_point() >= guarantee.min(9.99));
        assert!(v.truncation().is_none());
    }

    #[test]
    fn leftward_sweep_truncates_when_gram_degenerates() {
        // tau(x) = 1 + x/2 + sin(2x)/4 hits zero near x = -2.11
        let params = VesselParameters::sturm_liouville(-4.0, 1.0);
        let a = CMatrix::from_rows(&[vec![c64(0.0, 1.0)]]);
        let b0 = CMatrix::from_rows(&[vec![c64(1.0, 0.0), c64(0.0, 0.0)]]);
        let gram0 = CMatrix::identity(1);
        let v = Vessel::construct(params, a, b0, gram0, 0.0).unwrap();
        let (lo, _) = v.valid_interval();
        assert!(lo > -4.0 && lo < -1.9, "lo = {lo}");
        assert!(v.truncation().is_some());
        assert!(v.gram_at(-5.0).is_err());
    }

    #[test]
    fn minimality_permanence_on_grid_points() {
        let v = fixtures::diag2();
        for &x in &[0.7, 2.3, 4.9, 6.1, 9.2] {
            assert_eq!(v.krylov_rank(x).unwrap(), 2, "x = {x}");
        }
    }

    #[test]
    fn hermiticity_permanence() {
        let v = fixtures::diag2();
        for &x in &[1.0, 3.7, 8.5] {
            let gram = v.gram_at(x).unwrap();
            assert!(gram.hermitian_defect() <= 1e-9);
        }
    }

    #[test]
    fn gram_monotone_for_positive_sigma2() {
        let v = fixtures::diag2();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=20 {
            let x = k as f64 * 0.5;
            let gram = v.gram_at(x).unwrap();
            let min_eig = hermitian_eigenvalues(&gram)[0];
            assert!(min_eig >= prev - 1e-8, "x = {x}");
            prev = min_eig;
        }
    }
}
