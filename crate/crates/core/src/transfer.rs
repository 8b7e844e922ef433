//! The transfer function `S(lambda, x) = I - B^H X^{-1} (lambda I - A)^{-1}
//! B sigma_1` of a vessel, its fundamental solutions, and checkers for the
//! identities `S` must satisfy: the symmetry condition, the intertwining of
//! input and output equations, the differential equation in `x`, determinant
//! permanence, and positivity of the associated kernels.
//!
//! Evaluation near the spectrum of `A` is refused rather than regularized:
//! resolvent blowups should be loud.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    c64, derivative_at, lu, rk4_step, CMatrix, GridFunction,
};
use crate::vessel::Vessel;

/// One evaluation of the transfer function with the residuals of the
/// identities it must satisfy at that point.
#[derive(Clone, Debug)]
pub struct TransferSample {
    pub lambda: Complex64,
    pub x: f64,
    pub s: CMatrix,
    pub residual_symmetry: f64,
    /// Residual of `S(lambda, x) Phi = Phi_* S(lambda, x0)`.
    pub residual_intertwine: f64,
    pub residual_ds: f64,
}

/// Fundamental solutions of the input and output equations for one `lambda`,
/// tabulated on the vessel's cache grid with value `I` at the base point.
pub struct FundamentalPair {
    pub lambda: Complex64,
    pub phi: GridFunction,
    pub phi_star: GridFunction,
}

/// Determinant permanence report along a list of `x` values.
#[derive(Clone, Debug)]
pub struct DetPermanence {
    pub values: Vec<Complex64>,
    /// Largest pairwise deviation between determinants.
    pub spread: f64,
    /// `||det| - 1|` maximized over the list; only for purely imaginary lambda.
    pub unimodularity: Option<f64>,
}

impl Vessel {
    /// `S(lambda, x)` without residuals.
    pub fn transfer_matrix(&self, lambda: Complex64, x: f64) -> Result<CMatrix> {
        self.guard_spectrum(lambda)?;
        let (b, gram) = self.state_at(x)?;
        let e = self.dim_e();
        let s1 = self.params().sigma1(x);
        let resolvent_arg = shifted(self.dynamics(), lambda);
        let r = lu::solve(&resolvent_arg, &b)?;
        let w = lu::solve(&gram, &r)?;
        let correction = b.adjoint().matmul(&w).matmul(&s1);
        let s = CMatrix::identity(e).add_scaled(c64(-1.0, 0.0), &correction);
        s.ensure_finite("transfer function")?;
        Ok(s)
    }

    /// `S(lambda, x)` together with the residuals of its defining identities.
    pub fn transfer(&self, lambda: Complex64, x: f64) -> Result<TransferSample> {
        let s = self.transfer_matrix(lambda, x)?;
        let residual_symmetry = self.check_symmetry(lambda, x)?;
        let residual_intertwine = self.intertwine_identity_residual(lambda, x)?;
        let residual_ds = self.check_ds(lambda, x)?;
        Ok(TransferSample {
            lambda,
            x,
            s,
            residual_symmetry,
            residual_intertwine,
            residual_ds,
        })
    }

    /// `|S(-conj(lambda), x)^H sigma_1 S(lambda, x) - sigma_1|`.
    pub fn check_symmetry(&self, lambda: Complex64, x: f64) -> Result<f64> {
        let mirrored = -lambda.conj();
        self.guard_spectrum(lambda)?;
        self.guard_spectrum(mirrored)?;
        let s = self.transfer_matrix(lambda, x)?;
        let s_mirror = self.transfer_matrix(mirrored, x)?;
        let s1 = self.params().sigma1(x);
        let lhs = s_mirror.adjoint().matmul(&s1).matmul(&s);
        Ok(lhs.max_diff(&s1))
    }

    /// Fundamental solution of the input equation
    /// `sigma_1 u' = (sigma_2 lambda + gamma) u` on the cache grid.
    pub fn fundamental_input(&self, lambda: Complex64) -> Result<GridFunction> {
        let coeff = |x: f64| -> Result<CMatrix> {
            let s1 = self.params().sigma1(x);
            let rhs = self
                .params()
                .sigma2(x)
                .scale(lambda)
                .add_scaled(c64(1.0, 0.0), &self.params().gamma(x));
            lu::solve(&s1, &rhs)
        };
        let e = self.dim_e();
        let deriv = move |x: f64, state: &[CMatrix]| -> Result<Vec<CMatrix>> {
            Ok(vec![coeff(x)?.matmul(&state[0])])
        };
        let values = self.propagate_on_grid(vec![CMatrix::identity(e)], &deriv, 0)?;
        Ok(GridFunction::new(self.grid().to_vec(), values))
    }

    /// Fundamental solution of the output equation
    /// `sigma_1 y' = (sigma_2 lambda + gamma_*) y` on the cache grid.
    ///
    /// `gamma_*` depends on `B(x)` and `X(x)`, so the triple `(B, X, Phi_*)`
    /// is integrated jointly; intermediate Runge-Kutta stages use linkage
    /// values computed from the stage state rather than interpolation.
    pub fn fundamental_output(&self, lambda: Complex64) -> Result<GridFunction> {
        let e = self.dim_e();
        let deriv = move |x: f64, state: &[CMatrix]| -> Result<Vec<CMatrix>> {
            let b = &state[0];
            let gram = &state[1];
            let phi = &state[2];
            let bx = self.bx_derivative_pub(x, b, gram)?;
            let gamma_star = self.linkage_pub(x, b, gram)?;
            let s1 = self.params().sigma1(x);
            let rhs = self
                .params()
                .sigma2(x)
                .scale(lambda)
                .add_scaled(c64(1.0, 0.0), &gamma_star);
            let gen = lu::solve(&s1, &rhs)?;
            Ok(vec![bx.0, bx.1, gen.matmul(phi)])
        };
        let state = vec![
            self.b_base().clone(),
            self.gram_base().clone(),
            CMatrix::identity(e),
        ];
        let values = self.propagate_on_grid(state, &deriv, 2)?;
        Ok(GridFunction::new(self.grid().to_vec(), values))
    }

    /// Both fundamental solutions for one `lambda`.
    pub fn fundamental_pair(&self, lambda: Complex64) -> Result<FundamentalPair> {
        Ok(FundamentalPair {
            lambda,
            phi: self.fundamental_input(lambda)?,
            phi_star: self.fundamental_output(lambda)?,
        })
    }

    /// Integrates a block state over the full cache grid in both directions
    /// from the base point, returning component `pick` at every grid point.
    fn propagate_on_grid(
        &self,
        base_state: Vec<CMatrix>,
        deriv: &dyn Fn(f64, &[CMatrix]) -> Result<Vec<CMatrix>>,
        pick: usize,
    ) -> Result<Vec<CMatrix>> {
        let grid = self.grid();
        let base = self.base_index_pub();
        let mut values: Vec<Option<CMatrix>> = vec![None; grid.len()];
        values[base] = Some(base_state[pick].clone());

        let mut state = base_state.clone();
        for i in base..grid.len().saturating_sub(1) {
            let h = grid[i + 1] - grid[i];
            state = rk4_step(grid[i], h, &state, deriv)?;
            values[i + 1] = Some(state[pick].clone());
        }
        state = base_state;
        for i in (1..=base).rev() {
            let h = grid[i - 1] - grid[i];
            state = rk4_step(grid[i], h, &state, deriv)?;
            values[i - 1] = Some(state[pick].clone());
        }
        Ok(values.into_iter().map(|v| v.unwrap()).collect())
    }

    /// Output-equation residual `|-sigma_1 y' + (sigma_2 lambda + gamma_*) y|`
    /// at `x` for `y = S(lambda, .) Phi(lambda, .) u0`, with the derivative
    /// taken by a five-point stencil on the cache grid.
    pub fn check_intertwine(
        &self,
        lambda: Complex64,
        x: f64,
        u0: &CMatrix,
    ) -> Result<f64> {
        self.check_intertwine_with(lambda, x, u0, None)
    }

    /// Same as [`Vessel::check_intertwine`] but with an optional constant
    /// right factor: `y = S(lambda, .) Y u(.)`. Used to verify that
    /// admissible right multipliers preserve the vessel parameters.
    pub fn check_intertwine_with(
        &self,
        lambda: Complex64,
        x: f64,
        u0: &CMatrix,
        right: Option<&CMatrix>,
    ) -> Result<f64> {
        if u0.rows() != self.dim_e() || u0.cols() != 1 {
            return Err(Error::DimensionMismatch("u0 must be a dim_E column".into()));
        }
        let phi = self.fundamental_input(lambda)?;
        let (window, local) = self.stencil_window(x)?;
        let h = self.grid_step();
        let mut ys: Vec<CMatrix> = Vec::with_capacity(window.len());
        for &j in &window {
            let s = self.transfer_matrix(lambda, self.grid()[j])?;
            let u = match right {
                Some(yf) => yf.matmul(&phi.value(j).matmul(u0)),
                None => phi.value(j).matmul(u0),
            };
            ys.push(s.matmul(&u));
        }
        let y_prime = derivative_at(&ys, h, local);
        let xg = self.grid()[window[local]];
        let y = &ys[local];
        let s1 = self.params().sigma1(xg);
        let gamma_star = self.gamma_star_at(xg)?;
        let ops = self
            .params()
            .sigma2(xg)
            .scale(lambda)
            .add_scaled(c64(1.0, 0.0), &gamma_star);
        let residual = ops.matmul(y).add_scaled(c64(-1.0, 0.0), &s1.matmul(&y_prime));
        Ok(residual.norm_max())
    }

    /// Residual of the fundamental identity
    /// `S(lambda, x) Phi(lambda, x) = Phi_*(lambda, x) S(lambda, x0)`.
    pub fn intertwine_identity_residual(&self, lambda: Complex64, x: f64) -> Result<f64> {
        let pair = self.fundamental_pair(lambda)?;
        self.intertwine_identity_residual_with(&pair, x)
    }

    /// Same, reusing an already computed fundamental pair.
    pub fn intertwine_identity_residual_with(
        &self,
        pair: &FundamentalPair,
        x: f64,
    ) -> Result<f64> {
        let i = self.nearest_grid_index(x);
        let xg = self.grid()[i];
        let s_x = self.transfer_matrix(pair.lambda, xg)?;
        let s_base = self.transfer_matrix(pair.lambda, self.base_point())?;
        let lhs = s_x.matmul(pair.phi.value(i));
        let rhs = pair.phi_star.value(i).matmul(&s_base);
        Ok(lhs.max_diff(&rhs))
    }

    /// Residual of the differential equation for `S`:
    /// `|dS/dx - sigma_1^{-1}(sigma_2 lambda + gamma_*) S
    ///        + S sigma_1^{-1}(sigma_2 lambda + gamma)|`.
    pub fn check_ds(&self, lambda: Complex64, x: f64) -> Result<f64> {
        self.guard_spectrum(lambda)?;
        let (window, local) = self.stencil_window(x)?;
        let h = self.grid_step();
        let samples: Vec<CMatrix> = window
            .iter()
            .map(|&j| self.transfer_matrix(lambda, self.grid()[j]))
            .collect::<Result<Vec<_>>>()?;
        let ds = derivative_at(&samples, h, local);
        let xg = self.grid()[window[local]];
        let s = &samples[local];
        let s1 = self.params().sigma1(xg);
        let out_ops = self
            .params()
            .sigma2(xg)
            .scale(lambda)
            .add_scaled(c64(1.0, 0.0), &self.gamma_star_at(xg)?);
        let in_ops = self
            .params()
            .sigma2(xg)
            .scale(lambda)
            .add_scaled(c64(1.0, 0.0), &self.params().gamma(xg));
        let left = lu::solve(&s1, &out_ops)?.matmul(s);
        let right = s.matmul(&lu::solve(&s1, &in_ops)?);
        let residual = ds
            .add_scaled(c64(-1.0, 0.0), &left)
            .add_scaled(c64(1.0, 0.0), &right);
        Ok(residual.norm_max())
    }

    /// Determinants of `S(lambda, x)` over a list of `x` values with the
    /// permanence spread and, for purely imaginary `lambda`, the deviation
    /// of `|det|` from one.
    pub fn det_s(&self, lambda: Complex64, xs: &[f64]) -> Result<DetPermanence> {
        let mut values = Vec::with_capacity(xs.len());
        for &x in xs {
            let s = self.transfer_matrix(lambda, x)?;
            values.push(lu::det(&s)?);
        }
        let mut spread = 0.0f64;
        for i in 0..values.len() {
            for j in (i + 1)..values.len() {
                spread = spread.max((values[i] - values[j]).norm());
            }
        }
        let unimodularity = if lambda.re.abs() < 1e-14 {
            Some(
                values
                    .iter()
                    .map(|d| (d.norm() - 1.0).abs())
                    .fold(0.0, f64::max),
            )
        } else {
            None
        };
        Ok(DetPermanence {
            values,
            spread,
            unimodularity,
        })
    }

    /// The kernel `K_1(lambda, mu, x) = sigma_1 B^H (conj(mu) I - A^H)^{-1}
    /// X^{-1} (lambda I - A)^{-1} B sigma_1`, evaluated through the resolvent
    /// product so the `lambda + conj(mu) = 0` direction stays removable.
    pub fn kernel_k1(&self, lambda: Complex64, mu: Complex64, x: f64) -> Result<CMatrix> {
        self.guard_spectrum(lambda)?;
        self.guard_spectrum(mu)?;
        let (b, gram) = self.state_at(x)?;
        let s1 = self.params().sigma1(x);
        let r_lambda = lu::solve(&shifted(self.dynamics(), lambda), &b)?;
        let r_mu = lu::solve(&shifted(self.dynamics(), mu), &b)?;
        let middle = lu::solve(&gram, &r_lambda)?;
        Ok(s1
            .matmul(&r_mu.adjoint())
            .matmul(&middle)
            .matmul(&s1))
    }

    /// The dual kernel `K_2(lambda, mu, x) = B^H X^{-1} (conj(mu) I -
    /// A^H)^{-1} X (lambda I - A)^{-1} X^{-1} B` in resolvent form.
    pub fn kernel_k2(&self, lambda: Complex64, mu: Complex64, x: f64) -> Result<CMatrix> {
        self.guard_spectrum(lambda)?;
        self.guard_spectrum(mu)?;
        let (b, gram) = self.state_at(x)?;
        let w = lu::solve(&gram, &b)?;
        let f_lambda = lu::solve(&shifted(self.dynamics(), lambda), &w)?;
        let f_mu = lu::solve(&shifted(self.dynamics(), mu), &w)?;
        Ok(f_mu.adjoint().matmul(&gram).matmul(&f_lambda))
    }

    /// Block Gram matrix of `K_1` over a finite set of spectral points;
    /// positive semidefinite whenever `X(x) > 0`.
    pub fn gram_of_k1(&self, lambdas: &[Complex64], x: f64) -> Result<CMatrix> {
        let (b, gram) = self.state_at(x)?;
        let s1 = self.params().sigma1(x);
        let e = self.dim_e();
        let gs: Vec<CMatrix> = lambdas
            .iter()
            .map(|&z| {
                self.guard_spectrum(z)?;
                Ok(lu::solve(&shifted(self.dynamics(), z), &b)?.matmul(&s1))
            })
            .collect::<Result<Vec<_>>>()?;
        let m = lambdas.len();
        let mut out = CMatrix::zeros(m * e, m * e);
        for j in 0..m {
            for k in 0..m {
                let block = gs[j].adjoint().matmul(&lu::solve(&gram, &gs[k])?);
                out.set_block(j * e, k * e, &block);
            }
        }
        out.symmetrize_hermitian();
        Ok(out)
    }

    /// Block Gram matrix of `K_2` over a finite set of spectral points.
    pub fn gram_of_k2(&self, lambdas: &[Complex64], x: f64) -> Result<CMatrix> {
        let (b, gram) = self.state_at(x)?;
        let e = self.dim_e();
        let w = lu::solve(&gram, &b)?;
        let fs: Vec<CMatrix> = lambdas
            .iter()
            .map(|&z| {
                self.guard_spectrum(z)?;
                lu::solve(&shifted(self.dynamics(), z), &w)
            })
            .collect::<Result<Vec<_>>>()?;
        let m = lambdas.len();
        let mut out = CMatrix::zeros(m * e, m * e);
        for j in 0..m {
            for k in 0..m {
                let block = fs[j].adjoint().matmul(&gram).matmul(&fs[k]);
                out.set_block(j * e, k * e, &block);
            }
        }
        out.symmetrize_hermitian();
        Ok(out)
    }

    /// Window of six consecutive grid indices around `x` and the local
    /// offset of the point nearest `x` inside it.
    pub(crate) fn stencil_window(&self, x: f64) -> Result<(Vec<usize>, usize)> {
        self.stencil_window_n(x, 6)
    }

    /// Window of `size` consecutive grid indices around `x`.
    pub(crate) fn stencil_window_n(&self, x: f64, size: usize) -> Result<(Vec<usize>, usize)> {
        let n = self.grid().len();
        if n < size {
            return Err(Error::InvalidArgument(
                "grid too short for derivative stencils".into(),
            ));
        }
        let i = self.nearest_grid_index(x);
        let start = i.saturating_sub(size / 2).min(n - size);
        Ok(((start..start + size).collect(), i - start))
    }
}

/// `lambda I - A`.
pub(crate) fn shifted(a: &CMatrix, lambda: Complex64) -> CMatrix {
    let n = a.rows();
    let mut m = a.scale(c64(-1.0, 0.0));
    for i in 0..n {
        m[(i, i)] += lambda;
    }
    m
}
