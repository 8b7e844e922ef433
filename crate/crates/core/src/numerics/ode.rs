//! Fixed-step fourth-order integration of matrix differential equations.
//!
//! A deterministic classical Runge-Kutta step is used everywhere: it is
//! testable (halving the step must cut the error sixteen-fold) and has no
//! hidden state. The default resolution is [`DEFAULT_STEPS_PER_UNIT`] steps
//! per unit length.

use super::matrix::CMatrix;
use crate::error::{Error, Result};

/// Default step density for fixed-step integration.
pub const DEFAULT_STEPS_PER_UNIT: usize = 256;

/// Derivative of a heterogeneous block state: given `x` and the current
/// blocks, produce the derivative of each block.
pub type BlockDeriv<'a> = dyn Fn(f64, &[CMatrix]) -> Result<Vec<CMatrix>> + 'a;

/// One classical RK4 step of size `h` for a block state at `x`.
pub fn rk4_step(x: f64, h: f64, state: &[CMatrix], deriv: &BlockDeriv) -> Result<Vec<CMatrix>> {
    let k1 = deriv(x, state)?;
    let s2 = advanced(state, &k1, h / 2.0);
    let k2 = deriv(x + h / 2.0, &s2)?;
    let s3 = advanced(state, &k2, h / 2.0);
    let k3 = deriv(x + h / 2.0, &s3)?;
    let s4 = advanced(state, &k3, h);
    let k4 = deriv(x + h, &s4)?;

    let mut out = Vec::with_capacity(state.len());
    for i in 0..state.len() {
        let mut inc = k1[i].clone();
        inc = inc.add_scaled(super::matrix::c64(2.0, 0.0), &k2[i]);
        inc = inc.add_scaled(super::matrix::c64(2.0, 0.0), &k3[i]);
        inc = inc.add_scaled(super::matrix::c64(1.0, 0.0), &k4[i]);
        out.push(state[i].add_scaled(super::matrix::c64(h / 6.0, 0.0), &inc));
    }
    Ok(out)
}

fn advanced(state: &[CMatrix], k: &[CMatrix], h: f64) -> Vec<CMatrix> {
    state
        .iter()
        .zip(k.iter())
        .map(|(s, d)| s.add_scaled(super::matrix::c64(h, 0.0), d))
        .collect()
}

/// Integrates a block state from `x0` to `x1` in `steps` RK4 steps.
pub fn integrate_blocks(
    mut state: Vec<CMatrix>,
    x0: f64,
    x1: f64,
    steps: usize,
    deriv: &BlockDeriv,
) -> Result<Vec<CMatrix>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("step count must be >= 1".into()));
    }
    let h = (x1 - x0) / steps as f64;
    let mut x = x0;
    for _ in 0..steps {
        state = rk4_step(x, h, &state, deriv)?;
        x += h;
    }
    Ok(state)
}

/// Fundamental solution `Phi` of `u' = coeff(x) u` with `Phi(x0, x0) = I`,
/// integrated to `x` in `steps` fixed RK4 steps.
///
/// Works in either direction (`x < x0` integrates backward). Coefficient
/// values must be finite square matrices of a fixed size.
pub fn fundamental_solution<F>(coeff: F, x0: f64, x: f64, steps: usize) -> Result<CMatrix>
where
    F: Fn(f64) -> CMatrix,
{
    if steps == 0 {
        return Err(Error::InvalidArgument("step count must be >= 1".into()));
    }
    let probe = coeff(x0);
    if !probe.is_square() {
        return Err(Error::DimensionMismatch(
            "ODE coefficient must be square".into(),
        ));
    }
    let n = probe.rows();
    let deriv = |t: f64, state: &[CMatrix]| -> Result<Vec<CMatrix>> {
        let c = coeff(t);
        c.ensure_finite("ODE coefficient")?;
        if c.rows() != n || c.cols() != n {
            return Err(Error::DimensionMismatch(
                "ODE coefficient changed shape along the interval".into(),
            ));
        }
        Ok(vec![c.matmul(&state[0])])
    };
    if x == x0 {
        return Ok(CMatrix::identity(n));
    }
    let out = integrate_blocks(vec![CMatrix::identity(n)], x0, x, steps, &deriv)?;
    Ok(out.into_iter().next().unwrap())
}

/// Step count for an interval of length `len` at `density` steps per unit,
/// never fewer than 4.
pub fn steps_for(len: f64, density: usize) -> usize {
    ((len.abs() * density as f64).ceil() as usize).max(4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::c64;

    #[test]
    fn zero_generator_gives_identity() {
        let phi = fundamental_solution(|_| CMatrix::zeros(3, 3), 0.0, 2.5, 16).unwrap();
        assert!(phi.max_diff(&CMatrix::identity(3)) == 0.0);
    }

    #[test]
    fn scalar_exponential() {
        let phi =
            fundamental_solution(|_| CMatrix::identity(2), 0.0, 1.0, 10_000).unwrap();
        let e = std::f64::consts::E;
        let expect = CMatrix::diag(&[c64(e, 0.0), c64(e, 0.0)]);
        assert!(phi.max_diff(&expect) < 1e-10);
    }

    #[test]
    fn sl_generator_matches_trigonometric_form() {
        // u' = [[0, i], [lambda, 0]] u at lambda = i has the closed form
        // [[cos d, i sin d], [i sin d, cos d]] with unit frequency.
        let lambda = c64(0.0, 1.0);
        let gen = CMatrix::from_rows(&[
            vec![c64(0.0, 0.0), c64(0.0, 1.0)],
            vec![lambda, c64(0.0, 0.0)],
        ]);
        let phi = fundamental_solution(|_| gen.clone(), 0.0, 1.0, 256).unwrap();
        let (c, s) = (1.0f64.cos(), 1.0f64.sin());
        let expect = CMatrix::from_rows(&[
            vec![c64(c, 0.0), c64(0.0, s)],
            vec![c64(0.0, s), c64(c, 0.0)],
        ]);
        assert!(phi.max_diff(&expect) < 1e-8);
    }

    #[test]
    fn group_property_on_smooth_coefficients() {
        let coeff = |x: f64| {
            CMatrix::from_rows(&[
                vec![c64(0.0, 0.1 * x.sin()), c64(x.cos(), 0.0)],
                vec![c64(-0.3, 0.2), c64(0.0, -x.sin())],
            ])
        };
        let steps = 10_000;
        let full = fundamental_solution(coeff, 0.0, 2.0, steps).unwrap();
        let first = fundamental_solution(coeff, 0.0, 0.7, steps).unwrap();
        let second = fundamental_solution(coeff, 0.7, 2.0, steps).unwrap();
        assert!(second.matmul(&first).max_diff(&full) < 1e-8);
    }

    #[test]
    fn backward_integration_inverts_forward() {
        let coeff = |x: f64| {
            CMatrix::from_rows(&[
                vec![c64(0.0, 0.0), c64(1.0, x)],
                vec![c64(-1.0, 0.0), c64(0.0, 0.0)],
            ])
        };
        let fwd = fundamental_solution(coeff, 0.0, 1.0, 4096).unwrap();
        let bwd = fundamental_solution(coeff, 1.0, 0.0, 4096).unwrap();
        assert!(fwd.matmul(&bwd).max_diff(&CMatrix::identity(2)) < 1e-10);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            fundamental_solution(|_| CMatrix::identity(2), 0.0, 1.0, 0),
            Err(Error::InvalidArgument(_))
        ));
        let res = fundamental_solution(
            |_| {
                let mut m = CMatrix::identity(2);
                m[(0, 0)] = c64(f64::INFINITY, 0.0);
                m
            },
            0.0,
            1.0,
            8,
        );
        assert!(matches!(res, Err(Error::NonFinite(_))));
    }

    #[test]
    fn fourth_order_convergence() {
        let coeff = |x: f64| {
            CMatrix::from_rows(&[
                vec![c64(0.0, x.cos()), c64(0.5, 0.0)],
                vec![c64(-0.5, 0.0), c64(0.0, -x.cos())],
            ])
        };
        let fine = fundamental_solution(coeff, 0.0, 1.0, 8192).unwrap();
        let coarse = fundamental_solution(coeff, 0.0, 1.0, 64).unwrap();
        let half = fundamental_solution(coeff, 0.0, 1.0, 128).unwrap();
        let e_coarse = coarse.max_diff(&fine);
        let e_half = half.max_diff(&fine);
        assert!(
            e_coarse / e_half >= 8.0,
            "expected >= 8x error reduction, got {:.2}",
            e_coarse / e_half
        );
    }
}
