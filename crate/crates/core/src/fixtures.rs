//! Reference vessels used across the test suites and exposed by the CLI.

use crate::curve::{discretize_curve_with_density, CurveSpec};
use crate::numerics::{c64, CMatrix, DEFAULT_STEPS_PER_UNIT};
use crate::params::VesselParameters;
use crate::vessel::Vessel;

/// Rank-one vessel: Sturm-Liouville parameters, `A = [i kappa]`,
/// `B0 = [1, 0]`, `X0 = [1]`. With `kappa = 1` everything has closed form:
/// `B(x) = [cos x, -i sin x]`, `X(x) = 1 + x/2 + sin(2x)/4`.
pub fn rank1_kappa_on(kappa: f64, a: f64, b: f64, density: usize) -> Vessel {
    let params = VesselParameters::sturm_liouville(a, b);
    let dynamics = CMatrix::from_rows(&[vec![c64(0.0, kappa)]]);
    let b0 = CMatrix::from_rows(&[vec![c64(1.0, 0.0), c64(0.0, 0.0)]]);
    let gram0 = CMatrix::identity(1);
    Vessel::construct_with_density(params, dynamics, b0, gram0, 0.0, density)
        .expect("rank-1 fixture constructs")
}

/// Rank-one vessel on `[0, 10]`.
pub fn rank1() -> Vessel {
    rank1_kappa_on(1.0, 0.0, 10.0, DEFAULT_STEPS_PER_UNIT)
}

/// Rank-one vessel on `[0, b]`.
pub fn rank1_on(b: f64) -> Vessel {
    rank1_kappa_on(1.0, 0.0, b, DEFAULT_STEPS_PER_UNIT)
}

/// Trivial vessel with `B0 = 0`: `S = I`, `tau = 1`, `q = 0`.
pub fn zero() -> Vessel {
    let params = VesselParameters::sturm_liouville(0.0, 10.0);
    let dynamics = CMatrix::from_rows(&[vec![c64(0.0, 1.0)]]);
    let b0 = CMatrix::zeros(1, 2);
    let gram0 = CMatrix::identity(1);
    Vessel::construct(params, dynamics, b0, gram0, 0.0).expect("zero fixture constructs")
}

/// Two-dimensional state space with `A = diag(i, 4i)`, both `B0` rows
/// `[1, 0]`, `X0 = I`. The Lyapunov equation forces the off-diagonal of
/// `X0` to vanish, and the Krylov block has Vandermonde rank 2.
pub fn diag2() -> Vessel {
    diag2_on(10.0)
}

pub fn diag2_on(b: f64) -> Vessel {
    let params = VesselParameters::sturm_liouville(0.0, b);
    let dynamics = CMatrix::diag(&[c64(0.0, 1.0), c64(0.0, 4.0)]);
    let b0 = CMatrix::from_rows(&[
        vec![c64(1.0, 0.0), c64(0.0, 0.0)],
        vec![c64(1.0, 0.0), c64(0.0, 0.0)],
    ]);
    let gram0 = CMatrix::identity(2);
    Vessel::construct(params, dynamics, b0, gram0, 0.0).expect("diag2 fixture constructs")
}

/// Zakharov-Shabat vessel with a mixing input map, so the generated
/// off-diagonal potential is nonzero.
pub fn nls2() -> Vessel {
    let params = VesselParameters::nls(0.0, 5.0);
    // B0 B0^H = 2I, so A = -I + i diag satisfies the Lyapunov equation
    let b0 = CMatrix::from_rows(&[
        vec![c64(1.0, 0.0), c64(1.0, 0.0)],
        vec![c64(1.0, 0.0), c64(-1.0, 0.0)],
    ]);
    let dynamics = CMatrix::from_rows(&[
        vec![c64(-1.0, 1.0), c64(0.0, 0.0)],
        vec![c64(0.0, 0.0), c64(-1.0, 2.0)],
    ]);
    let gram0 = CMatrix::identity(2);
    Vessel::construct(params, dynamics, b0, gram0, 0.0).expect("nls2 fixture constructs")
}

/// The 4x4 system: four orthogonal rows of norm sqrt(2), `A = -I + i diag`.
pub fn nls4() -> Vessel {
    let params = VesselParameters::nls4(0.0, 5.0);
    let b0 = CMatrix::from_real_rows(&[
        vec![1.0, 0.0, 1.0, 0.0],
        vec![0.0, 1.0, 0.0, 1.0],
        vec![1.0, 0.0, -1.0, 0.0],
        vec![0.0, 1.0, 0.0, -1.0],
    ]);
    let dynamics = CMatrix::from_rows(&[
        vec![c64(-1.0, 1.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)],
        vec![c64(0.0, 0.0), c64(-1.0, 2.0), c64(0.0, 0.0), c64(0.0, 0.0)],
        vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 3.0), c64(0.0, 0.0)],
        vec![c64(0.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 4.0)],
    ]);
    let gram0 = CMatrix::identity(4);
    Vessel::construct(params, dynamics, b0, gram0, 0.0).expect("nls4 fixture constructs")
}

/// Canonical-system vessel: `B0 = I`, `A = -sigma_1/2 + i diag`.
pub fn canonical2() -> Vessel {
    let params = VesselParameters::canonical(0.0, 5.0);
    let b0 = CMatrix::identity(2);
    // A + A^H = -sigma_1 = -B0 sigma_1 B0^H
    let dynamics = CMatrix::from_rows(&[
        vec![c64(0.0, 1.0), c64(0.0, -0.5)],
        vec![c64(0.0, 0.5), c64(0.0, 2.0)],
    ]);
    let gram0 = CMatrix::identity(2);
    Vessel::construct(params, dynamics, b0, gram0, 0.0).expect("canonical fixture constructs")
}

/// Curve vessel: `n` Gauss nodes on the imaginary segment `[i t_min, i t_max]`
/// with a Gaussian profile, swept over `[0, b]`.
pub fn curve_segment_sl(nodes: usize, t_min: f64, t_max: f64, b: f64, density: usize) -> Vessel {
    let spec = CurveSpec::segment_imag(t_min, t_max, nodes);
    let params = VesselParameters::sturm_liouville(0.0, b);
    discretize_curve_with_density(&spec, params, 0.0, density)
        .expect("curve fixture constructs")
}

/// The standard 8-node curve fixture on `[0, 10]`.
pub fn curve8() -> Vessel {
    curve_segment_sl(8, 1.0, 2.0, 10.0, DEFAULT_STEPS_PER_UNIT)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_construct_and_report_expected_shapes() {
        assert_eq!(rank1().dim_h(), 1);
        assert_eq!(zero().dim_h(), 1);
        assert_eq!(diag2().dim_h(), 2);
        assert_eq!(nls2().dim_e(), 2);
        assert_eq!(nls4().dim_e(), 4);
        assert_eq!(canonical2().dim_e(), 2);
        assert_eq!(curve8().dim_h(), 8);
    }
}
