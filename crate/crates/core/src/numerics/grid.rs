//! Matrix-valued functions sampled on a strictly increasing grid, and the
//! finite-difference stencils used by every residual checker.
//!
//! Interior derivatives use 5-point central stencils; the first and last two
//! grid points fall back to one-sided stencils of the same (fourth) order.

use super::matrix::{c64, CMatrix};

/// A matrix-valued function tabulated on a strictly increasing grid.
#[derive(Clone, Debug)]
pub struct GridFunction {
    xs: Vec<f64>,
    values: Vec<CMatrix>,
}

impl GridFunction {
    pub fn new(xs: Vec<f64>, values: Vec<CMatrix>) -> Self {
        assert_eq!(xs.len(), values.len(), "one value per grid point");
        assert!(!xs.is_empty());
        assert!(
            xs.windows(2).all(|w| w[0] < w[1]),
            "grid must be strictly increasing"
        );
        let shape = (values[0].rows(), values[0].cols());
        assert!(
            values.iter().all(|v| (v.rows(), v.cols()) == shape),
            "values must share a shape"
        );
        GridFunction { xs, values }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &CMatrix {
        &self.values[i]
    }

    /// Index of the grid point nearest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let mut lo = 0usize;
        let mut hi = self.xs.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if (x - self.xs[lo]).abs() <= (self.xs[hi] - x).abs() {
            lo
        } else {
            hi
        }
    }
}

/// First derivative at index `i` of values on a uniform grid of spacing `h`.
/// Fourth-order accurate everywhere; panics when fewer than 5 samples exist.
pub fn derivative_at(values: &[CMatrix], h: f64, i: usize) -> CMatrix {
    let n = values.len();
    assert!(n >= 5, "derivative stencils need at least 5 samples");
    // integer-coefficient accumulation first, single scaling afterwards
    let combo = |coeffs: &[(f64, usize)], denom: f64| -> CMatrix {
        let mut acc = CMatrix::zeros(values[0].rows(), values[0].cols());
        for &(w, j) in coeffs {
            acc = acc.add_scaled(c64(w, 0.0), &values[j]);
        }
        acc.scale(c64(1.0 / (denom * h), 0.0))
    };
    let interior = |i: usize| {
        combo(
            &[(1.0, i - 2), (-8.0, i - 1), (8.0, i + 1), (-1.0, i + 2)],
            12.0,
        )
    };
    if i >= 2 && i + 2 < n {
        return interior(i);
    }
    if n >= 6 {
        // six-point one-sided stencils keep the boundary error constant
        // below the interior one
        if i == 0 {
            return combo(
                &[
                    (-137.0, 0),
                    (300.0, 1),
                    (-300.0, 2),
                    (200.0, 3),
                    (-75.0, 4),
                    (12.0, 5),
                ],
                60.0,
            );
        }
        if i == 1 {
            return combo(
                &[
                    (-12.0, 0),
                    (-65.0, 1),
                    (120.0, 2),
                    (-60.0, 3),
                    (20.0, 4),
                    (-3.0, 5),
                ],
                60.0,
            );
        }
        if i == n - 1 {
            return combo(
                &[
                    (137.0, n - 1),
                    (-300.0, n - 2),
                    (300.0, n - 3),
                    (-200.0, n - 4),
                    (75.0, n - 5),
                    (-12.0, n - 6),
                ],
                60.0,
            );
        }
        // i == n - 2
        return combo(
            &[
                (12.0, n - 1),
                (65.0, n - 2),
                (-120.0, n - 3),
                (60.0, n - 4),
                (-20.0, n - 5),
                (3.0, n - 6),
            ],
            60.0,
        );
    }
    // exactly five samples: fourth-order one-sided stencils
    if i == 0 {
        combo(&[(-25.0, 0), (48.0, 1), (-36.0, 2), (16.0, 3), (-3.0, 4)], 12.0)
    } else if i == 1 {
        combo(&[(-3.0, 0), (-10.0, 1), (18.0, 2), (-6.0, 3), (1.0, 4)], 12.0)
    } else if i == n - 1 {
        combo(
            &[
                (25.0, n - 1),
                (-48.0, n - 2),
                (36.0, n - 3),
                (-16.0, n - 4),
                (3.0, n - 5),
            ],
            12.0,
        )
    } else {
        combo(
            &[
                (3.0, n - 1),
                (10.0, n - 2),
                (-18.0, n - 3),
                (6.0, n - 4),
                (-1.0, n - 5),
            ],
            12.0,
        )
    }
}

/// Second derivative at index `i`, fourth-order accurate; needs 6 samples
/// near the boundary.
pub fn second_derivative_at(values: &[CMatrix], h: f64, i: usize) -> CMatrix {
    let n = values.len();
    assert!(n >= 6, "second-derivative stencils need at least 6 samples");
    let combo = |coeffs: &[(f64, usize)]| -> CMatrix {
        let mut acc = CMatrix::zeros(values[0].rows(), values[0].cols());
        for &(w, j) in coeffs {
            acc = acc.add_scaled(c64(w, 0.0), &values[j]);
        }
        acc.scale(c64(1.0 / (12.0 * h * h), 0.0))
    };
    if i >= 2 && i + 2 < n {
        combo(&[
            (-1.0, i - 2),
            (16.0, i - 1),
            (-30.0, i),
            (16.0, i + 1),
            (-1.0, i + 2),
        ])
    } else if i == 0 {
        combo(&[
            (45.0, 0),
            (-154.0, 1),
            (214.0, 2),
            (-156.0, 3),
            (61.0, 4),
            (-10.0, 5),
        ])
    } else if i == 1 {
        combo(&[
            (10.0, 0),
            (-15.0, 1),
            (-4.0, 2),
            (14.0, 3),
            (-6.0, 4),
            (1.0, 5),
        ])
    } else if i == n - 1 {
        combo(&[
            (45.0, n - 1),
            (-154.0, n - 2),
            (214.0, n - 3),
            (-156.0, n - 4),
            (61.0, n - 5),
            (-10.0, n - 6),
        ])
    } else {
        // i == n - 2
        combo(&[
            (10.0, n - 1),
            (-15.0, n - 2),
            (-4.0, n - 3),
            (14.0, n - 4),
            (-6.0, n - 5),
            (1.0, n - 6),
        ])
    }
}

/// Scalar versions of the derivative stencils.
pub fn scalar_derivative_at(values: &[f64], h: f64, i: usize) -> f64 {
    let wrapped: Vec<CMatrix> = values
        .iter()
        .map(|&v| CMatrix::from_real_rows(&[vec![v]]))
        .collect();
    derivative_at(&wrapped, h, i)[(0, 0)].re
}

pub fn scalar_second_derivative_at(values: &[f64], h: f64, i: usize) -> f64 {
    let wrapped: Vec<CMatrix> = values
        .iter()
        .map(|&v| CMatrix::from_real_rows(&[vec![v]]))
        .collect();
    second_derivative_at(&wrapped, h, i)[(0, 0)].re
}

/// Unwraps a sequence of raw phases so consecutive samples never jump by
/// more than pi.
pub fn unwrap_phases(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut offset = 0.0f64;
    for (i, &theta) in raw.iter().enumerate() {
        if i > 0 {
            let mut delta = theta - raw[i - 1];
            while delta > std::f64::consts::PI {
                delta -= 2.0 * std::f64::consts::PI;
                offset -= 2.0 * std::f64::consts::PI;
            }
            while delta < -std::f64::consts::PI {
                delta += 2.0 * std::f64::consts::PI;
                offset += 2.0 * std::f64::consts::PI;
            }
        }
        out.push(theta + offset);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_hit_fourth_order_on_sine() {
        let h = 1.0 / 128.0;
        let xs: Vec<f64> = (0..64).map(|i| i as f64 * h).collect();
        let vals: Vec<f64> = xs.iter().map(|&x| (2.0 * x).sin()).collect();
        for i in [0usize, 1, 30, 62, 63] {
            let d = scalar_derivative_at(&vals, h, i);
            let exact = 2.0 * (2.0 * xs[i]).cos();
            assert!((d - exact).abs() < 1e-7, "i = {i}: {d} vs {exact}");
            let d2 = scalar_second_derivative_at(&vals, h, i);
            let exact2 = -4.0 * (2.0 * xs[i]).sin();
            assert!((d2 - exact2).abs() < 1e-5, "i = {i}: {d2} vs {exact2}");
        }
    }

    #[test]
    fn nearest_index_lookup() {
        let xs: Vec<f64> = (0..11).map(|i| i as f64 * 0.5).collect();
        let vals = vec![CMatrix::identity(1); 11];
        let gf = GridFunction::new(xs, vals);
        assert_eq!(gf.nearest_index(0.0), 0);
        assert_eq!(gf.nearest_index(1.24), 2);
        assert_eq!(gf.nearest_index(1.26), 3);
        assert_eq!(gf.nearest_index(99.0), 10);
    }

    #[test]
    fn phase_unwrap_is_continuous() {
        let raw: Vec<f64> = (0..100)
            .map(|i| {
                let theta = 0.2 * i as f64;
                theta.sin().atan2(theta.cos())
            })
            .collect();
        let unwrapped = unwrap_phases(&raw);
        for (i, v) in unwrapped.iter().enumerate() {
            assert!((v - 0.2 * i as f64).abs() < 1e-12);
        }
    }
}
