//! Gauss-Legendre quadrature on finite intervals.

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[a, b]`.
///
/// Exact for polynomials of degree `2n - 1`; weights are positive and sum
/// to `b - a`. Nodes are returned in increasing order.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature order must be >= 1".into()));
    }
    if !(a < b) {
        return Err(Error::InvalidArgument(format!(
            "quadrature interval must satisfy a < b, got [{a}, {b}]"
        )));
    }

    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;

    // Newton iteration on P_n from Chebyshev-like initial guesses; the
    // symmetry of the roots halves the work.
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = mid - half * x;
        nodes[n - 1 - i] = mid + half * x;
        weights[i] = half * w;
        weights[n - 1 - i] = half * w;
    }
    Ok((nodes, weights))
}

/// Evaluates `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Simpson weights for a uniform grid of `len` points (`len >= 2`).
///
/// Odd interval counts get a 3/8 rule on the final three cells, keeping the
/// rule fourth order throughout.
pub fn simpson_weights(len: usize, h: f64) -> Vec<f64> {
    assert!(len >= 2);
    let mut w = vec![0.0f64; len];
    let intervals = len - 1;
    if intervals == 1 {
        // trapezoid fallback for a single cell
        w[0] = h / 2.0;
        w[1] = h / 2.0;
        return w;
    }
    let simpson_end = if intervals % 2 == 0 { len - 1 } else { len - 4 };
    let mut i = 0;
    while i + 2 <= simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if intervals % 2 == 1 {
        if intervals == 1 {
            unreachable!()
        }
        // 3/8 rule over the last three intervals
        let j = len - 4;
        w[j] += 3.0 * h / 8.0;
        w[j + 1] += 9.0 * h / 8.0;
        w[j + 2] += 9.0 * h / 8.0;
        w[j + 3] += 3.0 * h / 8.0;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_rule_is_midpoint() {
        let (nodes, weights) = gauss_legendre(1, -1.0, 1.0).unwrap();
        assert!((nodes[0]).abs() < 1e-15);
        assert!((weights[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_rule_matches_moment_equations() {
        // Solving the moment equations for a symmetric 2-point rule on [-1,1]
        // gives nodes +-1/sqrt(3) with unit weights.
        let root = 1.0 / 3.0f64.sqrt();
        let (nodes, weights) = gauss_legendre(2, -1.0, 1.0).unwrap();
        assert!((nodes[0] + root).abs() < 1e-14);
        assert!((nodes[1] - root).abs() < 1e-14);
        assert!((weights[0] - 1.0).abs() < 1e-14);
        assert!((weights[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn integrates_t_squared_on_1_2() {
        let (nodes, weights) = gauss_legendre(2, 1.0, 2.0).unwrap();
        let integral: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| w * t * t)
            .sum();
        assert!((integral - 7.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn exactness_up_to_degree_2n_minus_1() {
        for &n in &[3usize, 8, 20] {
            let (nodes, weights) = gauss_legendre(n, -1.0, 1.0).unwrap();
            assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            assert!(weights.iter().all(|&w| w > 0.0));
            for deg in 0..(2 * n) {
                let approx: f64 = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(&t, &w)| w * t.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 0 {
                    2.0 / (deg as f64 + 1.0)
                } else {
                    0.0
                };
                assert!(
                    (approx - exact).abs() < 1e-12,
                    "degree {deg} at n = {n}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn exactness_on_shifted_interval_relative() {
        let n = 12;
        let (nodes, weights) = gauss_legendre(n, -1.0, 1.5).unwrap();
        assert!((weights.iter().sum::<f64>() - 2.5).abs() < 1e-12);
        for deg in 0..(2 * n) {
            let approx: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(&t, &w)| w * t.powi(deg as i32))
                .sum();
            let exact = (1.5f64.powi(deg as i32 + 1) - (-1.0f64).powi(deg as i32 + 1))
                / (deg as f64 + 1.0);
            let scale = exact.abs().max(1.0);
            assert!(
                (approx - exact).abs() < 1e-13 * scale,
                "degree {deg}: {approx} vs {exact}"
            );
        }
    }

    #[test]
    fn invalid_arguments_rejected() {
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(4, 1.0, 1.0).is_err());
        assert!(gauss_legendre(4, 2.0, 1.0).is_err());
    }

    #[test]
    fn simpson_weights_integrate_cubics() {
        for len in [3usize, 6, 7, 11] {
            let h = 0.1;
            let w = simpson_weights(len, h);
            let integral: f64 = (0..len).map(|i| w[i] * (i as f64 * h).powi(3)).sum();
            let upper = (len - 1) as f64 * h;
            assert!((integral - upper.powi(4) / 4.0).abs() < 1e-14, "len {len}");
        }
    }
}
