//! Verification suites run by `vessel-lab verify`.
//!
//! Each suite walks one family of identities over the loaded vessel and
//! produces quantitative check records. Random draws are seeded per suite,
//! so reports are reproducible.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use vessel_lab::numerics::{
    c64, hermitian_eigenvalues, scalar_derivative_at, scalar_second_derivative_at,
};
use vessel_lab::params::Family;
use vessel_lab::{sl, CMatrix, Error, Result, Vessel};

use crate::report::CheckRecord;

pub const SUITE_NAMES: &[&str] = &[
    "axioms",
    "symmetry",
    "det",
    "intertwine",
    "kernels",
    "tau",
    "gl",
    "jost",
    "bounds",
];

pub fn run_suite(
    name: &str,
    v: &Vessel,
    tol: Option<f64>,
    seed: u64,
) -> Result<Vec<CheckRecord>> {
    match name {
        "axioms" => axioms(v, tol),
        "symmetry" => symmetry(v, tol),
        "det" => det(v, tol),
        "intertwine" => intertwine(v, tol, seed),
        "kernels" => kernels(v, tol, seed),
        "tau" => tau(v, tol),
        "gl" => gl(v, tol),
        "jost" => jost(v, tol, seed),
        "bounds" => bounds(v, tol),
        other => Err(Error::InvalidArgument(format!("unknown suite `{other}`"))),
    }
}

/// Evenly spread sample points across the valid interval.
fn samples(v: &Vessel, count: usize) -> Vec<f64> {
    let (lo, hi) = v.valid_interval();
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}

/// The 5x5 spectral grid used by the symmetry checks, spectrum-distance
/// filtered.
fn lambda_grid(v: &Vessel) -> Vec<Complex64> {
    let mut grid = Vec::new();
    for i in 0..5 {
        for j in 0..5 {
            let z = c64(-2.0 + i as f64, 1.5 + 0.5 * j as f64);
            if v.spectrum_distance(z) >= 0.05 && v.spectrum_distance(-z.conj()) >= 0.05 {
                grid.push(z);
            }
        }
    }
    grid
}

fn draw_lambda(rng: &mut ChaCha8Rng, v: &Vessel) -> Complex64 {
    loop {
        let z = c64(rng.gen_range(-2.0..2.0), rng.gen_range(1.5..3.5));
        if v.spectrum_distance(z) >= 0.1 && v.spectrum_distance(-z.conj()) >= 0.1 {
            return z;
        }
    }
}

fn draw_u0(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    CMatrix::col_vec(
        &(0..dim)
            .map(|_| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect::<Vec<_>>(),
    )
}

fn interior_range(v: &Vessel) -> (f64, f64) {
    let (lo, hi) = v.valid_interval();
    let pad = 0.05 * (hi - lo);
    (lo + pad, hi - pad)
}

fn axioms(v: &Vessel, tol: Option<f64>) -> Result<Vec<CheckRecord>> {
    let residual_tol = tol.unwrap_or(1e-6);
    let mut checks = Vec::new();

    // coefficient admissibility on a coarse sample
    let params_ok = v.params().validate(&samples(v, 5));
    checks.push(CheckRecord::new(
        "parameters.admissible",
        json!({}),
        if params_ok.is_ok() { 0.0 } else { 1.0 },
        0.5,
    ));

    checks.push(CheckRecord::new(
        "gram.base_hermitian",
        json!({"x": v.base_point()}),
        v.gram_base().hermitian_defect(),
        1e-10 * (1.0 + v.gram_base().norm_max()),
    ));

    for &x in &samples(v, 11) {
        let r = v.residuals(x)?;
        checks.push(CheckRecord::new(
            "condition.b_evolution",
            json!({"x": x}),
            r.b_evolution,
            residual_tol,
        ));
        checks.push(CheckRecord::new(
            "condition.lyapunov",
            json!({"x": x}),
            r.lyapunov,
            residual_tol,
        ));
        checks.push(CheckRecord::new(
            "condition.gram_derivative",
            json!({"x": x}),
            r.gram_derivative,
            residual_tol,
        ));
        checks.push(CheckRecord::new(
            "condition.linkage",
            json!({"x": x}),
            r.linkage,
            residual_tol,
        ));
        let gram = v.gram_at(x)?;
        checks.push(CheckRecord::new(
            "gram.hermitian",
            json!({"x": x}),
            gram.hermitian_defect(),
            1e-9,
        ));
    }

    // interval guarantee for dissipative vessels: the sweep reaches at least
    // min(1/|X0^{-1}|, requested length) past the base point
    let eigs = hermitian_eigenvalues(v.gram_base());
    if eigs.first().copied().unwrap_or(0.0) > 0.0 {
        let guarantee = eigs[0];
        let (_, hi) = v.valid_interval();
        let (_, requested_hi) = v.params().interval();
        let reach = hi - v.base_point();
        let target = guarantee.min(requested_hi - v.base_point());
        checks.push(CheckRecord::new(
            "interval.guaranteed_length",
            json!({"target": target}),
            (target - reach).max(0.0),
            1e-9,
        ));
    }
    Ok(checks)
}

fn symmetry(v: &Vessel, tol: Option<f64>) -> Result<Vec<CheckRecord>> {
    let residual_tol = tol.unwrap_or(1e-6);
    let xs = samples(v, 11);
    let grid = lambda_grid(v);
    let records: Vec<Result<CheckRecord>> = grid
        .par_iter()
        .flat_map(|&lambda| {
            let xs = xs.clone();
            xs.into_par_iter().map(move |x| {
                let r = v.check_symmetry(lambda, x)?;
                Ok(CheckRecord::new(
                    "symmetry",
                    json!({"lambda": [lambda.re, lambda.im], "x": x}),
                    r,
                    residual_tol,
                ))
            })
        })
        .collect();
    records.into_iter().collect()
}

fn det(v: &Vessel, tol: Option<f64>) -> Result<Vec<CheckRecord>> {
    let spread_tol = tol.unwrap_or(1e-7);
    let mut checks = Vec::new();
    let xs = samples(v, 20);
    for &lambda in &[c64(3.0, 1.0), c64(-1.5, 2.5)] {
        if v.spectrum_distance(lambda) < 0.1 {
            continue;
        }
        let report = v.det_s(lambda, &xs)?;
        let mean = report.values.iter().sum::<Complex64>() / report.values.len() as f64;
        let stdev = (report
            .values
            .iter()
            .map(|d| (d - mean).norm_sqr())
            .sum::<f64>()
            / report.values.len() as f64)
            .sqrt();
        checks.push(CheckRecord::new(
            "det.permanence_stdev",
            json!({"lambda": [lambda.re, lambda.im]}),
            stdev,
            spread_tol,
        ));
    }
    for &im in &[1.5, 2.6, 3.3] {
        let lambda = c64(0.0, im);
        if v.spectrum_distance(lambda) < 0.05 {
            continue;
        }
        let report = v.det_s(lambda, &xs)?;
        checks.push(CheckRecord::new(
            "det.unimodular_on_imaginary_axis",
            json!({"lambda": [0.0, im]}),
            report.unimodularity.unwrap_or(f64::INFINITY),
            spread_tol,
        ));
    }
    Ok(checks)
}

fn intertwine(v: &Vessel, tol: Option<f64>, seed: u64) -> Result<Vec<CheckRecord>> {
    let residual_tol = tol.unwrap_or(1e-5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1357);
    let mut checks = Vec::new();
    let (lo, hi) = interior_range(v);
    for _ in 0..10 {
        let lambda = draw_lambda(&mut rng, v);
        let x = rng.gen_range(lo..hi);
        let u0 = draw_u0(&mut rng, v.dim_e());
        let r = v.check_intertwine(lambda, x, &u0)?;
        checks.push(CheckRecord::new(
            "intertwine.output_lde",
            json!({"lambda": [lambda.re, lambda.im], "x": x}),
            r,
            residual_tol,
        ));
        if v.params().family() == Family::SL {
            let rs = sl::schrodinger_residual(v, lambda, x, &u0)?;
            checks.push(CheckRecord::new(
                "intertwine.schrodinger_scalar",
                json!({"lambda": [lambda.re, lambda.im], "x": x}),
                rs,
                residual_tol,
            ));
        }
    }
    // fundamental identity S Phi = Phi_* S(x0) and the differential equation
    for _ in 0..3 {
        let lambda = draw_lambda(&mut rng, v);
        let x = rng.gen_range(lo..hi);
        checks.push(CheckRecord::new(
            "intertwine.fundamental_identity",
            json!({"lambda": [lambda.re, lambda.im], "x": x}),
            v.intertwine_identity_residual(lambda, x)?,
            residual_tol,
        ));
        checks.push(CheckRecord::new(
            "intertwine.ds",
            json!({"lambda": [lambda.re, lambda.im], "x": x}),
            v.check_ds(lambda, x)?,
            residual_tol,
        ));
    }
    // admissible right factor preserves the intertwining (SL commutant)
    if v.params().family() == Family::SL {
        let lambda = draw_lambda(&mut rng, v);
        let a = lambda.inv();
        let cc = (lambda * lambda).inv();
        let y = CMatrix::from_rows(&[
            vec![c64(1.0, 0.0) + a, Complex64::i() * cc / lambda],
            vec![cc, c64(1.0, 0.0) + a],
        ]);
        let u0 = draw_u0(&mut rng, 2);
        let x = rng.gen_range(lo..hi);
        let r = v.check_intertwine_with(lambda, x, &u0, Some(&y))?;
        checks.push(CheckRecord::new(
            "intertwine.commutant_factor",
            json!({"lambda": [lambda.re, lambda.im], "x": x}),
            r,
            residual_tol,
        ));
    }
    Ok(checks)
}

fn kernels(v: &Vessel, tol: Option<f64>, seed: u64) -> Result<Vec<CheckRecord>> {
    let quotient_tol = tol.unwrap_or(1e-7);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x2468);
    let mut checks = Vec::new();
    let (lo, hi) = interior_range(v);
    for _ in 0..2 {
        let x = rng.gen_range(lo..hi);
        let lambdas: Vec<Complex64> = (0..4).map(|_| draw_lambda(&mut rng, v)).collect();
        let g1 = v.gram_of_k1(&lambdas, x)?;
        let min1 = hermitian_eigenvalues(&g1)[0];
        checks.push(CheckRecord::new(
            "kernels.k1_gram_psd",
            json!({"x": x}),
            (-min1).max(0.0),
            1e-9,
        ));
        let g2 = v.gram_of_k2(&lambdas, x)?;
        let min2 = hermitian_eigenvalues(&g2)[0];
        checks.push(CheckRecord::new(
            "kernels.k2_gram_psd",
            json!({"x": x}),
            (-min2).max(0.0),
            1e-9,
        ));
    }
    // resolvent form matches the sesquilinear quotient away from the
    // degenerate direction
    let lambda = draw_lambda(&mut rng, v);
    let mu = draw_lambda(&mut rng, v);
    let x = rng.gen_range(lo..hi);
    let k1 = v.kernel_k1(lambda, mu, x)?;
    let s_lambda = v.transfer_matrix(lambda, x)?;
    let s_mu = v.transfer_matrix(mu, x)?;
    let s1 = v.params().sigma1(x);
    let numerator = &s1 - &s_mu.adjoint().matmul(&s1).matmul(&s_lambda);
    let quotient = numerator.scale((mu.conj() + lambda).inv());
    checks.push(CheckRecord::new(
        "kernels.k1_resolvent_vs_quotient",
        json!({"lambda": [lambda.re, lambda.im], "mu": [mu.re, mu.im], "x": x}),
        k1.max_diff(&quotient),
        quotient_tol,
    ));
    Ok(checks)
}

fn tau(v: &Vessel, tol: Option<f64>) -> Result<Vec<CheckRecord>> {
    let trace_tol = tol.unwrap_or(1e-6);
    let q_tol = tol.unwrap_or(1e-5);
    let mut checks = Vec::new();
    let h = v.grid_step();
    let (lo, hi) = v.valid_interval();
    for &x in &samples(v, 9) {
        let x = x.clamp(lo + 2.0 * h, hi - 2.0 * h);
        let logs: Vec<f64> = (-2..=2)
            .map(|j| Ok(v.tau(x + j as f64 * h)?.ln()))
            .collect::<Result<Vec<f64>>>()?;
        let numeric = scalar_derivative_at(&logs, h, 2);
        let formula = v.tau_logderiv(x)?;
        checks.push(CheckRecord::new(
            "tau.trace_identity",
            json!({"x": x}),
            (numeric - formula).abs(),
            trace_tol,
        ));
        let (_, imag) = v.tau_with_diagnostic(x)?;
        checks.push(CheckRecord::new(
            "tau.real_valued",
            json!({"x": x}),
            imag,
            1e-10,
        ));
    }
    if v.params().family() == Family::SL {
        for &x in &samples(v, 7) {
            let x = x.clamp(lo + 2.0 * h, hi - 2.0 * h);
            checks.push(CheckRecord::new(
                "tau.gamma_star_formula",
                json!({"x": x}),
                v.check_gamma_star_formula(x)?,
                trace_tol,
            ));
            // q = 2 beta' versus -2 (log tau)''
            let q_beta = v.potential(&[x])?.q[0];
            let logs: Vec<f64> = (-2..=2)
                .map(|j| Ok(v.tau(x + j as f64 * h)?.ln()))
                .collect::<Result<Vec<f64>>>()?;
            let q_tau = -2.0 * scalar_second_derivative_at(&logs, h, 2);
            checks.push(CheckRecord::new(
                "tau.q_routes_agree",
                json!({"x": x}),
                (q_beta - q_tau).abs(),
                q_tol,
            ));
        }
    }
    // realization independence after bringing X(x0) to the identity
    let base_eigs = hermitian_eigenvalues(v.gram_base());
    if base_eigs.first().copied().unwrap_or(0.0) > 0.0 {
        let normalized = v.normalize_gram()?;
        let probe = samples(v, 5);
        let r0 = normalized.tau(probe[1])? / v.tau(probe[1])?;
        let mut worst = 0.0f64;
        for &x in &probe[1..] {
            let ratio = normalized.tau(x)? / v.tau(x)?;
            worst = worst.max((ratio - r0).abs());
        }
        checks.push(CheckRecord::new(
            "tau.realization_independence",
            json!({}),
            worst,
            1e-8,
        ));
    }
    Ok(checks)
}

fn gl(v: &Vessel, tol: Option<f64>) -> Result<Vec<CheckRecord>> {
    let gl_tol = tol.unwrap_or(1e-7);
    let q_tol = tol.unwrap_or(1e-5);
    let kernels = sl::gl_kernels(v)?;
    let mut checks = Vec::new();
    let (lo, hi) = v.valid_interval();
    let span = (hi - lo).min(4.5);
    let xs: Vec<f64> = (0..6).map(|k| lo + span * k as f64 / 5.0).collect();
    for &x in &xs {
        for &y in &xs {
            if y > x {
                continue;
            }
            checks.push(CheckRecord::new(
                "gl.identity",
                json!({"x": x, "y": y}),
                kernels.gl_residual(x, y, 32)?,
                gl_tol,
            ));
        }
    }
    for &x in &xs[1..4] {
        let q_kernel = kernels.q_from_k(x)?;
        let q_tau = v.potential(&[x])?.q[0];
        checks.push(CheckRecord::new(
            "gl.q_from_kernel_matches_potential",
            json!({"x": x}),
            (q_kernel - q_tau).abs(),
            q_tol,
        ));
    }
    Ok(checks)
}

fn jost(v: &Vessel, tol: Option<f64>, seed: u64) -> Result<Vec<CheckRecord>> {
    let residual_tol = tol.unwrap_or(1e-5);
    if v.params().family() != Family::SL {
        return Err(Error::WrongFamily {
            expected: "SL".into(),
            found: v.params().family().to_string(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x369c);
    let m_a = v
        .spectrum()
        .iter()
        .map(|z| z.im)
        .fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = interior_range(v);
    let mut checks = Vec::new();
    let mut done = 0;
    while done < 8 {
        let s = c64(
            rng.gen_range(-1.5..1.5),
            m_a + 0.5 + rng.gen_range(0.0..1.5),
        );
        let lambda = Complex64::i() * s * s;
        if v.spectrum_distance(lambda) < 0.1 || v.spectrum_distance(-lambda.conj()) < 0.1 {
            continue;
        }
        let x = rng.gen_range(lo..hi);
        let r = sl::check_h_identities(v, s, x)?;
        let loc = json!({"s": [s.re, s.im], "x": x});
        checks.push(CheckRecord::new(
            "jost.h_conjugation",
            loc.clone(),
            r.conjugation,
            residual_tol,
        ));
        checks.push(CheckRecord::new(
            "jost.h_modulus",
            loc.clone(),
            r.modulus,
            residual_tol,
        ));
        checks.push(CheckRecord::new("jost.h_phase", loc, r.phase, residual_tol));
        done += 1;
    }
    // resolvent-form K_S agrees with the direct sesquilinear quotient away
    // from the degenerate direction (and is real by construction)
    let s = c64(0.45, m_a + 0.9);
    let lambda = Complex64::i() * s * s;
    let x_mid = (lo + hi) / 2.0;
    let d = sl::jost_h(v, s, x_mid)?;
    let sm = v.transfer_matrix(lambda, x_mid)?;
    let s1 = v.params().sigma1(x_mid);
    let vec = CMatrix::col_vec(&[c64(1.0, 0.0), s]);
    let quad = vec
        .adjoint()
        .matmul(&sm.adjoint())
        .matmul(&s1)
        .matmul(&sm)
        .matmul(&vec)[(0, 0)];
    let quotient = quad / (lambda + lambda.conj());
    checks.push(CheckRecord::new(
        "jost.k_s_resolvent_vs_quotient",
        json!({"s": [s.re, s.im], "x": x_mid}),
        (c64(d.k_s, 0.0) - quotient).norm(),
        residual_tol,
    ));
    // long-range envelope decrease where the interval allows it
    let (vlo, vhi) = v.valid_interval();
    if vhi - vlo >= 25.0 {
        let sweep = sl::jost_sweep(v, c64(0.3, m_a + 1.0))?;
        let h = v.grid_step();
        let mut env = Vec::new();
        for &frac in &[0.25, 0.5, 0.95] {
            let x = vlo + (vhi - vlo) * frac;
            let a = v.nearest_grid_index(x - 2.0);
            let b = v.nearest_grid_index((x + 2.0).min(vhi));
            env.push(
                (a..=b)
                    .map(|i| scalar_derivative_at(&sweep.k_s, h, i).abs())
                    .fold(0.0f64, f64::max),
            );
        }
        let monotone = env[0] > env[1] && env[1] > env[2];
        checks.push(CheckRecord::new(
            "jost.k_s_derivative_envelope_decreases",
            json!({"envelopes": env}),
            if monotone { 0.0 } else { 1.0 },
            0.5,
        ));
    }
    Ok(checks)
}

fn bounds(v: &Vessel, tol: Option<f64>) -> Result<Vec<CheckRecord>> {
    let _ = tol;
    let mut checks = Vec::new();
    // applicability: spectrum on the positive imaginary axis and X(x) > 0
    let on_axis = v
        .spectrum()
        .iter()
        .all(|z| z.re.abs() <= 1e-8 && z.im >= 0.0);
    let xs = samples(v, 21);
    let mut dissipative = true;
    for &x in &xs {
        if hermitian_eigenvalues(&v.gram_at(x)?)[0] <= 0.0 {
            dissipative = false;
            break;
        }
    }
    if !on_axis || !dissipative {
        checks.push(CheckRecord::new(
            "bounds.not_applicable",
            json!({"on_axis": on_axis, "dissipative": dissipative}),
            0.0,
            1.0,
        ));
        return Ok(checks);
    }

    let trivial = v.b_base().norm_max() == 0.0;
    let (lo, hi) = v.valid_interval();
    let fit_xs: Vec<f64> = (0..=40)
        .map(|k| lo + (hi - lo) * (0.1 + 0.4 * k as f64 / 40.0))
        .collect();

    // trace growth: TR(X - X0) admits a linear lower bound, positive slope
    // for nontrivial input maps
    let traces: Vec<f64> = fit_xs
        .iter()
        .map(|&x| Ok((v.gram_at(x)? .trace() - v.gram_base().trace()).re))
        .collect::<Result<Vec<f64>>>()?;
    let (t1, _t2) = least_squares(&fit_xs, &traces);
    checks.push(CheckRecord::new(
        "bounds.trace_growth_slope",
        json!({"slope": t1}),
        if trivial { 0.0 } else { (-t1).max(0.0) },
        0.0,
    ));

    // inverse-norm bound via the fitted line under lambda_min(X)
    let lambda_mins: Vec<f64> = fit_xs
        .iter()
        .map(|&x| Ok(hermitian_eigenvalues(&v.gram_at(x)?)[0]))
        .collect::<Result<Vec<f64>>>()?;
    let (m1, m2) = least_squares(&fit_xs, &lambda_mins);
    if !trivial {
        checks.push(CheckRecord::new(
            "bounds.inverse_norm_slope",
            json!({"slope": m1}),
            (-m1).max(0.0),
            0.0,
        ));
        let mut worst = 0.0f64;
        for (&x, &lm) in fit_xs.iter().zip(&lambda_mins) {
            let fitted = m1 * x + m2;
            if fitted > 0.0 {
                worst = worst.max(fitted / lm);
            }
        }
        checks.push(CheckRecord::new(
            "bounds.inverse_norm_within_fit",
            json!({}),
            worst,
            1.25,
        ));
    }

    // B stays bounded: the envelope over the tail does not exceed the head
    let head: f64 = xs
        .iter()
        .filter(|&&x| x <= lo + 0.2 * (hi - lo))
        .map(|&x| v.b_at(x).map(|b| b.norm_max()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let tail: f64 = xs
        .iter()
        .filter(|&&x| x > lo + 0.2 * (hi - lo))
        .map(|&x| v.b_at(x).map(|b| b.norm_max()))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(CheckRecord::new(
        "bounds.b_envelope",
        json!({"head": head, "tail": tail}),
        tail,
        1.2 * head + 1e-9,
    ));

    // |q(x)| (x - x0) bounded over the far tail (needs room to decay)
    if v.params().family() == Family::SL && hi - lo >= 20.0 {
        let tail_xs: Vec<f64> = (0..=30)
            .map(|k| lo + (hi - lo) * (0.5 + 0.48 * k as f64 / 30.0))
            .collect();
        let profile = v.potential(&tail_xs)?;
        let worst = tail_xs
            .iter()
            .zip(&profile.q)
            .map(|(&x, &q)| q.abs() * (x - v.base_point()))
            .fold(0.0, f64::max);
        checks.push(CheckRecord::new(
            "bounds.q_times_x",
            json!({}),
            worst,
            10.0,
        ));
    }
    Ok(checks)
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}
