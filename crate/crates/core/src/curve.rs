//! Finite-dimensional vessels from quadrature discretization of a spectral
//! curve symmetric with respect to the imaginary axis.
//!
//! The dynamics matrix becomes multiplication by the curve points at the
//! quadrature nodes, the input map carries the node weights, and `X(x0)`
//! is filled with the Cauchy pairing
//! `-sqrt(w_j w_k) b(mu_j) sigma_1 b(mu_k)^H / (mu_j + conj(mu_k))`.
//! Pairings with `mu_j + conj(mu_k) = 0` (every diagonal entry when the
//! curve lies on the imaginary axis) are not determined by the integrand;
//! they require `b sigma_1 b^H = 0` there, and the entry comes from a
//! declared diagonal density instead.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c64, gauss_legendre, hermitian_eigenvalues, CMatrix};
use crate::params::VesselParameters;
use crate::vessel::Vessel;

/// Tolerance for deciding that a Cauchy pairing is degenerate.
const PAIRING_TOL: f64 = 1e-12;

/// Tolerance for the curve symmetry check.
const SYMMETRY_TOL: f64 = 1e-8;

/// Parametrized curve kinds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurveKind {
    /// `mu(t) = i t` for `t` in `[t_min, t_max]`: a segment of the
    /// positive imaginary axis (self-symmetric pointwise).
    SegmentImag { t_min: f64, t_max: f64 },
}

impl CurveKind {
    pub fn point(&self, t: f64) -> Complex64 {
        match self {
            CurveKind::SegmentImag { .. } => Complex64::i() * t,
        }
    }

    pub fn parameter_range(&self) -> (f64, f64) {
        match self {
            CurveKind::SegmentImag { t_min, t_max } => (*t_min, *t_max),
        }
    }

    /// Distance from `z` to the curve: coarse parameter scan followed by a
    /// ternary-search refinement around the best bracket.
    pub fn distance(&self, z: Complex64) -> f64 {
        let (a, b) = self.parameter_range();
        let samples = 1001;
        let step = (b - a) / (samples - 1) as f64;
        let mut best_k = 0usize;
        let mut best = f64::INFINITY;
        for k in 0..samples {
            let t = a + step * k as f64;
            let d = (z - self.point(t)).norm();
            if d < best {
                best = d;
                best_k = k;
            }
        }
        let mut lo = a + step * best_k.saturating_sub(1) as f64;
        let mut hi = (a + step * (best_k + 1) as f64).min(b);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if (z - self.point(m1)).norm() <= (z - self.point(m2)).norm() {
                hi = m2;
            } else {
                lo = m1;
            }
            if hi - lo < 1e-15 * (1.0 + b.abs()) {
                break;
            }
        }
        let t = (lo + hi) / 2.0;
        (z - self.point(t)).norm().min(best)
    }
}

/// Initial density `b(mu, x0)` along the curve; only the first input slot
/// is populated, which keeps `b sigma_1 b^H = 0` for the Sturm-Liouville
/// pairing and lets the diagonal density rule apply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProfileKind {
    /// `b(mu) = [scale * exp(-|mu|^2), 0, ...]`
    Gaussian { scale: f64 },
    /// `b(mu) = [value, 0, ...]`
    Constant { value: f64 },
}

impl ProfileKind {
    fn first_component(&self, mu: Complex64) -> f64 {
        match self {
            ProfileKind::Gaussian { scale } => scale * (-mu.norm_sqr()).exp(),
            ProfileKind::Constant { value } => *value,
        }
    }

    /// Row `b(mu)` of width `dim_e`.
    pub fn row(&self, mu: Complex64, dim_e: usize) -> CMatrix {
        let mut row = CMatrix::zeros(1, dim_e);
        row[(0, 0)] = c64(self.first_component(mu), 0.0);
        row
    }
}

/// Spectral-curve discretization request.
#[derive(Clone, Debug)]
pub struct CurveSpec {
    pub kind: CurveKind,
    pub nodes: usize,
    pub profile: ProfileKind,
    /// Value used for degenerate diagonal pairings, in the weighted basis.
    pub diagonal_density: f64,
}

/// Serialized form: `{"kind":"segment-imag","t_min":..,"t_max":..,
/// "nodes":..,"profile":"gaussian","profile_args":{..}}`.
#[derive(Serialize, Deserialize)]
struct CurveSpecJson {
    kind: String,
    t_min: f64,
    t_max: f64,
    nodes: usize,
    profile: String,
    #[serde(default)]
    profile_args: serde_json::Map<String, serde_json::Value>,
}

impl CurveSpec {
    pub fn segment_imag(t_min: f64, t_max: f64, nodes: usize) -> Self {
        CurveSpec {
            kind: CurveKind::SegmentImag { t_min, t_max },
            nodes,
            profile: ProfileKind::Gaussian { scale: 1.0 },
            diagonal_density: 1.0,
        }
    }

    pub fn with_profile(mut self, profile: ProfileKind) -> Self {
        self.profile = profile;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: CurveSpecJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("curve spec JSON: {e}")))?;
        let kind = match parsed.kind.as_str() {
            "segment-imag" => CurveKind::SegmentImag {
                t_min: parsed.t_min,
                t_max: parsed.t_max,
            },
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown curve kind `{other}`"
                )))
            }
        };
        let arg = |name: &str, default: f64| -> f64 {
            parsed
                .profile_args
                .get(name)
                .and_then(|v| v.as_f64())
                .unwrap_or(default)
        };
        let profile = match parsed.profile.as_str() {
            "gaussian" => ProfileKind::Gaussian {
                scale: arg("scale", 1.0),
            },
            "constant" => ProfileKind::Constant {
                value: arg("value", 1.0),
            },
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown profile `{other}`"
                )))
            }
        };
        Ok(CurveSpec {
            kind,
            nodes: parsed.nodes,
            profile,
            diagonal_density: arg("diagonal_density", 1.0),
        })
    }

    pub fn to_json(&self) -> String {
        let (t_min, t_max) = self.kind.parameter_range();
        let (profile, mut profile_args) = match self.profile {
            ProfileKind::Gaussian { scale } => {
                let mut m = serde_json::Map::new();
                m.insert("scale".into(), scale.into());
                ("gaussian".to_string(), m)
            }
            ProfileKind::Constant { value } => {
                let mut m = serde_json::Map::new();
                m.insert("value".into(), value.into());
                ("constant".to_string(), m)
            }
        };
        profile_args.insert("diagonal_density".into(), self.diagonal_density.into());
        serde_json::to_string(&CurveSpecJson {
            kind: "segment-imag".into(),
            t_min,
            t_max,
            nodes: self.nodes,
            profile,
            profile_args,
        })
        .expect("curve spec serializes")
    }
}

/// Discretizes the curve model into a finite vessel and runs the standard
/// construction on it.
pub fn discretize_curve(
    spec: &CurveSpec,
    params: VesselParameters,
    x0: f64,
) -> Result<Vessel> {
    discretize_curve_with_density(spec, params, x0, crate::numerics::DEFAULT_STEPS_PER_UNIT)
}

/// Same with an explicit sweep density.
pub fn discretize_curve_with_density(
    spec: &CurveSpec,
    params: VesselParameters,
    x0: f64,
    density: usize,
) -> Result<Vessel> {
    let (t_min, t_max) = spec.kind.parameter_range();
    let (ts, ws) = gauss_legendre(spec.nodes, t_min, t_max)?;
    let n = spec.nodes;
    let e = params.dim_e();
    let mus: Vec<Complex64> = ts.iter().map(|&t| spec.kind.point(t)).collect();
    let rows: Vec<CMatrix> = mus.iter().map(|&mu| spec.profile.row(mu, e)).collect();

    // the paper's minimality requirement: the density must not vanish at a node
    for (k, row) in rows.iter().enumerate() {
        if row.norm_max() == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "profile vanishes at node {k} (mu = {}), breaking minimality",
                mus[k]
            )));
        }
    }

    // curve symmetry: -conj(mu) must lie on the curve for every node
    for (k, &mu) in mus.iter().enumerate() {
        let mirror = -mu.conj();
        let dist = spec.kind.distance(mirror);
        if dist > SYMMETRY_TOL {
            return Err(Error::InvalidArgument(format!(
                "curve not symmetric: node {k} mirrors to {mirror}, {dist:.3e} away"
            )));
        }
    }

    // Schwartz-type weight check at the extreme nodes
    let mu_max = mus.iter().map(|m| m.norm()).fold(0.0, f64::max);
    let c_bound = 2.0 * (1.0 + mu_max);
    for &k in &[0usize, n - 1] {
        let b_norm = rows[k].norm_max();
        for p in 0..=8u32 {
            let lhs = mus[k].norm().powi(p as i32) * b_norm;
            let rhs = c_bound.powi(p as i32) * (1.0 + b_norm);
            if lhs > rhs {
                return Err(Error::InvalidArgument(format!(
                    "profile fails the weight bound at node {k}, power {p}"
                )));
            }
        }
    }

    let sigma1 = params.sigma1(x0);
    let mut a = CMatrix::zeros(n, n);
    let mut b0 = CMatrix::zeros(n, e);
    for k in 0..n {
        a[(k, k)] = mus[k];
        let scaled = rows[k].scale(c64(ws[k].sqrt(), 0.0));
        b0.set_block(k, 0, &scaled);
    }

    let mut gram0 = CMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            let denom = mus[j] + mus[k].conj();
            let num = rows[j].matmul(&sigma1).matmul(&rows[k].adjoint())[(0, 0)];
            let scale = (ws[j] * ws[k]).sqrt();
            if denom.norm() <= PAIRING_TOL * (1.0 + mus[j].norm() + mus[k].norm()) {
                if num.norm() > 1e-10 * (1.0 + rows[j].norm_max() * rows[k].norm_max()) {
                    return Err(Error::SingularPairing {
                        i: j,
                        j: k,
                        gap: denom.norm(),
                        numerator: num.norm(),
                    });
                }
                // degenerate pairing: declared density on the diagonal,
                // vanishing numerator elsewhere
                if j == k {
                    gram0[(j, k)] = c64(spec.diagonal_density, 0.0);
                }
            } else {
                gram0[(j, k)] = -num * scale / denom;
            }
        }
    }
    gram0.symmetrize_hermitian();

    let eigs = hermitian_eigenvalues(&gram0);
    let sigma_min = eigs.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let sigma_max = eigs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if sigma_min <= 1e-12 * sigma_max.max(1.0) {
        return Err(Error::IllConditioned(sigma_min));
    }

    Vessel::construct_with_density(params, a, b0, gram0, x0, density)
}

/// One probe of the jump detector.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumProbe {
    pub lambda_re: f64,
    pub lambda_im: f64,
    /// `|S(lambda + eps) - S(lambda - eps)|` across the curve.
    pub jump: f64,
    /// `|S(lambda) - I|` when `lambda` itself is admissible.
    pub deviation_from_identity: Option<f64>,
}

/// Jump-detector report along a grid of probe points.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub x: f64,
    pub offset: f64,
    pub probes: Vec<SpectrumProbe>,
}

impl SpectrumReport {
    /// Location of the largest detected jump.
    pub fn max_jump(&self) -> Option<(Complex64, f64)> {
        self.probes
            .iter()
            .max_by(|a, b| a.jump.partial_cmp(&b.jump).unwrap())
            .map(|p| (c64(p.lambda_re, p.lambda_im), p.jump))
    }
}

/// Evaluates `|S(lambda + offset) - S(lambda - offset)|` across the
/// imaginary axis for each probe `lambda` and the distance of `S` from the
/// identity at the probe itself.
pub fn check_spectrum_location(
    v: &Vessel,
    lambda_grid: &[Complex64],
    x: f64,
    offset: f64,
) -> Result<SpectrumReport> {
    let mut probes = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        let plus = lambda + c64(offset, 0.0);
        let minus = lambda - c64(offset, 0.0);
        let jump = match (v.transfer_matrix(plus, x), v.transfer_matrix(minus, x)) {
            (Ok(sp), Ok(sm)) => sp.max_diff(&sm),
            _ => f64::INFINITY,
        };
        let deviation_from_identity = v
            .transfer_matrix(lambda, x)
            .ok()
            .map(|s| s.max_diff(&CMatrix::identity(s.rows())));
        probes.push(SpectrumProbe {
            lambda_re: lambda.re,
            lambda_im: lambda.im,
            jump,
            deviation_from_identity,
        });
    }
    Ok(SpectrumReport {
        x,
        offset,
        probes,
    })
}
