//! Vessel parameters: the coefficient quadruple `(sigma_1, sigma_2, gamma,
//! gamma_*)` on an interval, together with the built-in parameter families.
//!
//! The admissibility conditions are: `sigma_1`, `sigma_2` Hermitian,
//! `sigma_1` invertible, and `gamma + gamma^H = gamma_* + gamma_*^H =
//! -d(sigma_1)/dx` on the whole interval.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{c64, derivative_at, lu, CMatrix};

/// Matrix-valued coefficient of the space variable.
pub type Coeff = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;

/// Tag identifying which differential system the parameters generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Sturm-Liouville: output first components solve `-y'' + q y = -i lambda y`.
    SL,
    /// Zakharov-Shabat 2x2 system behind the nonlinear Schrodinger equation.
    NLS,
    /// The 4x4 Zakharov-Shabat-type system with four potential slots.
    NLS4,
    /// Canonical systems `[J d/dx + Q(x)] phi = k phi`.
    Canonical,
    /// Caller-supplied coefficients.
    Custom,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::SL => "SL",
            Family::NLS => "NLS",
            Family::NLS4 => "NLS4",
            Family::Canonical => "Canonical",
            Family::Custom => "Custom",
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        match s.to_ascii_lowercase().as_str() {
            "sl" => Ok(Family::SL),
            "nls" => Ok(Family::NLS),
            "nls4" => Ok(Family::NLS4),
            "canonical" => Ok(Family::Canonical),
            "custom" => Ok(Family::Custom),
            other => Err(Error::InvalidArgument(format!("unknown family `{other}`"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coefficient quadruple on an interval.
///
/// `gamma_star` is optional: the standard construction produces it from the
/// linkage formula, so it is only present when fixed a priori.
#[derive(Clone)]
pub struct VesselParameters {
    dim_e: usize,
    family: Family,
    interval: (f64, f64),
    sigma1: Coeff,
    sigma1_prime: Coeff,
    sigma2: Coeff,
    gamma: Coeff,
    gamma_star: Option<Coeff>,
}

impl VesselParameters {
    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn sigma1(&self, x: f64) -> CMatrix {
        (self.sigma1)(x)
    }

    pub fn sigma1_prime(&self, x: f64) -> CMatrix {
        (self.sigma1_prime)(x)
    }

    pub fn sigma2(&self, x: f64) -> CMatrix {
        (self.sigma2)(x)
    }

    pub fn gamma(&self, x: f64) -> CMatrix {
        (self.gamma)(x)
    }

    pub fn gamma_star(&self, x: f64) -> Option<CMatrix> {
        self.gamma_star.as_ref().map(|g| g(x))
    }

    /// Sturm-Liouville parameters on `[a, b]`.
    pub fn sturm_liouville(a: f64, b: f64) -> Self {
        let sigma1 = CMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let sigma2 = CMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        let gamma = CMatrix::from_rows(&[
            vec![c64(0.0, 0.0), c64(0.0, 0.0)],
            vec![c64(0.0, 0.0), c64(0.0, 1.0)],
        ]);
        Self::constant(Family::SL, (a, b), sigma1, sigma2, gamma)
    }

    /// Nonlinear-Schrodinger (Zakharov-Shabat) parameters on `[a, b]`.
    pub fn nls(a: f64, b: f64) -> Self {
        let sigma1 = CMatrix::identity(2);
        let sigma2 = CMatrix::diag(&[c64(0.5, 0.0), c64(-0.5, 0.0)]);
        let gamma = CMatrix::zeros(2, 2);
        Self::constant(Family::NLS, (a, b), sigma1, sigma2, gamma)
    }

    /// The 4x4 coupled system with four potential slots on `[a, b]`.
    pub fn nls4(a: f64, b: f64) -> Self {
        let sigma1 = CMatrix::identity(4);
        let sigma2 = CMatrix::diag(&[
            c64(0.5, 0.0),
            c64(0.5, 0.0),
            c64(-0.5, 0.0),
            c64(-0.5, 0.0),
        ]);
        let gamma = CMatrix::zeros(4, 4);
        Self::constant(Family::NLS4, (a, b), sigma1, sigma2, gamma)
    }

    /// Canonical-system parameters on `[a, b]`.
    pub fn canonical(a: f64, b: f64) -> Self {
        let sigma1 = CMatrix::from_rows(&[
            vec![c64(0.0, 0.0), c64(0.0, 1.0)],
            vec![c64(0.0, -1.0), c64(0.0, 0.0)],
        ]);
        let sigma2 = CMatrix::identity(2);
        let gamma = CMatrix::zeros(2, 2);
        Self::constant(Family::Canonical, (a, b), sigma1, sigma2, gamma)
    }

    /// Builds a family with constant coefficients.
    fn constant(
        family: Family,
        interval: (f64, f64),
        sigma1: CMatrix,
        sigma2: CMatrix,
        gamma: CMatrix,
    ) -> Self {
        let dim_e = sigma1.rows();
        let zero = CMatrix::zeros(dim_e, dim_e);
        VesselParameters {
            dim_e,
            family,
            interval,
            sigma1: Arc::new(move |_| sigma1.clone()),
            sigma1_prime: Arc::new(move |_| zero.clone()),
            sigma2: Arc::new(move |_| sigma2.clone()),
            gamma: Arc::new(move |_| gamma.clone()),
            gamma_star: None,
        }
    }

    /// Fully general parameters with caller-supplied coefficient maps.
    pub fn custom(
        dim_e: usize,
        interval: (f64, f64),
        sigma1: Coeff,
        sigma1_prime: Coeff,
        sigma2: Coeff,
        gamma: Coeff,
        gamma_star: Option<Coeff>,
    ) -> Result<Self> {
        if interval.0 >= interval.1 {
            return Err(Error::InvalidArgument(format!(
                "interval [{}, {}] is empty",
                interval.0, interval.1
            )));
        }
        Ok(VesselParameters {
            dim_e,
            family: Family::Custom,
            interval,
            sigma1,
            sigma1_prime,
            sigma2,
            gamma,
            gamma_star,
        })
    }

    /// Rebuilds a named (non-custom) family from its tag.
    pub fn from_family(family: Family, a: f64, b: f64) -> Result<Self> {
        match family {
            Family::SL => Ok(Self::sturm_liouville(a, b)),
            Family::NLS => Ok(Self::nls(a, b)),
            Family::NLS4 => Ok(Self::nls4(a, b)),
            Family::Canonical => Ok(Self::canonical(a, b)),
            Family::Custom => Err(Error::InvalidArgument(
                "custom parameters cannot be rebuilt from a tag".into(),
            )),
        }
    }

    /// Verifies the admissibility conditions on a sample of grid points:
    /// Hermitian `sigma_1`, `sigma_2`, invertible `sigma_1`, and
    /// `gamma + gamma^H = -sigma_1'` with the derivative taken by central
    /// differences.
    pub fn validate(&self, xs: &[f64]) -> Result<()> {
        const HERM_TOL: f64 = 1e-10;
        const LIVSIC_TOL: f64 = 1e-8;
        for &x in xs {
            let s1 = self.sigma1(x);
            let s2 = self.sigma2(x);
            if s1.rows() != self.dim_e || !s1.is_square() {
                return Err(Error::DimensionMismatch("sigma1 shape".into()));
            }
            if !s1.is_hermitian(HERM_TOL) {
                return Err(Error::InvalidArgument(format!(
                    "sigma1({x}) is not Hermitian (defect {:.3e})",
                    s1.hermitian_defect()
                )));
            }
            if !s2.is_hermitian(HERM_TOL) {
                return Err(Error::InvalidArgument(format!(
                    "sigma2({x}) is not Hermitian (defect {:.3e})",
                    s2.hermitian_defect()
                )));
            }
            lu::LuFactors::factor(&s1).map_err(|_| {
                Error::InvalidArgument(format!("sigma1({x}) is numerically singular"))
            })?;
        }
        // gamma + gamma^H = -sigma_1' checked with a 5-point stencil
        let h = 1e-3 * (self.interval.1 - self.interval.0).min(1.0);
        for &x in xs {
            let stencil: Vec<f64> = (-2..=2).map(|k| x + k as f64 * h).collect();
            let samples: Vec<CMatrix> = stencil.iter().map(|&t| self.sigma1(t)).collect();
            let ds1 = derivative_at(&samples, h, 2);
            let g = self.gamma(x);
            let lhs = &g + &g.adjoint();
            let defect = lhs.add_scaled(c64(1.0, 0.0), &ds1).norm_max();
            if defect > LIVSIC_TOL {
                return Err(Error::InvalidArgument(format!(
                    "gamma + gamma^H != -sigma1' at x = {x} (defect {defect:.3e})"
                )));
            }
            if let Some(gs) = self.gamma_star(x) {
                let lhs = &gs + &gs.adjoint();
                let defect = lhs.add_scaled(c64(1.0, 0.0), &ds1).norm_max();
                if defect > LIVSIC_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "gamma_* + gamma_*^H != -sigma1' at x = {x} (defect {defect:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for VesselParameters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VesselParameters")
            .field("dim_e", &self.dim_e)
            .field("family", &self.family)
            .field("interval", &self.interval)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_satisfy_admissibility() {
        let xs: Vec<f64> = (0..5).map(|i| i as f64 * 0.37).collect();
        for params in [
            VesselParameters::sturm_liouville(0.0, 2.0),
            VesselParameters::nls(0.0, 2.0),
            VesselParameters::nls4(0.0, 2.0),
            VesselParameters::canonical(0.0, 2.0),
        ] {
            params.validate(&xs).unwrap();
        }
    }

    #[test]
    fn sl_matrices_are_the_fixed_ones() {
        let p = VesselParameters::sturm_liouville(0.0, 1.0);
        let s1 = p.sigma1(0.5);
        assert_eq!(s1[(0, 1)], c64(1.0, 0.0));
        assert_eq!(s1[(0, 0)], c64(0.0, 0.0));
        let s2 = p.sigma2(0.5);
        assert_eq!(s2[(0, 0)], c64(1.0, 0.0));
        assert_eq!(s2[(1, 1)], c64(0.0, 0.0));
        let g = p.gamma(0.5);
        assert_eq!(g[(1, 1)], c64(0.0, 1.0));
        // gamma + gamma^H = 0 = -sigma1'
        let sum = &g + &g.adjoint();
        assert!(sum.norm_max() == 0.0);
    }

    #[test]
    fn family_tags_round_trip() {
        for f in [Family::SL, Family::NLS, Family::NLS4, Family::Canonical] {
            assert_eq!(Family::parse(f.as_str()).unwrap(), f);
        }
        assert!(Family::parse("sturm").is_err());
    }

    #[test]
    fn non_hermitian_sigma_rejected() {
        let bad = CMatrix::from_rows(&[
            vec![c64(0.0, 0.0), c64(1.0, 0.2)],
            vec![c64(1.0, 0.0), c64(0.0, 0.0)],
        ]);
        let p = VesselParameters::custom(
            2,
            (0.0, 1.0),
            Arc::new(move |_| bad.clone()),
            Arc::new(|_| CMatrix::zeros(2, 2)),
            Arc::new(|_| CMatrix::identity(2)),
            Arc::new(|_| CMatrix::zeros(2, 2)),
            None,
        )
        .unwrap();
        assert!(p.validate(&[0.5]).is_err());
    }
}
