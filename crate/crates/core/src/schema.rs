//! On-disk vessel description.
//!
//! Complex matrices are stored as arrays of `[re, im]` pairs in row-major
//! order; shapes follow from `dim_H` and `dim_E`. The caches are not
//! persisted: loading re-runs the standard construction, so a stored vessel
//! verifies exactly like the in-memory one it came from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c64, CMatrix, DEFAULT_STEPS_PER_UNIT};
use crate::params::{Family, VesselParameters};
use crate::vessel::Vessel;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VesselJson {
    #[serde(rename = "dim_H")]
    pub dim_h: usize,
    #[serde(rename = "dim_E")]
    pub dim_e: usize,
    pub x0: f64,
    #[serde(rename = "A")]
    pub a: Vec<[f64; 2]>,
    #[serde(rename = "B0")]
    pub b0: Vec<[f64; 2]>,
    #[serde(rename = "X0")]
    pub gram0: Vec<[f64; 2]>,
    pub family: String,
    pub family_args: serde_json::Value,
    pub interval: [f64; 2],
}

fn encode(m: &CMatrix) -> Vec<[f64; 2]> {
    m.data().iter().map(|z| [z.re, z.im]).collect()
}

fn decode(rows: usize, cols: usize, data: &[[f64; 2]], name: &str) -> Result<CMatrix> {
    if data.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "{name}: expected {} entries, got {}",
            rows * cols,
            data.len()
        )));
    }
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let [re, im] = data[i * cols + j];
            m[(i, j)] = c64(re, im);
        }
    }
    Ok(m)
}

impl VesselJson {
    /// Snapshot of a vessel's defining data.
    pub fn from_vessel(v: &Vessel, family_args: serde_json::Value) -> VesselJson {
        let (lo, hi) = v.params().interval();
        VesselJson {
            dim_h: v.dim_h(),
            dim_e: v.dim_e(),
            x0: v.base_point(),
            a: encode(v.dynamics()),
            b0: encode(v.b_base()),
            gram0: encode(v.gram_base()),
            family: v.params().family().as_str().to_string(),
            family_args,
            interval: [lo, hi],
        }
    }

    /// Reconstructs the vessel by re-running the standard construction.
    pub fn to_vessel(&self, density: usize) -> Result<Vessel> {
        let family = Family::parse(&self.family)?;
        let params = VesselParameters::from_family(family, self.interval[0], self.interval[1])?;
        if params.dim_e() != self.dim_e {
            return Err(Error::DimensionMismatch(format!(
                "family {} has dim_E = {}, file says {}",
                family,
                params.dim_e(),
                self.dim_e
            )));
        }
        let a = decode(self.dim_h, self.dim_h, &self.a, "A")?;
        let b0 = decode(self.dim_h, self.dim_e, &self.b0, "B0")?;
        let gram0 = decode(self.dim_h, self.dim_h, &self.gram0, "X0")?;
        Vessel::construct_with_density(params, a, b0, gram0, self.x0, density)
    }

    pub fn to_string_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("vessel JSON serializes")
    }

    pub fn parse(text: &str) -> Result<VesselJson> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("vessel JSON: {e}")))
    }
}

/// Convenience: snapshot with default (empty) family args.
pub fn save_vessel(v: &Vessel) -> VesselJson {
    VesselJson::from_vessel(v, serde_json::json!({}))
}

/// Convenience: reconstruct at the default density.
pub fn load_vessel(text: &str) -> Result<Vessel> {
    VesselJson::parse(text)?.to_vessel(DEFAULT_STEPS_PER_UNIT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn round_trip_preserves_defining_data() {
        let v = fixtures::rank1();
        let json = save_vessel(&v);
        let text = json.to_string_pretty();
        let reloaded = load_vessel(&text).unwrap();
        assert!(reloaded.dynamics().max_diff(v.dynamics()) == 0.0);
        assert!(reloaded.b_base().max_diff(v.b_base()) == 0.0);
        assert!(reloaded.gram_base().max_diff(v.gram_base()) == 0.0);
        assert_eq!(reloaded.base_point(), v.base_point());
        // identical construction path implies identical residuals
        let r1 = v.residuals(2.0).unwrap();
        let r2 = reloaded.residuals(2.0).unwrap();
        assert!((r1.max() - r2.max()).abs() <= 1e-12);
    }

    #[test]
    fn schema_field_names_are_stable() {
        let v = fixtures::rank1();
        let text = save_vessel(&v).to_string_pretty();
        for key in ["dim_H", "dim_E", "x0", "A", "B0", "X0", "family", "family_args", "interval"] {
            assert!(text.contains(&format!("\"{key}\"")), "missing {key}");
        }
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["family"], "SL");
        assert_eq!(value["A"][0][1], 1.0); // A = [i] stored as [0, 1]
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(VesselJson::parse("{").is_err());
        let v = fixtures::rank1();
        let mut json = save_vessel(&v);
        json.b0.pop();
        let text = json.to_string_pretty();
        assert!(load_vessel(&text).is_err());
    }
}
