//! Verification report emitted by `vessel-lab verify`.
//!
//! Everything except the wall-clock fields is deterministic for a fixed
//! input and seed.

use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// Where the check was evaluated (`x`, `lambda`, `s`, ... as applicable).
    pub location: serde_json::Value,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(
        name: impl Into<String>,
        location: serde_json::Value,
        residual: f64,
        tolerance: f64,
    ) -> CheckRecord {
        CheckRecord {
            name: name.into(),
            location,
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
    pub wall_ms: f64,
    pub checks: Vec<CheckRecord>,
}

impl SuiteReport {
    pub fn new(name: impl Into<String>, checks: Vec<CheckRecord>, wall_ms: f64) -> SuiteReport {
        let passed = checks.iter().filter(|c| c.pass).count();
        let failed = checks.len() - passed;
        SuiteReport {
            name: name.into(),
            passed,
            failed,
            wall_ms,
            checks,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub input: String,
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub total_passed: usize,
    pub total_failed: usize,
}

impl VerificationReport {
    pub fn assemble(input: String, seed: u64, suites: Vec<SuiteReport>) -> VerificationReport {
        let total_passed = suites.iter().map(|s| s.passed).sum();
        let total_failed = suites.iter().map(|s| s.failed).sum();
        VerificationReport {
            input,
            seed,
            suites,
            total_passed,
            total_failed,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.total_failed == 0
    }
}
