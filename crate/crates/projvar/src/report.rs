//! Structured report emission: every command produces a `SceneReport`
//! fragment with named checks against the configured tolerances. Reports are
//! plain data with no timing fields, so identical runs serialize identically.

use serde::{Deserialize, Serialize};

use crate::config::{MatrixJson, VectorJson};
use crate::error::{ProjvarError, Result};

/// One named check with its measured value and threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckLine {
    /// Pass when the value is at most the threshold.
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        CheckLine {
            name: name.into(),
            value,
            threshold,
            pass: value.is_finite() && value <= threshold,
        }
    }

    /// Pass when the value is at least the threshold.
    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        CheckLine {
            name: name.into(),
            value,
            threshold,
            pass: value.is_finite() && value >= threshold,
        }
    }

    /// Pass on exact integer equality.
    pub fn equals(name: &str, value: i64, expected: i64) -> Self {
        CheckLine {
            name: name.into(),
            value: value as f64,
            threshold: expected as f64,
            pass: value == expected,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpipoleReport {
    pub e1: VectorJson,
    pub e2: VectorJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FundamentalReport {
    pub k: usize,
    pub rows: usize,
    pub cols: usize,
    pub rank_observed: usize,
    pub rank_expected: u64,
    pub singular_values: Vec<f64>,
    pub correspondence_residual: f64,
    pub entries: MatrixJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KruppaReport {
    pub residual: f64,
    pub coefficient_counts: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionJson {
    pub m: usize,
    pub c_total: usize,
    pub n2: i64,
    pub coefficient_count: u64,
    pub lower_bound: i64,
    pub class_threshold: u64,
    pub threshold_met: bool,
}

impl From<&crate::kruppa::DimensionReport> for DimensionJson {
    fn from(r: &crate::kruppa::DimensionReport) -> Self {
        DimensionJson {
            m: r.m,
            c_total: r.c_total,
            n2: r.n2,
            coefficient_count: r.coefficient_count,
            lower_bound: r.lower_bound,
            class_threshold: r.class_threshold,
            threshold_met: r.threshold_met,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsolationJson {
    pub smallest: f64,
    pub largest: f64,
    pub isolated: bool,
    pub tangent_dimension: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverTrialJson {
    pub trial: usize,
    pub status: String,
    pub iterations: usize,
    pub final_residual: f64,
    pub distance_to_truth: f64,
    pub valid: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverReport {
    pub trials: Vec<SolverTrialJson>,
    pub success_fraction: f64,
    pub noise: f64,
    pub isolated_at_truth: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CensusJson {
    pub fibers_requested: usize,
    pub clean: usize,
    pub discarded: usize,
    pub modal_true: usize,
    pub modal_ghost: usize,
    pub expected_true: usize,
    pub expected_ghost: usize,
    pub fraction_modal: f64,
    /// Degree-2 models leave both intersection components admissible.
    pub degree_two_ambiguity: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refit_distance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub roundtrip_distance: f64,
    pub eq1_residual: f64,
    pub eq2_residual: f64,
    pub orbit_equivalent: bool,
    pub canonical_h: MatrixJson,
    pub canonical_e2: VectorJson,
    pub h_rank: usize,
}

/// Full structured report; sections are present when their command ran.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct SceneReport {
    pub m: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epipoles: Option<EpipoleReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub fundamental: Vec<FundamentalReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kruppa: Option<KruppaReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<DimensionJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isolation: Option<IsolationJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<CensusJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovery: Option<RecoveryReport>,
    pub checks: Vec<CheckLine>,
    pub overall_pass: bool,
}

impl SceneReport {
    pub fn new(m: usize, seed: u64) -> Self {
        SceneReport {
            m,
            seed,
            overall_pass: true,
            ..Default::default()
        }
    }

    pub fn push_check(&mut self, check: CheckLine) {
        self.overall_pass &= check.pass;
        self.checks.push(check);
    }

    /// Every numeric field must be finite before emission.
    pub fn validate_finite(&self) -> Result<()> {
        for check in &self.checks {
            if !check.value.is_finite() || !check.threshold.is_finite() {
                return Err(ProjvarError::InvalidConfig(format!(
                    "non-finite value in check '{}'",
                    check.name
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate_finite()?;
        serde_json::to_string_pretty(self)
            .map_err(|e| ProjvarError::InvalidConfig(format!("report serialization: {e}")))
    }
}
