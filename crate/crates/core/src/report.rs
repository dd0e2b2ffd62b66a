//! Serialized run reports.

/// Serde adapter writing non-finite floats as the strings `"inf"` / `"-inf"`
/// (JSON has no infinity literal).
pub mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number, found {t:?}"))),
        }
    }
}

use serde::Serialize;

use crate::instance::Solution;

/// Threshold values drawn in one round; absent for algorithms without them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Thresholds {
    pub gamma: Option<f64>,
    pub sigma: Option<f64>,
}

/// Costs of the intermediate edge sets of one round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StageCosts {
    /// The backbone walk through the terminals.
    pub cycle: f64,
    /// Sampled trees (or the sampled forest).
    pub trees: f64,
    pub pruned: Option<f64>,
    pub pickup: Option<f64>,
    pub join: Option<f64>,
    /// `c(z)` of the fractional join-dominant vector.
    pub z: Option<f64>,
    /// The Eulerian multigraph before shortcutting.
    pub multigraph: Option<f64>,
}

/// Outcome of one randomized round.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SolutionReport {
    pub algorithm: &'static str,
    pub seed: u64,
    pub trial: usize,
    pub solution: Solution,
    #[serde(with = "float_or_inf")]
    pub objective: f64,
    pub lp_value: f64,
    pub ratio_vs_lp: Option<f64>,
    pub thresholds: Thresholds,
    pub stage_costs: StageCosts,
    /// Whether the join cost stayed within `c(z)`.
    pub join_within_z: Option<bool>,
    /// Rounds redrawn because the join exceeded its size cap.
    pub resampled: usize,
    pub wall_time_ms: u64,
}

/// `objective / lp`, undefined for a zero LP value.
pub fn ratio(objective: f64, lp: f64) -> Option<f64> {
    (lp > 1e-12 && objective.is_finite()).then(|| objective / lp)
}

/// Summary statistics over trials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialStats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std_err: f64,
}

impl TrialStats {
    pub fn of(values: &[f64]) -> TrialStats {
        let count = values.len();
        if count == 0 {
            return TrialStats {
                count,
                mean: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
                std_err: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let var = if count > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        TrialStats {
            count,
            mean,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            std_err: (var / count as f64).sqrt(),
        }
    }
}

/// Per-vertex ratio between the worst-case miss probability and the LP's
/// fractional penalty share.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PenaltyRatio {
    pub vertex: usize,
    pub y: f64,
    pub rho: f64,
}
