//! The run report: everything needed to reproduce and audit a factorization.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub instance: InstanceEcho,
    /// 1-based anchor column indices in the input matrix.
    pub anchors_found: Vec<usize>,
    /// 1-based ground truth, when metadata was supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchors_true: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<Accuracy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub false_positives: Option<usize>,
    pub iterations: usize,
    pub converged: bool,
    /// Smallest accepted minus largest rejected diagonal entry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diag_gap: Option<f64>,
    pub residuals: Residuals,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub epsilon: f64,
    pub step_t: f64,
    pub ridge_delta: f64,
    pub anchor_tau: f64,
    pub max_iters: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceEcho {
    pub matrix_path: String,
    pub rows: usize,
    pub cols: usize,
    pub cols_after_dedupe: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regime: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance_seed: Option<u64>,
}

/// Identified-anchor count against the planted count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Accuracy {
    pub true_positives: usize,
    pub r: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Residuals {
    pub phi2_equality: f64,
    pub phi2_column_sum: f64,
    pub phi2_min_entry: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction_normalized: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction_denormalized: Option<f64>,
}
