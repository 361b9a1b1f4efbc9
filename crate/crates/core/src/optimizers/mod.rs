//! Line search, the distributed threshold/encoder controllers, and the
//! reference policies they are compared against.

mod baselines;
mod distributed;
mod lcs;

pub use baselines::{baseline_policy, BaselineKind};
pub use distributed::{dtc, dvec, dvtc, jdvt_ec, joint_start, selfish_thresholds};
pub use lcs::{lcs, LcsOutcome, StepParams, MAX_EVALUATIONS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NetworkModel;

/// Convergence tolerance on thresholds.
pub const EPSILON_BETA: f64 = 1e-3;
/// Convergence tolerance on encoding rates, Kbps.
pub const EPSILON_E_KBPS: f64 = 1.0;
/// Largest encoding rate searched, Kbps.
pub const E_CAP_KBPS: f64 = 456.0;
/// Encoding rates stay this far above `E0`, Kbps.
pub const E_FLOOR_MARGIN_KBPS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSteps {
    pub beta: StepParams,
    /// Steps on the packet rate `E/L`, pkts/s.
    pub lambda: StepParams,
}

impl Default for SearchSteps {
    fn default() -> Self {
        Self {
            beta: StepParams {
                divider: 0.5,
                accuracy: 0.01,
            },
            lambda: StepParams {
                divider: 0.5,
                accuracy: 1.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub steps: SearchSteps,
    pub max_iter: usize,
    pub epsilon_beta: f64,
    pub epsilon_e_kbps: f64,
    /// Session update order in each round; ascending when `None`.
    pub order: Option<Vec<usize>>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            steps: SearchSteps::default(),
            max_iter: 50,
            epsilon_beta: EPSILON_BETA,
            epsilon_e_kbps: EPSILON_E_KBPS,
            order: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self, sessions: usize) -> Result<()> {
        self.steps.beta.validate()?;
        self.steps.lambda.validate()?;
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be >= 1".into()));
        }
        if !(self.epsilon_beta > 0.0 && self.epsilon_e_kbps > 0.0) {
            return Err(Error::Config("convergence tolerances must be > 0".into()));
        }
        if let Some(order) = &self.order {
            let mut seen = order.clone();
            seen.sort_unstable();
            if seen != (0..sessions).collect::<Vec<_>>() {
                return Err(Error::Config(format!(
                    "update order {order:?} is not a permutation of 0..{sessions}"
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn update_order(&self, sessions: usize) -> Vec<usize> {
        self.order.clone().unwrap_or_else(|| (0..sessions).collect())
    }
}

/// Per-session thresholds and encoding rates (`None` for C2 sessions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyVector {
    pub betas: Vec<f64>,
    pub encodings: Vec<Option<f64>>,
}

impl PolicyVector {
    /// Every threshold inside `[0, β_max]` for its packet rate and every
    /// encoding rate inside `(E0, cap]`.
    pub fn check_feasible(&self, model: &NetworkModel) -> Result<()> {
        for n in 0..model.len() {
            let e = self.encodings[n];
            let bmax = model.beta_max(n, model.lambda(n, e))?;
            let b = self.betas[n];
            if !(b >= 0.0 && b <= bmax) {
                return Err(Error::Validation(format!("session {n}: beta {b} outside [0, {bmax}]")));
            }
            if let (Some(e), Some(v)) = (e, model.session(n).video.as_ref()) {
                if !(e > v.e0_kbps && e <= E_CAP_KBPS) {
                    return Err(Error::Validation(format!(
                        "session {n}: encoding {e} outside ({}, {E_CAP_KBPS}]",
                        v.e0_kbps
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Selfish,
    Thresholds,
    Encodings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub stage: Stage,
    /// Outer (joint) iteration; zero outside the joint controller.
    pub outer: usize,
    pub iteration: usize,
    /// Objective of every session after the iteration.
    pub objectives: Vec<f64>,
    pub betas: Vec<f64>,
    pub encodings: Vec<Option<f64>>,
    pub delta_beta: f64,
    pub delta_e_kbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub algorithm: String,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations: usize,
}

impl OptimizationTrace {
    pub(crate) fn new(algorithm: &str) -> Self {
        Self {
            algorithm: algorithm.to_string(),
            records: Vec::new(),
            converged: false,
            iterations: 0,
        }
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub(crate) fn max_abs_diff_opt(a: &[Option<f64>], b: &[Option<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .filter_map(|(x, y)| Some((x.as_ref()? - y.as_ref()?).abs()))
        .fold(0.0, f64::max)
}
