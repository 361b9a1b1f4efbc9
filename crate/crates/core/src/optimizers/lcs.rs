//! Bidirectional line search with step growth and refinement.
//!
//! The search first grows its step in the forward direction while the
//! objective improves, then refines with shrinking steps. If the first
//! forward step fails it turns around and does the same backwards. Steps
//! are `accuracy / divider^level`, tracked by an integer level so that
//! "step equals accuracy" is an exact test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard stop on objective evaluations per search.
pub const MAX_EVALUATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    /// Factor in (0, 1): steps grow by `1/divider` and shrink by `divider`.
    pub divider: f64,
    /// Smallest step; also the resolution of the result.
    pub accuracy: f64,
}

impl StepParams {
    pub fn new(divider: f64, accuracy: f64) -> Result<Self> {
        let s = Self { divider, accuracy };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.divider > 0.0 && self.divider < 1.0) {
            return Err(Error::Config(format!(
                "step divider must be in (0,1), got {}",
                self.divider
            )));
        }
        if !(self.accuracy > 0.0 && self.accuracy.is_finite()) {
            return Err(Error::Config(format!(
                "step accuracy must be > 0, got {}",
                self.accuracy
            )));
        }
        Ok(())
    }

    fn step(&self, level: i32) -> f64 {
        self.accuracy * self.divider.powi(-level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LcsOutcome {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
    /// The evaluation budget ran out before the step dropped below accuracy.
    pub exhausted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    GrowForward,
    RefineForward,
    GrowBackward,
    RefineBackward,
}

/// Maximizes `objective` starting at `x0`. Probes stay strictly inside
/// `(lower, upper)`; `x0` itself may sit on either bound.
pub fn lcs<F>(mut objective: F, x0: f64, steps: &StepParams, lower: f64, upper: Option<f64>) -> Result<LcsOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    steps.validate()?;
    let hi = upper.unwrap_or(f64::INFINITY);
    if !(x0.is_finite() && x0 >= lower && x0 <= hi) {
        return Err(Error::Config(format!("start {x0} lies outside [{lower}, {hi}]")));
    }
    let mut x = x0;
    let mut best = objective(x)?;
    let mut evaluations = 1;
    let mut phase = Phase::GrowForward;
    let mut level: i32 = -1;
    let mut forward_gains = 0usize;

    // Tries x ± step; returns whether the move was taken and improved.
    let mut probe = |x: &mut f64, best: &mut f64, evaluations: &mut usize, delta: f64| -> Result<bool> {
        let cand = *x + delta;
        let inside = if delta > 0.0 { cand < hi } else { cand > lower };
        if !inside {
            return Ok(false);
        }
        let v = objective(cand)?;
        *evaluations += 1;
        if v > *best {
            *best = v;
            *x = cand;
            Ok(true)
        } else {
            Ok(false)
        }
    };

    while evaluations < MAX_EVALUATIONS {
        match phase {
            Phase::GrowForward => {
                level += 1;
                if probe(&mut x, &mut best, &mut evaluations, steps.step(level))? {
                    forward_gains += 1;
                } else if forward_gains != 0 {
                    phase = Phase::RefineForward;
                } else {
                    phase = Phase::GrowBackward;
                    level -= 1;
                }
            }
            Phase::RefineForward => {
                level -= 1;
                if level < 0 {
                    break;
                }
                if !probe(&mut x, &mut best, &mut evaluations, steps.step(level))? && level == 0 {
                    phase = Phase::GrowBackward;
                    level -= 1;
                }
            }
            Phase::GrowBackward => {
                level += 1;
                if !probe(&mut x, &mut best, &mut evaluations, -steps.step(level))? {
                    phase = Phase::RefineBackward;
                }
            }
            Phase::RefineBackward => {
                level -= 1;
                if level < 0 {
                    break;
                }
                if !probe(&mut x, &mut best, &mut evaluations, -steps.step(level))? && level == 0 {
                    phase = Phase::GrowForward;
                    level -= 1;
                }
            }
        }
    }
    Ok(LcsOutcome {
        x,
        value: best,
        evaluations,
        exhausted: evaluations >= MAX_EVALUATIONS,
    })
}
