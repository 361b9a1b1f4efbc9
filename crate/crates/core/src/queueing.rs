//! MAC-layer losses: packets dropped for exceeding the delay threshold and
//! packets lost to buffer overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack accepted when a threshold sits exactly on its upper bound.
const BOUNDARY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueueParams {
    pub lambda_pkts_per_s: f64,
    pub t_threshold_s: f64,
    pub t_slot_s: f64,
    /// Normalised buffer size `b·η`.
    pub buffer_norm: f64,
}

impl Default for QueueParams {
    fn default() -> Self {
        Self {
            lambda_pkts_per_s: 100.0,
            t_threshold_s: 0.08,
            t_slot_s: 0.005,
            buffer_norm: 100.0,
        }
    }
}

impl QueueParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda_pkts_per_s", self.lambda_pkts_per_s),
            ("t_threshold_s", self.t_threshold_s),
            ("t_slot_s", self.t_slot_s),
            ("buffer_norm", self.buffer_norm),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("queue.{name} must be > 0, got {v}")));
            }
        }
        let load = self.lambda_pkts_per_s * self.t_slot_s;
        if load >= 1.0 {
            return Err(Error::InfeasibleLoad { load });
        }
        Ok(())
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda_pkts_per_s: lambda,
            ..self.clone()
        }
    }
}

fn check_mu(what: &'static str, mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::domain(
            what,
            format!("transmission probability must be in (0,1], got {mu}"),
        ));
    }
    Ok(())
}

/// `ρ = λ·T_slt / μ`.
pub fn offered_load(mu: f64, q: &QueueParams) -> Result<f64> {
    check_mu("offered_load", mu)?;
    Ok(q.lambda_pkts_per_s * q.t_slot_s / mu)
}

/// Probability that a packet waits longer than `T_th`, with exponential
/// service at rate `μ/T_slt`.
pub fn p_dly(mu: f64, q: &QueueParams) -> Result<f64> {
    check_mu("p_dly", mu)?;
    let service = mu / q.t_slot_s;
    let margin = service - q.lambda_pkts_per_s;
    if margin < -BOUNDARY_SLACK * q.lambda_pkts_per_s {
        return Err(Error::InfeasibleThreshold {
            service,
            arrival: q.lambda_pkts_per_s,
        });
    }
    Ok((-margin.max(0.0) * q.t_threshold_s).exp().clamp(0.0, 1.0))
}

/// Buffer-overflow probability
/// `(1-ρ)e^{-b(1-ρ)} / (1 - ρe^{-b(1-ρ)})`, continuous at `ρ = 1` where it
/// equals `1/(1+b)`.
pub fn p_ov(mu: f64, q: &QueueParams) -> Result<f64> {
    let rho = offered_load(mu, q)?;
    overflow_from_load(rho, q.buffer_norm)
}

pub fn overflow_from_load(rho: f64, buffer_norm: f64) -> Result<f64> {
    if !(rho.is_finite() && rho >= 0.0) || !(buffer_norm > 0.0) {
        return Err(Error::domain(
            "p_ov",
            format!("need rho >= 0 and buffer > 0, got {rho}, {buffer_norm}"),
        ));
    }
    if rho > 1.0 + BOUNDARY_SLACK {
        return Err(Error::Overload { rho });
    }
    if rho == 0.0 {
        return Ok((-buffer_norm).exp());
    }
    let gap = 1.0 - rho;
    if gap.abs() < 1e-12 {
        return Ok(1.0 / (1.0 + buffer_norm));
    }
    // 1 - ρe^{-b·gap} evaluated without cancellation near ρ = 1.
    let den = -((-gap).ln_1p() - buffer_norm * gap).exp_m1();
    let num = gap * (-buffer_norm * gap).exp();
    Ok((num / den).clamp(0.0, 1.0))
}
