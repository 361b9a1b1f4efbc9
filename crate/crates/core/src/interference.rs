//! Aggregate interference: moment matching to a log-normal law and the
//! SINR outage probability of a victim link.

use serde::{Deserialize, Serialize};

use crate::channel::FadingModel;
use crate::error::{Error, Result};
use crate::numerics::{integrate, normal_sf, QuadratureSpec};

/// One interfering transmitter as seen from the victim's receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfererView {
    pub tx_power_w: f64,
    /// Squared large-scale amplitude `ĥ²` toward the victim receiver.
    pub path_gain: f64,
    pub model: FadingModel,
    pub beta: f64,
    /// Transmission probability at `beta`.
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InterferenceMoments {
    pub mean_w: f64,
    pub variance_w2: f64,
}

/// Mean and variance of the aggregate interference on one sub-channel.
///
/// Interferer `m` contributes `a_m·h²·1{h ≥ β_m}` with
/// `a_m = P_m ĥ_m² μ_m / |F|`, independently across interferers, so
///
/// ```text
/// mean = Σ a_m M2_m
/// var  = Σ a_m² M4_m + Σ_{m1≠m2} a_m1 M2_m1 a_m2 M2_m2 - mean²
///      = Σ a_m² (M4_m - M2_m²)
/// ```
///
/// with `M_k = ∫_β^∞ x^k f(x) dx`.
pub fn interference_moments(
    views: &[InterfererView],
    num_subchannels: u32,
    spec: &QuadratureSpec,
) -> Result<InterferenceMoments> {
    if num_subchannels == 0 {
        return Err(Error::domain("interference_moments", "need at least one sub-channel"));
    }
    let f = f64::from(num_subchannels);
    let mut out = InterferenceMoments::default();
    for v in views {
        if !(v.tx_power_w >= 0.0 && v.path_gain >= 0.0 && (0.0..=1.0).contains(&v.mu)) {
            return Err(Error::domain(
                "interference_moments",
                format!("invalid interferer {v:?}"),
            ));
        }
        let a = v.tx_power_w * v.path_gain * v.mu / f;
        if a == 0.0 {
            continue;
        }
        let m2 = v.model.partial_moment(2, v.beta, spec)?;
        let m4 = v.model.partial_moment(4, v.beta, spec)?;
        out.mean_w += a * m2;
        out.variance_w2 += a * a * (m4 - m2 * m2).max(0.0);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalParams {
    pub location: f64,
    pub scale: f64,
    pub mean_w: f64,
    pub variance_w2: f64,
}

pub fn lognormal_fit(mean_w: f64, variance_w2: f64) -> Result<LogNormalParams> {
    if mean_w == 0.0 {
        return Err(Error::DegenerateInterference);
    }
    if !(mean_w > 0.0 && mean_w.is_finite() && variance_w2 >= 0.0 && variance_w2.is_finite()) {
        return Err(Error::domain(
            "lognormal_fit",
            format!("need mean > 0 and variance >= 0, got {mean_w}, {variance_w2}"),
        ));
    }
    let spread = (variance_w2 / (mean_w * mean_w)).ln_1p();
    Ok(LogNormalParams {
        location: mean_w.ln() - 0.5 * spread,
        scale: spread.sqrt(),
        mean_w,
        variance_w2,
    })
}

/// `P(I > x)` under the fitted law.
pub fn interference_ccdf(x_w: f64, p: &LogNormalParams) -> f64 {
    if x_w <= 0.0 {
        return 1.0;
    }
    if p.scale == 0.0 {
        return if x_w < p.mean_w { 1.0 } else { 0.0 };
    }
    normal_sf((x_w.ln() - p.location) / p.scale)
}

/// Interference law at a victim: identically zero, or log-normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InterferenceLaw {
    Absent,
    LogNormal(LogNormalParams),
}

impl InterferenceLaw {
    pub fn from_moments(m: &InterferenceMoments) -> Result<Self> {
        match lognormal_fit(m.mean_w, m.variance_w2) {
            Ok(p) => Ok(InterferenceLaw::LogNormal(p)),
            Err(Error::DegenerateInterference) => Ok(InterferenceLaw::Absent),
            Err(e) => Err(e),
        }
    }

    pub fn ccdf(&self, x_w: f64) -> f64 {
        match self {
            InterferenceLaw::Absent => {
                if x_w < 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            InterferenceLaw::LogNormal(p) => interference_ccdf(x_w, p),
        }
    }
}

/// The victim transmitter's own link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VictimLink {
    pub tx_power_w: f64,
    pub path_gain: f64,
    pub model: FadingModel,
}

/// Probability that the victim transmits (fading at least `beta`) and the
/// SINR falls below `sinr_threshold`:
///
/// `∫_β^∞ f(x) · P(I > Pĥ²x²/γ - σ²) dx`.
///
/// Below `x_c = sqrt(γσ²/(Pĥ²))` noise alone causes outage, so that part is
/// the exact tail difference `Q1(b, β) - Q1(b, x_c)`.
pub fn p_err(
    victim: &VictimLink,
    beta: f64,
    sinr_threshold: f64,
    noise_w: f64,
    law: &InterferenceLaw,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::domain("p_err", format!("beta must be >= 0, got {beta}")));
    }
    let signal = victim.tx_power_w * victim.path_gain;
    if !(signal > 0.0 && sinr_threshold > 0.0 && noise_w >= 0.0) {
        return Err(Error::domain(
            "p_err",
            format!("need P·ĥ² > 0, γ > 0, σ² >= 0 (got {signal}, {sinr_threshold}, {noise_w})"),
        ));
    }
    let model = &victim.model;
    let x_c = (sinr_threshold * noise_w / signal).sqrt();
    let noise_part = if beta < x_c {
        model.tail(beta) - model.tail(x_c)
    } else {
        0.0
    };
    let start = beta.max(x_c);
    let end = model.support_end();
    let interference_part = match law {
        InterferenceLaw::Absent => 0.0,
        InterferenceLaw::LogNormal(p) if start < end => integrate(
            |x| model.pdf(x) * interference_ccdf(signal * x * x / sinr_threshold - noise_w, p),
            start,
            end,
            spec,
        )?,
        InterferenceLaw::LogNormal(_) => 0.0,
    };
    Ok((noise_part + interference_part).clamp(0.0, 1.0))
}
