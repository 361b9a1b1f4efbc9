//! Overall packet loss, throughput, video distortion and PSNR.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VideoParams {
    /// Weight of packet loss in the distortion.
    pub sensitivity: f64,
    pub pkt_len_kbit: f64,
    pub d0_mse: f64,
    pub e0_kbps: f64,
    pub theta0_mse_kbps: f64,
    pub bit_depth: u32,
}

impl Default for VideoParams {
    fn default() -> Self {
        Self {
            sensitivity: 30.0,
            pkt_len_kbit: 3.04,
            d0_mse: 1.18,
            e0_kbps: 0.67,
            theta0_mse_kbps: 858.0,
            bit_depth: 8,
        }
    }
}

impl VideoParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sensitivity", self.sensitivity),
            ("pkt_len_kbit", self.pkt_len_kbit),
            ("d0_mse", self.d0_mse),
            ("e0_kbps", self.e0_kbps),
            ("theta0_mse_kbps", self.theta0_mse_kbps),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("video.{name} must be > 0, got {v}")));
            }
        }
        if !(1..=32).contains(&self.bit_depth) {
            return Err(Error::Validation(format!(
                "video.bit_depth must be in 1..=32, got {}",
                self.bit_depth
            )));
        }
        Ok(())
    }

    /// Packet rate carrying an encoding rate: `λ = E / L`.
    pub fn lambda_for(&self, e_kbps: f64) -> f64 {
        e_kbps / self.pkt_len_kbit
    }

    pub fn encoding_for(&self, lambda: f64) -> f64 {
        lambda * self.pkt_len_kbit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub p_dly: f64,
    pub p_ov: f64,
    pub p_err: f64,
    pub p_lss: f64,
}

impl LossBreakdown {
    pub fn new(p_dly: f64, p_ov: f64, p_err: f64) -> Self {
        Self {
            p_dly,
            p_ov,
            p_err,
            p_lss: overall_loss(p_dly, p_ov, p_err),
        }
    }
}

/// Sum of the three loss causes, dropping their products, capped at 1.
pub fn overall_loss(p_dly: f64, p_ov: f64, p_err: f64) -> f64 {
    (p_dly + p_ov + p_err).clamp(0.0, 1.0)
}

/// Delivered packet rate `λ(1 - P_lss)`.
pub fn throughput(lambda: f64, p_lss: f64) -> f64 {
    lambda * (1.0 - p_lss.clamp(0.0, 1.0))
}

/// Compression plus loss distortion `D0 + θ0/(E - E0) + s·P_lss`.
pub fn distortion(e_kbps: f64, p_lss: f64, video: &VideoParams) -> Result<f64> {
    if !(e_kbps > video.e0_kbps) {
        return Err(Error::domain(
            "distortion",
            format!("encoding rate {e_kbps} Kbps must exceed E0 = {} Kbps", video.e0_kbps),
        ));
    }
    Ok(video.d0_mse + video.theta0_mse_kbps / (e_kbps - video.e0_kbps) + video.sensitivity * p_lss)
}

pub fn psnr(distortion: f64, bit_depth: u32) -> Result<f64> {
    if !(distortion > 0.0 && distortion.is_finite()) {
        return Err(Error::domain(
            "psnr",
            format!("distortion must be > 0, got {distortion}"),
        ));
    }
    let peak = 2.0_f64.powi(bit_depth as i32) - 1.0;
    Ok(10.0 * (peak * peak / distortion).log10())
}

/// Mean of `psnr_at(d, θ)` over every (distance, elevation) cell.
pub fn average_psnr<F>(distances: &[f64], elevations_deg: &[f64], mut psnr_at: F) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    if distances.is_empty() || elevations_deg.is_empty() {
        return Err(Error::Config(
            "average PSNR needs nonempty distance and elevation grids".into(),
        ));
    }
    let mut sum = 0.0;
    for &d in distances {
        for &t in elevations_deg {
            sum += psnr_at(d, t)?;
        }
    }
    Ok(sum / (distances.len() * elevations_deg.len()) as f64)
}
