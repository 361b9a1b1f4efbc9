//! Reference threshold and encoding policies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::distributed::{dvtc, selfish_thresholds};
use super::{OptimizationTrace, OptimizerConfig, PolicyVector};
use crate::error::{Error, Result};
use crate::network::{NetworkModel, Objective};

pub const FIXED_BETA_LOS: f64 = 4.0;
pub const FIXED_BETA_NLOS: f64 = 2.0;
/// Aggressive thresholds are drawn from the lowest share of the range.
pub const AGGRESSIVE_SHARE: f64 = 0.4;
/// Conservative thresholds are drawn from the top share of the range.
pub const CONSERVATIVE_SHARE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Random,
    Aggressive,
    Selfish,
    Fixed,
    Conservative,
    EncLow,
    EncMed,
    EncHigh,
}

impl BaselineKind {
    pub const THRESHOLD_KINDS: [BaselineKind; 5] = [
        BaselineKind::Random,
        BaselineKind::Aggressive,
        BaselineKind::Selfish,
        BaselineKind::Fixed,
        BaselineKind::Conservative,
    ];
    pub const ENCODING_KINDS: [BaselineKind; 3] = [BaselineKind::EncLow, BaselineKind::EncMed, BaselineKind::EncHigh];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Random => "random",
            BaselineKind::Aggressive => "aggressive",
            BaselineKind::Selfish => "selfish",
            BaselineKind::Fixed => "fixed",
            BaselineKind::Conservative => "conservative",
            BaselineKind::EncLow => "enc_low",
            BaselineKind::EncMed => "enc_med",
            BaselineKind::EncHigh => "enc_high",
        }
    }

    /// Encoding-rate range in Kbps for the encoding kinds.
    pub fn encoding_range(self) -> Option<(f64, f64)> {
        match self {
            BaselineKind::EncLow => Some((152.0, 212.8)),
            BaselineKind::EncMed => Some((273.6, 334.4)),
            BaselineKind::EncHigh => Some((395.2, 456.0)),
            _ => None,
        }
    }
}

impl std::fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::THRESHOLD_KINDS
            .iter()
            .chain(Self::ENCODING_KINDS.iter())
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown baseline policy '{s}'")))
    }
}

/// Builds a reference policy.
///
/// Threshold kinds keep the configured encoding rates. Encoding kinds draw
/// each streamer's rate from their range and then run the PSNR threshold
/// consensus with those rates held fixed.
pub fn baseline_policy(
    kind: BaselineKind,
    model: &NetworkModel,
    seed: u64,
    cfg: &OptimizerConfig,
) -> Result<PolicyVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let defaults: Vec<Option<f64>> = (0..model.len()).map(|n| model.default_encoding(n)).collect();
    let upper = |n: usize, enc: &[Option<f64>]| model.beta_max(n, model.lambda(n, enc[n]));

    let draw = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| if hi > lo { rng.random_range(lo..=hi) } else { hi };
    let policy = match kind {
        BaselineKind::Random | BaselineKind::Aggressive | BaselineKind::Conservative => {
            let mut betas = Vec::with_capacity(model.len());
            for n in 0..model.len() {
                let bmax = upper(n, &defaults)?;
                let (lo, hi) = match kind {
                    BaselineKind::Random => (0.0, bmax),
                    BaselineKind::Aggressive => (0.0, AGGRESSIVE_SHARE * bmax),
                    _ => ((1.0 - CONSERVATIVE_SHARE) * bmax, bmax),
                };
                betas.push(draw(&mut rng, lo, hi));
            }
            PolicyVector {
                betas,
                encodings: defaults,
            }
        }
        BaselineKind::Selfish => PolicyVector {
            betas: selfish_thresholds(model, Objective::Throughput, &defaults, cfg)?,
            encodings: defaults,
        },
        BaselineKind::Fixed => PolicyVector {
            betas: model
                .sessions()
                .iter()
                .map(|s| {
                    if s.link.is_los() {
                        FIXED_BETA_LOS
                    } else {
                        FIXED_BETA_NLOS
                    }
                })
                .collect(),
            encodings: defaults,
        },
        BaselineKind::EncLow | BaselineKind::EncMed | BaselineKind::EncHigh => {
            let (lo, hi) = kind.encoding_range().expect("encoding kind has a range");
            let encodings: Vec<Option<f64>> = defaults.iter().map(|d| d.map(|_| draw(&mut rng, lo, hi))).collect();
            let start = selfish_thresholds(model, Objective::Psnr, &encodings, cfg)?;
            let mut trace = OptimizationTrace::new(kind.name());
            let (betas, _) = dvtc(model, &encodings, &start, cfg, 0, &mut trace)?;
            PolicyVector { betas, encodings }
        }
    };
    Ok(policy)
}
