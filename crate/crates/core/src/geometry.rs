//! Node placement, link geometry and classification, and the
//! distance-based line-of-sight probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::normal_sf;

/// Altitudes closer than this use the equal-altitude LoS branch.
pub const ALTITUDE_TOLERANCE_M: f64 = 0.5;

/// Nodes at or below this altitude count as ground nodes.
pub const DEFAULT_GROUND_THRESHOLD_M: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let p = Self { x, y, z };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err(Error::Validation(format!("position {self:?} is not finite")));
        }
        if self.z < 0.0 {
            return Err(Error::Validation(format!("altitude must be >= 0, got {}", self.z)));
        }
        Ok(())
    }
}

/// Rectangular deployment area centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub width_m: f64,
    pub height_m: f64,
}

impl Default for Area {
    fn default() -> Self {
        Self {
            width_m: 100.0,
            height_m: 100.0,
        }
    }
}

impl Area {
    pub fn contains(&self, p: &Position) -> bool {
        p.x.abs() <= self.width_m / 2.0 && p.y.abs() <= self.height_m / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentParams {
    /// Building-height scale ζ.
    pub zeta_m: f64,
    /// Building density v.
    pub buildings_per_m2: f64,
    /// Built-up area ratio μ.
    pub built_up_ratio: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub d0_m: f64,
    pub k_los: f64,
    pub k_nlos: f64,
    pub carrier_hz: f64,
    pub area: Area,
}

impl Default for EnvironmentParams {
    fn default() -> Self {
        Self {
            zeta_m: 20.0,
            buildings_per_m2: 3e-4,
            built_up_ratio: 0.5,
            alpha_los: 2.0,
            alpha_nlos: 3.5,
            d0_m: 10.0,
            k_los: 15.0,
            k_nlos: 1.0,
            carrier_hz: 2.4e9,
            area: Area::default(),
        }
    }
}

impl EnvironmentParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("zeta_m", self.zeta_m),
            ("buildings_per_m2", self.buildings_per_m2),
            ("built_up_ratio", self.built_up_ratio),
            ("d0_m", self.d0_m),
            ("carrier_hz", self.carrier_hz),
            ("area.width_m", self.area.width_m),
            ("area.height_m", self.area.height_m),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Validation(format!("environment.{name} must be > 0, got {v}")));
            }
        }
        if !(self.alpha_los >= 2.0 && self.alpha_nlos >= self.alpha_los) {
            return Err(Error::Validation(format!(
                "path-loss exponents must satisfy alpha_nlos >= alpha_los >= 2, got {} / {}",
                self.alpha_nlos, self.alpha_los
            )));
        }
        if !(self.k_nlos > 0.0 && self.k_los > self.k_nlos) {
            return Err(Error::Validation(format!(
                "Rician factors must satisfy k_los > k_nlos > 0, got {} / {}",
                self.k_los, self.k_nlos
            )));
        }
        Ok(())
    }

    /// `√(v·μ)`, the per-metre blockage rate in the LoS exponent.
    fn blockage_rate(&self) -> f64 {
        (self.buildings_per_m2 * self.built_up_ratio).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LinkClass {
    G2G,
    G2A,
    A2G,
    A2A,
}

impl LinkClass {
    pub fn involves_aerial(self) -> bool {
        !matches!(self, LinkClass::G2G)
    }
}

impl std::fmt::Display for LinkClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LinkClass::G2G => "G2G",
            LinkClass::G2A => "G2A",
            LinkClass::A2G => "A2G",
            LinkClass::A2A => "A2A",
        };
        f.write_str(s)
    }
}

pub fn classify_link(tx_altitude: f64, rx_altitude: f64, ground_threshold_m: f64) -> LinkClass {
    match (tx_altitude > ground_threshold_m, rx_altitude > ground_threshold_m) {
        (false, false) => LinkClass::G2G,
        (false, true) => LinkClass::G2A,
        (true, false) => LinkClass::A2G,
        (true, true) => LinkClass::A2A,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub d_h: f64,
    pub d_v: f64,
    pub d: f64,
    pub elevation_deg: f64,
}

pub fn link_geometry(tx: &Position, rx: &Position) -> Result<LinkGeometry> {
    tx.validate()?;
    rx.validate()?;
    let d_h = (tx.x - rx.x).hypot(tx.y - rx.y);
    let d_v = (tx.z - rx.z).abs();
    let d = d_h.hypot(d_v);
    if d == 0.0 {
        return Err(Error::DegenerateGeometry);
    }
    Ok(LinkGeometry {
        d_h,
        d_v,
        d,
        elevation_deg: d_v.atan2(d_h).to_degrees(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LosBranch {
    EqualAltitude,
    DistinctAltitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LosEvaluation {
    pub probability: f64,
    pub branch: LosBranch,
    /// Both ends on the ground at the same altitude: the base `1 - e^0`
    /// vanishes and the link is always NLoS.
    pub degenerate_altitude: bool,
}

/// Distance-based LoS probability between a transmitter and a receiver.
pub fn los_probability(tx: &Position, rx: &Position, env: &EnvironmentParams) -> Result<LosEvaluation> {
    let g = link_geometry(tx, rx)?;
    let rate = env.blockage_rate();
    let (base, exponent, branch) = if g.d_v < ALTITUDE_TOLERANCE_M {
        let z = tx.z;
        let base = -(-(z * z) / (2.0 * env.zeta_m * env.zeta_m)).exp_m1();
        (base, g.d * rate, LosBranch::EqualAltitude)
    } else {
        let gap = (normal_sf(tx.z / env.zeta_m) - normal_sf(rx.z / env.zeta_m)).abs();
        let base = 1.0 - (2.0 * std::f64::consts::PI).sqrt() * env.zeta_m / g.d_v * gap;
        (base, g.d_h * rate, LosBranch::DistinctAltitude)
    };
    let base = base.clamp(0.0, 1.0);
    let probability = if exponent == 0.0 { 1.0 } else { base.powf(exponent) };
    Ok(LosEvaluation {
        probability: probability.clamp(0.0, 1.0),
        branch,
        degenerate_altitude: branch == LosBranch::EqualAltitude && base == 0.0,
    })
}

/// Uniform placement of `count` nodes in the centred `area` (a Poisson
/// process realisation conditioned on its count). Altitudes are taken from
/// `altitudes`, one per node. Deterministic for a fixed seed.
pub fn generate_poisson_layout(seed: u64, count: usize, area: &Area, altitudes: &[f64]) -> Result<Vec<Position>> {
    if count < 2 {
        return Err(Error::Config(format!("layout needs at least 2 nodes, got {count}")));
    }
    if altitudes.len() != count {
        return Err(Error::Config(format!(
            "got {} altitude assignments for {count} nodes",
            altitudes.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (hw, hh) = (area.width_m / 2.0, area.height_m / 2.0);
    altitudes
        .iter()
        .map(|&z| Position::new(rng.random_range(-hw..=hw), rng.random_range(-hh..=hh), z))
        .collect()
}
