//! Scenario description: nodes, sessions and model parameters, with TOML
//! load/save and validation.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::geometry::{
    generate_poisson_layout, link_geometry, EnvironmentParams, Position, DEFAULT_GROUND_THRESHOLD_M,
};
use crate::objectives::VideoParams;
use crate::queueing::QueueParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Streamer,
    C2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: u32,
    pub role: Role,
    pub position: Position,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub queue: Option<QueueParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub video: Option<VideoParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pair {
    pub tx: u32,
    pub rx: u32,
}

/// Node-level `queue`, `video` and `tx_power_w` override the
/// scenario-wide values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ground_threshold")]
    pub ground_threshold_m: f64,
    #[serde(default)]
    pub environment: EnvironmentParams,
    #[serde(default)]
    pub channel: ChannelParams,
    #[serde(default)]
    pub queue: QueueParams,
    #[serde(default)]
    pub video: VideoParams,
    pub nodes: Vec<NodeSpec>,
    pub pairs: Vec<Pair>,
}

fn default_ground_threshold() -> f64 {
    DEFAULT_GROUND_THRESHOLD_M
}

impl Scenario {
    pub fn node(&self, id: u32) -> Result<&NodeSpec> {
        self.nodes
            .iter()
            .find(|n| n.id == id)
            .ok_or_else(|| Error::Validation(format!("unknown node id {id}")))
    }

    pub fn node_mut(&mut self, id: u32) -> Result<&mut NodeSpec> {
        self.nodes
            .iter_mut()
            .find(|n| n.id == id)
            .ok_or_else(|| Error::Validation(format!("unknown node id {id}")))
    }

    pub fn queue_of(&self, node: &NodeSpec) -> QueueParams {
        node.queue.clone().unwrap_or_else(|| self.queue.clone())
    }

    pub fn video_of(&self, node: &NodeSpec) -> Option<VideoParams> {
        match node.role {
            Role::Streamer => Some(node.video.clone().unwrap_or_else(|| self.video.clone())),
            Role::C2 => None,
        }
    }

    pub fn tx_power_of(&self, node: &NodeSpec) -> f64 {
        node.tx_power_w.unwrap_or(self.channel.tx_power_w)
    }

    /// Sets the loss sensitivity of every streamer.
    pub fn set_sensitivity(&mut self, s: f64) {
        self.video.sensitivity = s;
        for n in &mut self.nodes {
            if let Some(v) = n.video.as_mut() {
                v.sensitivity = s;
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.environment.validate()?;
        self.channel.validate()?;
        self.queue.validate()?;
        self.video.validate()?;
        if !(self.ground_threshold_m.is_finite() && self.ground_threshold_m >= 0.0) {
            return Err(Error::Validation(format!(
                "ground_threshold_m must be >= 0, got {}",
                self.ground_threshold_m
            )));
        }
        if self.nodes.len() < 2 {
            return Err(Error::Validation("a scenario needs at least 2 nodes".into()));
        }
        let mut ids = HashSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id) {
                return Err(Error::Validation(format!("duplicate node id {}", n.id)));
            }
            n.position.validate()?;
            if let Some(q) = &n.queue {
                q.validate()?;
            }
            match (&n.video, n.role) {
                (Some(_), Role::C2) => {
                    return Err(Error::Validation(format!(
                        "node {} is a c2 node but carries video parameters",
                        n.id
                    )))
                }
                (Some(v), Role::Streamer) => v.validate()?,
                _ => {}
            }
            if let Some(p) = n.tx_power_w {
                if !(p.is_finite() && p > 0.0) {
                    return Err(Error::Validation(format!(
                        "node {} tx_power_w must be > 0, got {p}",
                        n.id
                    )));
                }
            }
        }
        if self.pairs.is_empty() {
            return Err(Error::Validation("a scenario needs at least one pair".into()));
        }
        let mut senders = HashSet::new();
        for p in &self.pairs {
            self.node(p.tx)
                .map_err(|_| Error::Validation(format!("pair {}->{} references unknown node {}", p.tx, p.rx, p.tx)))?;
            self.node(p.rx)
                .map_err(|_| Error::Validation(format!("pair {}->{} references unknown node {}", p.tx, p.rx, p.rx)))?;
            if p.tx == p.rx {
                return Err(Error::Validation(format!("pair {}->{} sends to itself", p.tx, p.rx)));
            }
            if !senders.insert(p.tx) {
                return Err(Error::Validation(format!(
                    "node {} transmits on more than one pair",
                    p.tx
                )));
            }
        }
        self.check_distances()
    }

    /// Every session link and every interference link must be at least the
    /// path-loss reference distance long.
    fn check_distances(&self) -> Result<()> {
        let pos: HashMap<u32, Position> = self.nodes.iter().map(|n| (n.id, n.position)).collect();
        let d0 = self.environment.d0_m;
        for victim in &self.pairs {
            let d = link_geometry(&pos[&victim.tx], &pos[&victim.rx])?.d;
            if d < d0 {
                return Err(Error::Validation(format!(
                    "link {}->{} is {d:.3} m long, shorter than d0 = {d0} m",
                    victim.tx, victim.rx
                )));
            }
            for other in &self.pairs {
                if other.tx == victim.tx || other.tx == victim.rx {
                    continue;
                }
                let d = link_geometry(&pos[&other.tx], &pos[&victim.rx])
                    .map_err(|_| Error::Validation(format!("nodes {} and {} share a position", other.tx, victim.rx)))?
                    .d;
                if d < d0 {
                    return Err(Error::Validation(format!(
                        "interference link {}->{} is {d:.3} m long, shorter than d0 = {d0} m",
                        other.tx, victim.rx
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let s: Scenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    s.validate()?;
    Ok(s)
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn scenario_to_toml(s: &Scenario) -> Result<String> {
    toml::to_string_pretty(s).map_err(|e| Error::Parse(e.to_string()))
}

pub fn save_scenario(s: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scenario_to_toml(s)?)?;
    Ok(())
}

/// Receiver of the streamer UAV in the reference layout.
pub const REFERENCE_GROUND_NODE: (f64, f64) = (-10.22, -29.74);
pub const STREAMER_UAV_ALTITUDE_M: f64 = 50.0;
pub const INTERFERER_UAV_ALTITUDE_M: f64 = 60.0;

const MAX_LAYOUT_ATTEMPTS: u64 = 10_000;

/// Ten-node reference composition: node 1 is a streamer UAV at 50 m, node 2
/// an interfering UAV at 60 m (also streaming), nodes 3 to 10 are ground
/// nodes. Nodes 1 to 5 stream video to nodes 10, 9, 6, 7, 8; nodes 6 to 10
/// send C2 traffic back along the same links. Node 10 is pinned at the
/// reference ground position; the others are placed uniformly at random,
/// redrawn until every link respects `d0`.
pub fn reference_scenario(seed: u64) -> Result<Scenario> {
    let partner = [10, 9, 6, 7, 8, 3, 4, 5, 2, 1];
    let mut altitudes = vec![0.0; 10];
    altitudes[0] = STREAMER_UAV_ALTITUDE_M;
    altitudes[1] = INTERFERER_UAV_ALTITUDE_M;
    let env = EnvironmentParams::default();
    for attempt in 0..MAX_LAYOUT_ATTEMPTS {
        let layout_seed = seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut positions = generate_poisson_layout(layout_seed, 10, &env.area, &altitudes)?;
        positions[9] = Position::new(REFERENCE_GROUND_NODE.0, REFERENCE_GROUND_NODE.1, 0.0)?;
        let nodes = positions
            .iter()
            .enumerate()
            .map(|(i, &position)| NodeSpec {
                id: i as u32 + 1,
                role: if i < 5 { Role::Streamer } else { Role::C2 },
                position,
                tx_power_w: None,
                queue: None,
                video: None,
            })
            .collect();
        let pairs = partner
            .iter()
            .enumerate()
            .map(|(i, &rx)| Pair { tx: i as u32 + 1, rx })
            .collect();
        let s = Scenario {
            seed,
            ground_threshold_m: DEFAULT_GROUND_THRESHOLD_M,
            environment: env.clone(),
            channel: ChannelParams::default(),
            queue: QueueParams::default(),
            video: VideoParams::default(),
            nodes,
            pairs,
        };
        match s.validate() {
            Ok(()) => return Ok(s),
            Err(Error::Validation(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Config(format!(
        "no layout with all links >= d0 after {MAX_LAYOUT_ATTEMPTS} attempts"
    )))
}
