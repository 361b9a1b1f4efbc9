//! Evaluation of every session of a scenario under a policy: the
//! cross-layer chain from fading threshold and encoding rate to losses,
//! throughput and PSNR.

use std::collections::HashMap;
use std::sync::RwLock;

use serde::Serialize;

use crate::channel::{beta_upper_bound, mu_unchecked, path_loss_amplitude, ChannelParams, FadingModel};
use crate::error::{Error, Result};
use crate::geometry::{classify_link, link_geometry, los_probability, LinkClass, LinkGeometry, Position};
use crate::interference::{interference_moments, p_err, InterferenceLaw, InterfererView, VictimLink};
use crate::numerics::QuadratureSpec;
use crate::objectives::{distortion, psnr, throughput, LossBreakdown, VideoParams};
use crate::queueing::{p_dly, p_ov, QueueParams};
use crate::scenario::{Role, Scenario};

const CACHE_LIMIT: usize = 200_000;

/// Geometry and channel of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkState {
    pub class: LinkClass,
    pub geometry: LinkGeometry,
    pub p_los: f64,
    /// Squared large-scale amplitude `ĥ²`.
    pub path_gain: f64,
    pub model: FadingModel,
}

impl LinkState {
    pub fn new(tx: &Position, rx: &Position, scenario: &Scenario) -> Result<Self> {
        let env = &scenario.environment;
        let geometry = link_geometry(tx, rx)?;
        let class = classify_link(tx.z, rx.z, scenario.ground_threshold_m);
        let p_los = los_probability(tx, rx, env)?.probability;
        let amplitude = path_loss_amplitude(geometry.d, p_los, env)?;
        Ok(Self {
            class,
            geometry,
            p_los,
            path_gain: amplitude * amplitude,
            model: scenario.channel.fading.model(class, p_los, env)?,
        })
    }

    /// Rician links count as line-of-sight, Rayleigh ones as not.
    pub fn is_los(&self) -> bool {
        matches!(self.model, FadingModel::Rician { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Session {
    pub tx: u32,
    pub rx: u32,
    pub role: Role,
    pub link: LinkState,
    pub tx_power_w: f64,
    pub queue: QueueParams,
    pub video: Option<VideoParams>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct InterferenceLink {
    session: usize,
    tx_power_w: f64,
    link: LinkState,
}

/// What a node maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Throughput,
    /// PSNR for streamers; C2 nodes keep throughput.
    Psnr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SessionMetrics {
    pub node_id: u32,
    pub beta: f64,
    pub beta_max: f64,
    pub lambda: f64,
    pub e_kbps: Option<f64>,
    pub mu: f64,
    pub losses: LossBreakdown,
    pub r_pkts: f64,
    pub psnr_db: Option<f64>,
    /// False when `beta` exceeds the stable range for `lambda`; losses are
    /// then saturated.
    pub feasible: bool,
}

pub struct NetworkModel {
    sessions: Vec<Session>,
    interferers: Vec<Vec<InterferenceLink>>,
    channel: ChannelParams,
    quadrature: QuadratureSpec,
    cache: RwLock<HashMap<(usize, Vec<u64>), InterferenceLaw>>,
}

impl std::fmt::Debug for NetworkModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NetworkModel")
            .field("sessions", &self.sessions)
            .field("channel", &self.channel)
            .finish_non_exhaustive()
    }
}

impl NetworkModel {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let mut sessions = Vec::with_capacity(scenario.pairs.len());
        for p in &scenario.pairs {
            let tx = scenario.node(p.tx)?;
            let rx = scenario.node(p.rx)?;
            sessions.push(Session {
                tx: p.tx,
                rx: p.rx,
                role: tx.role,
                link: LinkState::new(&tx.position, &rx.position, scenario)?,
                tx_power_w: scenario.tx_power_of(tx),
                queue: scenario.queue_of(tx),
                video: scenario.video_of(tx),
            });
        }
        let mut interferers = Vec::with_capacity(sessions.len());
        for victim in &sessions {
            let rx = scenario.node(victim.rx)?.position;
            let mut list = Vec::new();
            for (m, other) in sessions.iter().enumerate() {
                // A node cannot transmit and receive at once.
                if other.tx == victim.tx || other.tx == victim.rx {
                    continue;
                }
                let tx = scenario.node(other.tx)?.position;
                list.push(InterferenceLink {
                    session: m,
                    tx_power_w: other.tx_power_w,
                    link: LinkState::new(&tx, &rx, scenario)?,
                });
            }
            interferers.push(list);
        }
        Ok(Self {
            sessions,
            interferers,
            channel: scenario.channel.clone(),
            quadrature: QuadratureSpec::default(),
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }

    pub fn sessions(&self) -> &[Session] {
        &self.sessions
    }

    pub fn session(&self, n: usize) -> &Session {
        &self.sessions[n]
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.channel
    }

    pub fn is_streamer(&self, n: usize) -> bool {
        self.sessions[n].video.is_some()
    }

    /// Packet rate of session `n`: `E/L` for a streamer with an encoding
    /// rate, otherwise the configured arrival rate.
    pub fn lambda(&self, n: usize, e_kbps: Option<f64>) -> f64 {
        match (&self.sessions[n].video, e_kbps) {
            (Some(v), Some(e)) => v.lambda_for(e),
            _ => self.sessions[n].queue.lambda_pkts_per_s,
        }
    }

    /// Encoding rate implied by the configured arrival rate.
    pub fn default_encoding(&self, n: usize) -> Option<f64> {
        let s = &self.sessions[n];
        s.video.as_ref().map(|v| v.encoding_for(s.queue.lambda_pkts_per_s))
    }

    pub fn beta_max(&self, n: usize, lambda: f64) -> Result<f64> {
        let s = &self.sessions[n];
        beta_upper_bound(&s.link.model, lambda, s.queue.t_slot_s, self.channel.num_subchannels)
    }

    pub fn mu(&self, n: usize, beta: f64) -> f64 {
        mu_unchecked(&self.sessions[n].link.model, beta, self.channel.num_subchannels)
    }

    /// Interference law at session `n`'s receiver given everyone's
    /// thresholds (only the other sessions' entries are read).
    pub fn interference_law(&self, n: usize, betas: &[f64]) -> Result<InterferenceLaw> {
        let key = (
            n,
            self.interferers[n]
                .iter()
                .map(|i| betas[i.session].to_bits())
                .collect::<Vec<_>>(),
        );
        if let Some(law) = self.cache.read().expect("cache lock poisoned").get(&key) {
            return Ok(*law);
        }
        let views: Vec<InterfererView> = self.interferers[n]
            .iter()
            .map(|i| {
                let beta = betas[i.session];
                InterfererView {
                    tx_power_w: i.tx_power_w,
                    path_gain: i.link.path_gain,
                    model: i.link.model,
                    beta,
                    mu: mu_unchecked(&i.link.model, beta, self.channel.num_subchannels),
                }
            })
            .collect();
        let moments = interference_moments(&views, self.channel.num_subchannels, &self.quadrature)?;
        let law = InterferenceLaw::from_moments(&moments)?;
        let mut cache = self.cache.write().expect("cache lock poisoned");
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, law);
        Ok(law)
    }

    /// Metrics of session `n` at threshold `beta` and packet rate `lambda`
    /// under a fixed interference law.
    pub fn evaluate(&self, n: usize, beta: f64, lambda: f64, law: &InterferenceLaw) -> Result<SessionMetrics> {
        let s = &self.sessions[n];
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::domain("evaluate", format!("beta must be >= 0, got {beta}")));
        }
        let queue = s.queue.with_lambda(lambda);
        let beta_max = self.beta_max(n, lambda)?;
        let mu = self.mu(n, beta);
        let victim = VictimLink {
            tx_power_w: s.tx_power_w,
            path_gain: s.link.path_gain,
            model: s.link.model,
        };
        let p_e = p_err(
            &victim,
            beta,
            self.channel.sinr_threshold,
            self.channel.noise_w(),
            law,
            &self.quadrature,
        )?;
        let (losses, feasible) = match (p_dly(mu, &queue), p_ov(mu, &queue)) {
            (Ok(d), Ok(o)) => (LossBreakdown::new(d, o, p_e), true),
            (Err(Error::InfeasibleThreshold { .. }) | Err(Error::Domain { .. }), _)
            | (_, Err(Error::Overload { .. }) | Err(Error::Domain { .. })) => {
                (LossBreakdown::new(1.0, 1.0, p_e), false)
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        let e_kbps = s.video.as_ref().map(|v| v.encoding_for(lambda));
        let psnr_db = match (&s.video, e_kbps) {
            (Some(v), Some(e)) => Some(psnr(distortion(e, losses.p_lss, v)?, v.bit_depth)?),
            _ => None,
        };
        Ok(SessionMetrics {
            node_id: s.tx,
            beta,
            beta_max,
            lambda,
            e_kbps,
            mu,
            losses,
            r_pkts: throughput(lambda, losses.p_lss),
            psnr_db,
            feasible,
        })
    }

    pub fn objective_value(
        &self,
        n: usize,
        objective: Objective,
        beta: f64,
        lambda: f64,
        law: &InterferenceLaw,
    ) -> Result<f64> {
        let m = self.evaluate(n, beta, lambda, law)?;
        Ok(match (objective, m.psnr_db) {
            (Objective::Psnr, Some(p)) => p,
            _ => m.r_pkts,
        })
    }

    /// Metrics of every session with thresholds `betas` and encoding rates
    /// `encodings` (`None` for C2 sessions).
    pub fn evaluate_all(&self, betas: &[f64], encodings: &[Option<f64>]) -> Result<Vec<SessionMetrics>> {
        if betas.len() != self.len() || encodings.len() != self.len() {
            return Err(Error::Config(format!(
                "policy has {} thresholds and {} rates for {} sessions",
                betas.len(),
                encodings.len(),
                self.len()
            )));
        }
        (0..self.len())
            .map(|n| {
                let law = self.interference_law(n, betas)?;
                self.evaluate(n, betas[n], self.lambda(n, encodings[n]), &law)
            })
            .collect()
    }
}
