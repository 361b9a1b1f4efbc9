//! Experiment runners (single optimizations, baseline evaluation, parameter
//! sweeps, position heatmaps, average-PSNR maps) and their CSV/JSON export.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Position;
use crate::network::{NetworkModel, SessionMetrics};
use crate::objectives::average_psnr;
use crate::optimizers::{
    baseline_policy, dtc, jdvt_ec, joint_start, BaselineKind, OptimizationTrace, OptimizerConfig, PolicyVector,
};
use crate::scenario::Scenario;

/// One CSV row; columns follow the field order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub node_id: u32,
    pub beta: f64,
    pub e_kbps: Option<f64>,
    pub p_dly: f64,
    pub p_ov: f64,
    pub p_err: f64,
    pub p_lss: f64,
    pub r_pkts: f64,
    pub psnr_db: Option<f64>,
}

impl ResultRow {
    fn from_metrics(m: &SessionMetrics) -> Result<Self> {
        let l = &m.losses;
        for (name, p) in [
            ("p_dly", l.p_dly),
            ("p_ov", l.p_ov),
            ("p_err", l.p_err),
            ("p_lss", l.p_lss),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!(
                    "node {}: {name} = {p} outside [0, 1]",
                    m.node_id
                )));
            }
        }
        if !(m.r_pkts >= 0.0 && m.r_pkts <= m.lambda * (1.0 + 1e-12)) {
            return Err(Error::Validation(format!(
                "node {}: throughput {} exceeds arrival rate {}",
                m.node_id, m.r_pkts, m.lambda
            )));
        }
        Ok(Self {
            node_id: m.node_id,
            beta: m.beta,
            e_kbps: m.e_kbps,
            p_dly: l.p_dly,
            p_ov: l.p_ov,
            p_err: l.p_err,
            p_lss: l.p_lss,
            r_pkts: m.r_pkts,
            psnr_db: m.psnr_db,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub algorithm: String,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    /// Kept out of the serialized tables so that result files are
    /// reproducible byte for byte.
    #[serde(skip)]
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub metadata: RunMetadata,
    pub policy: PolicyVector,
    pub rows: Vec<ResultRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<OptimizationTrace>,
}

impl ResultTable {
    fn build(
        model: &NetworkModel,
        policy: PolicyVector,
        algorithm: &str,
        seed: u64,
        trace: Option<OptimizationTrace>,
        started: Instant,
    ) -> Result<Self> {
        let rows = model
            .evaluate_all(&policy.betas, &policy.encodings)?
            .iter()
            .map(ResultRow::from_metrics)
            .collect::<Result<Vec<_>>>()?;
        let (iterations, converged) = trace.as_ref().map_or((0, true), |t| (t.iterations, t.converged));
        Ok(Self {
            metadata: RunMetadata {
                algorithm: algorithm.to_string(),
                seed,
                iterations,
                converged,
                wall_time_s: started.elapsed().as_secs_f64(),
            },
            policy,
            rows,
            trace,
        })
    }

    pub fn row(&self, node_id: u32) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.node_id == node_id)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_csv_rows(&self.rows, path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Throughput thresholds.
    Dtc,
    /// Joint PSNR thresholds and encoding rates.
    JdvtEc,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dtc => "dtc",
            Algorithm::JdvtEc => "jdvt-ec",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dtc" => Ok(Algorithm::Dtc),
            "jdvt-ec" | "jdvt_ec" => Ok(Algorithm::JdvtEc),
            _ => Err(Error::Config(format!(
                "unknown algorithm '{s}' (expected dtc or jdvt-ec)"
            ))),
        }
    }
}

pub fn optimize(scenario: &Scenario, algorithm: Algorithm, cfg: &OptimizerConfig) -> Result<ResultTable> {
    let started = Instant::now();
    let model = NetworkModel::new(scenario)?;
    let (policy, trace) = match algorithm {
        Algorithm::Dtc => dtc(&model, cfg)?,
        Algorithm::JdvtEc => jdvt_ec(&model, &joint_start(&model, cfg)?, cfg)?,
    };
    ResultTable::build(&model, policy, algorithm.name(), scenario.seed, Some(trace), started)
}

/// Evaluates a reference policy; random draws use the scenario seed.
pub fn evaluate_policy(scenario: &Scenario, kind: BaselineKind, cfg: &OptimizerConfig) -> Result<ResultTable> {
    let started = Instant::now();
    let model = NetworkModel::new(scenario)?;
    let policy = baseline_policy(kind, &model, scenario.seed, cfg)?;
    ResultTable::build(&model, policy, kind.name(), scenario.seed, None, started)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// SINR threshold (linear).
    GammaTh,
    /// Number of sub-channels.
    Subchannels,
    /// Loss sensitivity of every streamer.
    Sensitivity,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::GammaTh => "gamma_th",
            SweepParam::Subchannels => "subchannels",
            SweepParam::Sensitivity => "sensitivity",
        }
    }

    /// Copy of `scenario` with the parameter set to `value`.
    pub fn apply(self, scenario: &Scenario, value: f64) -> Result<Scenario> {
        let mut s = scenario.clone();
        match self {
            SweepParam::GammaTh => s.channel.sinr_threshold = value,
            SweepParam::Subchannels => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(Error::Config(format!(
                        "sub-channel count must be a positive integer, got {value}"
                    )));
                }
                s.channel.num_subchannels = value as u32;
            }
            SweepParam::Sensitivity => s.set_sensitivity(value),
        }
        s.validate()?;
        Ok(s)
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SweepParam::GammaTh, SweepParam::Subchannels, SweepParam::Sensitivity]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown sweep parameter '{s}' (expected gamma_th, subchannels or sensitivity)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub table: ResultTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: SweepParam,
    pub algorithm: Algorithm,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn converged(&self) -> bool {
        self.points.iter().all(|p| p.table.metadata.converged)
    }
}

/// Re-runs the optimizer once per parameter value.
pub fn sweep(
    scenario: &Scenario,
    parameter: SweepParam,
    values: &[f64],
    algorithm: Algorithm,
    cfg: &OptimizerConfig,
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let points = values
        .iter()
        .map(|&value| {
            let s = parameter.apply(scenario, value)?;
            Ok(SweepPoint {
                value,
                table: optimize(&s, algorithm, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        parameter,
        algorithm,
        points,
    })
}

/// Optimized quantities of the moved node at one grid position. Empty when
/// the position puts some link closer than `d0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub x: f64,
    pub y: f64,
    pub psnr_db: Option<f64>,
    pub beta: Option<f64>,
    pub e_kbps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub node_id: u32,
    pub altitude_m: f64,
    pub columns: usize,
    pub rows: usize,
    pub cells: Vec<HeatmapCell>,
    pub converged: bool,
}

/// Moves `node_id` over the centres of a `columns × rows` grid spanning the
/// deployment area at a fixed altitude and re-runs the joint optimizer in
/// each cell. Cells are ordered by row (y), then column (x).
pub fn heatmap(
    scenario: &Scenario,
    node_id: u32,
    columns: usize,
    rows: usize,
    altitude_m: f64,
    cfg: &OptimizerConfig,
) -> Result<Heatmap> {
    if columns == 0 || rows == 0 {
        return Err(Error::Config(format!("heatmap grid {columns}x{rows} is empty")));
    }
    scenario.node(node_id)?;
    let area = scenario.environment.area;
    let mut cells = Vec::with_capacity(columns * rows);
    let mut converged = true;
    for j in 0..rows {
        for i in 0..columns {
            let x = -area.width_m / 2.0 + (i as f64 + 0.5) * area.width_m / columns as f64;
            let y = -area.height_m / 2.0 + (j as f64 + 0.5) * area.height_m / rows as f64;
            let mut s = scenario.clone();
            s.node_mut(node_id)?.position = Position::new(x, y, altitude_m)?;
            let mut cell = HeatmapCell {
                x,
                y,
                psnr_db: None,
                beta: None,
                e_kbps: None,
            };
            match s.validate() {
                Ok(()) => {
                    let t = optimize(&s, Algorithm::JdvtEc, cfg)?;
                    converged &= t.metadata.converged;
                    let row = t.row(node_id).expect("every node with a session has a row");
                    (cell.psnr_db, cell.beta, cell.e_kbps) = (row.psnr_db, Some(row.beta), row.e_kbps);
                }
                Err(Error::Validation(_)) => {}
                Err(e) => return Err(e),
            }
            cells.push(cell);
        }
    }
    Ok(Heatmap {
        node_id,
        altitude_m,
        columns,
        rows,
        cells,
        converged,
    })
}

impl Heatmap {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_csv_rows(&self.cells, path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvgPsnrGrid {
    pub distances_m: Vec<f64>,
    pub elevations_deg: Vec<f64>,
}

impl Default for AvgPsnrGrid {
    fn default() -> Self {
        Self {
            distances_m: (0..=8).map(|i| 50.0 + 2.5 * i as f64).collect(),
            elevations_deg: (0..=5).map(|i| 60.0 + 3.0 * i as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvgPsnrCell {
    pub distance_m: f64,
    pub elevation_deg: f64,
    pub psnr_db: f64,
    pub beta: f64,
    pub e_kbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvgPsnrReport {
    pub node_id: u32,
    pub grid: AvgPsnrGrid,
    pub cells: Vec<AvgPsnrCell>,
    pub average_psnr_db: f64,
    pub converged: bool,
}

impl AvgPsnrReport {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_csv_rows(&self.cells, path)
    }
}

/// Places streamer `node_id` at each (distance, elevation) from its
/// receiver, keeping the receiver-to-transmitter bearing of the scenario,
/// runs the joint optimizer, and averages the node's optimized PSNR.
pub fn average_psnr_map(
    scenario: &Scenario,
    node_id: u32,
    grid: &AvgPsnrGrid,
    cfg: &OptimizerConfig,
) -> Result<AvgPsnrReport> {
    let tx = scenario.node(node_id)?;
    if scenario.video_of(tx).is_none() {
        return Err(Error::Config(format!("node {node_id} does not stream video")));
    }
    let pair = scenario
        .pairs
        .iter()
        .find(|p| p.tx == node_id)
        .ok_or_else(|| Error::Config(format!("node {node_id} has no session")))?;
    let rx = scenario.node(pair.rx)?.position;
    let (dx, dy) = (tx.position.x - rx.x, tx.position.y - rx.y);
    let bearing = if dx == 0.0 && dy == 0.0 { 0.0 } else { dy.atan2(dx) };

    let mut cells = Vec::with_capacity(grid.distances_m.len() * grid.elevations_deg.len());
    let mut converged = true;
    let avg = average_psnr(&grid.distances_m, &grid.elevations_deg, |d, theta| {
        let (sin, cos) = theta.to_radians().sin_cos();
        let mut s = scenario.clone();
        s.node_mut(node_id)?.position = Position::new(
            rx.x + d * cos * bearing.cos(),
            rx.y + d * cos * bearing.sin(),
            rx.z + d * sin,
        )?;
        s.validate()?;
        let t = optimize(&s, Algorithm::JdvtEc, cfg)?;
        converged &= t.metadata.converged;
        let row = t.row(node_id).expect("streamer has a row");
        let psnr_db = row.psnr_db.expect("streamer rows carry PSNR");
        cells.push(AvgPsnrCell {
            distance_m: d,
            elevation_deg: theta,
            psnr_db,
            beta: row.beta,
            e_kbps: row.e_kbps.expect("streamer rows carry an encoding rate"),
        });
        Ok(psnr_db)
    })?;
    Ok(AvgPsnrReport {
        node_id,
        grid: grid.clone(),
        cells,
        average_psnr_db: avg,
        converged,
    })
}

fn write_csv_rows<T: Serialize>(rows: &[T], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref()).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
