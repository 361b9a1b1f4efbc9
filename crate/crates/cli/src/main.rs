use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uavnet::experiments::{
    average_psnr_map, evaluate_policy, heatmap, optimize, write_json, Algorithm, AvgPsnrGrid, ResultTable, SweepParam,
};
use uavnet::optimizers::{BaselineKind, OptimizerConfig};
use uavnet::scenario::{load_scenario, reference_scenario, save_scenario, Scenario};
use uavnet::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "uavnet",
    version,
    about = "Threshold and encoding-rate optimization for UAV video networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the seed stored in the scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Convergence tolerance on thresholds.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Iteration limit per consensus stage and for the joint loop.
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Throughput-optimal thresholds (DTC).
    OptimizeThroughput(Common),
    /// Joint PSNR-optimal thresholds and encoding rates (JDVT-EC).
    OptimizePsnr {
        #[command(flatten)]
        common: Common,
        /// Also average the optimized PSNR of one streamer over distance and
        /// elevation grids.
        #[arg(long)]
        avg_psnr: bool,
        /// Streamer moved by --avg-psnr.
        #[arg(long, default_value_t = 1)]
        node: u32,
        /// Distances for --avg-psnr, metres.
        #[arg(long, value_delimiter = ',')]
        distances: Option<Vec<f64>>,
        /// Elevation angles for --avg-psnr, degrees.
        #[arg(long, value_delimiter = ',')]
        elevations: Option<Vec<f64>>,
    },
    /// Evaluate reference policies; all of them when none is named.
    EvalPolicy {
        #[command(flatten)]
        common: Common,
        /// random, aggressive, selfish, fixed, conservative, enc_low, enc_med or enc_high.
        policy: Option<String>,
    },
    /// Re-optimize for each value of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// gamma_th, subchannels or sensitivity.
        #[arg(long)]
        sweep_param: String,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', required = true)]
        sweep_values: Vec<f64>,
        /// dtc or jdvt-ec; sensitivity sweeps default to jdvt-ec.
        #[arg(long)]
        algorithm: Option<String>,
    },
    /// Move one node over a grid at fixed altitude and re-optimize per cell.
    Heatmap {
        #[command(flatten)]
        common: Common,
        /// Grid size as COLUMNSxROWS.
        #[arg(long, default_value = "5x5")]
        grid: String,
        #[arg(long, default_value_t = 50.0)]
        altitude: f64,
        #[arg(long, default_value_t = 1)]
        node: u32,
    },
    /// Write the ten-node reference scenario for a seed.
    ReferenceScenario {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Model(Error),
    /// Results were written but some optimizer hit its iteration limit.
    NotConverged,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::NotConverged) => {
            eprintln!("warning: optimizer did not converge within the iteration limit; partial results written");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
        Err(Failure::Model(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) | Error::Parse(_) | Error::Config(_) => ExitCode::from(EXIT_VALIDATION),
                _ => ExitCode::from(EXIT_FAILURE),
            }
        }
    }
}

struct Context {
    scenario: Scenario,
    cfg: OptimizerConfig,
    out: PathBuf,
    timing: BTreeMap<String, f64>,
}

impl Context {
    fn new(common: &Common) -> Result<Self, Error> {
        let mut scenario = load_scenario(&common.scenario)?;
        if let Some(seed) = common.seed {
            scenario.seed = seed;
        }
        let mut cfg = OptimizerConfig::default();
        if let Some(eps) = common.epsilon {
            cfg.epsilon_beta = eps;
        }
        if let Some(n) = common.max_iter {
            cfg.max_iter = n;
        }
        cfg.validate(scenario.pairs.len())?;
        std::fs::create_dir_all(&common.out)?;
        Ok(Self {
            scenario,
            cfg,
            out: common.out.clone(),
            timing: BTreeMap::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_table(&mut self, stem: &str, table: &ResultTable) -> Result<(), Error> {
        table.write_csv(self.path(&format!("{stem}.csv")))?;
        write_json(table, self.path(&format!("{stem}.json")))?;
        self.timing.insert(stem.to_string(), table.metadata.wall_time_s);
        eprintln!(
            "{stem}: {} ({} iterations, converged: {}, {:.3} s)",
            table.metadata.algorithm, table.metadata.iterations, table.metadata.converged, table.metadata.wall_time_s
        );
        Ok(())
    }

    /// Wall times are kept apart so that every other output file is
    /// reproducible byte for byte.
    fn finish(&self) -> Result<(), Error> {
        write_json(&self.timing, self.path("timing.json"))
    }
}

fn converged(flag: bool) -> Result<(), Failure> {
    if flag {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::OptimizeThroughput(common) => {
            let mut ctx = Context::new(&common)?;
            let t = optimize(&ctx.scenario, Algorithm::Dtc, &ctx.cfg)?;
            ctx.write_table("dtc", &t)?;
            ctx.finish()?;
            converged(t.metadata.converged)
        }
        Command::OptimizePsnr {
            common,
            avg_psnr,
            node,
            distances,
            elevations,
        } => {
            let mut ctx = Context::new(&common)?;
            let t = optimize(&ctx.scenario, Algorithm::JdvtEc, &ctx.cfg)?;
            ctx.write_table("jdvt-ec", &t)?;
            let mut ok = t.metadata.converged;
            if avg_psnr {
                let defaults = AvgPsnrGrid::default();
                let grid = AvgPsnrGrid {
                    distances_m: distances.unwrap_or(defaults.distances_m),
                    elevations_deg: elevations.unwrap_or(defaults.elevations_deg),
                };
                let started = std::time::Instant::now();
                let report = average_psnr_map(&ctx.scenario, node, &grid, &ctx.cfg)?;
                report.write_csv(ctx.path("avg_psnr.csv"))?;
                write_json(&report, ctx.path("avg_psnr.json"))?;
                ctx.timing.insert("avg_psnr".into(), started.elapsed().as_secs_f64());
                eprintln!("average PSNR of node {node}: {:.3} dB", report.average_psnr_db);
                ok &= report.converged;
            }
            ctx.finish()?;
            converged(ok)
        }
        Command::EvalPolicy { common, policy } => {
            let mut ctx = Context::new(&common)?;
            let kinds: Vec<BaselineKind> = match policy {
                Some(name) => vec![name.parse()?],
                None => BaselineKind::THRESHOLD_KINDS
                    .iter()
                    .chain(BaselineKind::ENCODING_KINDS.iter())
                    .copied()
                    .collect(),
            };
            for kind in kinds {
                let t = evaluate_policy(&ctx.scenario, kind, &ctx.cfg)?;
                ctx.write_table(kind.name(), &t)?;
            }
            ctx.finish()?;
            Ok(())
        }
        Command::Sweep {
            common,
            sweep_param,
            sweep_values,
            algorithm,
        } => {
            let mut ctx = Context::new(&common)?;
            let param: SweepParam = sweep_param.parse()?;
            let algorithm: Algorithm = match algorithm {
                Some(a) => a.parse()?,
                None if param == SweepParam::Sensitivity => Algorithm::JdvtEc,
                None => Algorithm::Dtc,
            };
            let result = uavnet::experiments::sweep(&ctx.scenario, param, &sweep_values, algorithm, &ctx.cfg)?;
            for p in &result.points {
                ctx.write_table(&format!("sweep_{}_{}", param.name(), p.value), &p.table)?;
            }
            write_json(&result, ctx.path(&format!("sweep_{}.json", param.name())))?;
            ctx.finish()?;
            converged(result.converged())
        }
        Command::Heatmap {
            common,
            grid,
            altitude,
            node,
        } => {
            let mut ctx = Context::new(&common)?;
            let (cols, rows) = parse_grid(&grid)?;
            let started = std::time::Instant::now();
            let map = heatmap(&ctx.scenario, node, cols, rows, altitude, &ctx.cfg)?;
            map.write_csv(ctx.path("heatmap.csv"))?;
            write_json(&map, ctx.path("heatmap.json"))?;
            ctx.timing.insert("heatmap".into(), started.elapsed().as_secs_f64());
            ctx.finish()?;
            converged(map.converged)
        }
        Command::ReferenceScenario { seed, out } => {
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(Error::from)?;
            }
            save_scenario(&reference_scenario(seed)?, Path::new(&out))?;
            Ok(())
        }
    }
}

fn parse_grid(text: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::Config(format!("grid must look like 5x5, got '{text}'"));
    let (c, r) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let (c, r) = (
        c.trim().parse().map_err(|_| bad())?,
        r.trim().parse().map_err(|_| bad())?,
    );
    if c == 0 || r == 0 {
        return Err(bad());
    }
    Ok((c, r))
}
