//! Threshold and encoder controllers: DTC for throughput, DVTC and DVEC
//! for PSNR, and their alternation JDVT-EC.

use super::lcs::lcs;
use super::{
    max_abs_diff, max_abs_diff_opt, IterationRecord, OptimizationTrace, OptimizerConfig, PolicyVector, Stage,
    E_CAP_KBPS, E_FLOOR_MARGIN_KBPS,
};
use crate::error::Result;
use crate::interference::InterferenceLaw;
use crate::network::{NetworkModel, Objective};

/// Cells in the grid used to seed each threshold search.
const SEED_GRID: usize = 8;

fn default_encodings(model: &NetworkModel) -> Vec<Option<f64>> {
    (0..model.len()).map(|n| model.default_encoding(n)).collect()
}

fn objectives_of(model: &NetworkModel, objective: Objective, betas: &[f64], enc: &[Option<f64>]) -> Result<Vec<f64>> {
    Ok(model
        .evaluate_all(betas, enc)?
        .iter()
        .map(|m| match (objective, m.psnr_db) {
            (Objective::Psnr, Some(p)) => p,
            _ => m.r_pkts,
        })
        .collect())
}

/// Each session maximizes its own objective as if no one else transmits,
/// starting from its largest stable threshold.
pub fn selfish_thresholds(
    model: &NetworkModel,
    objective: Objective,
    encodings: &[Option<f64>],
    cfg: &OptimizerConfig,
) -> Result<Vec<f64>> {
    cfg.validate(model.len())?;
    let mut betas = vec![0.0; model.len()];
    for n in cfg.update_order(model.len()) {
        let lambda = model.lambda(n, encodings[n]);
        let bmax = model.beta_max(n, lambda)?;
        let out = lcs(
            |b| model.objective_value(n, objective, b, lambda, &InterferenceLaw::Absent),
            bmax,
            &cfg.steps.beta,
            0.0,
            Some(bmax),
        )?;
        betas[n] = out.x;
    }
    Ok(betas)
}

/// Gauss–Seidel rounds: each session in turn line-searches its own
/// threshold against the latest thresholds of all others.
#[allow(clippy::too_many_arguments)]
fn threshold_rounds(
    model: &NetworkModel,
    objective: Objective,
    betas: &mut [f64],
    encodings: &[Option<f64>],
    cfg: &OptimizerConfig,
    outer: usize,
    trace: &mut OptimizationTrace,
) -> Result<bool> {
    let order = cfg.update_order(model.len());
    for i in 0..cfg.max_iter {
        let previous = betas.to_vec();
        for &n in &order {
            let lambda = model.lambda(n, encodings[n]);
            let bmax = model.beta_max(n, lambda)?;
            let law = model.interference_law(n, betas)?;
            // Thresholds inherited from the selfish phase can sit where every
            // packet is lost and the objective is flat at zero. Seed the
            // search from the best of the current value and a coarse grid.
            let mut start = betas[n].clamp(0.0, bmax);
            let mut best = model.objective_value(n, objective, start, lambda, &law)?;
            for k in 1..SEED_GRID {
                let b = bmax * k as f64 / SEED_GRID as f64;
                let v = model.objective_value(n, objective, b, lambda, &law)?;
                if v > best {
                    (start, best) = (b, v);
                }
            }
            let out = lcs(
                |b| model.objective_value(n, objective, b, lambda, &law),
                start,
                &cfg.steps.beta,
                0.0,
                Some(bmax),
            )?;
            betas[n] = out.x;
        }
        let delta = max_abs_diff(&previous, betas);
        trace.records.push(IterationRecord {
            stage: Stage::Thresholds,
            outer,
            iteration: i,
            objectives: objectives_of(model, objective, betas, encodings)?,
            betas: betas.to_vec(),
            encodings: encodings.to_vec(),
            delta_beta: delta,
            delta_e_kbps: 0.0,
        });
        trace.iterations += 1;
        if delta < cfg.epsilon_beta {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Distributed transmission control: selfish start, then consensus rounds
/// on throughput with the configured packet rates.
pub fn dtc(model: &NetworkModel, cfg: &OptimizerConfig) -> Result<(PolicyVector, OptimizationTrace)> {
    let encodings = default_encodings(model);
    let mut trace = OptimizationTrace::new("dtc");
    let mut betas = selfish_thresholds(model, Objective::Throughput, &encodings, cfg)?;
    trace.records.push(IterationRecord {
        stage: Stage::Selfish,
        outer: 0,
        iteration: 0,
        objectives: objectives_of(model, Objective::Throughput, &betas, &encodings)?,
        betas: betas.clone(),
        encodings: encodings.clone(),
        delta_beta: f64::NAN,
        delta_e_kbps: 0.0,
    });
    trace.converged = threshold_rounds(model, Objective::Throughput, &mut betas, &encodings, cfg, 0, &mut trace)?;
    Ok((PolicyVector { betas, encodings }, trace))
}

/// Threshold consensus on PSNR (throughput for C2 sessions) with encoding
/// rates held fixed.
pub fn dvtc(
    model: &NetworkModel,
    encodings: &[Option<f64>],
    betas0: &[f64],
    cfg: &OptimizerConfig,
    outer: usize,
    trace: &mut OptimizationTrace,
) -> Result<(Vec<f64>, bool)> {
    cfg.validate(model.len())?;
    let mut betas = betas0.to_vec();
    let converged = threshold_rounds(model, Objective::Psnr, &mut betas, encodings, cfg, outer, trace)?;
    Ok((betas, converged))
}

/// One pass in which every streamer line-searches its packet rate with
/// thresholds held fixed. The rate stays above `E0` by a margin, at or
/// below the cap, and below the service rate of its threshold.
pub fn dvec(
    model: &NetworkModel,
    betas: &[f64],
    encodings0: &[Option<f64>],
    cfg: &OptimizerConfig,
    outer: usize,
    trace: &mut OptimizationTrace,
) -> Result<Vec<Option<f64>>> {
    cfg.validate(model.len())?;
    let mut encodings = encodings0.to_vec();
    for n in cfg.update_order(model.len()) {
        let (Some(video), Some(e0)) = (model.session(n).video.as_ref(), encodings0[n]) else {
            continue;
        };
        let law = model.interference_law(n, betas)?;
        let service = model.mu(n, betas[n]) / model.session(n).queue.t_slot_s;
        let lower = video.lambda_for(video.e0_kbps + E_FLOOR_MARGIN_KBPS);
        let upper = video.lambda_for(E_CAP_KBPS).min(service);
        if upper <= lower {
            continue;
        }
        let out = lcs(
            |lambda| model.objective_value(n, Objective::Psnr, betas[n], lambda, &law),
            video.lambda_for(e0).clamp(lower, upper),
            &cfg.steps.lambda,
            lower,
            Some(upper),
        )?;
        encodings[n] = Some(video.encoding_for(out.x));
    }
    trace.records.push(IterationRecord {
        stage: Stage::Encodings,
        outer,
        iteration: 0,
        objectives: objectives_of(model, Objective::Psnr, betas, &encodings)?,
        betas: betas.to_vec(),
        encodings: encodings.clone(),
        delta_beta: 0.0,
        delta_e_kbps: max_abs_diff_opt(encodings0, &encodings),
    });
    Ok(encodings)
}

/// Joint control: alternate threshold consensus and encoder updates until
/// neither moves by more than its tolerance.
pub fn jdvt_ec(
    model: &NetworkModel,
    start: &PolicyVector,
    cfg: &OptimizerConfig,
) -> Result<(PolicyVector, OptimizationTrace)> {
    cfg.validate(model.len())?;
    let mut trace = OptimizationTrace::new("jdvt-ec");
    let mut betas = start.betas.clone();
    let mut encodings = start.encodings.clone();
    for ctr in 0..cfg.max_iter {
        let (prev_b, prev_e) = (betas.clone(), encodings.clone());
        let (b, _) = dvtc(model, &encodings, &betas, cfg, ctr, &mut trace)?;
        betas = b;
        encodings = dvec(model, &betas, &encodings, cfg, ctr, &mut trace)?;
        let (db, de) = (max_abs_diff(&prev_b, &betas), max_abs_diff_opt(&prev_e, &encodings));
        if db < cfg.epsilon_beta && de < cfg.epsilon_e_kbps {
            trace.converged = true;
            break;
        }
    }
    Ok((PolicyVector { betas, encodings }, trace))
}

/// Default starting point for the joint controller: configured encoding
/// rates and selfish PSNR thresholds.
pub fn joint_start(model: &NetworkModel, cfg: &OptimizerConfig) -> Result<PolicyVector> {
    let encodings = default_encodings(model);
    let betas = selfish_thresholds(model, Objective::Psnr, &encodings, cfg)?;
    Ok(PolicyVector { betas, encodings })
}
