use uavnet::interference::InterferenceLaw;
use uavnet::network::{NetworkModel, Objective};
use uavnet::optimizers::{
    dtc, dvec, dvtc, jdvt_ec, joint_start, lcs, selfish_thresholds, OptimizationTrace, OptimizerConfig,
};
use uavnet::scenario::{parse_scenario, reference_scenario, Scenario};

fn scenario(text: &str) -> Scenario {
    parse_scenario(text).unwrap()
}

fn trace() -> OptimizationTrace {
    OptimizationTrace {
        algorithm: "test".into(),
        records: Vec::new(),
        converged: false,
        iterations: 0,
    }
}

const SINGLE_STREAMER: &str = r#"
[[nodes]]
id = 1
role = "streamer"
position = { x = 10.0, y = 20.0, z = 50.0 }

[[nodes]]
id = 2
role = "c2"
position = { x = -15.0, y = -30.0, z = 0.0 }

[[pairs]]
tx = 1
rx = 2
"#;

const MIRRORED_PAIRS: &str = r#"
[[nodes]]
id = 1
role = "c2"
position = { x = -20.0, y = 30.0, z = 50.0 }

[[nodes]]
id = 2
role = "c2"
position = { x = 20.0, y = 30.0, z = 50.0 }

[[nodes]]
id = 3
role = "c2"
position = { x = -25.0, y = -30.0, z = 0.0 }

[[nodes]]
id = 4
role = "c2"
position = { x = 25.0, y = -30.0, z = 0.0 }

[[pairs]]
tx = 1
rx = 3

[[pairs]]
tx = 2
rx = 4
"#;

#[test]
fn lone_session_keeps_its_selfish_threshold() {
    let m = NetworkModel::new(&scenario(SINGLE_STREAMER)).unwrap();
    let cfg = OptimizerConfig::default();
    let selfish = selfish_thresholds(&m, Objective::Throughput, &[m.default_encoding(0)], &cfg).unwrap();
    let (p, trace) = dtc(&m, &cfg).unwrap();
    assert!(trace.converged);
    assert_eq!(p.betas, selfish);
}

#[test]
fn lone_streamer_threshold_matches_a_direct_search() {
    let m = NetworkModel::new(&scenario(SINGLE_STREAMER)).unwrap();
    let cfg = OptimizerConfig::default();
    let enc = vec![m.default_encoding(0)];
    let lambda = m.lambda(0, enc[0]);
    let bmax = m.beta_max(0, lambda).unwrap();
    let direct = lcs(
        |b| m.objective_value(0, Objective::Psnr, b, lambda, &InterferenceLaw::Absent),
        bmax,
        &cfg.steps.beta,
        0.0,
        Some(bmax),
    )
    .unwrap();
    let (betas, converged) = dvtc(&m, &enc, &[direct.x], &cfg, 0, &mut trace()).unwrap();
    assert!(converged);
    assert!((betas[0] - direct.x).abs() <= cfg.steps.beta.accuracy);
}

#[test]
fn mirrored_sessions_get_matching_thresholds() {
    let m = NetworkModel::new(&scenario(MIRRORED_PAIRS)).unwrap();
    let cfg = OptimizerConfig::default();
    let (p, _) = dtc(&m, &cfg).unwrap();
    assert!(
        (p.betas[0] - p.betas[1]).abs() <= cfg.steps.beta.accuracy,
        "{:?}",
        p.betas
    );
}

#[test]
fn lone_streamer_rate_matches_grid_argmax() {
    let m = NetworkModel::new(&scenario(SINGLE_STREAMER)).unwrap();
    let cfg = OptimizerConfig::default();
    let video = m.session(0).video.clone().unwrap();
    let beta = 0.8 * m.beta_max(0, m.lambda(0, None)).unwrap();
    let enc = dvec(&m, &[beta], &[m.default_encoding(0)], &cfg, 0, &mut trace()).unwrap();
    let service = m.mu(0, beta) / m.session(0).queue.t_slot_s;
    let (lo, hi) = (
        video.lambda_for(video.e0_kbps + 10.0),
        video.lambda_for(456.0).min(service),
    );
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    let steps = 20_000;
    for k in 1..steps {
        let l = lo + (hi - lo) * k as f64 / steps as f64;
        let v = m
            .objective_value(0, Objective::Psnr, beta, l, &InterferenceLaw::Absent)
            .unwrap();
        if v > best.1 {
            best = (l, v);
        }
    }
    let tolerance = cfg.steps.lambda.accuracy * video.pkt_len_kbit;
    assert!(
        (enc[0].unwrap() - video.encoding_for(best.0)).abs() <= tolerance,
        "{enc:?} vs {}",
        video.encoding_for(best.0)
    );
}

#[test]
fn encoder_updates_are_independent() {
    let m = NetworkModel::new(&reference_scenario(5).unwrap()).unwrap();
    let cfg = OptimizerConfig::default();
    let (p, _) = dtc(&m, &cfg).unwrap();
    let together = dvec(&m, &p.betas, &p.encodings, &cfg, 0, &mut trace()).unwrap();
    for n in (0..m.len()).filter(|&n| m.is_streamer(n)) {
        let mut order: Vec<usize> = (0..m.len()).collect();
        order.swap(0, n);
        let alone = dvec(
            &m,
            &p.betas,
            &p.encodings,
            &OptimizerConfig {
                order: Some(order),
                ..cfg.clone()
            },
            0,
            &mut trace(),
        )
        .unwrap();
        assert_eq!(alone[n], together[n]);
    }
}

#[test]
fn joint_control_stops_at_its_fixed_point() {
    let m = NetworkModel::new(&reference_scenario(2).unwrap()).unwrap();
    let cfg = OptimizerConfig::default();
    let (first, t1) = jdvt_ec(&m, &joint_start(&m, &cfg).unwrap(), &cfg).unwrap();
    assert!(t1.converged);
    let (again, t2) = jdvt_ec(&m, &first, &cfg).unwrap();
    assert!(t2.converged);
    assert_eq!(t2.records.iter().map(|r| r.outer).max(), Some(0));
    assert_eq!(again, first);
    let (betas, _) = dvtc(&m, &first.encodings, &first.betas, &cfg, 0, &mut trace()).unwrap();
    assert_eq!(betas, first.betas);
}

#[test]
fn cooperation_does_not_lower_thresholds_below_selfish() {
    for seed in 0..4 {
        let m = NetworkModel::new(&reference_scenario(seed).unwrap()).unwrap();
        let cfg = OptimizerConfig::default();
        let enc: Vec<Option<f64>> = (0..m.len()).map(|n| m.default_encoding(n)).collect();
        let selfish = selfish_thresholds(&m, Objective::Throughput, &enc, &cfg).unwrap();
        let (p, _) = dtc(&m, &cfg).unwrap();
        for (n, (s, b)) in selfish.iter().zip(&p.betas).enumerate() {
            assert!(s <= b, "seed {seed} node {}", n + 1);
        }
    }
}

#[test]
fn each_update_never_hurts_the_updating_session() {
    let m = NetworkModel::new(&reference_scenario(7).unwrap()).unwrap();
    let cfg = OptimizerConfig::default();
    let enc: Vec<Option<f64>> = (0..m.len()).map(|n| m.default_encoding(n)).collect();
    let selfish = selfish_thresholds(&m, Objective::Throughput, &enc, &cfg).unwrap();
    for n in 0..m.len() {
        // One round with `n` first: its update sees everyone else still at
        // their selfish thresholds.
        let first = OptimizerConfig {
            max_iter: 1,
            order: Some(std::iter::once(n).chain((0..m.len()).filter(|&k| k != n)).collect()),
            ..cfg.clone()
        };
        let (p, _) = dtc(&m, &first).unwrap();
        let law = m.interference_law(n, &selfish).unwrap();
        let value = |b: f64| {
            m.objective_value(n, Objective::Throughput, b, m.lambda(n, enc[n]), &law)
                .unwrap()
        };
        assert!(value(p.betas[n]) >= value(selfish[n]), "node {}", n + 1);
    }
}
