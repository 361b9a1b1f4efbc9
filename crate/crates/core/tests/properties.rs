use proptest::prelude::*;
use uavnet::channel::{beta_upper_bound, transmission_probability, FadingModel};
use uavnet::geometry::{classify_link, los_probability, EnvironmentParams, LinkClass, Position};
use uavnet::interference::{interference_moments, p_err, InterferenceLaw, InterfererView, VictimLink};
use uavnet::network::NetworkModel;
use uavnet::numerics::{bessel_i0, bessel_i1, marcum_q1, QuadratureSpec};
use uavnet::objectives::{distortion, psnr, VideoParams};
use uavnet::optimizers::{dtc, jdvt_ec, joint_start, lcs, OptimizerConfig, StepParams};
use uavnet::queueing::{overflow_from_load, p_dly, QueueParams};
use uavnet::scenario::{parse_scenario, reference_scenario, scenario_to_toml};

fn model_for(b: f64) -> FadingModel {
    if b == 0.0 {
        FadingModel::Rayleigh
    } else {
        FadingModel::Rician { b }
    }
}

fn interferer(b: f64, gain: f64, beta: f64) -> InterfererView {
    let model = model_for(b);
    InterfererView {
        tx_power_w: 0.2,
        path_gain: gain,
        model,
        beta,
        mu: transmission_probability(&model, beta, 14).unwrap(),
    }
}

proptest! {
    #[test]
    fn marcum_is_a_monotone_probability(b in 0.0..6.0f64, beta in 0.0..8.0f64, db in 0.01..1.0f64, dbeta in 0.01..1.0f64) {
        let q = marcum_q1(b, beta).unwrap();
        prop_assert!((0.0..=1.0).contains(&q));
        let lower_tail = marcum_q1(b, beta + dbeta).unwrap();
        prop_assert!(lower_tail < q || q < 1e-300);
        prop_assert!(marcum_q1(b + db, beta).unwrap() >= q);
    }

    #[test]
    fn bessel_order_zero_dominates_order_one(x in 0.0..50.0f64) {
        let (i0, i1) = (bessel_i0(x).unwrap(), bessel_i1(x).unwrap());
        prop_assert!(i0 >= i1 && i1 >= 0.0);
    }

    #[test]
    fn fading_cdf_and_tail_sum_to_one(b in 0.0..6.0f64, beta in 0.0..10.0f64) {
        let m = model_for(b);
        prop_assert!((m.cdf(beta) + m.tail(beta) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn los_probability_is_a_probability(
        x in -50.0..50.0f64, y in -50.0..50.0f64, z_tx in 0.0..120.0f64, z_rx in 0.0..120.0f64,
    ) {
        let env = EnvironmentParams::default();
        let tx = Position::new(x, y, z_tx).unwrap();
        let rx = Position::new(-x / 2.0, 17.0, z_rx).unwrap();
        prop_assume!((tx.x - rx.x).hypot(tx.y - rx.y).hypot(z_tx - z_rx) > 1e-6);
        let p = los_probability(&tx, &rx, &env).unwrap().probability;
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn los_probability_grows_with_elevation(d in 20.0..150.0f64, theta in 1.0..85.0f64, dtheta in 0.5..4.0f64) {
        let env = EnvironmentParams::default();
        let rx = Position::new(0.0, 0.0, 0.0).unwrap();
        let at = |deg: f64| {
            let (s, c) = deg.to_radians().sin_cos();
            los_probability(&Position::new(d * c, 0.0, d * s).unwrap(), &rx, &env).unwrap().probability
        };
        let hi = (theta + dtheta).min(89.0);
        prop_assert!(at(hi) >= at(theta) - 1e-12);
    }

    #[test]
    fn link_class_swaps_with_direction(a in 0.0..100.0f64, b in 0.0..100.0f64) {
        let swapped = match classify_link(a, b, 5.0) {
            LinkClass::G2A => LinkClass::A2G,
            LinkClass::A2G => LinkClass::G2A,
            other => other,
        };
        prop_assert_eq!(classify_link(b, a, 5.0), swapped);
    }

    #[test]
    fn transmission_probability_monotone(b in 0.0..6.0f64, beta in 0.0..8.0f64, step in 0.01..1.0f64, f in 1u32..30) {
        let m = model_for(b);
        let mu = transmission_probability(&m, beta, f).unwrap();
        prop_assert!(transmission_probability(&m, beta + step, f).unwrap() <= mu);
        prop_assert!(transmission_probability(&m, beta, f + 1).unwrap() >= mu);
    }

    #[test]
    fn rician_links_allow_higher_thresholds(b in 0.5..6.0f64, lambda in 10.0..190.0f64) {
        let los = beta_upper_bound(&FadingModel::Rician { b }, lambda, 0.005, 14).unwrap();
        let nlos = beta_upper_bound(&FadingModel::Rayleigh, lambda, 0.005, 14).unwrap();
        prop_assert!(los > nlos);
    }

    #[test]
    fn delay_loss_rises_with_threshold(b in 0.0..5.0f64, frac in 0.0..0.98f64, step in 0.001..0.5f64) {
        let m = model_for(b);
        let q = QueueParams::default();
        let bmax = beta_upper_bound(&m, q.lambda_pkts_per_s, q.t_slot_s, 14).unwrap();
        let b1 = frac * bmax;
        let b2 = (b1 + step).min(bmax);
        let at = |beta: f64| p_dly(transmission_probability(&m, beta, 14).unwrap(), &q).unwrap();
        prop_assert!(at(b2) >= at(b1));
    }

    #[test]
    fn overflow_falls_with_buffer_and_rises_with_load(rho in 0.01..1.0f64, b in 1.0..200.0f64, extra in 0.5..50.0f64, drho in 0.0..0.3f64) {
        let v = overflow_from_load(rho, b).unwrap();
        prop_assert!(overflow_from_load(rho, b + extra).unwrap() <= v);
        let r2 = (rho + drho).min(1.0);
        prop_assert!(overflow_from_load(r2, b).unwrap() >= v - 1e-15);
    }

    #[test]
    fn outage_rises_with_sinr_threshold(g1 in 1.0..20.0f64, dg in 0.1..10.0f64, beta in 0.5..4.0f64) {
        let spec = QuadratureSpec::default();
        let views = [interferer(0.0, 3e-8, 1.0), interferer(2.0, 2e-8, 2.5), interferer(4.0, 1e-8, 3.0)];
        let law = InterferenceLaw::from_moments(&interference_moments(&views, 14, &spec).unwrap()).unwrap();
        let victim = VictimLink { tx_power_w: 0.2, path_gain: 4e-8, model: FadingModel::Rician { b: 3.0 } };
        let lo = p_err(&victim, beta, g1, 4e-13, &law, &spec).unwrap();
        let hi = p_err(&victim, beta, g1 + dg, 4e-13, &law, &spec).unwrap();
        prop_assert!(hi >= lo - 1e-12);
    }

    #[test]
    fn outage_falls_when_an_interferer_backs_off(beta_m in 0.5..3.0f64, raise in 0.1..2.0f64) {
        let spec = QuadratureSpec::default();
        let victim = VictimLink { tx_power_w: 0.2, path_gain: 4e-8, model: FadingModel::Rician { b: 3.0 } };
        let eval = |bm: f64| {
            let views = [interferer(0.0, 3e-8, 1.0), interferer(2.5, 2e-8, bm)];
            let law = InterferenceLaw::from_moments(&interference_moments(&views, 14, &spec).unwrap()).unwrap();
            p_err(&victim, 2.0, 10.0, 4e-13, &law, &spec).unwrap()
        };
        prop_assert!(eval(beta_m + raise) <= eval(beta_m) + 1e-12);
    }

    #[test]
    fn psnr_falls_with_loss(e in 20.0..456.0f64, p in 0.0..0.99f64, dp in 0.001..0.01f64) {
        let v = VideoParams::default();
        let a = psnr(distortion(e, p, &v).unwrap(), 8).unwrap();
        let b = psnr(distortion(e, p + dp, &v).unwrap(), 8).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn line_search_never_loses_ground(c in -2.0..6.0f64, w in 0.1..5.0f64, x0 in 0.0..4.0f64) {
        let f = |x: f64| (w * x).sin() - 0.05 * (x - c).powi(2);
        let s = StepParams::new(0.5, 0.01).unwrap();
        let out = lcs(|x| Ok(f(x)), x0, &s, 0.0, Some(4.0)).unwrap();
        prop_assert!(out.value >= f(x0));
        prop_assert!((0.0..=4.0).contains(&out.x));
        prop_assert!(!out.exhausted);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn optimized_policies_are_feasible(seed in 0u64..10_000) {
        let m = NetworkModel::new(&reference_scenario(seed).unwrap()).unwrap();
        let cfg = OptimizerConfig::default();
        let (p, trace) = dtc(&m, &cfg).unwrap();
        p.check_feasible(&m).unwrap();
        if trace.converged {
            prop_assert!(trace.records.last().unwrap().delta_beta < cfg.epsilon_beta);
        }
        let (j, _) = jdvt_ec(&m, &joint_start(&m, &cfg).unwrap(), &cfg).unwrap();
        j.check_feasible(&m).unwrap();
    }

    #[test]
    fn optimizers_are_deterministic(seed in 0u64..10_000) {
        let s = reference_scenario(seed).unwrap();
        let cfg = OptimizerConfig::default();
        let run = || {
            let m = NetworkModel::new(&s).unwrap();
            (dtc(&m, &cfg).unwrap(), jdvt_ec(&m, &joint_start(&m, &cfg).unwrap(), &cfg).unwrap())
        };
        let (a, b) = (run(), run());
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn scenario_survives_round_trip(seed in 0u64..10_000) {
        let s = reference_scenario(seed).unwrap();
        let back = parse_scenario(&scenario_to_toml(&s).unwrap()).unwrap();
        prop_assert_eq!(back, s);
    }
}
