use homflow_core::experiments::*;
use homflow_core::modsurface::{hitting_time, FlowSpec, HittingTime, TargetFamily};
use homflow_core::Error;

fn small(kind: ExperimentKind, flow: FlowName) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind, flow);
    c.seed = 77;
    c.n_points = Some(40);
    c.m_max = Some(20_000);
    c
}

#[test]
fn runs_are_deterministic_across_workers() {
    for kind in [
        ExperimentKind::HittingTime,
        ExperimentKind::CuspLoglaw,
        ExperimentKind::Sbc,
        ExperimentKind::Eah,
        ExperimentKind::MeanErgodic,
        ExperimentKind::MatrixDecay,
    ] {
        let mut c = small(kind, FlowName::Geodesic);
        if kind == ExperimentKind::MatrixDecay {
            c.m_max = Some(8);
            c.n_points = Some(2000);
        }
        if kind == ExperimentKind::MeanErgodic {
            c.m_max = Some(1024);
        }
        if kind == ExperimentKind::HittingTime {
            c.measures = vec![0.05, 0.01];
        }
        let a = run(&c).unwrap().to_csv(&[("seed", "77")]);
        let b = run(&c).unwrap().to_csv(&[("seed", "77")]);
        c.workers = Some(3);
        let d = run(&c).unwrap().to_csv(&[("seed", "77")]);
        assert_eq!(a, b, "{kind:?}");
        assert_eq!(a, d, "{kind:?}");
        assert!(a.starts_with("experiment,m_or_t,statistic,value,stderr,n_censored,seed\n"));
    }
}

#[test]
fn sbc_curves_and_expected_counts() {
    let c = small(ExperimentKind::Sbc, FlowName::Horocycle);
    let sched = MeasureSchedule::from_config(&c).unwrap();
    let r = run_sbc(&c, &sched).unwrap();
    for curve in &r.s_curves {
        assert!(curve.windows(2).all(|w| w[0] <= w[1]));
    }
    for cp in &r.checkpoints {
        // independent oracle: harmonic-type sum with the cap at m = 1
        let direct: f64 = (1..=cp.m).map(|j| (1.0 / j as f64).min(3.0 / std::f64::consts::PI)).sum();
        assert!((cp.e_m - direct).abs() <= 1e-12 * direct, "m={}", cp.m);
    }
    assert!(r.checkpoints.windows(2).all(|w| w[0].e_m <= w[1].e_m));
}

#[test]
fn hitting_time_agrees_with_counts() {
    let mut c = small(ExperimentKind::Sbc, FlowName::Horocycle);
    // constant target of measure 0.002
    c.schedule_c = 0.002;
    c.schedule_eta = 0.0;
    let r = run_sbc(&c, &MeasureSchedule::from_config(&c).unwrap()).unwrap();
    let fam = TargetFamily::CuspNeighborhood;
    let t = fam.threshold_for_measure(0.002).unwrap();
    let flow = FlowSpec::horocycle();
    for (i, curve) in r.s_curves.iter().enumerate() {
        let x = sample_point(c.seed, i);
        let tau = hitting_time(&x, &fam, t, &flow, 1, c.m_max()).unwrap();
        for (k, cp) in r.checkpoints.iter().enumerate() {
            let hit_by_m = matches!(tau, HittingTime::Hit(m) if m <= cp.m);
            assert_eq!(hit_by_m, curve[k] >= 1, "point {i} m={}", cp.m);
        }
    }
}

#[test]
fn eah_fraction_monotone_in_eta() {
    let mut c = small(ExperimentKind::Eah, FlowName::Horocycle);
    c.schedule_c = 0.9;
    let runs: Vec<EAHResult> = [0.25, 0.5, 0.75].iter().map(|&eta| run_eah(&c, eta).unwrap()).collect();
    for k in 0..runs[0].checkpoints.len() {
        for w in runs.windows(2) {
            assert!(w[1].checkpoints[k].hit_fraction <= w[0].checkpoints[k].hit_fraction);
        }
    }
    for r in &runs {
        assert!(r.checkpoints.iter().all(|cp| (0.0..=1.0).contains(&cp.hit_fraction)));
    }
    // constant targets are eventually hit by almost every orbit
    let r = run_eah(&c, 0.0).unwrap();
    assert!(r.final_hit_fraction() > 0.95);
}

#[test]
fn loglaw_running_max_and_small_budget() {
    let c = small(ExperimentKind::CuspLoglaw, FlowName::Horocycle);
    let r = run_cusp_loglaw(&c).unwrap();
    assert!(!r.pre_asymptotic);
    for curve in &r.running_max {
        assert!(curve.windows(2).all(|w| w[0] <= w[1]));
    }
    let mut c = c;
    c.m_max = Some(10);
    let r = run_cusp_loglaw(&c).unwrap();
    assert!(r.pre_asymptotic);
    assert_eq!(r.checkpoints.len(), 1);
}

#[test]
fn hitting_budget_and_guards() {
    let mut c = small(ExperimentKind::HittingTime, FlowName::Horocycle);
    c.m_max = Some(1);
    c.measures = vec![1e-6];
    let r = run_hitting_time_law(&c).unwrap();
    assert!(r.levels[0].n_censored >= 39);
    c.measures = vec![0.6];
    assert!(matches!(run_hitting_time_law(&c), Err(Error::InvalidSchedule(_))));
    c.measures = vec![0.5];
    assert!(run_hitting_time_law(&c).is_err());
}

#[test]
fn schedule_guards() {
    let mut c = small(ExperimentKind::Sbc, FlowName::Horocycle);
    c.schedule_c = 0.0;
    assert!(matches!(MeasureSchedule::from_config(&c), Err(Error::InvalidSchedule(_))));
    c.schedule_c = 1.0;
    c.schedule_eta = 2.0;
    let s = MeasureSchedule::from_config(&c).unwrap();
    assert!(matches!(run_sbc(&c, &s), Err(Error::ConvergentSchedule { .. })));
}

#[test]
fn degenerate_functions_rejected() {
    let mut c = small(ExperimentKind::MeanErgodic, FlowName::Horocycle);
    for mu in [0.0, 1.0] {
        c.mu_f = mu;
        assert!(matches!(run_mean_ergodic(&c), Err(Error::DegenerateFunction(_))));
    }
    let mut c = small(ExperimentKind::MatrixDecay, FlowName::Horocycle);
    c.mu_f = 1.0;
    assert!(matches!(run_matrix_decay(&c), Err(Error::DegenerateFunction(_))));
}

#[test]
fn correlation_at_zero_is_variance() {
    let mut c = small(ExperimentKind::MatrixDecay, FlowName::Geodesic);
    c.n_points = Some(50_000);
    c.t_grid = Some(vec![1, 2, 4, 8]);
    let r = run_matrix_decay(&c).unwrap();
    assert!((r.at_zero.value - 0.09).abs() <= 4.0 * r.at_zero.stderr);
    assert!(r.correlations[0].value < r.at_zero.value);
}

#[test]
fn ball_targets_run() {
    let mut c = small(ExperimentKind::Sbc, FlowName::Horocycle);
    c.target = TargetName::Ball;
    c.schedule_c = 0.1;
    c.schedule_eta = 0.5;
    let r = run_sbc(&c, &MeasureSchedule::from_config(&c).unwrap()).unwrap();
    assert!(r.final_mean_ratio() > 0.5 && r.final_mean_ratio() < 1.5, "{}", r.final_mean_ratio());
}
