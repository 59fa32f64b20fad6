use isac_core::admm::Init;
use isac_core::operators::Synthesis;
use isac_harness::experiments::{run_init_study, run_montecarlo};
use isac_harness::pipeline::{design_ideal, design_isac, draw_trial, evaluate, link_curve};
use isac_harness::ExperimentConfig;

fn small() -> ExperimentConfig {
    ExperimentConfig {
        n_tx: 4,
        n_sub: 8,
        n_cp: 4,
        n_taps: 2,
        ser_trials: 20,
        lbfgs_max_iters: 60,
        admm_max_iters: 500,
        rho_grid: vec![0.5],
        esn0_grid_db: vec![5.0],
        ..ExperimentConfig::default()
    }
}

#[test]
fn parallel_and_serial_montecarlo_agree() {
    let cfg = ExperimentConfig {
        n_mc: 6,
        rho_grid: vec![0.3, 0.7],
        ..small()
    };
    let p = run_montecarlo(&cfg, true).unwrap();
    let s = run_montecarlo(&cfg, false).unwrap();
    assert_eq!(p.aggregate, s.aggregate);
    assert_eq!(p.rsnr, s.rsnr);
}

#[test]
fn single_trial_montecarlo_matches_a_direct_design() {
    let cfg = ExperimentConfig { n_mc: 1, ..small() };
    let mc = run_montecarlo(&cfg, false).unwrap();

    let ideal = design_ideal(&cfg, cfg.mode()).unwrap();
    let draw = draw_trial(&cfg, 0).unwrap();
    let d = design_isac(&cfg, &ideal, &draw, 0.5, cfg.papr_db, &Init::Radar).unwrap();
    let grid = cfg.grid().unwrap();
    let x = Synthesis::for_mode(&grid, cfg.mode())
        .analyze(&d.output.s)
        .unwrap();
    let link = link_curve(&cfg, &draw, &x, &cfg.esn0_grid_db).unwrap();
    let m = evaluate(&cfg, &ideal.scene, &grid, &draw, &d.output.s, cfg.esn0_db).unwrap();

    let row = &mc.aggregate[0];
    assert_eq!(row.n_trials, 1);
    assert_eq!(row.ser_mean, link[0].1);
    assert_eq!(row.sum_rate_mean, link[0].2);
    assert_eq!(row.mui_mean, m.mui);
    for (agg, direct) in mc.rsnr.iter().zip(&m.rsnr_db) {
        assert!(
            (agg.rsnr_db - direct).abs() < 1e-9,
            "{} vs {direct}",
            agg.rsnr_db
        );
    }
}

#[test]
fn standard_error_shrinks_with_the_square_root_of_trials() {
    let se = |n: usize| {
        let cfg = ExperimentConfig { n_mc: n, ..small() };
        run_montecarlo(&cfg, true).unwrap().aggregate[0].sum_rate_se
    };
    let (s10, s40, s160) = (se(10), se(40), se(160));
    // Expected ratio 2 per fourfold increase; sample SEs of SEs are noisy.
    for (a, b) in [(s10, s40), (s40, s160)] {
        let r = a / b;
        assert!((1.2..3.4).contains(&r), "ratio {r}");
    }
    assert!((2.5..6.5).contains(&(s10 / s160)), "ratio {}", s10 / s160);
}

#[test]
fn init_study_reaches_a_common_comm_term() {
    let cfg = ExperimentConfig::default();
    let t = run_init_study(&cfg).unwrap();
    let comm: Vec<f64> = t
        .results
        .iter()
        .filter(|r| r.waveform != "ideal")
        .map(|r| r.comm_term.unwrap())
        .collect();
    assert_eq!(comm.len(), 3);
    let lo = comm.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = comm.iter().cloned().fold(0.0, f64::max);
    assert!((hi - lo) / lo < 0.01, "{comm:?}");
    assert!(t.results.iter().all(|r| r.converged != Some(false)));
}
