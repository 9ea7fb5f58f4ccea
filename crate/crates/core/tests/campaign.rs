//! End-to-end campaign behavior: reproducibility, aggregation and reports.

use lmmse_lab::experiment::{
    emit_report, read_summary, read_trials, recompute, run_scenario, trace_transmissions, write_summary, write_trials,
    CampaignReport, CandidateSpec, OmegaSpec, Scenario, ScenarioConfig,
};

const ALL: [Scenario; 4] = [Scenario::KnownStats, Scenario::Sto, Scenario::EstimatedCorr, Scenario::NoPrior];

fn config(scenario: Scenario, trials: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(scenario);
    cfg.trials = trials;
    cfg
}

fn run(scenario: Scenario, trials: usize) -> CampaignReport {
    run_scenario(&config(scenario, trials)).unwrap()
}

/// Replay checks only need one grid point.
fn run_at(scenario: Scenario, trials: usize, snr_db: f64) -> CampaignReport {
    let mut cfg = config(scenario, trials);
    cfg.snr_grid_db = Some(vec![snr_db]);
    run_scenario(&cfg).unwrap()
}

#[test]
fn fixed_seed_replays_exactly() {
    for sc in ALL {
        assert_eq!(run_at(sc, 1, 10.0).records, run_at(sc, 1, 10.0).records, "{sc:?}");
    }
}

#[test]
fn doubling_trials_keeps_the_first_half() {
    for sc in ALL {
        // a multiple of the stationary period, so no period is cut short
        let short = run_at(sc, 16, 10.0);
        let long = run_at(sc, 32, 10.0);
        let head: Vec<_> = long.records.iter().filter(|r| r.trial < 16).cloned().collect();
        assert_eq!(short.records, head, "{sc:?}");
    }
}

#[test]
fn summary_matches_the_trial_dump() {
    let report = run(Scenario::Sto, 40);
    let mut buf = Vec::new();
    write_trials(&report.records, &mut buf).unwrap();
    let records = read_trials(buf.as_slice()).unwrap();
    assert_eq!(records, report.records);
    for row in &report.rows {
        let (n, mean, se, rate) = recompute(&records, row.snr_db, &row.method);
        assert_eq!(n, row.trials);
        assert!((mean - row.mse_mean).abs() <= 1e-12 * row.mse_mean.max(1.0), "{}", row.method);
        assert!((se - row.mse_se).abs() <= 1e-12 * row.mse_se.max(1.0), "{}", row.method);
        match (rate, row.false_sel_rate) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-12),
            (a, b) => assert_eq!(a, b),
        }
        let hist: usize = row.sel_hist.iter().map(|(_, c)| c).sum();
        assert_eq!(hist, row.trials, "{}", row.method);
        assert!(row.mse_mean >= 0.0);
    }
}

#[test]
fn summary_csv_edge_cases() {
    let mut buf = Vec::new();
    write_summary(&[], &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "{text}");
    assert!(read_summary(buf.as_slice()).unwrap().is_empty());

    let mut cfg = config(Scenario::KnownStats, 3);
    cfg.snr_grid_db = Some(vec![10.0]);
    cfg.omega = vec![OmegaSpec { name: "only".into(), candidates: vec![CandidateSpec::robust(128)] }];
    cfg.baselines = Some(Vec::new());
    let report = run_scenario(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_report(&report, dir.path()).unwrap();
    let rows = read_summary(std::fs::File::open(dir.path().join("summary.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].method, "enhanced:only");
    for name in ["summary.csv", "trials.csv", "manifest.txt"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
}

#[test]
fn enhanced_is_never_much_worse_than_robust() {
    for sc in ALL {
        let report = run(sc, 120);
        let robust = if sc == Scenario::NoPrior {
            format!("lmmse_robust:{}", report.config.ofdm.cp_len)
        } else {
            "lmmse_robust".to_string()
        };
        for row in report.rows.iter().filter(|r| r.method.starts_with("enhanced:")) {
            let base = report.row(row.snr_db, &robust).unwrap().mse_mean;
            let gap_db = 10.0 * (row.mse_mean / base).log10();
            assert!(gap_db <= 0.2, "{sc:?} {} at {} dB: {gap_db:.3} dB above robust", row.method, row.snr_db);
        }
    }
}

#[test]
fn trace_with_long_periods_tracks_the_better_method() {
    let mut cfg = config(Scenario::EstimatedCorr, 500);
    cfg.stationary_period = Some(8);
    let trace = trace_transmissions(&cfg).unwrap();
    assert_eq!(trace.len(), 500);
    let mut equal = 0;
    for t in &trace {
        let get = |m: &str| t.mse.iter().find(|(n, _)| n == m).unwrap().1;
        let (enh, est, rob) = (get("enhanced:selected"), get("lmmse_estimated"), get("lmmse_robust"));
        assert!(enh <= est.max(rob), "transmission {}", t.transmission);
        equal += usize::from(enh == est.min(rob));
    }
    assert!(equal as f64 >= 0.9 * trace.len() as f64, "{equal} of {}", trace.len());
}
