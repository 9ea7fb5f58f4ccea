use std::fs;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmmse-lab")).args(args).output().unwrap()
}

const TINY: &str = r#"
scenario = "known_stats"
trials = 2
snr_grid_db = [10.0]
[ofdm]
n_fft = 128
cp_len = 48
k_len = 80
"#;

#[test]
fn run_writes_reports_with_the_requested_method() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, TINY).unwrap();
    let out = dir.path().join("out");
    let o = lab(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--method", "full", "--trials", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["summary.csv", "trials.csv", "manifest.txt"] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("index_method = full"), "{manifest}");
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().skip(1).all(|l| l.contains(",3,")), "{summary}");
}

#[test]
fn theory_prints_a_table() {
    let o = lab(&["theory", "--alpha", "0,0.1", "--k", "165"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,k,epsilon");
    assert_eq!(lines.len(), 3);
    let eps: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!((eps - 0.5).abs() < 1e-6);
}

#[test]
fn bound_rejects_ceiling_above_one_half() {
    let o = lab(&["bound", "--eps0", "0.7", "--k", "100"]);
    assert!(!o.status.success());
    let ok = lab(&["bound", "--eps0", "0.1", "--k", "100,400"]);
    assert!(ok.status.success());
    assert_eq!(String::from_utf8(ok.stdout).unwrap().lines().count(), 3);
}

#[test]
fn trace_needs_an_estimated_correlation_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    fs::write(&cfg, TINY).unwrap();
    let o = lab(&["trace", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("estimated_corr"));
}
