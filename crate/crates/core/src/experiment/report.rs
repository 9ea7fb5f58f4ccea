//! CSV and manifest output for campaign reports.
//!
//! `summary.csv` rounds to 9 significant digits. `trials.csv` keeps
//! round-trip precision so the summary can be recomputed from it exactly.

use std::fs;
use std::path::Path;

use super::campaign::{mean_and_se, CampaignReport, ReportRow, TheoryRow, TraceRecord, TrialRecord};
use crate::error::{Error, Result};

pub const SUMMARY_HEADER: [&str; 8] =
    ["scenario", "snr_db", "method", "trials", "mse_mean", "mse_se", "false_sel_rate", "sel_hist_json"];
pub const TRIALS_HEADER: [&str; 8] = ["snr_db", "trial", "method", "mse", "chosen", "channel", "correct", "xi"];
pub const THEORY_HEADER: [&str; 11] = [
    "snr_db",
    "k",
    "better",
    "worse",
    "noise_mse_better",
    "noise_mse_worse",
    "alpha",
    "eps_theory",
    "eps_theory_twice",
    "eps_empirical",
    "trials",
];

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// Formats with 9 significant digits, printed in the shortest form.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return format_float(x);
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format_float(rounded)
}

/// Shortest round-trip representation, with `inf`, `-inf` and `nan` spelled out.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

pub fn parse_float(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        t => t.parse().map_err(|_| Error::Parse(format!("not a number: '{s}'"))),
    }
}

fn hist_json(hist: &[(String, usize)]) -> String {
    let map: serde_json::Map<String, serde_json::Value> =
        hist.iter().map(|(l, n)| (l.clone(), serde_json::Value::from(*n))).collect();
    serde_json::Value::Object(map).to_string()
}

fn parse_hist(s: &str) -> Result<Vec<(String, usize)>> {
    let v: serde_json::Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| Error::Parse("selection histogram is not an object".into()))?;
    obj.iter()
        .map(|(k, n)| {
            n.as_u64()
                .map(|n| (k.clone(), n as usize))
                .ok_or_else(|| Error::Parse(format!("bad count for '{k}'")))
        })
        .collect()
}

pub fn write_summary<W: std::io::Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            format_float(r.snr_db),
            r.method.clone(),
            r.trials.to_string(),
            sig9(r.mse_mean),
            sig9(r.mse_se),
            r.false_sel_rate.map(sig9).unwrap_or_default(),
            hist_json(&r.sel_hist),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary<R: std::io::Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut rd = csv::Reader::from_reader(input);
    check_header(rd.headers().map_err(csv_err)?, &SUMMARY_HEADER)?;
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let fsr = rec[6].trim();
        rows.push(ReportRow {
            scenario: rec[0].to_string(),
            snr_db: parse_float(&rec[1])?,
            method: rec[2].to_string(),
            trials: rec[3].parse().map_err(|_| Error::Parse(format!("bad trial count '{}'", &rec[3])))?,
            mse_mean: parse_float(&rec[4])?,
            mse_se: parse_float(&rec[5])?,
            false_sel_rate: if fsr.is_empty() { None } else { Some(parse_float(fsr)?) },
            sel_hist: parse_hist(&rec[7])?,
        });
    }
    Ok(rows)
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().eq(expected.iter().copied()) {
        Ok(())
    } else {
        Err(Error::Parse(format!("unexpected header {:?}", found.iter().collect::<Vec<_>>())))
    }
}

pub fn write_trials<W: std::io::Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIALS_HEADER).map_err(csv_err)?;
    for r in records {
        let xi: Vec<String> = r.xi.iter().map(|&x| format_float(x)).collect();
        w.write_record([
            format_float(r.snr_db),
            r.trial.to_string(),
            r.method.clone(),
            format_float(r.mse),
            r.chosen.clone(),
            r.channel.clone(),
            r.correct.map(|c| c.to_string()).unwrap_or_default(),
            xi.join(";"),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trials<R: std::io::Read>(input: R) -> Result<Vec<TrialRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    check_header(rd.headers().map_err(csv_err)?, &TRIALS_HEADER)?;
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let correct = match rec[6].trim() {
            "" => None,
            "true" => Some(true),
            "false" => Some(false),
            other => return Err(Error::Parse(format!("bad correctness flag '{other}'"))),
        };
        let xi = if rec[7].is_empty() {
            Vec::new()
        } else {
            rec[7].split(';').map(parse_float).collect::<Result<_>>()?
        };
        out.push(TrialRecord {
            snr_db: parse_float(&rec[0])?,
            trial: rec[1].parse().map_err(|_| Error::Parse(format!("bad trial index '{}'", &rec[1])))?,
            method: rec[2].to_string(),
            mse: parse_float(&rec[3])?,
            chosen: rec[4].to_string(),
            channel: rec[5].to_string(),
            correct,
            xi,
        });
    }
    Ok(out)
}

/// Recomputes mean, standard error and false-selection rate of one method at one
/// SNR from per-trial records.
pub fn recompute(records: &[TrialRecord], snr_db: f64, method: &str) -> (usize, f64, f64, Option<f64>) {
    let recs: Vec<&TrialRecord> = records.iter().filter(|r| r.snr_db == snr_db && r.method == method).collect();
    let mses: Vec<f64> = recs.iter().map(|r| r.mse).collect();
    let (m, se) = mean_and_se(&mses);
    let judged: Vec<bool> = recs.iter().filter_map(|r| r.correct).collect();
    let rate = (!judged.is_empty()).then(|| judged.iter().filter(|c| !**c).count() as f64 / judged.len() as f64);
    (recs.len(), m, se, rate)
}

pub fn write_theory<W: std::io::Write>(rows: &[TheoryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(THEORY_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            format_float(r.snr_db),
            r.k_len.to_string(),
            r.better.clone(),
            r.worse.clone(),
            sig9(r.noise_mse_better),
            sig9(r.noise_mse_worse),
            sig9(r.alpha),
            sig9(r.eps_theory),
            sig9(r.eps_theory_twice),
            sig9(r.eps_empirical),
            r.trials.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace<W: std::io::Write>(trace: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["transmission".to_string(), "period".into(), "channel".into(), "selected".into()];
    if let Some(first) = trace.first() {
        header.extend(first.mse.iter().map(|(m, _)| format!("mse[{m}]")));
    }
    w.write_record(&header).map_err(csv_err)?;
    for t in trace {
        let mut row = vec![t.transmission.to_string(), t.period.to_string(), t.channel.clone(), t.selected.clone()];
        row.extend(t.mse.iter().map(|(_, v)| sig9(*v)));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn manifest(report: &CampaignReport) -> String {
    let usable: Vec<String> = report.usable.iter().map(|u| u.to_string()).collect();
    let mut s = String::new();
    s.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    s.push_str(&format!("scenario = {}\n", report.scenario));
    s.push_str(&format!("master_seed = {}\n", report.config.master_seed));
    s.push_str(&format!("trials = {}\n", report.config.trials));
    s.push_str(&format!("index_method = {}\n", report.method));
    s.push_str(&format!("wall_time_s = {:.3}\n", report.wall_time_s));
    s.push_str(&format!("usable_subcarriers = [{}]\n", usable.join(",")));
    for (name, labels) in &report.omegas {
        s.push_str(&format!("{name} = [{}]\n", labels.join(",")));
    }
    s.push_str("\n# configuration\n");
    s.push_str(&report.config.to_toml());
    s
}

/// Writes `summary.csv`, `trials.csv`, `manifest.txt` and, for theory runs,
/// `theory.csv` into `dir`, creating it if needed.
pub fn emit_report(report: &CampaignReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_summary(&report.rows, fs::File::create(dir.join("summary.csv"))?)?;
    write_trials(&report.records, fs::File::create(dir.join("trials.csv"))?)?;
    if !report.theory.is_empty() {
        write_theory(&report.theory, fs::File::create(dir.join("theory.csv"))?)?;
    }
    fs::write(dir.join("manifest.txt"), manifest(report))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig9_rounds() {
        assert_eq!(sig9(0.1234567891234), "0.123456789");
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(f64::INFINITY), "inf");
        assert_eq!(sig9(-2.5e-7), "-0.00000025");
    }

    #[test]
    fn float_text_round_trip() {
        for x in [0.1, -3.0e-300, 1.0 / 3.0, f64::INFINITY, f64::NEG_INFINITY] {
            assert_eq!(parse_float(&format_float(x)).unwrap(), x);
        }
        assert!(parse_float("nan").unwrap().is_nan());
        assert!(parse_float("x").is_err());
    }

    #[test]
    fn summary_round_trip() {
        let rows = vec![
            ReportRow {
                scenario: "sto".into(),
                snr_db: 10.0,
                method: "enhanced:omega1".into(),
                trials: 3,
                mse_mean: 0.012345678912,
                mse_se: 1e-4,
                false_sel_rate: Some(1.0 / 3.0),
                sel_hist: vec![("b".into(), 2), ("a".into(), 1)],
            },
            ReportRow {
                scenario: "sto".into(),
                snr_db: 10.0,
                method: "ls".into(),
                trials: 3,
                mse_mean: 0.1,
                mse_se: 0.0,
                false_sel_rate: None,
                sel_hist: vec![("ls".into(), 3)],
            },
        ];
        let mut buf = Vec::new();
        write_summary(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("scenario,snr_db,method,trials,mse_mean,mse_se,false_sel_rate,sel_hist_json\n"));
        assert!(text.contains("\"{\"\"b\"\":2,\"\"a\"\":1}\""));
        let back = read_summary(buf.as_slice()).unwrap();
        assert_eq!(back[1], rows[1]);
        assert_eq!(back[0].sel_hist, rows[0].sel_hist);
        assert_eq!(back[0].mse_mean, 0.0123456789);
        assert!((back[0].false_sel_rate.unwrap() - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn trials_round_trip_exact() {
        let recs = vec![TrialRecord {
            snr_db: 0.0,
            trial: 7,
            method: "enhanced:x".into(),
            mse: 0.1 + 0.2,
            chosen: "office_b@sto-3".into(),
            channel: "office_b@sto-3".into(),
            correct: Some(true),
            xi: vec![1.0 / 7.0, f64::INFINITY],
        }];
        let mut buf = Vec::new();
        write_trials(&recs, &mut buf).unwrap();
        assert_eq!(read_trials(buf.as_slice()).unwrap(), recs);
        assert!(read_summary(buf.as_slice()).is_err());
    }
}
