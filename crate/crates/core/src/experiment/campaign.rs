//! Monte Carlo execution of a resolved plan.
//!
//! Trial `t` draws its model choice, tap gains, timing offset, pilots and noise
//! from substreams keyed by `(master_seed, t, purpose)`. The noise stream is
//! reused at every SNR point with a different scale, so SNR points are paired,
//! and every method sees the same observation. Results do not depend on thread
//! count or scheduling.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{effective_label, Baseline, OmegaEntry, Plan, Scenario, ScenarioConfig, ESTIMATED_LABEL};
use crate::channel::{apply_sto, build_cir, cir_to_cfr, noise_var_from_snr_db, observe_pilot, PilotObservation};
use crate::correlation::estimate_correlation;
use crate::error::{Error, Result};
use crate::estimators::{empirical_mse, Preparation};
use crate::rng::{derive_u64, substream, StreamTag};
use crate::selector::{Candidate, EnhancedEstimator, IndexMethod};
use crate::theory::{expected_noise_mse, ChiSquareDims, ComparisonTheoryQuery};

/// One method's outcome on one trial at one SNR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub snr_db: f64,
    pub trial: u64,
    pub method: String,
    pub mse: f64,
    /// Correlation label the estimate was filtered with (`ls` for LS).
    pub chosen: String,
    /// Label of the true effective correlation.
    pub channel: String,
    /// Whether the selection matched the truth, when the truth is in the set.
    pub correct: Option<bool>,
    /// Evaluation index per candidate, parameter-set methods only.
    pub xi: Vec<f64>,
}

/// Aggregate for one `(snr, method)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub scenario: String,
    pub snr_db: f64,
    pub method: String,
    pub trials: usize,
    pub mse_mean: f64,
    pub mse_se: f64,
    pub false_sel_rate: Option<f64>,
    pub sel_hist: Vec<(String, usize)>,
}

/// Measured false-comparison frequency next to its theoretical value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryRow {
    pub snr_db: f64,
    pub k_len: usize,
    pub better: String,
    pub worse: String,
    pub noise_mse_better: f64,
    pub noise_mse_worse: f64,
    pub alpha: f64,
    /// Chi-square dimension equal to the sequence length.
    pub eps_theory: f64,
    /// Chi-square dimension twice the sequence length.
    pub eps_theory_twice: f64,
    pub eps_empirical: f64,
    pub trials: usize,
}

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub scenario: Scenario,
    pub config: ScenarioConfig,
    pub method: IndexMethod,
    pub usable: Vec<usize>,
    pub omegas: Vec<(String, Vec<String>)>,
    pub rows: Vec<ReportRow>,
    pub records: Vec<TrialRecord>,
    pub theory: Vec<TheoryRow>,
    pub wall_time_s: f64,
}

impl CampaignReport {
    pub fn row(&self, snr_db: f64, method: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.snr_db == snr_db && r.method == method)
    }
}

/// True channel of one trial, before noise.
struct TrialDraw {
    trial: u64,
    channel: String,
    cfr: Vec<Complex64>,
}

fn model_index(plan: &Plan, index: u64) -> usize {
    let n = plan.models.len();
    if n == 1 {
        0
    } else {
        substream(plan.master_seed, index, StreamTag::Model).random_range(0..n)
    }
}

fn draw_trial(plan: &Plan, trial: u64, model: usize) -> Result<TrialDraw> {
    let seed = plan.master_seed;
    let m = &plan.models[model];
    let cir = build_cir(m, &plan.ofdm, &mut substream(seed, trial, StreamTag::Channel))?;
    let mut cfr = cir_to_cfr(&cir, &plan.ofdm);
    let theta = match &plan.sto {
        Some(d) => d.sample(&mut substream(seed, trial, StreamTag::Sto)),
        None => 0,
    };
    if theta != 0 {
        cfr = apply_sto(&cfr, theta, &plan.ofdm);
    }
    Ok(TrialDraw { trial, channel: effective_label(m.name(), theta), cfr })
}

fn observe(plan: &Plan, draw: &TrialDraw, snr_db: f64) -> Result<PilotObservation> {
    let seed = plan.master_seed;
    let mut noise = substream(seed, draw.trial, StreamTag::Noise);
    observe_pilot(&draw.cfr, snr_db, derive_u64(seed, draw.trial, StreamTag::Pilot), &mut noise)
}

/// Candidates and estimators shared by every trial at one SNR.
struct SnrContext<'a> {
    plan: &'a Plan,
    snr_db: f64,
    noise_var: f64,
    pool: HashMap<String, Arc<Candidate>>,
    fixed_sets: Vec<Option<EnhancedEstimator>>,
}

/// Per-period pieces of the estimated-correlation scenario.
struct PeriodContext {
    estimated: Arc<Candidate>,
    sets: Vec<Option<EnhancedEstimator>>,
}

impl<'a> SnrContext<'a> {
    fn new(plan: &'a Plan, snr_db: f64) -> Result<Self> {
        let noise_var = noise_var_from_snr_db(snr_db);
        let pool: HashMap<String, Arc<Candidate>> = plan
            .correlations
            .iter()
            .map(|(label, r)| {
                let c = Candidate::new(r.clone(), noise_var, plan.method, &plan.ofdm, Preparation::Weights);
                (label.clone(), Arc::new(c))
            })
            .collect();
        let mut ctx = Self { plan, snr_db, noise_var, pool, fixed_sets: Vec::new() };
        ctx.fixed_sets = plan
            .omegas
            .iter()
            .map(|o| if o.has_estimated() { Ok(None) } else { ctx.assemble(&o.entries, None).map(Some) })
            .collect::<Result<_>>()?;
        Ok(ctx)
    }

    fn candidate(&self, label: &str) -> Result<&Arc<Candidate>> {
        self.pool.get(label).ok_or_else(|| Error::Config(format!("no correlation labelled '{label}'")))
    }

    fn assemble(&self, entries: &[OmegaEntry], estimated: Option<&Arc<Candidate>>) -> Result<EnhancedEstimator> {
        let cands = entries
            .iter()
            .map(|e| match e {
                OmegaEntry::Fixed(l) => self.candidate(l).cloned(),
                OmegaEntry::Estimated => estimated
                    .cloned()
                    .ok_or_else(|| Error::Config("estimated candidate outside a stationary period".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        EnhancedEstimator::from_candidates(cands)
    }

    fn period(&self, observations: &[PilotObservation]) -> Result<PeriodContext> {
        let plan = self.plan;
        let estimated = match estimate_correlation(observations, &plan.ofdm) {
            Ok(r) => Candidate::new(r.with_label(ESTIMATED_LABEL), self.noise_var, plan.method, &plan.ofdm, Preparation::Factored),
            Err(e @ Error::EstimationFailed { .. }) => Candidate::unavailable(ESTIMATED_LABEL, e, plan.method, &plan.ofdm),
            Err(e) => return Err(e),
        };
        let estimated = Arc::new(estimated);
        let sets = plan
            .omegas
            .iter()
            .map(|o| if o.has_estimated() { self.assemble(&o.entries, Some(&estimated)).map(Some) } else { Ok(None) })
            .collect::<Result<_>>()?;
        Ok(PeriodContext { estimated, sets })
    }

    fn evaluate(&self, draw: &TrialDraw, obs: &PilotObservation, period: Option<&PeriodContext>) -> Result<Vec<TrialRecord>> {
        let plan = self.plan;
        let record = |method: String, est: &[Complex64], chosen: &str, correct: Option<bool>, xi: Vec<f64>| TrialRecord {
            snr_db: self.snr_db,
            trial: draw.trial,
            method,
            mse: empirical_mse(est, &obs.cfr_true),
            chosen: chosen.to_string(),
            channel: draw.channel.clone(),
            correct,
            xi,
        };
        let mut out = Vec::with_capacity(plan.baselines.len() + plan.omegas.len());
        for b in &plan.baselines {
            let rec = match b {
                Baseline::Ls => record(b.method_name(), &obs.ls, "ls", None, Vec::new()),
                Baseline::Oracle => {
                    let est = self.candidate(&draw.channel)?.filter()?.apply(&obs.ls);
                    record(b.method_name(), &est, &draw.channel, None, Vec::new())
                }
                Baseline::Fixed { label, .. } => {
                    let est = self.candidate(label)?.filter()?.apply(&obs.ls);
                    record(b.method_name(), &est, label, None, Vec::new())
                }
                Baseline::Estimated => {
                    let p = period.ok_or_else(|| Error::Config("lmmse_estimated outside a stationary period".into()))?;
                    match p.estimated.filter() {
                        Ok(f) => record(b.method_name(), &f.apply(&obs.ls), ESTIMATED_LABEL, None, Vec::new()),
                        Err(_) => {
                            let est = self.candidate(&plan.robust_label)?.filter()?.apply(&obs.ls);
                            record(b.method_name(), &est, &plan.robust_label, None, Vec::new())
                        }
                    }
                }
            };
            out.push(rec);
        }
        for (i, omega) in plan.omegas.iter().enumerate() {
            let est = match (&self.fixed_sets[i], period) {
                (Some(e), _) => e,
                (None, Some(p)) => p.sets[i].as_ref().expect("period set prepared"),
                (None, None) => return Err(Error::Config("estimated candidate outside a stationary period".into())),
            };
            let (h, rep) = est.estimate(&obs.ls)?;
            let truth_known = est.labels().contains(&draw.channel.as_str());
            let correct = truth_known.then(|| rep.chosen_label == draw.channel);
            out.push(record(omega.method_name(), &h, &rep.chosen_label, correct, rep.xi));
        }
        Ok(out)
    }

    fn run_trial(&self, trial: u64) -> Result<Vec<TrialRecord>> {
        let draw = draw_trial(self.plan, trial, model_index(self.plan, trial))?;
        let obs = observe(self.plan, &draw, self.snr_db)?;
        self.evaluate(&draw, &obs, None)
    }

    /// All transmissions of stationary period `p`. The correlation estimate uses
    /// every symbol of the period, including ones past the trial count, so a
    /// longer campaign never changes earlier periods.
    fn run_period(&self, p: u64) -> Result<Vec<TrialRecord>> {
        let plan = self.plan;
        let m = plan.stationary_period as u64;
        let first = p * m;
        // keyed by the first transmission so periods of different lengths that
        // start together share their model
        let model = model_index(plan, first);
        let draws = (first..first + m).map(|t| draw_trial(plan, t, model)).collect::<Result<Vec<_>>>()?;
        let obs = draws.iter().map(|d| observe(plan, d, self.snr_db)).collect::<Result<Vec<_>>>()?;
        let ctx = self.period(&obs)?;
        let mut out = Vec::new();
        for (d, o) in draws.iter().zip(&obs) {
            if d.trial < plan.trials as u64 {
                out.extend(self.evaluate(d, o, Some(&ctx))?);
            }
        }
        Ok(out)
    }
}

/// Runs the campaign described by `cfg`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<CampaignReport> {
    let plan = cfg.resolve()?;
    run_plan(&plan, cfg)
}

pub fn run_plan(plan: &Plan, cfg: &ScenarioConfig) -> Result<CampaignReport> {
    let start = Instant::now();
    let mut records = Vec::new();
    for &snr in &plan.snr_grid_db {
        let ctx = SnrContext::new(plan, snr)?;
        let chunks: Vec<Vec<TrialRecord>> = if plan.scenario == Scenario::EstimatedCorr {
            let periods = plan.trials.div_ceil(plan.stationary_period) as u64;
            (0..periods).into_par_iter().map(|p| ctx.run_period(p)).collect::<Result<_>>()?
        } else {
            (0..plan.trials as u64).into_par_iter().map(|t| ctx.run_trial(t)).collect::<Result<_>>()?
        };
        records.extend(chunks.into_iter().flatten());
    }
    let rows = aggregate(plan, &records);
    let theory = if plan.scenario == Scenario::TheoryValidation { theory_rows(plan, &rows)? } else { Vec::new() };
    Ok(CampaignReport {
        scenario: plan.scenario,
        config: cfg.clone(),
        method: plan.method,
        usable: plan.ofdm.usable().to_vec(),
        omegas: plan.omegas.iter().map(|o| (o.method_name(), o.labels())).collect(),
        rows,
        records,
        theory,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Mean and standard error of the mean (sample standard deviation over sqrt n).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Aggregates per-trial records into report rows, in SNR-grid then method order.
pub fn aggregate(plan: &Plan, records: &[TrialRecord]) -> Vec<ReportRow> {
    let mut groups: HashMap<(u64, &str), Vec<&TrialRecord>> = HashMap::new();
    for r in records {
        groups.entry((r.snr_db.to_bits(), r.method.as_str())).or_default().push(r);
    }
    let omega_labels: HashMap<String, Vec<String>> = plan.omegas.iter().map(|o| (o.method_name(), o.labels())).collect();
    let mut rows = Vec::new();
    for &snr in &plan.snr_grid_db {
        for method in plan.method_names() {
            let recs = groups.get(&(snr.to_bits(), method.as_str())).cloned().unwrap_or_default();
            let mses: Vec<f64> = recs.iter().map(|r| r.mse).collect();
            let (mse_mean, mse_se) = mean_and_se(&mses);
            let judged: Vec<bool> = recs.iter().filter_map(|r| r.correct).collect();
            let false_sel_rate =
                (!judged.is_empty()).then(|| judged.iter().filter(|c| !**c).count() as f64 / judged.len() as f64);
            let mut sel_hist: Vec<(String, usize)> = omega_labels
                .get(&method)
                .map(|ls| ls.iter().map(|l| (l.clone(), 0)).collect())
                .unwrap_or_default();
            for r in &recs {
                match sel_hist.iter_mut().find(|(l, _)| *l == r.chosen) {
                    Some(e) => e.1 += 1,
                    None => sel_hist.push((r.chosen.clone(), 1)),
                }
            }
            rows.push(ReportRow {
                scenario: plan.scenario.name().to_string(),
                snr_db: snr,
                method,
                trials: recs.len(),
                mse_mean,
                mse_se,
                false_sel_rate,
                sel_hist,
            });
        }
    }
    rows
}

fn theory_rows(plan: &Plan, rows: &[ReportRow]) -> Result<Vec<TheoryRow>> {
    let omega = &plan.omegas[0];
    let labels = omega.labels();
    let r_true = plan
        .correlations
        .get(plan.models[0].name())
        .ok_or_else(|| Error::Config("true channel correlation missing".into()))?;
    let k = plan.ofdm.k();
    let mut out = Vec::new();
    for &snr in &plan.snr_grid_db {
        let nv = noise_var_from_snr_db(snr);
        let mse = labels
            .iter()
            .map(|l| expected_noise_mse(&plan.correlations[l], r_true, nv, plan.method, &plan.ofdm))
            .collect::<Result<Vec<_>>>()?;
        let (b, w) = if mse[1] < mse[0] { (1, 0) } else { (0, 1) };
        let q = ComparisonTheoryQuery::from_noise_mse(mse[b], mse[w], k)?;
        let row = rows
            .iter()
            .find(|r| r.snr_db == snr && r.method == omega.method_name())
            .expect("aggregated row exists");
        let chose_worse = row.sel_hist.iter().find(|(l, _)| *l == labels[w]).map_or(0, |e| e.1);
        out.push(TheoryRow {
            snr_db: snr,
            k_len: k,
            better: labels[b].clone(),
            worse: labels[w].clone(),
            noise_mse_better: mse[b],
            noise_mse_worse: mse[w],
            alpha: q.alpha,
            eps_theory: q.epsilon()?,
            eps_theory_twice: q.with_dims(ChiSquareDims::TwiceSequenceLength).epsilon()?,
            eps_empirical: chose_worse as f64 / row.trials.max(1) as f64,
            trials: row.trials,
        });
    }
    Ok(out)
}

/// Per-transmission view of an estimated-correlation campaign at its first SNR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub transmission: u64,
    pub period: u64,
    pub channel: String,
    /// Label chosen by the (first) parameter-set method.
    pub selected: String,
    /// MSE per method, in report order.
    pub mse: Vec<(String, f64)>,
}

pub fn trace_transmissions(cfg: &ScenarioConfig) -> Result<Vec<TraceRecord>> {
    if cfg.scenario != Scenario::EstimatedCorr {
        return Err(Error::Config("trace needs an estimated_corr configuration".into()));
    }
    let plan = cfg.resolve()?;
    let report = run_plan(&plan, cfg)?;
    Ok(trace_from_report(&plan, &report))
}

pub fn trace_from_report(plan: &Plan, report: &CampaignReport) -> Vec<TraceRecord> {
    let snr = plan.snr_grid_db[0];
    let methods = plan.method_names();
    let first_set = plan.omegas.first().map(|o| o.method_name());
    let mut by_trial: Vec<Option<TraceRecord>> = vec![None; plan.trials];
    for r in report.records.iter().filter(|r| r.snr_db == snr) {
        let slot = by_trial[r.trial as usize].get_or_insert_with(|| TraceRecord {
            transmission: r.trial,
            period: r.trial / plan.stationary_period as u64,
            channel: r.channel.clone(),
            selected: String::new(),
            mse: Vec::with_capacity(methods.len()),
        });
        if Some(&r.method) == first_set.as_ref() {
            slot.selected = r.chosen.clone();
        }
        slot.mse.push((r.method.clone(), r.mse));
    }
    by_trial.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_se_small_cases() {
        assert_eq!(mean_and_se(&[2.0]), (2.0, 0.0));
        let (m, se) = mean_and_se(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // sample variance 5/3, se = sqrt(5/12)
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    fn tiny(scenario: Scenario) -> ScenarioConfig {
        let mut c = ScenarioConfig::new(scenario);
        c.ofdm.n_fft = 128;
        c.ofdm.cp_len = 48;
        c.ofdm.k_len = Some(80);
        c.trials = 6;
        c.snr_grid_db = Some(vec![0.0, 10.0]);
        c
    }

    #[test]
    fn every_scenario_runs_small() {
        for sc in [Scenario::KnownStats, Scenario::Sto, Scenario::EstimatedCorr, Scenario::NoPrior, Scenario::TheoryValidation] {
            let mut cfg = tiny(sc);
            if sc == Scenario::EstimatedCorr {
                cfg.stationary_period = Some(4);
            }
            let rep = run_scenario(&cfg).unwrap();
            let plan = cfg.resolve().unwrap();
            assert_eq!(rep.rows.len(), 2 * plan.method_names().len(), "{sc}");
            for row in &rep.rows {
                assert_eq!(row.trials, 6);
                assert_eq!(row.sel_hist.iter().map(|e| e.1).sum::<usize>(), 6);
                assert!(row.mse_mean >= 0.0);
            }
            assert_eq!(rep.theory.len(), if sc == Scenario::TheoryValidation { 2 } else { 0 });
        }
    }

    #[test]
    fn trace_covers_every_transmission() {
        let mut cfg = tiny(Scenario::EstimatedCorr);
        cfg.snr_grid_db = Some(vec![0.0]);
        cfg.trials = 10;
        cfg.stationary_period = Some(4);
        let tr = trace_transmissions(&cfg).unwrap();
        assert_eq!(tr.len(), 10);
        assert_eq!(tr[9].period, 2);
        assert!(tr.iter().all(|t| !t.selected.is_empty() && t.mse.len() == 5));
        assert!(trace_transmissions(&tiny(Scenario::Sto)).is_err());
    }
}
