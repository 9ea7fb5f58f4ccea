//! Sampled noise MSE, parameter comparison and the enhanced LMMSE estimator.
//!
//! A candidate correlation is scored by interpolating each carrier from the
//! others and measuring how far the result lands from the LS value on that
//! carrier. Averaged over carriers this is an unbiased estimate of interpolation
//! MSE plus LS noise, so the candidate with the smallest score is the one whose
//! interpolation, and hence whose LMMSE filter, fits the channel best.
//!
//! Scores assume the noise variance is known and use it for every candidate.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::PilotObservation;
use crate::correlation::{CorrelationVector, ParameterSet};
use crate::error::{Error, Result};
use crate::estimators::{loaded_autocorrelation, CorrelationMatrixView, LmmseFilter, LooInterpolator, Preparation, WienerMap};
use crate::ofdm::OfdmConfig;

/// How the evaluation index is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexMethod {
    /// Leave-one-out over every carrier.
    Full,
    /// Even positions interpolated from odd ones and vice versa.
    #[default]
    Split,
}

impl fmt::Display for IndexMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexMethod::Full => "full",
            IndexMethod::Split => "split",
        })
    }
}

impl FromStr for IndexMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(IndexMethod::Full),
            "split" => Ok(IndexMethod::Split),
            other => Err(Error::Argument(format!("unknown index method '{other}' (expected full or split)"))),
        }
    }
}

/// Outcome of one comparison over a parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    pub chosen_label: String,
    pub chosen_index: usize,
    /// Evaluation index per candidate, in parameter-set order. Candidates whose
    /// solve failed carry `+inf`.
    pub xi: Vec<f64>,
    pub method: IndexMethod,
}

impl SelectionReport {
    /// Positions of candidates that could not be scored.
    pub fn failed(&self) -> Vec<usize> {
        self.xi.iter().enumerate().filter(|(_, x)| x.is_infinite()).map(|(i, _)| i).collect()
    }

    pub fn csv_header(labels: &[&str]) -> String {
        let mut cols = vec!["trial".to_string(), "method".into(), "chosen_label".into()];
        cols.extend(labels.iter().map(|l| format!("xi[{l}]")));
        cols.join(",")
    }

    /// `trial,method,chosen_label,xi...` with xi in parameter-set order.
    pub fn csv_row(&self, trial: u64) -> String {
        let mut cols = vec![trial.to_string(), self.method.to_string(), self.chosen_label.clone()];
        cols.extend(self.xi.iter().map(|x| format!("{x:.8e}")));
        cols.join(",")
    }
}

/// Positions of the two interleaved groups. The first takes `ceil(K/2)`.
pub fn split_groups(k: usize) -> (Vec<usize>, Vec<usize>) {
    ((0..k).step_by(2).collect(), (1..k).step_by(2).collect())
}

/// Interpolators between the two interleaved groups.
#[derive(Debug, Clone)]
pub struct SplitInterpolator {
    first: Vec<usize>,
    second: Vec<usize>,
    /// Predicts the first group from the second.
    to_first: WienerMap,
    /// Predicts the second group from the first.
    to_second: WienerMap,
}

impl SplitInterpolator {
    pub fn new(r: &CorrelationVector, noise_var: f64, config: &OfdmConfig) -> Result<Self> {
        Self::with_preparation(r, noise_var, config, Preparation::Weights)
    }

    pub fn with_preparation(r: &CorrelationVector, noise_var: f64, config: &OfdmConfig, prep: Preparation) -> Result<Self> {
        let k = config.k();
        if k < 4 {
            return Err(Error::Argument(format!("split index needs at least 4 carriers, got {k}")));
        }
        r.ensure_fits(config)?;
        let (first, second) = split_groups(k);
        let to_first = group_map(r, noise_var, &first, &second, config, prep)?;
        let to_second = group_map(r, noise_var, &second, &first, config, prep)?;
        Ok(Self { first, second, to_first, to_second })
    }

    fn gather(ls: &[Complex64], pos: &[usize]) -> Vec<Complex64> {
        pos.iter().map(|&p| ls[p]).collect()
    }

    /// Group-interpolated values in carrier order.
    pub fn interpolate(&self, ls: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); ls.len()];
        let a = self.to_first.apply(&Self::gather(ls, &self.second));
        let b = self.to_second.apply(&Self::gather(ls, &self.first));
        for (&p, v) in self.first.iter().zip(a) {
            out[p] = v;
        }
        for (&p, v) in self.second.iter().zip(b) {
            out[p] = v;
        }
        out
    }

    pub fn index(&self, ls: &[Complex64]) -> f64 {
        let int = self.interpolate(ls);
        int.iter().zip(ls).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / ls.len() as f64
    }
}

fn group_map(
    r: &CorrelationVector,
    noise_var: f64,
    targets: &[usize],
    sources: &[usize],
    config: &OfdmConfig,
    prep: Preparation,
) -> Result<WienerMap> {
    let a = loaded_autocorrelation(r, sources, noise_var, config);
    let cross = CorrelationMatrixView::new(r, targets, sources).materialize(config);
    WienerMap::build(cross, &a, prep)
}

/// Index evaluator for one candidate at one noise level.
#[derive(Debug, Clone)]
pub enum IndexEvaluator {
    Full(LooInterpolator),
    Split(SplitInterpolator),
}

impl IndexEvaluator {
    pub fn new(r: &CorrelationVector, noise_var: f64, method: IndexMethod, config: &OfdmConfig) -> Result<Self> {
        Self::with_preparation(r, noise_var, method, config, Preparation::Weights)
    }

    /// The full index always needs the dense inverse; `prep` only affects the
    /// split index.
    pub fn with_preparation(r: &CorrelationVector, noise_var: f64, method: IndexMethod, config: &OfdmConfig, prep: Preparation) -> Result<Self> {
        if !(noise_var >= 0.0 && noise_var.is_finite()) {
            return Err(Error::Argument(format!("noise variance must be finite and >= 0, got {noise_var}")));
        }
        match method {
            IndexMethod::Full => {
                if config.k() < 2 {
                    return Err(Error::Argument("full index needs at least 2 carriers".into()));
                }
                Ok(IndexEvaluator::Full(LooInterpolator::new(r, noise_var, config)?))
            }
            IndexMethod::Split => Ok(IndexEvaluator::Split(SplitInterpolator::with_preparation(r, noise_var, config, prep)?)),
        }
    }

    pub fn index(&self, ls: &[Complex64]) -> f64 {
        match self {
            IndexEvaluator::Full(loo) => loo.residuals(ls).iter().map(|e| e.norm_sqr()).sum::<f64>() / ls.len() as f64,
            IndexEvaluator::Split(s) => s.index(ls),
        }
    }
}

fn check_obs(obs: &PilotObservation, config: &OfdmConfig) -> Result<()> {
    if obs.k() != config.k() {
        return Err(Error::Argument(format!("observation has {} carriers, grid has {}", obs.k(), config.k())));
    }
    Ok(())
}

/// Leave-one-out sampled noise MSE of candidate `r` on `obs`.
pub fn evaluation_index_full(obs: &PilotObservation, r: &CorrelationVector, config: &OfdmConfig) -> Result<f64> {
    check_obs(obs, config)?;
    Ok(IndexEvaluator::new(r, obs.noise_var, IndexMethod::Full, config)?.index(&obs.ls))
}

/// Interleaved-group sampled noise MSE of candidate `r` on `obs`: two
/// half-size solves.
pub fn evaluation_index_split(obs: &PilotObservation, r: &CorrelationVector, config: &OfdmConfig) -> Result<f64> {
    check_obs(obs, config)?;
    let ev = IndexEvaluator::with_preparation(r, obs.noise_var, IndexMethod::Split, config, Preparation::Factored)?;
    Ok(ev.index(&obs.ls))
}

pub fn evaluation_index(obs: &PilotObservation, r: &CorrelationVector, method: IndexMethod, config: &OfdmConfig) -> Result<f64> {
    match method {
        IndexMethod::Full => evaluation_index_full(obs, r, config),
        IndexMethod::Split => evaluation_index_split(obs, r, config),
    }
}

/// One candidate correlation at one noise level, with its index evaluator and
/// LMMSE filter built on first use. Can be shared between parameter sets and
/// threads.
#[derive(Debug)]
pub struct Candidate {
    r: CorrelationVector,
    noise_var: f64,
    method: IndexMethod,
    prep: Preparation,
    config: OfdmConfig,
    evaluator: OnceLock<Result<IndexEvaluator>>,
    filter: OnceLock<Result<LmmseFilter>>,
}

impl Candidate {
    pub fn new(r: CorrelationVector, noise_var: f64, method: IndexMethod, config: &OfdmConfig, prep: Preparation) -> Self {
        Self {
            r,
            noise_var,
            method,
            prep,
            config: config.clone(),
            evaluator: OnceLock::new(),
            filter: OnceLock::new(),
        }
    }

    /// Placeholder for a candidate that could not be constructed, e.g. a failed
    /// correlation estimate. It always scores `+inf` and never filters.
    pub fn unavailable(label: &str, reason: Error, method: IndexMethod, config: &OfdmConfig) -> Self {
        Self {
            r: CorrelationVector::white(label, config.lag_span()),
            noise_var: 0.0,
            method,
            prep: Preparation::Factored,
            config: config.clone(),
            evaluator: OnceLock::from(Err(reason.clone())),
            filter: OnceLock::from(Err(reason)),
        }
    }

    pub fn correlation(&self) -> &CorrelationVector {
        &self.r
    }

    pub fn label(&self) -> &str {
        self.r.label()
    }

    pub fn method(&self) -> IndexMethod {
        self.method
    }

    pub fn evaluator(&self) -> Result<&IndexEvaluator> {
        self.evaluator
            .get_or_init(|| IndexEvaluator::with_preparation(&self.r, self.noise_var, self.method, &self.config, self.prep))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn filter(&self) -> Result<&LmmseFilter> {
        self.filter
            .get_or_init(|| LmmseFilter::with_preparation(&self.r, self.noise_var, &self.config, self.prep))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Evaluation index on `ls`, `+inf` if the candidate cannot be scored.
    pub fn index(&self, ls: &[Complex64]) -> f64 {
        match self.evaluator() {
            Ok(ev) => {
                let x = ev.index(ls);
                if x.is_finite() {
                    x
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::INFINITY,
        }
    }
}

/// Parameter set prepared for one noise level.
#[derive(Debug)]
pub struct EnhancedEstimator {
    candidates: Vec<Arc<Candidate>>,
    method: IndexMethod,
    k: usize,
}

impl EnhancedEstimator {
    pub fn new(omega: ParameterSet, method: IndexMethod, noise_var: f64, config: &OfdmConfig) -> Result<Self> {
        Self::with_preparation(omega, method, noise_var, config, Preparation::Weights)
    }

    pub fn with_preparation(omega: ParameterSet, method: IndexMethod, noise_var: f64, config: &OfdmConfig, prep: Preparation) -> Result<Self> {
        if !(noise_var >= 0.0 && noise_var.is_finite()) {
            return Err(Error::Argument(format!("noise variance must be finite and >= 0, got {noise_var}")));
        }
        let candidates = omega
            .candidates()
            .iter()
            .map(|r| r.ensure_fits(config).map(|_| Arc::new(Candidate::new(r.clone(), noise_var, method, config, prep))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_candidates(candidates)
    }

    /// Assembles an estimator from already prepared candidates. Labels must be
    /// unique and all candidates must share one index method.
    pub fn from_candidates(candidates: Vec<Arc<Candidate>>) -> Result<Self> {
        let Some(first) = candidates.first() else {
            return Err(Error::Selection("parameter set is empty".into()));
        };
        let method = first.method;
        let k = first.config.k();
        for (i, c) in candidates.iter().enumerate() {
            if c.method != method || c.config.k() != k {
                return Err(Error::Argument(format!("candidate '{}' was prepared differently", c.label())));
            }
            if candidates[..i].iter().any(|d| d.label() == c.label()) {
                return Err(Error::Argument(format!("duplicate candidate label '{}'", c.label())));
            }
        }
        Ok(Self { candidates, method, k })
    }

    pub fn candidates(&self) -> &[Arc<Candidate>] {
        &self.candidates
    }

    pub fn labels(&self) -> Vec<&str> {
        self.candidates.iter().map(|c| c.label()).collect()
    }

    pub fn method(&self) -> IndexMethod {
        self.method
    }

    /// Scores every candidate on `ls` and picks the smallest, lowest position on ties.
    pub fn select(&self, ls: &[Complex64]) -> Result<SelectionReport> {
        if ls.len() != self.k {
            return Err(Error::Argument(format!("ls has {} carriers, grid has {}", ls.len(), self.k)));
        }
        let xi: Vec<f64> = self.candidates.iter().map(|c| c.index(ls)).collect();
        let mut best: Option<usize> = None;
        for (i, &x) in xi.iter().enumerate() {
            if x.is_finite() && best.is_none_or(|b| x < xi[b]) {
                best = Some(i);
            }
        }
        let Some(chosen_index) = best else {
            let reasons: Vec<String> = self
                .candidates
                .iter()
                .filter_map(|c| c.evaluator().err().map(|err| format!("{}: {err}", c.label())))
                .collect();
            return Err(Error::Selection(format!("every candidate failed ({})", reasons.join("; "))));
        };
        Ok(SelectionReport {
            chosen_label: self.candidates[chosen_index].label().to_string(),
            chosen_index,
            xi,
            method: self.method,
        })
    }

    pub fn filter(&self, idx: usize) -> Result<&LmmseFilter> {
        self.candidates[idx].filter()
    }

    /// Selection followed by LMMSE filtering with the chosen candidate.
    pub fn estimate(&self, ls: &[Complex64]) -> Result<(Vec<Complex64>, SelectionReport)> {
        let report = self.select(ls)?;
        let est = self.filter(report.chosen_index)?.apply(ls);
        Ok((est, report))
    }
}

/// Compares every candidate of `omega` on `obs`.
pub fn select_parameters(obs: &PilotObservation, omega: &ParameterSet, method: IndexMethod, config: &OfdmConfig) -> Result<SelectionReport> {
    check_obs(obs, config)?;
    EnhancedEstimator::with_preparation(omega.clone(), method, obs.noise_var, config, Preparation::Factored)?.select(&obs.ls)
}

/// Selection followed by LMMSE filtering with the winner.
pub fn enhanced_lmmse(
    obs: &PilotObservation,
    omega: &ParameterSet,
    method: IndexMethod,
    config: &OfdmConfig,
) -> Result<(Vec<Complex64>, SelectionReport)> {
    check_obs(obs, config)?;
    EnhancedEstimator::with_preparation(omega.clone(), method, obs.noise_var, config, Preparation::Factored)?.estimate(&obs.ls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_cir, cir_to_cfr, observe_pilot, ChannelModel};
    use crate::correlation::{model_correlation, robust_correlation};
    use crate::estimators::{interpolate_from, lmmse_filter};
    use crate::rng::{substream, StreamTag};

    fn flat_obs(k: usize) -> PilotObservation {
        let cfr = vec![Complex64::new(0.6, -0.8); k];
        let mut rng = substream(1, 0, StreamTag::Noise);
        observe_pilot(&cfr, f64::INFINITY, 3, &mut rng).unwrap()
    }

    fn small_cfg(k: usize) -> OfdmConfig {
        OfdmConfig::new(64, 16, (0..k).collect(), 1e-7).unwrap()
    }

    #[test]
    fn flat_noiseless_scores_zero() {
        let cfg = small_cfg(8);
        let obs = flat_obs(8);
        let r = CorrelationVector::flat("flat", cfg.lag_span());
        assert!(evaluation_index_full(&obs, &r, &cfg).unwrap() < 1e-12);
        assert!(evaluation_index_split(&obs, &r, &cfg).unwrap() < 1e-12);
    }

    #[test]
    fn white_candidate_scores_ls_power() {
        let cfg = small_cfg(9);
        let mut rng = substream(4, 0, StreamTag::Channel);
        let cfr: Vec<Complex64> = (0..9).map(|_| crate::rng::complex_gaussian(&mut rng, 1.0)).collect();
        let obs = observe_pilot(&cfr, 5.0, 7, &mut rng).unwrap();
        let white = CorrelationVector::white("white", cfg.lag_span());
        let p = obs.ls.iter().map(|z| z.norm_sqr()).sum::<f64>() / 9.0;
        assert!((evaluation_index_split(&obs, &white, &cfg).unwrap() - p).abs() < 1e-14);
        assert!((evaluation_index_full(&obs, &white, &cfg).unwrap() - p).abs() < 1e-12);
    }

    #[test]
    fn split_matches_explicit_block_solves() {
        let cfg = OfdmConfig::symmetric_band(32, 8, 8, 1e-7).unwrap();
        let r = robust_correlation(4, &cfg).unwrap();
        let ls: Vec<Complex64> = (0..8).map(|i| Complex64::new((i as f64).cos(), (2.0 * i as f64).sin())).collect();
        let (g1, g2) = split_groups(8);
        let ls1: Vec<_> = g1.iter().map(|&p| ls[p]).collect();
        let ls2: Vec<_> = g2.iter().map(|&p| ls[p]).collect();
        let i1 = interpolate_from(&ls2, &g2, &g1, &r, 0.4, &cfg).unwrap();
        let i2 = interpolate_from(&ls1, &g1, &g2, &r, 0.4, &cfg).unwrap();
        let want = (i1.iter().zip(&ls1).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()
            + i2.iter().zip(&ls2).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>())
            / 8.0;
        let got = SplitInterpolator::new(&r, 0.4, &cfg).unwrap().index(&ls);
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn odd_split_sizes() {
        let (a, b) = split_groups(7);
        assert_eq!(a, vec![0, 2, 4, 6]);
        assert_eq!(b, vec![1, 3, 5]);
    }

    #[test]
    fn singleton_and_ties() {
        let cfg = small_cfg(8);
        let obs = flat_obs(8);
        let r = robust_correlation(3, &cfg).unwrap();
        let one = ParameterSet::new(vec![r.clone()]).unwrap();
        assert_eq!(select_parameters(&obs, &one, IndexMethod::Split, &cfg).unwrap().chosen_index, 0);
        let twins = ParameterSet::new(vec![r.clone().with_label("a"), r.with_label("b")]).unwrap();
        let rep = select_parameters(&obs, &twins, IndexMethod::Full, &cfg).unwrap();
        assert_eq!(rep.chosen_index, 0);
        assert_eq!(rep.chosen_label, "a");
    }

    #[test]
    fn singleton_enhanced_is_plain_lmmse() {
        let cfg = OfdmConfig::symmetric_band(64, 16, 24, 1e-7).unwrap();
        let model = ChannelModel::pedestrian_a();
        let r = model_correlation(&model, &cfg).unwrap();
        let mut rng = substream(9, 0, StreamTag::Channel);
        let cfr = cir_to_cfr(&build_cir(&model, &cfg, &mut rng).unwrap(), &cfg);
        let obs = observe_pilot(&cfr, 10.0, 1, &mut rng).unwrap();
        let (est, rep) = enhanced_lmmse(&obs, &ParameterSet::new(vec![r.clone()]).unwrap(), IndexMethod::Split, &cfg).unwrap();
        let plain = lmmse_filter(&obs.ls, &r, obs.noise_var, &cfg).unwrap();
        assert_eq!(rep.chosen_index, 0);
        for (a, b) in est.iter().zip(&plain) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn noiseless_enhanced_returns_ls() {
        let cfg = small_cfg(8);
        let obs = flat_obs(8);
        let omega = ParameterSet::new(vec![CorrelationVector::white("white", cfg.lag_span()), robust_correlation(2, &cfg).unwrap()]).unwrap();
        let (est, _) = enhanced_lmmse(&obs, &omega, IndexMethod::Split, &cfg).unwrap();
        for (a, b) in est.iter().zip(&obs.ls) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn method_parse_and_report_row() {
        assert_eq!("Full".parse::<IndexMethod>().unwrap(), IndexMethod::Full);
        assert_eq!(IndexMethod::default(), IndexMethod::Split);
        assert!("loo".parse::<IndexMethod>().is_err());
        let rep = SelectionReport { chosen_label: "x".into(), chosen_index: 1, xi: vec![0.5, 0.25], method: IndexMethod::Split };
        assert_eq!(SelectionReport::csv_header(&["w", "x"]), "trial,method,chosen_label,xi[w],xi[x]");
        assert_eq!(rep.csv_row(3), "3,split,x,5.00000000e-1,2.50000000e-1");
        assert!(rep.failed().is_empty());
    }
}
