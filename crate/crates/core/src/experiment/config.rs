//! Scenario configuration files and their resolution into runnable plans.
//!
//! A configuration is a TOML document. Everything except `scenario` has a
//! default taken from the scenario's recipe, so a one-line file is a valid run.
//! The full schema is described in `configs/README.md`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelModel, Tap};
use crate::correlation::{
    model_correlation, robust_correlation, sto_average_correlation, sto_shift_correlation, CorrelationVector, StoDistribution,
};
use crate::error::{Error, Result};
use crate::ofdm::OfdmConfig;
use crate::selector::IndexMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Channel statistics known up to which model is active.
    KnownStats,
    /// Known statistics plus a random timing offset.
    Sto,
    /// Correlation estimated from the symbols of a stationary period.
    EstimatedCorr,
    /// Only robust correlations with different delay assumptions.
    NoPrior,
    /// Two-candidate comparison checked against the false-comparison theory.
    TheoryValidation,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::KnownStats => "known_stats",
            Scenario::Sto => "sto",
            Scenario::EstimatedCorr => "estimated_corr",
            Scenario::NoPrior => "no_prior",
            Scenario::TheoryValidation => "theory_validation",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Grid section. Either `k_len` (a symmetric band around a nulled DC) or an
/// explicit `usable` list of bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmSpec {
    #[serde(default = "default_n_fft")]
    pub n_fft: usize,
    #[serde(default = "default_cp_len")]
    pub cp_len: usize,
    #[serde(default = "default_sample_time")]
    pub sample_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usable: Option<Vec<usize>>,
}

fn default_n_fft() -> usize {
    512
}
fn default_cp_len() -> usize {
    128
}
fn default_sample_time() -> f64 {
    1e-7
}
fn default_true() -> bool {
    true
}

impl Default for OfdmSpec {
    fn default() -> Self {
        Self { n_fft: default_n_fft(), cp_len: default_cp_len(), sample_time: default_sample_time(), k_len: None, usable: None }
    }
}

impl OfdmSpec {
    pub fn build(&self, default_k: usize) -> Result<OfdmConfig> {
        match (&self.usable, self.k_len) {
            (Some(_), Some(_)) => Err(Error::Config("ofdm: give either k_len or usable, not both".into())),
            (Some(u), None) => OfdmConfig::new(self.n_fft, self.cp_len, u.clone(), self.sample_time),
            (None, k) => OfdmConfig::symmetric_band(self.n_fft, self.cp_len, k.unwrap_or(default_k), self.sample_time),
        }
    }
}

/// Timing-offset distribution: `uniform = [lo, hi]`, or `support` with an
/// optional `pmf` (uniform when omitted).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmf: Option<Vec<f64>>,
}

impl StoSpec {
    pub fn build(&self) -> Result<StoDistribution> {
        let res = match (&self.uniform, &self.support, &self.pmf) {
            (Some([lo, hi]), None, None) => StoDistribution::uniform(*lo, *hi),
            (None, Some(s), None) => StoDistribution::new(s.clone(), normalized(&vec![1.0; s.len()])),
            (None, Some(s), Some(p)) => StoDistribution::new(s.clone(), p.clone()),
            _ => return Err(Error::Config("sto_dist: give `uniform = [lo, hi]` or `support` (with optional `pmf`)".into())),
        };
        res.map_err(|e| Error::Config(format!("sto_dist: {e}")))
    }
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let mut p: Vec<f64> = w.iter().map(|x| x / w.iter().sum::<f64>()).collect();
    let err = 1.0 - p.iter().sum::<f64>();
    if let Some(first) = p.first_mut() {
        *first += err;
    }
    p
}

/// Timing offsets to add shifted copies for: a list, or `"all"` for the
/// support of the scenario's STO distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShiftSpec {
    Keyword(String),
    List(Vec<i64>),
}

/// One entry of a parameter set. Exactly one of `model`, `robust` or
/// `estimated` names the base correlation; `sto_shifts` and `sto_average` add
/// timing-offset variants of it, and `base = false` drops the unshifted one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// Maximum delay in samples of a uniform PDP starting at zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robust: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub estimated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sto_shifts: Option<ShiftSpec>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub sto_average: bool,
    #[serde(default = "default_true")]
    pub base: bool,
}

impl CandidateSpec {
    pub fn model(name: &str) -> Self {
        Self { model: Some(name.into()), robust: None, estimated: false, sto_shifts: None, sto_average: false, base: true }
    }

    pub fn robust(tau: usize) -> Self {
        Self { model: None, robust: Some(tau), estimated: false, sto_shifts: None, sto_average: false, base: true }
    }

    pub fn estimated() -> Self {
        Self { model: None, robust: None, estimated: true, sto_shifts: None, sto_average: false, base: true }
    }

    pub fn with_shifts(mut self, shifts: ShiftSpec) -> Self {
        self.sto_shifts = Some(shifts);
        self
    }

    pub fn with_average(mut self) -> Self {
        self.sto_average = true;
        self
    }

    pub fn without_base(mut self) -> Self {
        self.base = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaSpec {
    pub name: String,
    pub candidates: Vec<CandidateSpec>,
}

/// A campaign description as read from a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub ofdm: OfdmSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_grid_db: Option<Vec<f64>>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<IndexMethod>,
    /// Models the true channel is drawn from, uniformly per trial (per period
    /// for `estimated_corr`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_models: Option<Vec<String>>,
    /// Extra models as `name = [[delay_ns, power_db], ...]`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub custom_models: BTreeMap<String, Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sto_dist: Option<StoSpec>,
    /// Turns the timing offset off for scenarios that have one by default.
    #[serde(default = "default_true")]
    pub sto_enabled: bool,
    /// Symbols per stationary period, `estimated_corr` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary_period: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub omega: Vec<OmegaSpec>,
    /// Reference methods run next to the enhanced estimators: `ls`,
    /// `lmmse_oracle`, `lmmse_robust`, `lmmse_robust:<tau>`,
    /// `lmmse_model:<name>`, `lmmse_estimated`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baselines: Option<Vec<String>>,
}

fn default_trials() -> usize {
    500
}
fn default_seed() -> u64 {
    1
}

impl ScenarioConfig {
    /// A configuration with every optional field left to the recipe defaults.
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            ofdm: OfdmSpec::default(),
            snr_grid_db: None,
            trials: default_trials(),
            master_seed: default_seed(),
            method: None,
            channel_models: None,
            custom_models: BTreeMap::new(),
            sto_dist: None,
            sto_enabled: true,
            stationary_period: None,
            omega: Vec::new(),
            baselines: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Fills recipe defaults and builds every correlation, failing before any
    /// trial runs if something does not resolve.
    pub fn resolve(&self) -> Result<Plan> {
        Plan::build(self)
    }
}

/// A parameter-set entry after resolution.
#[derive(Debug, Clone, PartialEq)]
pub enum OmegaEntry {
    /// A correlation fixed for the whole campaign, by label.
    Fixed(String),
    /// Re-estimated for every stationary period.
    Estimated,
}

/// Label used for the estimated candidate.
pub const ESTIMATED_LABEL: &str = "estimated";

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedOmega {
    pub name: String,
    pub entries: Vec<OmegaEntry>,
}

impl ResolvedOmega {
    pub fn labels(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|e| match e {
                OmegaEntry::Fixed(l) => l.clone(),
                OmegaEntry::Estimated => ESTIMATED_LABEL.to_string(),
            })
            .collect()
    }

    pub fn has_estimated(&self) -> bool {
        self.entries.contains(&OmegaEntry::Estimated)
    }

    pub fn method_name(&self) -> String {
        format!("enhanced:{}", self.name)
    }
}

/// Reference estimators.
#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    Ls,
    /// LMMSE with the trial's true effective correlation.
    Oracle,
    Fixed { method: String, label: String },
    /// LMMSE with the period's estimated correlation, robust when estimation fails.
    Estimated,
}

impl Baseline {
    pub fn method_name(&self) -> String {
        match self {
            Baseline::Ls => "ls".into(),
            Baseline::Oracle => "lmmse_oracle".into(),
            Baseline::Fixed { method, .. } => method.clone(),
            Baseline::Estimated => "lmmse_estimated".into(),
        }
    }
}

/// Fully resolved campaign.
#[derive(Debug, Clone)]
pub struct Plan {
    pub scenario: Scenario,
    pub ofdm: OfdmConfig,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    pub method: IndexMethod,
    pub models: Vec<ChannelModel>,
    pub sto: Option<StoDistribution>,
    pub stationary_period: usize,
    pub omegas: Vec<ResolvedOmega>,
    pub baselines: Vec<Baseline>,
    /// Every fixed correlation the campaign may use, by label.
    pub correlations: BTreeMap<String, CorrelationVector>,
    /// Label of the CP-wide robust correlation, the estimation fallback.
    pub robust_label: String,
}

/// Label of model `name` under timing offset `theta`.
pub fn effective_label(name: &str, theta: i64) -> String {
    if theta == 0 {
        name.to_string()
    } else {
        format!("{name}@sto{theta}")
    }
}

impl Plan {
    fn build(cfg: &ScenarioConfig) -> Result<Self> {
        let sc = cfg.scenario;
        if cfg.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let ofdm = cfg.ofdm.build(if sc == Scenario::TheoryValidation { 160 } else { 408 })?;
        let snr_grid_db = cfg.snr_grid_db.clone().unwrap_or_else(|| match sc {
            Scenario::EstimatedCorr => vec![0.0],
            Scenario::TheoryValidation => vec![0.0, 2.0, 4.0, 6.0, 8.0],
            _ => vec![0.0, 10.0, 20.0],
        });
        if snr_grid_db.is_empty() {
            return Err(Error::Config("snr_grid_db is empty".into()));
        }
        if snr_grid_db.iter().any(|s| s.is_nan()) {
            return Err(Error::Config("snr_grid_db contains NaN".into()));
        }
        let method = cfg.method.unwrap_or(if sc == Scenario::TheoryValidation && cfg.trials <= 500 {
            IndexMethod::Full
        } else {
            IndexMethod::Split
        });

        let lookup = |name: &str| -> Result<ChannelModel> {
            if let Some(rows) = cfg.custom_models.get(name) {
                let taps = rows.iter().map(|[ns, db]| Tap { delay: ns * 1e-9, power_db: *db }).collect();
                return ChannelModel::new(name, taps);
            }
            ChannelModel::builtin(name).ok_or_else(|| Error::Config(format!("unknown channel model '{name}'")))
        };
        let model_names: Vec<String> = cfg.channel_models.clone().unwrap_or_else(|| match sc {
            Scenario::TheoryValidation => vec!["office_b".into()],
            _ => vec!["office_b".into(), "pedestrian_a".into(), "pedestrian_b".into()],
        });
        if model_names.is_empty() {
            return Err(Error::Config("channel_models is empty".into()));
        }
        let models = model_names.iter().map(|n| lookup(n)).collect::<Result<Vec<_>>>()?;

        let sto = if !cfg.sto_enabled {
            None
        } else {
            match (&cfg.sto_dist, sc) {
                (Some(spec), _) => Some(spec.build()?),
                (None, Scenario::Sto | Scenario::EstimatedCorr | Scenario::NoPrior) => Some(StoDistribution::uniform(-10, 0)?),
                (None, _) => None,
            }
        };

        let stationary_period = match (cfg.stationary_period, sc) {
            (Some(0), _) => return Err(Error::Config("stationary_period must be at least 1".into())),
            (Some(m), Scenario::EstimatedCorr) => m,
            (None, Scenario::EstimatedCorr) => 8,
            (Some(_), _) => return Err(Error::Config("stationary_period applies to estimated_corr only".into())),
            (None, _) => 1,
        };

        let cp = ofdm.cp_len();
        let mut correlations = BTreeMap::new();
        let robust = robust_correlation(cp, &ofdm)?;
        let robust_label = robust.label().to_string();
        correlations.insert(robust_label.clone(), robust);

        // true effective correlations, for the oracle and for ground truth
        for m in &models {
            let base = model_correlation(m, &ofdm)?;
            if let Some(d) = &sto {
                for &theta in d.support() {
                    if theta != 0 {
                        let r = sto_shift_correlation(&base, theta, &ofdm).with_label(effective_label(m.name(), theta));
                        correlations.insert(r.label().to_string(), r);
                    }
                }
            }
            correlations.insert(m.name().to_string(), base);
        }

        let omega_specs = if cfg.omega.is_empty() { default_omegas(sc, cp) } else { cfg.omega.clone() };
        let mut omegas = Vec::new();
        for spec in &omega_specs {
            if omegas.iter().any(|o: &ResolvedOmega| o.name == spec.name) {
                return Err(Error::Config(format!("duplicate parameter set name '{}'", spec.name)));
            }
            let mut entries = Vec::new();
            for cand in &spec.candidates {
                for e in expand_candidate(cand, &ofdm, sto.as_ref(), &lookup, &mut correlations, &spec.name)? {
                    if entries.contains(&e) {
                        return Err(Error::Config(format!("parameter set '{}' lists {:?} twice", spec.name, e)));
                    }
                    entries.push(e);
                }
            }
            if entries.is_empty() {
                return Err(Error::Config(format!("parameter set '{}' is empty", spec.name)));
            }
            if entries.contains(&OmegaEntry::Estimated) && sc != Scenario::EstimatedCorr {
                return Err(Error::Config("estimated candidates need the estimated_corr scenario".into()));
            }
            omegas.push(ResolvedOmega { name: spec.name.clone(), entries });
        }
        if sc == Scenario::TheoryValidation && omegas.iter().any(|o| o.entries.len() != 2) {
            return Err(Error::Config("theory_validation compares exactly two candidates".into()));
        }

        let baseline_names = cfg.baselines.clone().unwrap_or_else(|| default_baselines(sc, cp));
        let mut baselines = Vec::new();
        for name in &baseline_names {
            let b = parse_baseline(name, &ofdm, &lookup, &mut correlations)?;
            if b == Baseline::Estimated && sc != Scenario::EstimatedCorr {
                return Err(Error::Config("lmmse_estimated needs the estimated_corr scenario".into()));
            }
            if baselines.iter().any(|x: &Baseline| x.method_name() == b.method_name()) {
                return Err(Error::Config(format!("baseline '{name}' listed twice")));
            }
            baselines.push(b);
        }

        Ok(Self {
            scenario: sc,
            ofdm,
            snr_grid_db,
            trials: cfg.trials,
            master_seed: cfg.master_seed,
            method,
            models,
            sto,
            stationary_period,
            omegas,
            baselines,
            correlations,
            robust_label,
        })
    }

    /// Report method names in output order: baselines, then parameter sets.
    pub fn method_names(&self) -> Vec<String> {
        self.baselines
            .iter()
            .map(Baseline::method_name)
            .chain(self.omegas.iter().map(ResolvedOmega::method_name))
            .collect()
    }
}

fn expand_candidate(
    cand: &CandidateSpec,
    ofdm: &OfdmConfig,
    sto: Option<&StoDistribution>,
    lookup: &dyn Fn(&str) -> Result<ChannelModel>,
    store: &mut BTreeMap<String, CorrelationVector>,
    set: &str,
) -> Result<Vec<OmegaEntry>> {
    let ctx = |msg: String| Error::Config(format!("parameter set '{set}': {msg}"));
    let base = match (&cand.model, cand.robust, cand.estimated) {
        (Some(name), None, false) => model_correlation(&lookup(name).map_err(|e| ctx(e.to_string()))?, ofdm)?,
        (None, Some(tau), false) => robust_correlation(tau, ofdm).map_err(|e| ctx(e.to_string()))?,
        (None, None, true) => {
            if cand.sto_shifts.is_some() || cand.sto_average || !cand.base {
                return Err(ctx("the estimated candidate takes no STO variants".into()));
            }
            return Ok(vec![OmegaEntry::Estimated]);
        }
        _ => return Err(ctx("each candidate needs exactly one of model, robust or estimated".into())),
    };
    let mut out = Vec::new();
    let mut push = |r: CorrelationVector, out: &mut Vec<OmegaEntry>| {
        out.push(OmegaEntry::Fixed(r.label().to_string()));
        store.insert(r.label().to_string(), r);
    };
    if cand.base {
        push(base.clone(), &mut out);
    }
    let shifts: Vec<i64> = match &cand.sto_shifts {
        None => Vec::new(),
        Some(ShiftSpec::List(v)) => v.clone(),
        Some(ShiftSpec::Keyword(k)) if k == "all" => match sto {
            Some(d) => d.support().to_vec(),
            None => return Err(ctx("sto_shifts = \"all\" needs an STO distribution".into())),
        },
        Some(ShiftSpec::Keyword(k)) => return Err(ctx(format!("unknown sto_shifts keyword '{k}'"))),
    };
    for theta in shifts {
        if theta == 0 {
            // the unshifted correlation is the base one
            if !cand.base {
                push(base.clone(), &mut out);
            }
            continue;
        }
        let r = sto_shift_correlation(&base, theta, ofdm).with_label(effective_label(base.label(), theta));
        push(r, &mut out);
    }
    if cand.sto_average {
        let Some(d) = sto else {
            return Err(ctx("sto_average needs an STO distribution".into()));
        };
        push(sto_average_correlation(&base, d, ofdm), &mut out);
    }
    if out.is_empty() {
        return Err(ctx("candidate expands to nothing".into()));
    }
    Ok(out)
}

fn parse_baseline(
    name: &str,
    ofdm: &OfdmConfig,
    lookup: &dyn Fn(&str) -> Result<ChannelModel>,
    store: &mut BTreeMap<String, CorrelationVector>,
) -> Result<Baseline> {
    let (kind, arg) = match name.split_once(':') {
        Some((k, a)) => (k.trim(), Some(a.trim())),
        None => (name.trim(), None),
    };
    let fixed = |r: CorrelationVector, store: &mut BTreeMap<String, CorrelationVector>| {
        let label = r.label().to_string();
        store.insert(label.clone(), r);
        Baseline::Fixed { method: name.trim().to_string(), label }
    };
    Ok(match (kind, arg) {
        ("ls", None) => Baseline::Ls,
        ("lmmse_oracle", None) => Baseline::Oracle,
        ("lmmse_estimated", None) => Baseline::Estimated,
        ("lmmse_robust", None) => fixed(robust_correlation(ofdm.cp_len(), ofdm)?, store),
        ("lmmse_robust", Some(tau)) => {
            let tau: usize = tau.parse().map_err(|_| Error::Config(format!("baseline '{name}': bad tau")))?;
            fixed(robust_correlation(tau, ofdm).map_err(|e| Error::Config(format!("baseline '{name}': {e}")))?, store)
        }
        ("lmmse_model", Some(m)) => fixed(model_correlation(&lookup(m)?, ofdm)?, store),
        _ => return Err(Error::Config(format!("unknown baseline '{name}'"))),
    })
}

fn default_baselines(sc: Scenario, cp: usize) -> Vec<String> {
    let mut v: Vec<String> = vec!["ls".into(), "lmmse_oracle".into()];
    match sc {
        Scenario::KnownStats | Scenario::Sto => v.push("lmmse_robust".into()),
        Scenario::EstimatedCorr => {
            v.push("lmmse_robust".into());
            v.push("lmmse_estimated".into());
        }
        Scenario::NoPrior => {
            for tau in [cp, cp / 4, cp / 16] {
                v.push(format!("lmmse_robust:{}", tau.max(1)));
            }
        }
        Scenario::TheoryValidation => {}
    }
    v
}

/// Parameter sets of each scenario's recipe.
pub fn default_omegas(sc: Scenario, cp: usize) -> Vec<OmegaSpec> {
    let models = ["office_b", "pedestrian_a", "pedestrian_b"];
    let set = |name: &str, candidates: Vec<CandidateSpec>| OmegaSpec { name: name.into(), candidates };
    match sc {
        Scenario::KnownStats => vec![
            set(
                "complete",
                models.iter().map(|m| CandidateSpec::model(m)).chain([CandidateSpec::robust(cp)]).collect(),
            ),
            set(
                "incomplete",
                vec![CandidateSpec::model("office_b"), CandidateSpec::model("pedestrian_a"), CandidateSpec::robust(cp)],
            ),
        ],
        Scenario::Sto => vec![
            set(
                "omega1",
                models
                    .iter()
                    .map(|m| CandidateSpec::model(m).with_shifts(ShiftSpec::Keyword("all".into())).with_average())
                    .collect(),
            ),
            set(
                "omega2",
                models
                    .iter()
                    .map(|m| CandidateSpec::model(m).with_shifts(ShiftSpec::List((-5..=-1).collect())).with_average())
                    .collect(),
            ),
            set("omega3", models.iter().map(|m| CandidateSpec::model(m).without_base().with_average()).collect()),
        ],
        Scenario::EstimatedCorr => vec![set("selected", vec![CandidateSpec::estimated(), CandidateSpec::robust(cp)])],
        Scenario::NoPrior => vec![set(
            "robust_set",
            [cp, cp / 4, cp / 16]
                .iter()
                .map(|&t| CandidateSpec::robust(t.max(1)).with_shifts(ShiftSpec::List((-5..=-1).collect())))
                .collect(),
        )],
        Scenario::TheoryValidation => {
            vec![set("theory", vec![CandidateSpec::model("office_b"), CandidateSpec::model("pedestrian_b")])]
        }
    }
}
