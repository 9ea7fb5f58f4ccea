//! CFR frequency-correlation vectors: the candidate parameters of the enhanced
//! estimator.
//!
//! A [`CorrelationVector`] stores `r(d) = E[h_{k+d} conj(h_k)]` for the
//! non-negative lags `d = 0 .. lag_span`; negative lags follow from Hermitian
//! symmetry. Every correlation here comes from a power delay profile on the
//! integer sample grid, via `r(d) = sum_l p_l exp(-j 2 pi d l / N)`.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use crate::channel::{ChannelModel, PilotObservation};
use crate::error::{Error, Result};
use crate::ofdm::OfdmConfig;

/// Non-negative power per integer sample delay `0..L`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    powers: Vec<f64>,
}

impl PowerDelayProfile {
    /// Builds a profile and normalizes it to unit total power.
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() {
            return Err(Error::Argument("empty power delay profile".into()));
        }
        if powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Argument("PDP powers must be finite and non-negative".into()));
        }
        let total: f64 = powers.iter().sum();
        if total <= 0.0 {
            return Err(Error::Argument("PDP has zero total power".into()));
        }
        Ok(Self { powers: powers.into_iter().map(|p| p / total).collect() })
    }

    /// Uniform power on the inclusive delay window `[first, last]`.
    pub fn uniform(first: usize, last: usize) -> Result<Self> {
        if last < first {
            return Err(Error::Argument(format!("empty delay window [{first}, {last}]")));
        }
        let mut p = vec![0.0; last + 1];
        for v in &mut p[first..] {
            *v = 1.0;
        }
        Self::new(p)
    }

    pub fn from_model(model: &ChannelModel, config: &OfdmConfig) -> Result<Self> {
        let taps = model.quantized(config)?;
        let mut p = vec![0.0; taps.last().unwrap().0 + 1];
        for (d, w) in taps {
            p[d] += w;
        }
        Self::new(p)
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }
}

/// Correlation of the CFR at carrier spacings `0..lag_span`, with a label.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationVector {
    label: String,
    values: Vec<Complex64>,
}

impl CorrelationVector {
    pub fn new(label: impl Into<String>, values: Vec<Complex64>) -> Result<Self> {
        let label = label.into();
        if values.is_empty() {
            return Err(Error::Argument(format!("correlation {label}: no values")));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Argument(format!("correlation {label}: non-finite value")));
        }
        let r0 = values[0];
        if !(r0.re > 0.0) || r0.im.abs() > 1e-9 * r0.re.max(1.0) {
            return Err(Error::Argument(format!("correlation {label}: r[0] must be real and positive")));
        }
        let bound = r0.re * (1.0 + 1e-9);
        if values.iter().any(|z| z.norm() > bound) {
            return Err(Error::Argument(format!("correlation {label}: |r[d]| exceeds r[0]")));
        }
        Ok(Self { label, values })
    }

    /// Delta correlation: independent carriers.
    pub fn white(label: impl Into<String>, len: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); len.max(1)];
        v[0] = Complex64::new(1.0, 0.0);
        Self { label: label.into(), values: v }
    }

    /// Fully coherent channel, `r = 1` at every lag.
    pub fn flat(label: impl Into<String>, len: usize) -> Self {
        Self { label: label.into(), values: vec![Complex64::new(1.0, 0.0); len.max(1)] }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `r(lag)` for a signed lag, using `r(-d) = conj(r(d))`.
    ///
    /// Panics when `|lag|` is outside the stored range.
    #[inline]
    pub fn at(&self, lag: i64) -> Complex64 {
        if lag >= 0 {
            self.values[lag as usize]
        } else {
            self.values[(-lag) as usize].conj()
        }
    }

    fn check_grid(&self, config: &OfdmConfig) -> Result<()> {
        if self.len() < config.lag_span() {
            return Err(Error::Argument(format!(
                "correlation {} covers {} lags, grid needs {}",
                self.label,
                self.len(),
                config.lag_span()
            )));
        }
        Ok(())
    }

    pub fn ensure_fits(&self, config: &OfdmConfig) -> Result<()> {
        self.check_grid(config)
    }
}

/// `r(d) = sum_l p_l exp(-j 2 pi d l / N)` for `d = 0 .. lag_span`.
pub fn pdp_to_correlation(pdp: &PowerDelayProfile, config: &OfdmConfig, label: impl Into<String>) -> CorrelationVector {
    let n = config.n_fft() as f64;
    let taps: Vec<(f64, f64)> = pdp
        .powers()
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(l, p)| (l as f64, *p))
        .collect();
    let values = (0..config.lag_span())
        .map(|d| {
            taps.iter()
                .map(|&(l, p)| Complex64::from_polar(p, -2.0 * PI * d as f64 * l / n))
                .sum()
        })
        .collect();
    CorrelationVector { label: label.into(), values }
}

/// Correlation of a uniform PDP on `[0, tau_max_samples)`.
pub fn robust_correlation(tau_max_samples: usize, config: &OfdmConfig) -> Result<CorrelationVector> {
    if tau_max_samples == 0 || tau_max_samples > config.cp_len() {
        return Err(Error::Argument(format!(
            "tau_max must be in [1, cp_len = {}], got {tau_max_samples}",
            config.cp_len()
        )));
    }
    let pdp = PowerDelayProfile::uniform(0, tau_max_samples - 1)?;
    Ok(pdp_to_correlation(&pdp, config, format!("robust{tau_max_samples}")))
}

/// Effective correlation under a timing offset of `theta` samples.
pub fn sto_shift_correlation(r: &CorrelationVector, theta: i64, config: &OfdmConfig) -> CorrelationVector {
    let n = config.n_fft() as f64;
    let values = r
        .values
        .iter()
        .enumerate()
        .map(|(d, v)| v * Complex64::from_polar(1.0, -2.0 * PI * theta as f64 * d as f64 / n))
        .collect();
    CorrelationVector { label: format!("{}@sto{theta}", r.label), values }
}

/// Discrete distribution of the timing offset.
#[derive(Debug, Clone, PartialEq)]
pub struct StoDistribution {
    support: Vec<i64>,
    pmf: Vec<f64>,
}

impl StoDistribution {
    pub fn new(support: Vec<i64>, pmf: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != pmf.len() {
            return Err(Error::Argument("STO support and pmf must be non-empty and equal length".into()));
        }
        if pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Argument("STO probabilities must be non-negative".into()));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!("STO probabilities sum to {total}, not 1")));
        }
        let uniq: HashSet<_> = support.iter().collect();
        if uniq.len() != support.len() {
            return Err(Error::Argument("duplicate STO support value".into()));
        }
        Ok(Self { support, pmf })
    }

    /// Equal mass on every integer in `[lo, hi]`.
    pub fn uniform(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(Error::Argument(format!("empty STO range [{lo}, {hi}]")));
        }
        let support: Vec<i64> = (lo..=hi).collect();
        let n = support.len();
        let mut pmf = vec![1.0 / n as f64; n];
        // absorb rounding so the total is 1 to the last ulp
        let err = 1.0 - pmf.iter().sum::<f64>();
        pmf[0] += err;
        Self::new(support, pmf)
    }

    pub fn point(theta: i64) -> Self {
        Self { support: vec![theta], pmf: vec![1.0] }
    }

    pub fn support(&self) -> &[i64] {
        &self.support
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (s, p) in self.support.iter().zip(&self.pmf) {
            acc += p;
            if u < acc {
                return *s;
            }
        }
        *self.support.last().unwrap()
    }

    /// `E[exp(-j 2 pi d theta / N)]` for lag `d`.
    pub fn characteristic(&self, lag: f64, n_fft: usize) -> Complex64 {
        self.support
            .iter()
            .zip(&self.pmf)
            .map(|(t, p)| Complex64::from_polar(*p, -2.0 * PI * lag * *t as f64 / n_fft as f64))
            .sum()
    }
}

/// Correlation averaged over the STO distribution:
/// `r(d) * sum_theta p(theta) exp(-j 2 pi d theta / N)`.
pub fn sto_average_correlation(r: &CorrelationVector, dist: &StoDistribution, config: &OfdmConfig) -> CorrelationVector {
    let values = r
        .values
        .iter()
        .enumerate()
        .map(|(d, v)| v * dist.characteristic(d as f64, config.n_fft()))
        .collect();
    CorrelationVector { label: format!("{}@sto_avg", r.label), values }
}

/// Outcome of threshold-based path detection.
#[derive(Debug, Clone, PartialEq)]
pub struct PathDetection {
    pub threshold: f64,
    /// Power per scanned delay, averaged over the symbols.
    pub avg_power: Vec<f64>,
    pub first_delay: usize,
    pub last_delay: usize,
}

/// Threshold path detection on the CIR estimates of `observations`.
///
/// Each LS CFR is zero-filled on the virtual carriers and inverse transformed; the
/// first `cp_len` samples are scanned. The threshold is
/// `sqrt(2) / (M cp_len) * sum_m sum_n |h_t[n, m]|^2`, and a delay is a path when its
/// power averaged over the M symbols exceeds it.
pub fn detect_paths(observations: &[PilotObservation], config: &OfdmConfig) -> Result<PathDetection> {
    if observations.is_empty() {
        return Err(Error::Argument("correlation estimation needs at least one symbol".into()));
    }
    let n = config.n_fft();
    let scan = config.cp_len();
    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(n);
    let mut avg_power = vec![0.0; scan];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for obs in observations {
        if obs.k() != config.k() {
            return Err(Error::Argument(format!("observation has {} carriers, grid has {}", obs.k(), config.k())));
        }
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (pos, &bin) in config.usable().iter().enumerate() {
            buf[bin] = obs.ls[pos];
        }
        ifft.process(&mut buf);
        for (acc, z) in avg_power.iter_mut().zip(&buf[..scan]) {
            *acc += (z / n as f64).norm_sqr();
        }
    }
    let m = observations.len() as f64;
    avg_power.iter_mut().for_each(|p| *p /= m);
    let threshold = std::f64::consts::SQRT_2 * avg_power.iter().sum::<f64>() / scan as f64;
    let mut marked = avg_power.iter().enumerate().filter(|(_, p)| **p > threshold).map(|(d, _)| d);
    let Some(first_delay) = marked.next() else {
        return Err(Error::EstimationFailed { threshold });
    };
    let last_delay = marked.next_back().unwrap_or(first_delay);
    Ok(PathDetection { threshold, avg_power, first_delay, last_delay })
}

/// Correlation of the uniform PDP spanning the detected paths `[tau_0, tau_max]`.
pub fn estimate_correlation(observations: &[PilotObservation], config: &OfdmConfig) -> Result<CorrelationVector> {
    let det = detect_paths(observations, config)?;
    Ok(estimated_window_correlation(det.first_delay, det.last_delay, config))
}

/// Correlation of a uniform PDP on `[first, last]`, labelled `estimated`.
pub fn estimated_window_correlation(first: usize, last: usize, config: &OfdmConfig) -> CorrelationVector {
    let pdp = PowerDelayProfile::uniform(first, last).expect("window is non-empty");
    pdp_to_correlation(&pdp, config, "estimated")
}

/// Correlation implied by a channel model's quantized, normalized PDP.
pub fn model_correlation(model: &ChannelModel, config: &OfdmConfig) -> Result<CorrelationVector> {
    let pdp = PowerDelayProfile::from_model(model, config)?;
    Ok(pdp_to_correlation(&pdp, config, model.name()))
}

/// Ordered, uniquely-labelled collection of candidate correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    candidates: Vec<CorrelationVector>,
}

impl ParameterSet {
    pub fn new(candidates: Vec<CorrelationVector>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::Argument("parameter set is empty".into()));
        }
        let len = candidates[0].len();
        if candidates.iter().any(|c| c.len() != len) {
            return Err(Error::Argument("candidates differ in length".into()));
        }
        let mut seen = HashSet::new();
        for c in &candidates {
            if !seen.insert(c.label()) {
                return Err(Error::Argument(format!("duplicate candidate label {}", c.label())));
            }
        }
        Ok(Self { candidates })
    }

    pub fn candidates(&self) -> &[CorrelationVector] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.candidates.iter().map(|c| c.label()).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c.label() == label)
    }

    /// One record per line: the label, then tab-separated `re,im` pairs.
    /// Floats use the shortest representation that parses back exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.candidates {
            out.push_str(c.label());
            for z in c.values() {
                write!(out, "\t{:?},{:?}", z.re, z.im).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut candidates = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let label = fields.next().unwrap();
            if label.is_empty() {
                return Err(Error::Parse(format!("line {}: empty label", lineno + 1)));
            }
            let values = fields
                .map(|pair| {
                    let (re, im) = pair
                        .split_once(',')
                        .ok_or_else(|| Error::Parse(format!("line {}: bad pair {pair:?}", lineno + 1)))?;
                    let re: f64 = re.trim().parse().map_err(|_| Error::Parse(format!("line {}: bad number {re:?}", lineno + 1)))?;
                    let im: f64 = im.trim().parse().map_err(|_| Error::Parse(format!("line {}: bad number {im:?}", lineno + 1)))?;
                    Ok(Complex64::new(re, im))
                })
                .collect::<Result<Vec<_>>>()?;
            candidates.push(CorrelationVector::new(label, values)?);
        }
        Self::new(candidates)
    }
}
