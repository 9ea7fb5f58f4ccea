//! Accuracy theory for the comparison between two candidates.
//!
//! Write the two candidates' noise MSEs (interpolation MSE plus LS noise) as
//! `s1 < s2` and `alpha = (s2 - s1) / s2`. Treating the per-carrier index errors
//! as independent complex Gaussians, each sampled index is a scaled chi-square
//! variable and the chance that the worse candidate scores lower is
//! `eps = E[F((1 - alpha) X)]` with `X` and `F` chi-square. The results assume
//! the two indexes are independent and that carriers are independent; neither
//! holds exactly, so the empirical frequency is measured separately.

use num_complex::Complex64;
use rand_distr::{ChiSquared, Distribution};
use serde::Serialize;
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::channel::{build_cir, cir_to_cfr, noise_var_from_snr_db, observe_pilot, ChannelModel};
use crate::correlation::{CorrelationVector, ParameterSet};
use crate::error::{Error, Result};
use crate::estimators::{group_interpolation_mse, LooInterpolator};
use crate::ofdm::OfdmConfig;
use crate::rng::{derive_u64, substream, SimRng, StreamTag};
use crate::selector::{split_groups, EnhancedEstimator, IndexMethod};

/// Chi-square CDF with `dof` degrees of freedom.
pub fn chi_square_cdf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        gamma_lr(dof / 2.0, x / 2.0)
    }
}

/// Log of the chi-square density.
pub fn chi_square_ln_pdf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return if dof < 2.0 {
            f64::INFINITY
        } else if dof == 2.0 {
            -std::f64::consts::LN_2
        } else {
            f64::NEG_INFINITY
        };
    }
    let a = dof / 2.0;
    (a - 1.0) * x.ln() - x / 2.0 - a * std::f64::consts::LN_2 - ln_gamma(a)
}

/// Degrees of freedom attached to a sequence of K complex samples.
///
/// `SequenceLength` uses K and reproduces the published bound curves (for
/// example a fuzzy bound near 0.1 at K = 165 and 25%). `TwiceSequenceLength`
/// counts real and imaginary parts separately, as a strict complex-Gaussian
/// derivation would.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiSquareDims {
    #[default]
    SequenceLength,
    TwiceSequenceLength,
}

impl ChiSquareDims {
    pub fn dof(self, k_len: usize) -> f64 {
        match self {
            ChiSquareDims::SequenceLength => k_len as f64,
            ChiSquareDims::TwiceSequenceLength => 2.0 * k_len as f64,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Argument(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    Ok(())
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let h = b - a;
    let left = h / 12.0 * (fa + 4.0 * flm + fm);
    let right = h / 12.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson over `[a, b]`, started from `pieces` equal panels.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = h / 6.0 * (fa + 4.0 * fm + fb);
            simpson(&f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// `E[F((1 - alpha) X)]` for `X` chi-square with `dof` degrees of freedom.
pub fn false_comparison_probability_dof(alpha: f64, dof: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(dof > 0.0 && dof.is_finite()) {
        return Err(Error::Argument(format!("degrees of freedom must be positive, got {dof}")));
    }
    // window of +-12 sd around the mean, widened on the right until the tail is
    // negligible (small dof is very skewed)
    let sd = (2.0 * dof).sqrt();
    let lo = (dof - 12.0 * sd).max(0.0);
    let mut hi = dof + 12.0 * sd;
    while 1.0 - chi_square_cdf(hi, dof) > 1e-13 {
        hi += 4.0 * sd;
    }
    // s = t^2 removes the integrable singularity of the density at 0
    let scale = 1.0 - alpha;
    let integrand = |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let s = t * t;
        let lp = chi_square_ln_pdf(s, dof);
        chi_square_cdf(scale * s, dof) * (lp.exp() * 2.0 * t)
    };
    let eps = integrate(integrand, lo.sqrt(), hi.sqrt(), 1e-10, 32);
    Ok(eps.clamp(0.0, 1.0))
}

/// False-comparison probability for sequence length `k_len`, default dimensions.
pub fn false_comparison_probability(alpha: f64, k_len: usize) -> Result<f64> {
    if k_len == 0 {
        return Err(Error::Argument("sequence length must be at least 1".into()));
    }
    false_comparison_probability_dof(alpha, ChiSquareDims::default().dof(k_len))
}

/// Smallest scaled difference whose false-comparison probability is `eps0`.
pub fn fuzzy_bound_dof(epsilon0: f64, dof: f64) -> Result<f64> {
    if !(epsilon0 > 0.0 && epsilon0 < 0.5) {
        return Err(Error::Argument(format!("epsilon0 must lie in (0, 0.5), got {epsilon0}")));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if false_comparison_probability_dof(mid, dof)? > epsilon0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn fuzzy_bound(epsilon0: f64, k_len: usize) -> Result<f64> {
    if k_len == 0 {
        return Err(Error::Argument("sequence length must be at least 1".into()));
    }
    fuzzy_bound_dof(epsilon0, ChiSquareDims::default().dof(k_len))
}

/// Lower bound `B (2 eps0 - 1)` on the expected scaled change from comparing.
/// Negative values mean improvement.
pub fn average_gain_bound(bound: f64, epsilon0: f64) -> f64 {
    bound * (2.0 * epsilon0 - 1.0)
}

/// A two-candidate comparison described by its scaled difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonTheoryQuery {
    pub alpha: f64,
    pub k_len: usize,
    pub sigma1_sq: Option<f64>,
    pub sigma2_sq: Option<f64>,
    pub dims: ChiSquareDims,
}

impl ComparisonTheoryQuery {
    pub fn new(alpha: f64, k_len: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if k_len == 0 {
            return Err(Error::Argument("sequence length must be at least 1".into()));
        }
        Ok(Self { alpha, k_len, sigma1_sq: None, sigma2_sq: None, dims: ChiSquareDims::default() })
    }

    /// From the two noise MSEs, better first.
    pub fn from_noise_mse(sigma1_sq: f64, sigma2_sq: f64, k_len: usize) -> Result<Self> {
        if !(sigma1_sq > 0.0 && sigma2_sq >= sigma1_sq && sigma2_sq.is_finite()) {
            return Err(Error::Argument(format!(
                "need 0 < sigma1_sq <= sigma2_sq, got {sigma1_sq} and {sigma2_sq}"
            )));
        }
        let mut q = Self::new((sigma2_sq - sigma1_sq) / sigma2_sq, k_len)?;
        q.sigma1_sq = Some(sigma1_sq);
        q.sigma2_sq = Some(sigma2_sq);
        Ok(q)
    }

    pub fn with_dims(mut self, dims: ChiSquareDims) -> Self {
        self.dims = dims;
        self
    }

    pub fn epsilon(&self) -> Result<f64> {
        false_comparison_probability_dof(self.alpha, self.dims.dof(self.k_len))
    }
}

/// Two candidates compared on channels drawn from one model.
#[derive(Debug, Clone)]
pub struct FalseComparisonSetup {
    pub config: OfdmConfig,
    pub channel: ChannelModel,
    pub candidates: [CorrelationVector; 2],
    pub snr_db: f64,
    pub method: IndexMethod,
    pub dims: ChiSquareDims,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalseComparisonOutcome {
    pub snr_db: f64,
    pub trials: usize,
    /// Candidate with the smaller expected noise MSE.
    pub better: usize,
    pub noise_mse: [f64; 2],
    pub alpha: f64,
    pub k_len: usize,
    pub theoretical: f64,
    pub frequency: f64,
}

/// Expected index per candidate: mean interpolation MSE under the true
/// correlation plus the LS noise variance.
pub fn expected_noise_mse(
    r_used: &CorrelationVector,
    r_true: &CorrelationVector,
    noise_var: f64,
    method: IndexMethod,
    config: &OfdmConfig,
) -> Result<f64> {
    let k = config.k();
    let per_carrier = match method {
        IndexMethod::Full => LooInterpolator::new(r_used, noise_var, config)?.mse_profile(r_true, noise_var, config),
        IndexMethod::Split => {
            let (a, b) = split_groups(k);
            let mut v = group_interpolation_mse(r_used, r_true, noise_var, &a, &b, config)?;
            v.extend(group_interpolation_mse(r_used, r_true, noise_var, &b, &a, config)?);
            v
        }
    };
    Ok(per_carrier.iter().sum::<f64>() / k as f64 + noise_var)
}

/// Runs the comparison `trials` times and reports how often the worse candidate
/// wins, next to the theoretical probability for the same difference.
pub fn empirical_false_comparison(setup: &FalseComparisonSetup, trials: usize, master_seed: u64) -> Result<FalseComparisonOutcome> {
    use rayon::prelude::*;

    let cfg = &setup.config;
    let noise_var = noise_var_from_snr_db(setup.snr_db);
    let r_true = crate::correlation::model_correlation(&setup.channel, cfg)?;
    let mse = [
        expected_noise_mse(&setup.candidates[0], &r_true, noise_var, setup.method, cfg)?,
        expected_noise_mse(&setup.candidates[1], &r_true, noise_var, setup.method, cfg)?,
    ];
    let better = if mse[1] < mse[0] { 1 } else { 0 };
    let query = ComparisonTheoryQuery::from_noise_mse(mse[better], mse[1 - better], cfg.k())?.with_dims(setup.dims);
    let theoretical = query.epsilon()?;

    let omega = ParameterSet::new(setup.candidates.to_vec())?;
    let est = EnhancedEstimator::new(omega, setup.method, noise_var, cfg)?;
    let wrong: usize = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<usize> {
            let mut ch: SimRng = substream(master_seed, t, StreamTag::Channel);
            let cir = build_cir(&setup.channel, cfg, &mut ch)?;
            let cfr: Vec<Complex64> = cir_to_cfr(&cir, cfg);
            let mut nz = substream(master_seed, t, StreamTag::Noise);
            let obs = observe_pilot(&cfr, setup.snr_db, derive_u64(master_seed, t, StreamTag::Pilot), &mut nz)?;
            Ok(usize::from(est.select(&obs.ls)?.chosen_index != better))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(FalseComparisonOutcome {
        snr_db: setup.snr_db,
        trials,
        better,
        noise_mse: mse,
        alpha: query.alpha,
        k_len: cfg.k(),
        theoretical,
        frequency: if trials == 0 { 0.0 } else { wrong as f64 / trials as f64 },
    })
}

/// Monte Carlo estimate of `E[F((1 - alpha) X)]` and its standard error.
pub fn false_comparison_monte_carlo(alpha: f64, dof: f64, samples: usize, rng: &mut SimRng) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let dist = ChiSquared::new(dof).map_err(|e| Error::Argument(e.to_string()))?;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..samples {
        let v = chi_square_cdf((1.0 - alpha) * dist.sample(rng), dof);
        sum += v;
        sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_reference_values() {
        // closed forms: dof 2 is exponential with mean 2, dof 1 is erf-based
        for &x in &[0.1, 1.0, 3.7, 20.0] {
            assert!((chi_square_cdf(x, 2.0) - (1.0 - (-x / 2.0_f64).exp())).abs() < 1e-14);
            assert!((chi_square_ln_pdf(x, 2.0) - (-x / 2.0 - std::f64::consts::LN_2)).abs() < 1e-14);
        }
        assert_eq!(chi_square_cdf(0.0, 5.0), 0.0);
        assert_eq!(chi_square_cdf(-1.0, 5.0), 0.0);
    }

    #[test]
    fn symmetric_case_is_one_half() {
        for k in [1, 2, 10, 165, 408, 1024] {
            let e = false_comparison_probability(0.0, k).unwrap();
            assert!((e - 0.5).abs() < 1e-6, "k={k} eps={e}");
        }
    }

    #[test]
    fn near_one_vanishes() {
        assert!(false_comparison_probability(0.999_999, 50).unwrap() < 1e-6);
    }

    #[test]
    fn alpha_range_checked() {
        assert!(false_comparison_probability(1.0, 5).is_err());
        assert!(false_comparison_probability(-0.1, 5).is_err());
        assert!(fuzzy_bound(0.5, 10).is_err());
        assert!(fuzzy_bound(0.0, 10).is_err());
    }

    #[test]
    fn gain_bound_arithmetic() {
        assert!((average_gain_bound(0.1, 0.25) + 0.05).abs() < 1e-15);
        assert_eq!(average_gain_bound(0.3, 0.5), 0.0);
    }

    #[test]
    fn query_from_noise_mse() {
        let q = ComparisonTheoryQuery::from_noise_mse(0.9, 1.0, 40).unwrap();
        assert!((q.alpha - 0.1).abs() < 1e-15);
        assert!(ComparisonTheoryQuery::from_noise_mse(1.0, 0.9, 40).is_err());
        let q2 = q.with_dims(ChiSquareDims::TwiceSequenceLength);
        assert!(q2.epsilon().unwrap() < q.epsilon().unwrap());
    }
}
