//! Tapped-delay WSSUS channels, impairments and pilot observations.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::ofdm::OfdmConfig;
use crate::rng::{complex_gaussian, SimRng};

/// One tap of a power delay profile: delay in seconds, power in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay: f64,
    pub power_db: f64,
}

/// Named tapped-delay-line channel model.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    name: String,
    taps: Vec<Tap>,
}

/// Office B, Pedestrian A and Pedestrian B tap tables (delay ns, power dB).
const OFFICE_B: [(f64, f64); 6] =
    [(0.0, 0.0), (100.0, -3.6), (200.0, -7.2), (300.0, -10.8), (500.0, -18.0), (700.0, -25.5)];
const PEDESTRIAN_A: [(f64, f64); 4] = [(0.0, 0.0), (110.0, -9.7), (190.0, -19.2), (410.0, -22.8)];
const PEDESTRIAN_B: [(f64, f64); 6] =
    [(0.0, 0.0), (200.0, -0.9), (800.0, -4.9), (1200.0, -8.0), (2300.0, -7.8), (3700.0, -23.9)];

/// Registry names of the built-in models.
pub const BUILTIN_MODELS: [&str; 3] = ["office_b", "pedestrian_a", "pedestrian_b"];

impl ChannelModel {
    pub fn new(name: impl Into<String>, taps: Vec<Tap>) -> Result<Self> {
        let name = name.into();
        if taps.is_empty() {
            return Err(Error::Config(format!("model {name}: no taps")));
        }
        for t in &taps {
            if !(t.delay.is_finite() && t.delay >= 0.0) {
                return Err(Error::Config(format!("model {name}: negative or non-finite delay")));
            }
            if !t.power_db.is_finite() {
                return Err(Error::Config(format!("model {name}: non-finite tap power")));
            }
        }
        if taps.windows(2).any(|w| w[0].delay >= w[1].delay) {
            return Err(Error::Config(format!("model {name}: delays must be strictly increasing")));
        }
        Ok(Self { name, taps })
    }

    fn from_table(name: &str, table: &[(f64, f64)]) -> Self {
        let taps = table.iter().map(|&(ns, db)| Tap { delay: ns * 1e-9, power_db: db }).collect();
        Self::new(name, taps).expect("built-in table is valid")
    }

    pub fn office_b() -> Self {
        Self::from_table("office_b", &OFFICE_B)
    }

    pub fn pedestrian_a() -> Self {
        Self::from_table("pedestrian_a", &PEDESTRIAN_A)
    }

    pub fn pedestrian_b() -> Self {
        Self::from_table("pedestrian_b", &PEDESTRIAN_B)
    }

    /// Looks a built-in model up by name. Case, spaces, dashes and underscores are
    /// ignored, and `ped` abbreviates `pedestrian`.
    pub fn builtin(name: &str) -> Option<Self> {
        let key: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "officeb" => Some(Self::office_b()),
            "pedestriana" | "peda" => Some(Self::pedestrian_a()),
            "pedestrianb" | "pedb" => Some(Self::pedestrian_b()),
            _ => None,
        }
    }

    /// Parses a `delay_ns,power_db` table. Blank lines, `#` comments and a
    /// non-numeric header row are skipped.
    pub fn parse_table(name: &str, text: &str) -> Result<Self> {
        let mut taps = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',').map(str::trim);
            let (Some(d), Some(p), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::Parse(format!("line {}: expected `delay_ns,power_db`", lineno + 1)));
            };
            match (d.parse::<f64>(), p.parse::<f64>()) {
                (Ok(d), Ok(p)) => taps.push(Tap { delay: d * 1e-9, power_db: p }),
                _ if taps.is_empty() && lineno == 0 => continue,
                _ => return Err(Error::Parse(format!("line {}: non-numeric field", lineno + 1))),
            }
        }
        Self::new(name, taps)
    }

    pub fn load_table(name: &str, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_table(name, &text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    /// Taps rounded to the nearest sample delay with linear powers normalized to
    /// sum to one. Taps that land on the same sample are merged.
    pub fn quantized(&self, config: &OfdmConfig) -> Result<Vec<(usize, f64)>> {
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.taps.len());
        for t in &self.taps {
            let d = (t.delay / config.sample_time()).round() as usize;
            let p = 10f64.powf(t.power_db / 10.0);
            match out.last_mut() {
                Some(last) if last.0 == d => last.1 += p,
                _ => out.push((d, p)),
            }
        }
        let max_delay = out.last().unwrap().0;
        if max_delay >= config.cp_len() {
            return Err(Error::Config(format!(
                "model {}: delay of {max_delay} samples does not fit the {}-sample CP",
                self.name,
                config.cp_len()
            )));
        }
        let total: f64 = out.iter().map(|t| t.1).sum();
        for t in &mut out {
            t.1 /= total;
        }
        Ok(out)
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Channel impulse response on the sample grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Gain per integer sample delay; zero between taps.
    pub gains: Vec<Complex64>,
    pub model: String,
    pub seed_info: String,
}

/// Draws independent zero-mean complex Gaussian tap gains whose variances follow
/// the model's normalized PDP.
pub fn build_cir(model: &ChannelModel, config: &OfdmConfig, rng: &mut SimRng) -> Result<ChannelRealization> {
    let taps = model.quantized(config)?;
    let len = taps.last().unwrap().0 + 1;
    let mut gains = vec![Complex64::new(0.0, 0.0); len];
    for &(d, p) in &taps {
        gains[d] = complex_gaussian(rng, p);
    }
    let seed_info = format!("chacha12 word_pos={}", rng.get_word_pos());
    Ok(ChannelRealization { gains, model: model.name().to_string(), seed_info })
}

/// CFR on the usable carriers: `cfr[k] = sum_l g[l] exp(-j 2 pi f_k l / N)`.
pub fn cir_to_cfr(cir: &ChannelRealization, config: &OfdmConfig) -> Vec<Complex64> {
    (0..config.k())
        .map(|pos| {
            cir.gains
                .iter()
                .enumerate()
                .filter(|(_, g)| g.norm_sqr() > 0.0)
                .map(|(l, g)| g * config.phase_ramp(pos, l as f64))
                .sum()
        })
        .collect()
}

/// Timing offset of `theta` samples: multiplies carrier `k` by
/// `exp(-j 2 pi f_k theta / N)`.
pub fn apply_sto(cfr: &[Complex64], theta: i64, config: &OfdmConfig) -> Vec<Complex64> {
    if theta == 0 {
        return cfr.to_vec();
    }
    cfr.iter()
        .enumerate()
        .map(|(pos, h)| h * config.phase_ramp(pos, theta as f64))
        .collect()
}

/// One pilot symbol as seen after the DFT.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotObservation {
    /// Effective CFR, including any STO ramp or CFO rotation.
    pub cfr_true: Vec<Complex64>,
    pub pilot: Vec<Complex64>,
    pub received: Vec<Complex64>,
    pub noise_var: f64,
    pub ls: Vec<Complex64>,
}

impl PilotObservation {
    pub fn k(&self) -> usize {
        self.ls.len()
    }

    /// LS error variance; equals `noise_var` for unit-modulus pilots.
    pub fn ls_error_var(&self) -> f64 {
        self.noise_var
    }
}

/// Noise variance for a given SNR under unit signal power. `+inf` disables noise.
pub fn noise_var_from_snr_db(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        10f64.powf(-snr_db / 10.0)
    }
}

/// Unit-modulus QPSK pilot sequence fixed by `pilot_seed`.
pub fn qpsk_pilots(k: usize, pilot_seed: u64) -> Vec<Complex64> {
    let mut rng = SimRng::seed_from_u64(pilot_seed);
    let a = std::f64::consts::FRAC_1_SQRT_2;
    (0..k)
        .map(|_| {
            let sym: u8 = rng.random_range(0..4);
            Complex64::new(if sym & 1 == 0 { a } else { -a }, if sym & 2 == 0 { a } else { -a })
        })
        .collect()
}

/// Transmits a pilot symbol through `cfr` and adds white complex Gaussian noise
/// of variance `10^(-snr_db/10)`.
pub fn observe_pilot(cfr: &[Complex64], snr_db: f64, pilot_seed: u64, rng: &mut SimRng) -> Result<PilotObservation> {
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::Argument(format!("snr_db must be finite or +inf, got {snr_db}")));
    }
    let noise_var = noise_var_from_snr_db(snr_db);
    let pilot = qpsk_pilots(cfr.len(), pilot_seed);
    let received: Vec<Complex64> = cfr
        .iter()
        .zip(&pilot)
        .map(|(h, x)| {
            let clean = x * h;
            if noise_var > 0.0 {
                clean + complex_gaussian(rng, noise_var)
            } else {
                clean
            }
        })
        .collect();
    let ls = crate::estimators::ls_estimate(&received, &pilot)?;
    Ok(PilotObservation { cfr_true: cfr.to_vec(), pilot, received, noise_var, ls })
}

/// Carrier frequency offset: a common phase rotation of the received symbol plus
/// ICI modelled as extra white noise of variance `ici_var`.
pub fn apply_cfo(obs: &PilotObservation, phase: f64, ici_var: f64, rng: &mut SimRng) -> Result<PilotObservation> {
    if !(ici_var >= 0.0 && ici_var.is_finite()) {
        return Err(Error::Argument(format!("ici_var must be a finite non-negative value, got {ici_var}")));
    }
    let rot = Complex64::from_polar(1.0, phase);
    let cfr_true: Vec<Complex64> = obs.cfr_true.iter().map(|h| h * rot).collect();
    let received: Vec<Complex64> = obs
        .received
        .iter()
        .map(|y| {
            let y = y * rot;
            if ici_var > 0.0 {
                y + complex_gaussian(rng, ici_var)
            } else {
                y
            }
        })
        .collect();
    let ls = crate::estimators::ls_estimate(&received, &obs.pilot)?;
    Ok(PilotObservation {
        cfr_true,
        pilot: obs.pilot.clone(),
        received,
        noise_var: obs.noise_var + ici_var,
        ls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, StreamTag};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn table_quantization_matches_sample_grid() {
        let cfg = OfdmConfig::reference();
        let d: Vec<usize> = ChannelModel::office_b().quantized(&cfg).unwrap().iter().map(|t| t.0).collect();
        assert_eq!(d, vec![0, 1, 2, 3, 5, 7]);
        let d: Vec<usize> = ChannelModel::pedestrian_a().quantized(&cfg).unwrap().iter().map(|t| t.0).collect();
        assert_eq!(d, vec![0, 1, 2, 4]);
        let d: Vec<usize> = ChannelModel::pedestrian_b().quantized(&cfg).unwrap().iter().map(|t| t.0).collect();
        assert_eq!(d, vec![0, 2, 8, 12, 23, 37]);
        for m in BUILTIN_MODELS {
            let q = ChannelModel::builtin(m).unwrap().quantized(&cfg).unwrap();
            let s: f64 = q.iter().map(|t| t.1).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn delay_beyond_cp_is_rejected() {
        let cfg = OfdmConfig::symmetric_band(64, 16, 48, 1e-7).unwrap();
        let mut rng = substream(0, 0, StreamTag::Channel);
        assert!(matches!(build_cir(&ChannelModel::pedestrian_b(), &cfg, &mut rng), Err(Error::Config(_))));
    }

    #[test]
    fn builtin_lookup_aliases() {
        assert_eq!(ChannelModel::builtin("Office B").unwrap().name(), "office_b");
        assert_eq!(ChannelModel::builtin("ped-a").unwrap().name(), "pedestrian_a");
        assert!(ChannelModel::builtin("vehicular_a").is_none());
    }

    #[test]
    fn parse_table_with_header_and_comments() {
        let m = ChannelModel::parse_table("two", "delay_ns,power_db\n0, 0\n# mid\n300,-3\n").unwrap();
        assert_eq!(m.taps().len(), 2);
        assert!((m.taps()[1].delay - 3e-7).abs() < 1e-18);
        assert!(ChannelModel::parse_table("bad", "0,0\n100\n").is_err());
        assert!(ChannelModel::parse_table("bad", "0,0\n0,-3\n").is_err());
    }

    #[test]
    fn impulse_at_zero_is_flat() {
        let cfg = OfdmConfig::reference();
        let g = c(0.3, -0.7);
        let cir = ChannelRealization { gains: vec![g], model: "x".into(), seed_info: String::new() };
        assert!(cir_to_cfr(&cir, &cfg).iter().all(|h| (h - g).norm() < 1e-15));
    }

    #[test]
    fn delayed_impulse_is_unimodular() {
        let cfg = OfdmConfig::reference();
        let mut gains = vec![c(0.0, 0.0); 10];
        gains[9] = c(1.0, 0.0);
        let cir = ChannelRealization { gains, model: "x".into(), seed_info: String::new() };
        assert!(cir_to_cfr(&cir, &cfg).iter().all(|h| (h.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn two_taps_match_direct_dft() {
        let cfg = OfdmConfig::full_grid(8, 6, 1e-7).unwrap();
        let mut gains = vec![c(0.0, 0.0); 5];
        gains[0] = c(0.8, 0.0);
        gains[4] = c(0.2, 0.0);
        let cir = ChannelRealization { gains, model: "x".into(), seed_info: String::new() };
        let cfr = cir_to_cfr(&cir, &cfg);
        for (k, h) in cfr.iter().enumerate() {
            // unsigned bin index on purpose: must agree with the signed convention
            let want = c(0.8, 0.0) + c(0.2, 0.0) * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * 4) as f64 / 8.0);
            assert!((h - want).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn sto_phase_increment() {
        let cfg = OfdmConfig::full_grid(512, 128, 1e-7).unwrap();
        let cfr = vec![c(1.0, 0.0); 512];
        let out = apply_sto(&cfr, -3, &cfg);
        assert_eq!(apply_sto(&cfr, 0, &cfg), cfr);
        let want = 2.0 * std::f64::consts::PI * 300.0 / 512.0;
        let got = out[100].arg();
        let diff = (got - want).rem_euclid(2.0 * std::f64::consts::PI);
        assert!(diff < 1e-12 || (2.0 * std::f64::consts::PI - diff) < 1e-12);
        assert!(out.iter().all(|h| (h.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn noiseless_observation_recovers_cfr() {
        let cfg = OfdmConfig::reference();
        let mut rng = substream(3, 0, StreamTag::Channel);
        let cir = build_cir(&ChannelModel::office_b(), &cfg, &mut rng).unwrap();
        let cfr = cir_to_cfr(&cir, &cfg);
        let obs = observe_pilot(&cfr, f64::INFINITY, 11, &mut rng).unwrap();
        assert_eq!(obs.noise_var, 0.0);
        for (a, b) in obs.ls.iter().zip(&cfr) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(obs.pilot.iter().all(|x| (x.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn snr_zero_means_unit_noise() {
        assert_eq!(noise_var_from_snr_db(0.0), 1.0);
        assert!((noise_var_from_snr_db(10.0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn cfo_identity_and_rotation() {
        let cfg = OfdmConfig::reference();
        let mut rng = substream(4, 0, StreamTag::Channel);
        let cir = build_cir(&ChannelModel::pedestrian_a(), &cfg, &mut rng).unwrap();
        let obs = observe_pilot(&cir_to_cfr(&cir, &cfg), 10.0, 5, &mut rng).unwrap();
        let same = apply_cfo(&obs, 0.0, 0.0, &mut rng).unwrap();
        assert_eq!(same, obs);
        let rot = apply_cfo(&obs, std::f64::consts::FRAC_PI_2, 0.0, &mut rng).unwrap();
        for (a, b) in rot.ls.iter().zip(&obs.ls) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
        assert!(apply_cfo(&obs, 0.0, -1.0, &mut rng).is_err());
    }
}
