//! Ensemble statistics of generated channels.

use lmmse_lab::channel::{apply_cfo, apply_sto, build_cir, cir_to_cfr, observe_pilot};
use lmmse_lab::correlation::{model_correlation, sto_shift_correlation};
use lmmse_lab::rng::{substream, StreamTag};
use lmmse_lab::{ChannelModel, Complex64, OfdmConfig};
use rand::Rng;

const REALIZATIONS: u64 = 10_000;

fn models() -> [ChannelModel; 3] {
    [ChannelModel::office_b(), ChannelModel::pedestrian_a(), ChannelModel::pedestrian_b()]
}

/// Average of `h[i + d] h[i]^*` over the positive half of the band, where
/// consecutive positions are consecutive carriers.
fn band_lag_product(h: &[Complex64], d: usize, half: usize) -> Complex64 {
    (0..half - d).map(|i| h[i + d] * h[i].conj()).sum::<Complex64>() / (half - d) as f64
}

#[test]
fn cfr_power_is_normalized() {
    let cfg = OfdmConfig::reference();
    for (mi, m) in models().iter().enumerate() {
        let mut acc = 0.0;
        for t in 0..REALIZATIONS {
            let cir = build_cir(m, &cfg, &mut substream(100 + mi as u64, t, StreamTag::Channel)).unwrap();
            acc += cir_to_cfr(&cir, &cfg).iter().map(|z| z.norm_sqr()).sum::<f64>() / cfg.k() as f64;
        }
        let p = acc / REALIZATIONS as f64;
        assert!((0.97..=1.03).contains(&p), "{}: {p}", m.name());
    }
}

#[test]
fn sample_correlation_matches_model_sto_and_cfo() {
    let cfg = OfdmConfig::reference();
    let half = cfg.usable().iter().take_while(|&&b| b < cfg.n_fft() / 2).count();
    let lags = [1usize, 4, 16, 60];
    let theta = -4;
    for (mi, m) in models().iter().enumerate() {
        let r = model_correlation(m, &cfg).unwrap();
        let r_sto = sto_shift_correlation(&r, theta, &cfg);
        let mut plain = vec![Complex64::new(0.0, 0.0); lags.len()];
        let mut shifted = plain.clone();
        let mut rotated = plain.clone();
        for t in 0..REALIZATIONS {
            let seed = 200 + mi as u64;
            let cir = build_cir(m, &cfg, &mut substream(seed, t, StreamTag::Channel)).unwrap();
            let cfr = cir_to_cfr(&cir, &cfg);
            let sto = apply_sto(&cfr, theta, &cfg);
            let mut rng = substream(seed, t, StreamTag::Noise);
            let obs = observe_pilot(&cfr, 60.0, t, &mut rng).unwrap();
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let cfo = apply_cfo(&obs, phase, 0.05, &mut rng).unwrap();
            for (i, &d) in lags.iter().enumerate() {
                plain[i] += band_lag_product(&cfr, d, half);
                shifted[i] += band_lag_product(&sto, d, half);
                rotated[i] += band_lag_product(&cfo.ls, d, half);
            }
        }
        for (i, &d) in lags.iter().enumerate() {
            let n = REALIZATIONS as f64;
            let lag = d as i64;
            assert!((plain[i] / n - r.at(lag)).norm() < 0.05, "{} lag {d}", m.name());
            assert!((shifted[i] / n - r_sto.at(lag)).norm() < 0.05, "{} sto lag {d}", m.name());
            assert!((rotated[i] / n - r.at(lag)).norm() < 0.05, "{} cfo lag {d}", m.name());
        }
    }
}
