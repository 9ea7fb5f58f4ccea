//! Statistical and structural properties of the LS/LMMSE estimators.

use lmmse_lab::channel::{build_cir, cir_to_cfr, noise_var_from_snr_db, observe_pilot};
use lmmse_lab::correlation::{model_correlation, pdp_to_correlation};
use lmmse_lab::estimators::{empirical_mse, lmmse_filter, CorrelationMatrixView, LmmseFilter};
use lmmse_lab::rng::{derive_u64, substream, StreamTag};
use lmmse_lab::{ChannelModel, Complex64, OfdmConfig, PowerDelayProfile};
use proptest::prelude::*;

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn lmmse_beats_ls_with_true_correlation() {
    let cfg = OfdmConfig::reference();
    let model = ChannelModel::pedestrian_b();
    let r = model_correlation(&model, &cfg).unwrap();
    for snr in [0.0, 10.0, 20.0] {
        let filter = LmmseFilter::new(&r, noise_var_from_snr_db(snr), &cfg).unwrap();
        let (mut ls_mse, mut lmmse_mse) = (0.0, 0.0);
        for t in 0..2000u64 {
            let cir = build_cir(&model, &cfg, &mut substream(400, t, StreamTag::Channel)).unwrap();
            let cfr = cir_to_cfr(&cir, &cfg);
            let obs = observe_pilot(&cfr, snr, derive_u64(400, t, StreamTag::Pilot), &mut substream(400, t, StreamTag::Noise))
                .unwrap();
            ls_mse += empirical_mse(&obs.ls, &cfr);
            lmmse_mse += empirical_mse(&filter.apply(&obs.ls), &cfr);
        }
        assert!(lmmse_mse < ls_mse, "{snr} dB: lmmse {lmmse_mse} vs ls {ls_mse}");
    }
}

fn small_grid() -> OfdmConfig {
    OfdmConfig::symmetric_band(64, 16, 40, 1e-7).unwrap()
}

fn pdp_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..=16).prop_filter("needs power", |v| v.iter().sum::<f64>() > 1e-3)
}

fn ls_strategy(k: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| Complex64::new(a, b)), k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lmmse_is_a_contraction(raw in pdp_strategy(), noise_var in 0.0f64..2.0, ls in ls_strategy(40)) {
        let cfg = small_grid();
        let r = pdp_to_correlation(&PowerDelayProfile::new(raw).unwrap(), &cfg, "p");
        let out = lmmse_filter(&ls, &r, noise_var, &cfg).unwrap();
        prop_assert!(norm(&out) <= norm(&ls) * (1.0 + 1e-9), "{} > {}", norm(&out), norm(&ls));
    }

    #[test]
    fn assembled_autocorrelation_is_hermitian(raw in pdp_strategy(), pick in prop::collection::vec(any::<bool>(), 40)) {
        let cfg = small_grid();
        let r = pdp_to_correlation(&PowerDelayProfile::new(raw).unwrap(), &cfg, "p");
        let pos: Vec<usize> = (0..40).filter(|&i| pick[i]).collect();
        let m = CorrelationMatrixView::new(&r, &pos, &pos).materialize(&cfg);
        prop_assert_eq!(m.hermitian_defect(), 0.0);
    }
}
