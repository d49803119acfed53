use hmt_core::channel::{apply_channel, sample_realization};
use hmt_core::montecarlo::{ebn0_to_snr_db, wilson_interval};
use hmt_core::pulses::{ambiguity_closed, cross_ambiguity};
use hmt_core::sinr::{max_sinr_result, sinr_db, upper_bound_search};
use hmt_core::{
    defaults, ChannelRealization, Complex64, Constellation, LatticeSpec, Path, SampledSignal, ScatteringKind,
    ScatteringSpec, SimConfig, SinrParams,
};
use proptest::prelude::*;

const SIGMA: f64 = 1e-4 / (1.732_050_807_568_877_2 * 2.5e4);

fn kind() -> impl Strategy<Value = ScatteringKind> {
    prop_oneof![Just(ScatteringKind::Uni), Just(ScatteringKind::Exp)]
}

fn params(kind: ScatteringKind, spread: f64, snr_db: f64) -> SinrParams {
    let lattice = LatticeSpec::reference();
    let scat = ScatteringSpec::lattice_matched(kind, spread, &lattice).unwrap();
    SinrParams::new(scat, lattice, SIGMA, snr_db).unwrap()
}

fn exp_config() -> SimConfig {
    SimConfig::reference_spread(ScatteringKind::Exp, 0.15).unwrap()
}

fn pair_count() -> usize {
    exp_config().to_pairs().len()
}

fn signal(values: &[(f64, f64)], t0: f64) -> SampledSignal {
    let samples = values.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    SampledSignal::new(samples, defaults::SAMPLING_INTERVAL, t0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ambiguity_is_bounded_and_reflection_symmetric(tau in -3e-4f64..3e-4, nu in -6e4f64..6e4) {
        let a = ambiguity_closed(SIGMA, tau, nu);
        prop_assert!(a.norm() <= 1.0 + 1e-12);
        let phase = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * nu * tau);
        prop_assert!((ambiguity_closed(SIGMA, -tau, -nu) - phase * a.conj()).norm() < 1e-12);
        let c = cross_ambiguity(SIGMA, 0.0, 0.0, tau, nu);
        prop_assert!((c - a).norm() < 1e-12);
    }

    #[test]
    fn cross_ambiguity_peaks_at_the_offsets(
        dt in -3e-5f64..3e-5, df in -5e3f64..5e3, tau in -1e-4f64..1e-4, nu in -2e4f64..2e4,
    ) {
        let peak = cross_ambiguity(SIGMA, dt, df, dt, df).norm();
        prop_assert!((peak - 1.0).abs() < 1e-12);
        prop_assert!(cross_ambiguity(SIGMA, dt, df, tau, nu).norm() <= peak + 1e-12);
    }

    #[test]
    fn channel_is_linear(
        x in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64),
        y in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64),
        a in (-2.0f64..2.0, -2.0f64..2.0),
        paths in prop::collection::vec((0usize..10, -2e3f64..2e3, -1.0f64..1.0, -1.0f64..1.0), 1..6),
    ) {
        let paths = paths
            .into_iter()
            .map(|(d, nu, re, im)| Path {
                delay: d as f64 * defaults::SAMPLING_INTERVAL,
                doppler: nu,
                gain: Complex64::new(re, im),
            })
            .collect();
        let real = ChannelRealization::from_paths(paths).unwrap();
        let (sx, sy) = (signal(&x, 0.0), signal(&y, 0.0));
        let a = Complex64::new(a.0, a.1);
        let one = Complex64::new(1.0, 0.0);
        let lhs = apply_channel(&real, &sx.linear_combination(a, &sy, one).unwrap()).unwrap();
        let rhs = apply_channel(&real, &sx)
            .unwrap()
            .linear_combination(a, &apply_channel(&real, &sy).unwrap(), one)
            .unwrap();
        prop_assert_eq!(lhs.len(), rhs.len());
        for (l, r) in lhs.samples.iter().zip(&rhs.samples) {
            prop_assert!((l - r).norm() < 1e-12);
        }
    }

    #[test]
    fn realizations_are_reproducible_and_inside_the_support(kind in kind(), spread in 0.01f64..0.4, seed: u64) {
        let scat = ScatteringSpec::lattice_matched(kind, spread, &LatticeSpec::reference()).unwrap();
        let r = sample_realization(&scat, 32, seed).unwrap();
        prop_assert_eq!(&r, &sample_realization(&scat, 32, seed).unwrap());
        for p in &r.paths {
            prop_assert!(p.delay >= 0.0 && p.doppler.abs() < scat.max_doppler());
            if kind == ScatteringKind::Uni {
                prop_assert!(p.delay <= scat.delay_spread());
            }
        }
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(trials in 1u64..100_000, frac in 0.0f64..1.0) {
        let errors = (frac * trials as f64) as u64;
        let (lo, hi) = wilson_interval(errors, trials);
        let p = errors as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn ebn0_shift_is_constant(ebn0 in -10.0f64..40.0) {
        let lattice = LatticeSpec::reference();
        let shift = ebn0_to_snr_db(ebn0, &lattice, Constellation::Qpsk) - ebn0;
        prop_assert!((shift - 10.0 * (2.0 * lattice.density()).log10()).abs() < 1e-12);
    }

    #[test]
    fn config_hash_ignores_key_order(perm in Just((0..pair_count()).collect::<Vec<_>>()).prop_shuffle(), seed: u64) {
        let cfg = exp_config().apply_pairs(&[("seed", seed.to_string())]).unwrap();
        let pairs = cfg.to_pairs();
        let shuffled: Vec<_> = perm.iter().map(|&i| pairs[i].clone()).collect();
        let rebuilt = exp_config().apply_pairs(&shuffled).unwrap();
        prop_assert_eq!(rebuilt.config_hash(), cfg.config_hash());
        prop_assert_eq!(rebuilt.seed, seed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sinr_grows_with_snr(kind in kind(), spread in 0.02f64..0.4, snr in -5.0f64..30.0, step in 0.1f64..10.0) {
        let p = params(kind, spread, snr);
        let (dt, df) = {
            let r = max_sinr_result(&p).unwrap();
            (r.delta_t, r.delta_f)
        };
        let lo = sinr_db(&p, dt, df).unwrap();
        let hi = sinr_db(&p.with_snr_db(snr + step), dt, df).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn upper_bound_dominates_tpr_and_closed_form(kind in kind(), spread in 0.02f64..0.4, snr in 0.0f64..30.0) {
        let p = params(kind, spread, snr);
        let ub = upper_bound_search(&p).unwrap().sinr_db;
        let ms = max_sinr_result(&p).unwrap().sinr_db;
        let tpr = sinr_db(&p, 0.0, 0.0).unwrap();
        prop_assert!(ub >= ms - 1e-6, "ub {} < max-sinr {}", ub, ms);
        prop_assert!(ub >= tpr - 1e-6, "ub {} < tpr {}", ub, tpr);
    }
}
