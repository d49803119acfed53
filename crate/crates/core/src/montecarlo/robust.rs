//! Max-SINR receiver with an imperfect delay-spread estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::engine::Engine;
use super::sinr_mc::{point, require_realizations, sinr_from_sums};
use super::{derive_seed, CurvePoint, EstimationError, Metric, SimConfig, Stream};
use crate::error::Result;
use crate::pulses::PulseSpec;
use crate::sinr::{max_sinr_offset, upper_bound_search};

/// Receiver labels of the robustness curves.
pub const LABEL_UB: &str = "ub";
pub const LABEL_ESTIMATED: &str = "maxsinr-est";
pub const LABEL_TPR: &str = "tpr";

/// Delay spread assumed by the receiver in realization `index`.
fn estimated_delay(cfg: &SimConfig, index: u64) -> f64 {
    let delay = cfg.scattering.delay_spread();
    match cfg.estimation_error {
        EstimationError::None => delay,
        EstimationError::UniformHalfSpan => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, Stream::Estimation, index));
            delay * (1.0 + rng.random_range(-0.5..0.5))
        }
    }
}

/// Measured SINR of three receivers sharing every channel, symbol and noise
/// draw: the perfect-knowledge upper bound (`ub`, numerically optimal offsets
/// per SNR), the Max-SINR closed form computed from a per-realization delay
/// spread estimate (`maxsinr-est`) and TPR. Also reports the analytic upper
/// bound. `cfg.receivers` is ignored.
pub fn robustness_sweep(cfg: &SimConfig) -> Result<Vec<CurvePoint>> {
    require_realizations(cfg, 2)?;
    let engine = Engine::new(cfg)?;
    let ub: Vec<_> = cfg
        .snr_db_list
        .iter()
        .map(|&s| upper_bound_search(&cfg.sinr_params(s)?))
        .collect::<Result<_>>()?;
    let n_snr = ub.len();
    let fixed: Vec<PulseSpec> = ub
        .iter()
        .map(|r| PulseSpec::with_offsets(cfg.pulse_sigma, r.delta_t, r.delta_f))
        .chain(std::iter::once(PulseSpec::new(cfg.pulse_sigma)))
        .collect::<Result<_>>()?;
    let estimated = |i: u64| -> Result<PulseSpec> {
        let scat = cfg.scattering.with_delay_spread(estimated_delay(cfg, i))?;
        let (dt, df) = max_sinr_offset(cfg.pulse_sigma, &scat)?;
        PulseSpec::with_offsets(cfg.pulse_sigma, dt, df)
    };
    let sums = engine.sums_range(0..cfg.n_realizations as u64, |i| {
        let mut p = fixed.clone();
        p.push(estimated(i)?);
        Ok(p)
    })?;
    let est_offsets: Vec<PulseSpec> = (0..cfg.n_realizations as u64).map(estimated).collect::<Result<_>>()?;
    let n = est_offsets.len() as f64;
    let mean_est = (
        est_offsets.iter().map(|p| p.delta_t).sum::<f64>() / n,
        est_offsets.iter().map(|p| p.delta_f).sum::<f64>() / n,
    );

    let (tpr_idx, est_idx) = (n_snr, n_snr + 1);
    let mut out = Vec::new();
    for (j, &snr) in cfg.snr_db_list.iter().enumerate() {
        let ub_off = (ub[j].delta_t, ub[j].delta_f);
        let v = sinr_from_sums(sums.iter().map(|s| &s[j]), snr);
        out.push(point(cfg, snr, Metric::SinrDb, v, LABEL_UB.into(), ub_off));
        let v = sinr_from_sums(sums.iter().map(|s| &s[est_idx]), snr);
        out.push(point(cfg, snr, Metric::SinrDb, v, LABEL_ESTIMATED.into(), mean_est));
        let v = sinr_from_sums(sums.iter().map(|s| &s[tpr_idx]), snr);
        out.push(point(cfg, snr, Metric::SinrDb, v, LABEL_TPR.into(), (0.0, 0.0)));
        out.push(point(
            cfg,
            snr,
            Metric::AnalyticSinrDb,
            (ub[j].sinr_db, 0.0),
            LABEL_UB.into(),
            ub_off,
        ));
    }
    Ok(out)
}
