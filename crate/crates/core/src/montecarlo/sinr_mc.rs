use serde::{Deserialize, Serialize};

use super::engine::{Engine, ProbeSums, SYMBOL_POWER};
use super::{ratio_estimate, ratio_to_db, CurvePoint, Metric, SimConfig};
use crate::channel::ScatteringSpec;
use crate::error::{Error, Result};
use crate::numeric::from_db;
use crate::pulses::PulseSpec;
use crate::sinr::sinr_db;

/// How a curve is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    MonteCarlo,
}

pub(crate) fn point(
    cfg: &SimConfig,
    x: f64,
    metric: Metric,
    (value, ci): (f64, f64),
    receiver: String,
    (delta_t, delta_f): (f64, f64),
) -> CurvePoint {
    CurvePoint {
        x,
        metric,
        value,
        ci_halfwidth: ci,
        receiver,
        channel_kind: cfg.scattering.kind(),
        spread: cfg.scattering.spread_factor(),
        delta_t,
        delta_f,
        seed: cfg.seed,
        config_hash: cfg.config_hash(),
    }
}

pub(crate) fn require_realizations(cfg: &SimConfig, min: usize) -> Result<()> {
    if cfg.n_realizations < min {
        return Err(Error::InsufficientRealizations {
            reason: format!(
                "{} realization(s) cannot give a confidence interval; need at least {min}",
                cfg.n_realizations
            ),
        });
    }
    Ok(())
}

pub(crate) type OffsetPlan = (Vec<(f64, f64)>, Vec<Vec<usize>>);

/// Receive offsets of every `(receiver, SNR)` pair, deduplicated: returns the
/// distinct offsets and, per receiver and SNR, the index into them.
pub(crate) fn offset_plan(cfg: &SimConfig) -> Result<OffsetPlan> {
    let mut distinct: Vec<(f64, f64)> = Vec::new();
    let mut plan = Vec::with_capacity(cfg.receivers.len());
    for r in &cfg.receivers {
        let mut row = Vec::with_capacity(cfg.snr_db_list.len());
        let fixed = if r.depends_on_snr() {
            None
        } else {
            Some(r.offsets(&cfg.sinr_params(cfg.snr_db_list[0])?)?)
        };
        for &snr in &cfg.snr_db_list {
            let off = match fixed {
                Some(o) => o,
                None => r.offsets(&cfg.sinr_params(snr)?)?,
            };
            let idx = distinct.iter().position(|&d| d == off).unwrap_or_else(|| {
                distinct.push(off);
                distinct.len() - 1
            });
            row.push(idx);
        }
        plan.push(row);
    }
    Ok((distinct, plan))
}

pub(crate) fn pulses(cfg: &SimConfig, offsets: &[(f64, f64)]) -> Result<Vec<PulseSpec>> {
    offsets
        .iter()
        .map(|&(dt, df)| PulseSpec::with_offsets(cfg.pulse_sigma, dt, df))
        .collect()
}

/// SINR in dB and its 95 % half-width from per-realization sums at one SNR.
pub(crate) fn sinr_from_sums<'a>(sums: impl Iterator<Item = &'a ProbeSums>, snr_db: f64) -> (f64, f64) {
    let sigma_w2 = SYMBOL_POWER * from_db(-snr_db);
    let (a, b): (Vec<f64>, Vec<f64>) = sums.map(|s| (s.signal, s.interference + sigma_w2 * s.noise)).unzip();
    let (r, half) = ratio_estimate(&a, &b);
    ratio_to_db(r, half)
}

/// Monte Carlo SINR of every configured receiver at every SNR point.
///
/// Every interior symbol of a burst is a probe: its signal energy is
/// `sigma_c2 |h|^2` with the effective gain `h`, its interference the
/// projection of the burst minus the probe's own contribution, its noise the
/// projection of the noise waveform. SINR is the ratio of the energies summed
/// over probes and realizations.
pub fn measure_sinr(cfg: &SimConfig) -> Result<Vec<CurvePoint>> {
    require_realizations(cfg, 2)?;
    let engine = Engine::new(cfg)?;
    let (offsets, plan) = offset_plan(cfg)?;
    let pulses = pulses(cfg, &offsets)?;
    let sums = engine.sums_range(0..cfg.n_realizations as u64, |_| Ok(pulses.clone()))?;
    let mut out = Vec::new();
    for (r, row) in cfg.receivers.iter().zip(&plan) {
        for (&snr, &pi) in cfg.snr_db_list.iter().zip(row) {
            let v = sinr_from_sums(sums.iter().map(|s| &s[pi]), snr);
            out.push(point(cfg, snr, Metric::SinrDb, v, r.label(), offsets[pi]));
        }
    }
    Ok(out)
}

/// Analytic SINR of every configured receiver at every SNR point.
pub fn analytic_curve(cfg: &SimConfig) -> Result<Vec<CurvePoint>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for r in &cfg.receivers {
        for &snr in &cfg.snr_db_list {
            let p = cfg.sinr_params(snr)?;
            let off = r.offsets(&p)?;
            let v = sinr_db(&p, off.0, off.1)?;
            out.push(point(cfg, snr, Metric::AnalyticSinrDb, (v, 0.0), r.label(), off));
        }
    }
    Ok(out)
}

/// SINR against the spread factor at the single configured SNR point; each
/// spread uses a lattice-matched channel of the configured family. Points
/// have `x = spread`.
pub fn spread_sweep(cfg: &SimConfig, spreads: &[f64], method: Method) -> Result<Vec<CurvePoint>> {
    if spreads.is_empty() {
        return Err(Error::invalid("spread", "spread list is empty"));
    }
    if cfg.snr_db_list.len() != 1 {
        return Err(Error::invalid("snr_db", "a spread sweep needs exactly one SNR point"));
    }
    let mut out = Vec::new();
    for &s in spreads {
        let mut c = cfg.clone();
        c.scattering = ScatteringSpec::lattice_matched(cfg.scattering.kind(), s, &cfg.lattice)?;
        let pts = match method {
            Method::Analytic => analytic_curve(&c)?,
            Method::MonteCarlo => measure_sinr(&c)?,
        };
        out.extend(pts.into_iter().map(|mut p| {
            p.x = s;
            p
        }));
    }
    Ok(out)
}
