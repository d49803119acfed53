//! Uncoded bit error rate with genie one-tap equalization.
//!
//! Eb/N0 convention: one lattice symbol carries `bits` bits and the lattice
//! packs `rho = 2/(TF)` symbols per unit time-bandwidth, so
//! `Eb = sigma_c2 / (rho bits)` and `SNR = Eb/N0 + 10 log10(rho bits)` dB.

use num_complex::Complex64;
use rayon::prelude::*;

use super::engine::{Engine, SYMBOL_POWER};
use super::sinr_mc::{offset_plan, point, pulses, require_realizations};
use super::{CurvePoint, Metric, SimConfig};
use crate::error::Result;
use crate::lattice::{Constellation, LatticeSpec};
use crate::modem::GAIN_FLOOR;
use crate::numeric::{from_db, to_db};

/// Realizations simulated between stopping-rule checks.
const BATCH: u64 = 64;
const Z95: f64 = 1.959_963_984_540_054;

/// SNR in dB (`sigma_c2 / sigma_w2`) for a given Eb/N0 in dB.
pub fn ebn0_to_snr_db(ebn0_db: f64, lattice: &LatticeSpec, constellation: Constellation) -> f64 {
    ebn0_db + to_db(lattice.density() * constellation.bits_per_symbol() as f64)
}

/// 95 % Wilson score interval `(low, high)` for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    (lo, (center + half).min(1.0))
}

/// Bit errors of one receive pulse at one noise level.
fn count_errors(
    constellation: Constellation,
    sent: impl Iterator<Item = (Complex64, Complex64, Complex64, Complex64)>,
    noise_amp: f64,
) -> u64 {
    let bits = constellation.bits_per_symbol();
    let amp = SYMBOL_POWER.sqrt();
    sent.map(|(c, g, y, w)| {
        if g.norm() < GAIN_FLOOR {
            return u64::from(bits);
        }
        let z = (y + w * noise_amp) / g;
        let tx = constellation.demap(c / amp);
        let rx = constellation.demap(z / amp);
        u64::from((tx ^ rx).count_ones())
    })
    .sum()
}

/// Monte Carlo BER of every configured receiver. `cfg.snr_db_list` holds
/// Eb/N0 values in dB. Realizations run in batches until every point has
/// `ber_target_errors` bit errors or `n_realizations` is reached.
pub fn measure_ber(cfg: &SimConfig) -> Result<Vec<CurvePoint>> {
    require_realizations(cfg, 1)?;
    let engine = Engine::new(cfg)?;
    let mut snr_cfg = cfg.clone();
    snr_cfg.snr_db_list = cfg
        .snr_db_list
        .iter()
        .map(|&e| ebn0_to_snr_db(e, &cfg.lattice, cfg.constellation))
        .collect();
    let (offsets, plan) = offset_plan(&snr_cfg)?;
    let pulses = pulses(cfg, &offsets)?;
    let noise_amp: Vec<f64> = snr_cfg
        .snr_db_list
        .iter()
        .map(|&s| (SYMBOL_POWER * from_db(-s)).sqrt())
        .collect();
    let n_snr = noise_amp.len();
    // (pulse, snr) pairs that some receiver reports
    let mut needed = vec![vec![false; n_snr]; pulses.len()];
    for row in &plan {
        for (j, &pi) in row.iter().enumerate() {
            needed[pi][j] = true;
        }
    }
    let bits_per_realization = (engine.probes_per_burst()
        * cfg.n_bursts_per_realization
        * cfg.constellation.bits_per_symbol() as usize) as u64;

    let mut errors = vec![vec![0u64; n_snr]; pulses.len()];
    let mut done = 0u64;
    let cap = cfg.n_realizations as u64;
    while done < cap {
        let end = (done + BATCH).min(cap);
        let batch: Vec<Vec<Vec<u64>>> = (done..end)
            .into_par_iter()
            .map(|i| {
                let mut e = vec![vec![0u64; n_snr]; pulses.len()];
                engine.run(i, &pulses, |c| {
                    for j in 0..n_snr {
                        if !needed[c.pulse][j] {
                            continue;
                        }
                        let it =
                            c.n.clone()
                                .map(|n| (c.grid.get(c.coset, c.m, n), c.gains[n], c.y[n], c.w[n]));
                        e[c.pulse][j] += count_errors(cfg.constellation, it, noise_amp[j]);
                    }
                })?;
                Ok(e)
            })
            .collect::<Result<_>>()?;
        for e in batch {
            for (acc, row) in errors.iter_mut().zip(e) {
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v;
                }
            }
        }
        done = end;
        let reached = errors
            .iter()
            .zip(&needed)
            .flat_map(|(e, n)| e.iter().zip(n))
            .all(|(&e, &n)| !n || e >= cfg.ber_target_errors);
        if reached {
            break;
        }
    }
    let trials = done * bits_per_realization;
    log::info!("BER: {done} realizations, {trials} bits per point");

    let mut out = Vec::new();
    for (r, row) in cfg.receivers.iter().zip(&plan) {
        for (j, &pi) in row.iter().enumerate() {
            let k = errors[pi][j];
            let (lo, hi) = wilson_interval(k, trials);
            let ber = k as f64 / trials as f64;
            out.push(point(
                cfg,
                cfg.snr_db_list[j],
                Metric::Ber,
                (ber, 0.5 * (hi - lo)),
                r.label(),
                offsets[pi],
            ));
        }
    }
    Ok(out)
}

/// Horizontal distance in dB between two BER curves given as `(x, ber)`
/// points sorted by `x`: the reference BER at `at_x` is located on `improved`
/// by log-linear interpolation, and `at_x - x_improved` is returned. `None`
/// if the reference BER is zero or `improved` never crosses it.
pub fn horizontal_gain_db(reference: &[(f64, f64)], improved: &[(f64, f64)], at_x: f64) -> Option<f64> {
    let target = interp_log(reference, at_x)?;
    improved.windows(2).find_map(|w| {
        let ((x0, b0), (x1, b1)) = (w[0], w[1]);
        if b0 <= 0.0 || b1 <= 0.0 || !(b0 >= target && target >= b1) {
            return None;
        }
        let (l0, l1, lt) = (b0.log10(), b1.log10(), target.log10());
        let x = if l0 == l1 {
            x0
        } else {
            x0 + (x1 - x0) * (l0 - lt) / (l0 - l1)
        };
        Some(at_x - x)
    })
}

/// BER at `x` by log-linear interpolation between neighbouring points.
fn interp_log(curve: &[(f64, f64)], x: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let ((x0, b0), (x1, b1)) = (w[0], w[1]);
        if !(x0 <= x && x <= x1) || b0 <= 0.0 || b1 <= 0.0 {
            return None;
        }
        let t = if x1 == x0 { 0.0 } else { (x - x0) / (x1 - x0) };
        Some(10f64.powf(b0.log10() + t * (b1.log10() - b0.log10())))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ScatteringKind;

    #[test]
    fn wilson_matches_reference_values() {
        // 10 successes in 100 trials: textbook interval (0.0552, 0.1744)
        let (lo, hi) = wilson_interval(10, 100);
        assert!((lo - 0.05523).abs() < 1e-4 && (hi - 0.17437).abs() < 1e-4);
        let (lo, hi) = wilson_interval(0, 1000);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.004);
    }

    #[test]
    fn ebn0_conversion() {
        let l = LatticeSpec::reference();
        let d = ebn0_to_snr_db(10.0, &l, Constellation::Qpsk);
        assert!((d - (10.0 + to_db(1.6))).abs() < 1e-12);
    }

    #[test]
    fn horizontal_gain_of_shifted_curve() {
        let base: Vec<(f64, f64)> = (0..=6)
            .map(|i| (5.0 * i as f64, 10f64.powf(-0.2 * 5.0 * i as f64)))
            .collect();
        let shifted: Vec<(f64, f64)> = base.iter().map(|&(x, b)| (x - 2.0, b)).collect();
        let g = horizontal_gain_db(&base, &shifted, 20.0).unwrap();
        assert!((g - 2.0).abs() < 1e-9);
        assert_eq!(horizontal_gain_db(&base, &base[..2], 20.0), None);
    }

    #[test]
    fn noiseless_identity_channel_is_nearly_error_free() {
        let mut c = SimConfig::reference_spread(ScatteringKind::Uni, 1e-6).unwrap();
        c.snr_db_list = vec![60.0];
        c.n_realizations = 3;
        c.receivers = vec![super::super::ReceiverChoice::Tpr];
        let p = measure_ber(&c).unwrap();
        assert!(p[0].value < 1e-4, "{:?}", p[0]);
    }

    #[test]
    fn ber_is_deterministic_and_bounded() {
        let mut c = SimConfig::reference_spread(ScatteringKind::Uni, 0.2).unwrap();
        c.snr_db_list = vec![0.0, 10.0];
        c.n_realizations = 8;
        let a = measure_ber(&c).unwrap();
        assert_eq!(a, measure_ber(&c).unwrap());
        assert!(a
            .iter()
            .all(|p| (0.0..=1.0).contains(&p.value) && p.ci_halfwidth >= 0.0));
        assert!(a[0].value > a[1].value);
    }
}
