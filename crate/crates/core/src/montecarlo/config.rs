use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EstimationError, ReceiverChoice};
use crate::channel::{ScatteringKind, ScatteringSpec};
use crate::defaults;
use crate::error::{ensure_positive, Error, Result};
use crate::lattice::{Constellation, LatticeSpec};
use crate::sinr::{NoiseTerm, SinrParams};

/// Full description of one Monte Carlo experiment.
///
/// Flat `key = value` form (see [`SimConfig::to_pairs`]):
///
/// | key | meaning |
/// |---|---|
/// | `channel` | `uni` or `exp` |
/// | `delay_spread` | `tau_max` or `tau_rms`, seconds |
/// | `max_doppler` | `f_d`, Hz |
/// | `spread` | input only: spread factor, delay/Doppler split matched to `T/F` |
/// | `symbol_period`, `subcarrier_spacing` | `T` s, `F` Hz |
/// | `subcarriers`, `symbols` | `N`, `M` |
/// | `pulse_sigma`, `sampling_interval` | s^2, s |
/// | `paths` | discrete paths per channel draw |
/// | `receivers` | comma list of `tpr`, `maxsinr`, `ub`, `manual:<dt>:<df>` |
/// | `snr_db` | comma list, or `start:step:stop` |
/// | `realizations`, `bursts_per_realization` | counts |
/// | `constellation` | `qpsk` or `16qam` |
/// | `seed` | u64 |
/// | `estimation_error` | `none` or `uniform-half-span` |
/// | `guard` | symbols excluded at each time edge |
/// | `noise_term` | `receive-pulse-energy` or `cross-ambiguity` (analytic only) |
/// | `ber_target_errors` | bit errors per BER point before stopping early |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub lattice: LatticeSpec,
    pub pulse_sigma: f64,
    pub ts: f64,
    pub scattering: ScatteringSpec,
    pub receivers: Vec<ReceiverChoice>,
    /// `sigma_c2 / sigma_w2` in dB; BER runs read these as Eb/N0.
    pub snr_db_list: Vec<f64>,
    /// Channel draws; for BER the cap when the error target is not reached.
    pub n_realizations: usize,
    pub n_bursts_per_realization: usize,
    pub n_paths: usize,
    pub constellation: Constellation,
    pub seed: u64,
    pub estimation_error: EstimationError,
    pub guard: usize,
    pub noise_term: NoiseTerm,
    pub ber_target_errors: u64,
}

impl SimConfig {
    /// Reference link over `scattering`: TPR and Max-SINR receivers, SNR
    /// 0..30 dB in 5 dB steps, 2000 realizations.
    pub fn reference(scattering: ScatteringSpec) -> Self {
        Self {
            lattice: LatticeSpec::reference(),
            pulse_sigma: defaults::pulse_sigma(),
            ts: defaults::SAMPLING_INTERVAL,
            scattering,
            receivers: vec![ReceiverChoice::Tpr, ReceiverChoice::MaxSinr],
            snr_db_list: (0..=6).map(|i| 5.0 * i as f64).collect(),
            n_realizations: 2000,
            n_bursts_per_realization: 1,
            n_paths: defaults::PATHS,
            constellation: Constellation::Qpsk,
            seed: 1,
            estimation_error: EstimationError::None,
            guard: 2,
            noise_term: NoiseTerm::ReceivePulseEnergy,
            ber_target_errors: 100,
        }
    }

    /// Reference link with a lattice-matched channel of the given spread.
    pub fn reference_spread(kind: ScatteringKind, spread: f64) -> Result<Self> {
        Ok(Self::reference(ScatteringSpec::lattice_matched(
            kind,
            spread,
            &LatticeSpec::reference(),
        )?))
    }

    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        self.scattering.validate()?;
        ensure_positive("pulse_sigma", self.pulse_sigma)?;
        ensure_positive("sampling_interval", self.ts)?;
        if self.receivers.is_empty() {
            return Err(Error::invalid("receivers", "at least one receiver is required"));
        }
        if self.snr_db_list.is_empty() {
            return Err(Error::invalid("snr_db", "at least one SNR point is required"));
        }
        if let Some(x) = self.snr_db_list.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid("snr_db", format!("non-finite value {x}")));
        }
        if self.n_realizations == 0 || self.n_bursts_per_realization == 0 || self.n_paths == 0 {
            return Err(Error::invalid(
                "realizations/bursts_per_realization/paths",
                "counts must be >= 1",
            ));
        }
        if 2 * self.guard >= self.lattice.m {
            return Err(Error::invalid(
                "guard",
                format!(
                    "guard {} leaves no interior symbols for M = {}",
                    self.guard, self.lattice.m
                ),
            ));
        }
        for r in &self.receivers {
            if let ReceiverChoice::Manual { delta_t, delta_f } = r {
                if !delta_t.is_finite() || !delta_f.is_finite() {
                    return Err(Error::invalid("receivers", "manual offsets must be finite"));
                }
            }
        }
        Ok(())
    }

    /// Analytic parameters at one SNR point.
    pub fn sinr_params(&self, snr_db: f64) -> Result<SinrParams> {
        Ok(SinrParams::new(self.scattering, self.lattice, self.pulse_sigma, snr_db)?.with_noise_term(self.noise_term))
    }

    /// Canonical flat representation, sorted by key.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let receivers = self
            .receivers
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",");
        let noise_term = match self.noise_term {
            NoiseTerm::ReceivePulseEnergy => "receive-pulse-energy",
            NoiseTerm::CrossAmbiguity => "cross-ambiguity",
        };
        let mut pairs: Vec<(String, String)> = [
            ("ber_target_errors", self.ber_target_errors.to_string()),
            ("bursts_per_realization", self.n_bursts_per_realization.to_string()),
            ("channel", self.scattering.kind().to_string()),
            ("constellation", self.constellation.to_string()),
            ("delay_spread", self.scattering.delay_spread().to_string()),
            ("estimation_error", self.estimation_error.to_string()),
            ("guard", self.guard.to_string()),
            ("max_doppler", self.scattering.max_doppler().to_string()),
            ("noise_term", noise_term.to_string()),
            ("paths", self.n_paths.to_string()),
            ("pulse_sigma", self.pulse_sigma.to_string()),
            ("realizations", self.n_realizations.to_string()),
            ("receivers", receivers),
            ("sampling_interval", self.ts.to_string()),
            ("seed", self.seed.to_string()),
            ("snr_db", list(&self.snr_db_list)),
            ("subcarrier_spacing", self.lattice.f.to_string()),
            ("subcarriers", self.lattice.n.to_string()),
            ("symbol_period", self.lattice.t.to_string()),
            ("symbols", self.lattice.m.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        pairs.sort();
        pairs
    }

    /// Applies `key = value` pairs on top of `self` (later pairs win). A
    /// `spread` key rebuilds the channel with a lattice-matched split after
    /// all other keys are applied.
    pub fn apply_pairs<K: AsRef<str>, V: AsRef<str>>(mut self, pairs: &[(K, V)]) -> Result<Self> {
        let mut kind = self.scattering.kind();
        let mut delay = self.scattering.delay_spread();
        let mut doppler = self.scattering.max_doppler();
        let mut spread = None;
        for (k, v) in pairs {
            let (k, v) = (k.as_ref().trim(), v.as_ref().trim());
            match k {
                "channel" => kind = v.parse()?,
                "delay_spread" => delay = parse_f64("delay_spread", v)?,
                "max_doppler" => doppler = parse_f64("max_doppler", v)?,
                "spread" => spread = Some(parse_f64("spread", v)?),
                "symbol_period" => self.lattice.t = parse_f64("symbol_period", v)?,
                "subcarrier_spacing" => self.lattice.f = parse_f64("subcarrier_spacing", v)?,
                "subcarriers" => self.lattice.n = parse_num("subcarriers", v)?,
                "symbols" => self.lattice.m = parse_num("symbols", v)?,
                "pulse_sigma" => self.pulse_sigma = parse_f64("pulse_sigma", v)?,
                "sampling_interval" => self.ts = parse_f64("sampling_interval", v)?,
                "paths" => self.n_paths = parse_num("paths", v)?,
                "receivers" => {
                    self.receivers = v
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(str::parse)
                        .collect::<Result<_>>()?
                }
                "snr_db" => self.snr_db_list = parse_range("snr_db", v)?,
                "realizations" => self.n_realizations = parse_num("realizations", v)?,
                "bursts_per_realization" => self.n_bursts_per_realization = parse_num("bursts_per_realization", v)?,
                "constellation" => self.constellation = v.parse()?,
                "seed" => self.seed = parse_num("seed", v)?,
                "estimation_error" => self.estimation_error = v.parse()?,
                "guard" => self.guard = parse_num("guard", v)?,
                "noise_term" => {
                    self.noise_term = match v {
                        "receive-pulse-energy" => NoiseTerm::ReceivePulseEnergy,
                        "cross-ambiguity" => NoiseTerm::CrossAmbiguity,
                        _ => return Err(Error::invalid("noise_term", format!("unknown noise term `{v}`"))),
                    }
                }
                "ber_target_errors" => self.ber_target_errors = parse_num("ber_target_errors", v)?,
                other => {
                    return Err(Error::InvalidParameter {
                        name: "config",
                        reason: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        self.scattering = match spread {
            Some(s) => ScatteringSpec::lattice_matched(kind, s, &self.lattice)?,
            None => match kind {
                ScatteringKind::Uni => ScatteringSpec::uni(delay, doppler)?,
                ScatteringKind::Exp => ScatteringSpec::exp(delay, doppler)?,
            },
        };
        Ok(self)
    }

    /// Parses a flat config file: one `key = value` per line, `#` comments.
    pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
        text.lines()
            .enumerate()
            .filter_map(|(i, line)| {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    return None;
                }
                Some(match line.split_once('=') {
                    Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
                    None => Err(Error::invalid(
                        "config",
                        format!("line {}: expected `key = value`", i + 1),
                    )),
                })
            })
            .collect()
    }

    /// The canonical flat form as file text.
    pub fn to_config_string(&self) -> String {
        self.to_pairs().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// First 16 hex digits of the SHA-256 of the canonical pairs; independent
    /// of the order in which keys were given.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.to_pairs() {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        hex::encode(h.finalize())[..16].to_string()
    }
}

fn parse_f64(name: &'static str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::invalid(name, format!("`{v}` is not a number")))
}

fn parse_num<T: std::str::FromStr>(name: &'static str, v: &str) -> Result<T> {
    v.parse::<T>()
        .map_err(|_| Error::invalid(name, format!("`{v}` is not a non-negative integer")))
}

/// `a,b,c` or `start:step:stop` (inclusive, within rounding).
pub fn parse_range(name: &'static str, v: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = v.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (a, s, b) = (parse_f64(name, start)?, parse_f64(name, step)?, parse_f64(name, stop)?);
            if !s.is_finite() || s <= 0.0 || b < a {
                return Err(Error::invalid(name, format!("bad range `{v}`")));
            }
            let n = ((b - a) / s + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|i| a + s * i as f64).collect())
        }
        [_] => v
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| parse_f64(name, s.trim()))
            .collect(),
        _ => Err(Error::invalid(name, format!("bad range `{v}`"))),
    }
}
