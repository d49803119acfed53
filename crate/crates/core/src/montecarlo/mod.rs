//! Monte Carlo link experiments: measured SINR, BER and robustness against
//! delay-spread estimation errors.
//!
//! Every realization draws one channel, one random symbol grid per burst and
//! one unit-variance noise waveform, and derives its random streams from
//! `(seed, stream, realization index)` only, so results do not depend on
//! thread scheduling. Realizations run in parallel and are reduced in index
//! order.
//!
//! Received symbols are split by linearity instead of re-simulating: with
//! effective gain `h` of the probe position, the projection `y` of the
//! noiseless burst gives interference `y - c h`, and the projection `w` of
//! unit noise scales to any SNR. All receivers and SNR points of one run
//! therefore share the same channel, symbols and noise.

mod ber;
mod config;
mod engine;
mod output;
mod robust;
mod sinr_mc;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::ScatteringKind;
use crate::error::{Error, Result};
use crate::sinr::{max_sinr_offset, upper_bound_search, SinrParams};

pub use ber::{ebn0_to_snr_db, horizontal_gain_db, measure_ber, wilson_interval};
pub use config::{parse_range, SimConfig};
pub use output::{read_csv, write_csv, CSV_COLUMNS, CSV_SCHEMA_VERSION};
pub use robust::{robustness_sweep, LABEL_ESTIMATED, LABEL_TPR, LABEL_UB};
pub use sinr_mc::{analytic_curve, measure_sinr, spread_sweep, Method};

/// Random streams of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub(crate) enum Stream {
    Channel = 1,
    Symbols = 2,
    Noise = 3,
    Estimation = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of `stream` for realization `index` under master `seed`.
pub(crate) fn derive_seed(seed: u64, stream: Stream, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream as u64) ^ index)
}

/// Receive-pulse choice of one curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverChoice {
    Tpr,
    MaxSinr,
    /// Offsets maximizing the analytic SINR at each SNR point.
    UpperBound,
    Manual {
        delta_t: f64,
        delta_f: f64,
    },
}

impl ReceiverChoice {
    pub fn label(&self) -> String {
        self.to_string()
    }

    /// Receive offsets at the given analytic operating point.
    pub fn offsets(&self, params: &SinrParams) -> Result<(f64, f64)> {
        match *self {
            ReceiverChoice::Tpr => Ok((0.0, 0.0)),
            ReceiverChoice::MaxSinr => max_sinr_offset(params.sigma, &params.scattering),
            ReceiverChoice::UpperBound => {
                let r = upper_bound_search(params)?;
                Ok((r.delta_t, r.delta_f))
            }
            ReceiverChoice::Manual { delta_t, delta_f } => Ok((delta_t, delta_f)),
        }
    }

    /// Whether the offsets change with the SNR.
    pub fn depends_on_snr(&self) -> bool {
        matches!(self, ReceiverChoice::UpperBound)
    }
}

impl fmt::Display for ReceiverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReceiverChoice::Tpr => f.write_str("tpr"),
            ReceiverChoice::MaxSinr => f.write_str("maxsinr"),
            ReceiverChoice::UpperBound => f.write_str("ub"),
            ReceiverChoice::Manual { delta_t, delta_f } => write!(f, "manual:{delta_t}:{delta_f}"),
        }
    }
}

impl FromStr for ReceiverChoice {
    type Err = Error;

    /// `tpr`, `maxsinr`, `ub`, or `manual:<dt seconds>:<df Hz>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "tpr" => Ok(ReceiverChoice::Tpr),
            "maxsinr" | "max-sinr" => Ok(ReceiverChoice::MaxSinr),
            "ub" | "upper-bound" => Ok(ReceiverChoice::UpperBound),
            _ => {
                let bad = || Error::invalid("receiver", format!("unknown receiver `{s}`"));
                let rest = s.strip_prefix("manual:").ok_or_else(bad)?;
                let (dt, df) = rest.split_once(':').ok_or_else(bad)?;
                Ok(ReceiverChoice::Manual {
                    delta_t: dt.parse().map_err(|_| bad())?,
                    delta_f: df.parse().map_err(|_| bad())?,
                })
            }
        }
    }
}

/// Delay-spread knowledge at the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimationError {
    #[default]
    None,
    /// `estimate = true * (1 + u)`, `u ~ U(-1/2, 1/2)`, drawn per realization.
    UniformHalfSpan,
}

impl fmt::Display for EstimationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimationError::None => "none",
            EstimationError::UniformHalfSpan => "uniform-half-span",
        })
    }
}

impl FromStr for EstimationError {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(EstimationError::None),
            "uniform-half-span" | "uniform" => Ok(EstimationError::UniformHalfSpan),
            other => Err(Error::invalid("estimation_error", format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Monte Carlo SINR, dB.
    SinrDb,
    /// Analytic SINR, dB.
    AnalyticSinrDb,
    Ber,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::SinrDb => "sinr_db",
            Metric::AnalyticSinrDb => "analytic_sinr_db",
            Metric::Ber => "ber",
        })
    }
}

/// One result row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// SNR or Eb/N0 in dB, or spread factor.
    pub x: f64,
    pub metric: Metric,
    pub value: f64,
    /// 95 % confidence half-width (0 for analytic values). For BER the
    /// Wilson interval is asymmetric; this is half its width.
    pub ci_halfwidth: f64,
    pub receiver: String,
    pub channel_kind: ScatteringKind,
    pub spread: f64,
    /// Receive timing offset (mean over realizations when it varies).
    pub delta_t: f64,
    pub delta_f: f64,
    pub seed: u64,
    pub config_hash: String,
}

/// Ratio-of-sums estimate `sum a / sum b` over realizations and its 95 %
/// half-width by the delta method.
pub(crate) fn ratio_estimate(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    let r = sa / sb;
    if a.len() < 2 {
        return (r, f64::INFINITY);
    }
    let mean_b = sb / n;
    let var = a.iter().zip(b).map(|(x, y)| (x - r * y).powi(2)).sum::<f64>() / (n - 1.0);
    (r, 1.96 * (var / n).sqrt() / mean_b)
}

/// Linear ratio with half-width to dB value and dB half-width.
pub(crate) fn ratio_to_db(r: f64, half: f64) -> (f64, f64) {
    (crate::numeric::to_db(r), 10.0 / std::f64::consts::LN_10 * half / r)
}
