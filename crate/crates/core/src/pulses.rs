//! Gaussian prototype pulse and its ambiguity functions.
//!
//! The transmit prototype is the unit-energy Gaussian
//! `g(t) = (2/sigma)^(1/4) exp(-pi t^2 / sigma)`. Receive prototypes are the
//! same Gaussian shifted by a timing offset and modulated by a frequency
//! offset, `psi(t) = g(t - dt) exp(j 2 pi df t)`.
//!
//! The auto-ambiguity is
//! `A_g(tau, nu) = exp(-(pi/2)(tau^2/sigma + sigma nu^2)) exp(-j pi tau nu)`.
//! The frequency term carries `sigma nu^2`, which is the dimensionally
//! consistent form and the one every SINR expression relies on; writing it as
//! a bare `nu^2` is a known misprint.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::defaults::TRUNCATION_WIDTHS;
use crate::error::{ensure_positive, Error, Result};

/// Gaussian prototype pulse with optional receive-side offsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// Dispersion, seconds squared.
    pub sigma: f64,
    /// Timing offset, seconds.
    pub delta_t: f64,
    /// Frequency offset, Hz.
    pub delta_f: f64,
}

impl PulseSpec {
    pub fn new(sigma: f64) -> Result<Self> {
        Self::with_offsets(sigma, 0.0, 0.0)
    }

    pub fn with_offsets(sigma: f64, delta_t: f64, delta_f: f64) -> Result<Self> {
        ensure_positive("sigma", sigma)?;
        if !delta_t.is_finite() || !delta_f.is_finite() {
            return Err(Error::invalid("offset", "pulse offsets must be finite"));
        }
        Ok(Self {
            sigma,
            delta_t,
            delta_f,
        })
    }

    /// Checks `|delta_f| < f_d` for a channel with maximum Doppler `f_d`.
    pub fn check_doppler(&self, f_d: f64) -> Result<()> {
        if self.delta_f.abs() < f_d {
            Ok(())
        } else {
            Err(Error::invalid(
                "delta_f",
                format!("|delta_f| = {} must be below f_d = {f_d}", self.delta_f.abs()),
            ))
        }
    }

    /// Envelope `g(t - delta_t)`; the modulation is applied by [`sample_pulse`].
    pub fn eval(&self, t: f64) -> f64 {
        gaussian(self.sigma, t - self.delta_t)
    }

    /// Complex pulse value `g(t - delta_t) exp(j 2 pi delta_f t)`.
    pub fn eval_complex(&self, t: f64) -> Complex64 {
        let phase = 2.0 * PI * self.delta_f * t;
        Complex64::from_polar(self.eval(t), phase)
    }

    /// Half-width of the truncated support, `6 sqrt(sigma)`.
    pub fn support_radius(&self) -> f64 {
        support_radius(self.sigma)
    }
}

/// Unit-energy Gaussian window `(2/sigma)^(1/4) exp(-pi t^2 / sigma)`.
#[inline]
pub fn gaussian(sigma: f64, t: f64) -> f64 {
    (2.0 / sigma).powf(0.25) * (-PI * t * t / sigma).exp()
}

/// Truncation half-width used for every sampled pulse.
pub fn support_radius(sigma: f64) -> f64 {
    TRUNCATION_WIDTHS * sigma.sqrt()
}

/// Uniformly sampled complex baseband signal; sample `k` sits at `t0 + k ts`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub samples: Vec<Complex64>,
    pub ts: f64,
    pub t0: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, ts: f64, t0: f64) -> Result<Self> {
        ensure_positive("ts", ts)?;
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        if !t0.is_finite() {
            return Err(Error::invalid("t0", "must be finite"));
        }
        Ok(Self { samples, ts, t0 })
    }

    /// All-zero signal of `len` samples.
    pub fn zeros(len: usize, ts: f64, t0: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], ts, t0)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample `k`.
    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.ts
    }

    /// Time just past the last sample.
    pub fn t_end(&self) -> f64 {
        self.t0 + self.len() as f64 * self.ts
    }

    /// Riemann-sum energy `ts * sum |x[k]|^2`.
    pub fn energy(&self) -> f64 {
        self.ts * self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>()
    }

    /// Offset in whole samples between this signal's grid and `other`'s, if
    /// both share the same sampling interval and aligned grids.
    pub fn grid_offset(&self, other: &SampledSignal) -> Option<i64> {
        if (self.ts - other.ts).abs() > 1e-12 * self.ts {
            return None;
        }
        let shift = (other.t0 - self.t0) / self.ts;
        let rounded = shift.round();
        ((shift - rounded).abs() < 1e-6).then_some(rounded as i64)
    }

    /// Inner product `<self, other> = ts * sum self[k] conj(other[k])` over the
    /// overlap of the two (aligned) sample grids.
    pub fn inner(&self, other: &SampledSignal) -> Result<Complex64> {
        let off = self
            .grid_offset(other)
            .ok_or_else(|| Error::invalid("signal", "inner product needs equal ts and aligned grids"))?;
        // other[j] sits at self index j + off
        let start = off.max(0);
        let end = (off + other.len() as i64).min(self.len() as i64);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in start..end.max(start) {
            acc += self.samples[k as usize] * other.samples[(k - off) as usize].conj();
        }
        Ok(acc * self.ts)
    }

    /// `a * self + b * other` on the grid of `self`; both must have the same
    /// grid and length.
    pub fn linear_combination(&self, a: Complex64, other: &SampledSignal, b: Complex64) -> Result<Self> {
        if self.grid_offset(other) != Some(0) || self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} samples from t0 = {}", self.len(), self.t0),
                found: format!("{} samples from t0 = {}", other.len(), other.t0),
            });
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self {
            samples,
            ts: self.ts,
            t0: self.t0,
        })
    }
}

/// Samples `g(t - dt) exp(j 2 pi df t)` at `t = t0 + k ts`, `k < n_samples`.
/// Logs a warning when the window misses part of the `6 sqrt(sigma)` support.
pub fn sample_pulse(spec: &PulseSpec, ts: f64, n_samples: usize, t0: f64) -> Result<SampledSignal> {
    ensure_positive("ts", ts)?;
    if n_samples == 0 {
        return Err(Error::EmptySignal);
    }
    let r = spec.support_radius();
    let end = t0 + (n_samples - 1) as f64 * ts;
    if t0 > spec.delta_t - r || end < spec.delta_t + r {
        log::warn!(
            "pulse window [{t0:.3e}, {end:.3e}] s does not cover +/-6 sqrt(sigma) around {:.3e} s",
            spec.delta_t
        );
    }
    let samples = (0..n_samples).map(|k| spec.eval_complex(t0 + k as f64 * ts)).collect();
    SampledSignal::new(samples, ts, t0)
}

/// Closed-form auto-ambiguity of the Gaussian,
/// `exp(-(pi/2)(tau^2/sigma + sigma nu^2)) exp(-j pi tau nu)`.
pub fn ambiguity_closed(sigma: f64, tau: f64, nu: f64) -> Complex64 {
    let mag = (-0.5 * PI * (tau * tau / sigma + sigma * nu * nu)).exp();
    Complex64::from_polar(mag, -PI * tau * nu)
}

/// Cross-ambiguity between the transmit prototype `g` and the receive
/// prototype `psi(t) = g(t - dt) exp(j 2 pi df t)`, defined as the inner
/// product `int psi(t) g*(t - tau) exp(-j 2 pi nu t) dt`.
///
/// Closed form: `exp(-(pi/2)((tau-dt)^2/sigma + sigma (nu-df)^2))
/// * exp(-j pi (nu - df)(tau + dt))`. Zero offsets reduce it to
/// [`ambiguity_closed`]. Only the magnitude enters the SINR expressions.
pub fn cross_ambiguity(sigma: f64, delta_t: f64, delta_f: f64, tau: f64, nu: f64) -> Complex64 {
    let dtau = tau - delta_t;
    let dnu = nu - delta_f;
    let mag = (-0.5 * PI * (dtau * dtau / sigma + sigma * dnu * dnu)).exp();
    Complex64::from_polar(mag, -PI * dnu * (tau + delta_t))
}

/// Riemann-sum evaluation of `int g(t) g*(t - tau) exp(-j 2 pi nu t) dt` at
/// sampling interval `ts`, over the joint support of both factors.
pub fn ambiguity_numeric(sigma: f64, tau: f64, nu: f64, ts: f64) -> Complex64 {
    let r = 8.0 * sigma.sqrt();
    let lo = (-r).min(tau - r);
    let hi = r.max(tau + r);
    let n = ((hi - lo) / ts).ceil() as usize + 1;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let t = lo + k as f64 * ts;
        let w = gaussian(sigma, t) * gaussian(sigma, t - tau);
        acc += Complex64::from_polar(w, -2.0 * PI * nu * t);
    }
    acc * ts
}
