//! HMT transmitter and projection receivers.
//!
//! The transmit pulse of symbol `(i, m, n)` is
//! `g(t - t_c) exp(j 2 pi f_c t)` with `(t_c, f_c)` its lattice point. The
//! receiver projects onto
//! `psi(t - t_c) exp(j 2 pi f_c t)`, `psi(t) = g(t - dt) exp(j 2 pi df t)`,
//! i.e. `g(t - t_c - dt) exp(j 2 pi df (t - t_c)) exp(j 2 pi f_c t)`.
//! Inner products are Riemann sums scaled by `ts`.
//!
//! When `F ts` is rational with a small denominator `P` (40 at the reference
//! parameters), all subcarrier phases repeat every `P` samples. Modulation
//! and column demodulation then fold the pulse window modulo `P` and run a
//! `P x N` transform instead of an `N x window` one.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel, delay_samples, ChannelRealization, ScatteringSpec};
use crate::error::{ensure_positive, Error, Result};
use crate::lattice::{Coset, LatticeSpec, SymbolGrid};
use crate::pulses::{gaussian, support_radius, PulseSpec, SampledSignal};
use crate::sinr;

/// Minimum `|effective gain|` accepted by the genie equalizer.
pub const GAIN_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverMode {
    /// Traditional projection receiver, receive pulse equal to transmit pulse.
    Tpr,
    /// Receive pulse offset by the closed-form Max-SINR timing offset.
    MaxSinr,
    /// Offsets given explicitly.
    Manual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverSpec {
    pub mode: ReceiverMode,
    /// Used only in manual mode.
    pub delta_t: f64,
    /// Used only in manual mode.
    pub delta_f: f64,
}

impl ReceiverSpec {
    pub fn tpr() -> Self {
        Self {
            mode: ReceiverMode::Tpr,
            delta_t: 0.0,
            delta_f: 0.0,
        }
    }

    pub fn max_sinr() -> Self {
        Self {
            mode: ReceiverMode::MaxSinr,
            delta_t: 0.0,
            delta_f: 0.0,
        }
    }

    pub fn manual(delta_t: f64, delta_f: f64) -> Self {
        Self {
            mode: ReceiverMode::Manual,
            delta_t,
            delta_f,
        }
    }

    /// Effective `(dt, df)`. Max-SINR needs the channel's scattering function.
    pub fn offsets(&self, sigma: f64, scattering: Option<&ScatteringSpec>) -> Result<(f64, f64)> {
        match self.mode {
            ReceiverMode::Tpr => Ok((0.0, 0.0)),
            ReceiverMode::Manual => Ok((self.delta_t, self.delta_f)),
            ReceiverMode::MaxSinr => {
                let scat = scattering
                    .ok_or_else(|| Error::invalid("receiver", "Max-SINR receiver needs a scattering function"))?;
                sinr::max_sinr_offset(sigma, scat)
            }
        }
    }

    /// Receive prototype pulse for this receiver.
    pub fn pulse(&self, sigma: f64, scattering: Option<&ScatteringSpec>) -> Result<PulseSpec> {
        let (dt, df) = self.offsets(sigma, scattering)?;
        PulseSpec::with_offsets(sigma, dt, df)
    }
}

/// `F ts = q / p` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct FreqPeriod {
    p: usize,
    q: usize,
}

impl FreqPeriod {
    fn detect(f: f64, ts: f64) -> Option<Self> {
        let x = f * ts;
        (1..=4096usize).find_map(|p| {
            let v = x * p as f64;
            let q = v.round();
            ((v - q).abs() < 1e-9 && q >= 1.0).then_some(Self { p, q: q as usize })
        })
    }
}

/// Sampled burst geometry plus the transmit / receive kernels.
#[derive(Debug, Clone)]
pub struct Modem {
    pub lattice: LatticeSpec,
    pub sigma: f64,
    pub ts: f64,
    radius: f64,
    radius_samples: usize,
    t0: f64,
    len: usize,
    period: Option<FreqPeriod>,
    aligned: bool,
}

impl Modem {
    pub fn new(lattice: LatticeSpec, sigma: f64, ts: f64) -> Result<Self> {
        lattice.validate()?;
        ensure_positive("sigma", sigma)?;
        ensure_positive("ts", ts)?;
        let radius = support_radius(sigma);
        let radius_samples = (radius / ts).ceil() as usize;
        let t0 = -(radius_samples as f64) * ts;
        let (t_last, _) = lattice.center(Coset::Second, lattice.m as i64 - 1, 0);
        let len = ((t_last - t0) / ts).ceil() as usize + radius_samples + 1;
        let half = 0.5 * lattice.t / ts;
        let aligned = (half - half.round()).abs() < 1e-9;
        Ok(Self {
            lattice,
            sigma,
            ts,
            radius,
            radius_samples,
            t0,
            len,
            period: FreqPeriod::detect(lattice.f, ts),
            aligned,
        })
    }

    /// Start time of the transmitted burst.
    pub fn burst_t0(&self) -> f64 {
        self.t0
    }

    /// Samples in the transmitted burst (before channel delay).
    pub fn burst_len(&self) -> usize {
        self.len
    }

    /// Whether `N F ts` is an integer, i.e. the subcarrier grid wraps around
    /// the sampling bandwidth and there are no frequency edges.
    pub fn wraps_in_frequency(&self) -> bool {
        let v = self.lattice.n as f64 * self.lattice.f * self.ts;
        (v - v.round()).abs() < 1e-9 && v.round() >= 1.0
    }

    /// Symbols whose pulse is at least `guard` lattice rows from the burst
    /// edges (in frequency too, unless the subcarrier grid wraps).
    pub fn interior_symbols(&self, guard: usize) -> Vec<(Coset, usize, usize)> {
        let (m_lo, m_hi) = (guard, self.lattice.m.saturating_sub(guard));
        let (n_lo, n_hi) = if self.wraps_in_frequency() {
            (0, self.lattice.n)
        } else {
            (guard, self.lattice.n.saturating_sub(guard))
        };
        let mut out = Vec::new();
        for c in Coset::BOTH {
            for m in m_lo..m_hi {
                for n in n_lo..n_hi {
                    out.push((c, m, n));
                }
            }
        }
        out
    }

    fn time(&self, t0: f64, k: usize) -> f64 {
        t0 + k as f64 * self.ts
    }

    /// Sample index range `[lo, hi)` of `sig` within `radius` of `center`, or
    /// a coverage error.
    fn window(&self, sig: &SampledSignal, center: f64) -> Result<(usize, usize)> {
        let lo = ((center - self.radius - sig.t0) / sig.ts).ceil();
        let hi = ((center + self.radius - sig.t0) / sig.ts).floor();
        if lo < 0.0 || hi >= sig.len() as f64 {
            return Err(Error::WindowCoverage {
                needed_start: center - self.radius,
                needed_end: center + self.radius,
                have_start: sig.t0,
                have_end: sig.t0 + (sig.len() - 1) as f64 * sig.ts,
            });
        }
        Ok((lo as usize, hi as usize + 1))
    }

    /// Superposition of all transmit pulses weighted by the grid symbols.
    pub fn modulate(&self, grid: &SymbolGrid) -> Result<SampledSignal> {
        grid.check_shape(&self.lattice)?;
        let mut x = SampledSignal::zeros(self.len, self.ts, self.t0)?;
        let f = self.lattice.f;
        for coset in Coset::BOTH {
            let f_shift = coset.shift() * f;
            let symbols = grid.coset(coset);
            for m in 0..self.lattice.m {
                let row = &symbols[m * self.lattice.n..(m + 1) * self.lattice.n];
                if row.iter().all(|c| c.norm_sqr() == 0.0) {
                    continue;
                }
                let (tc, _) = self.lattice.center(coset, m as i64, 0);
                let (lo, hi) = self.window(&x, tc)?;
                match self.period {
                    Some(per) => {
                        let table = self.periodic_synthesis(row, per, x.t0);
                        for k in lo..hi {
                            let t = self.time(x.t0, k);
                            let env = gaussian(self.sigma, t - tc);
                            let carrier = Complex64::from_polar(env, 2.0 * PI * f_shift * t);
                            x.samples[k] += carrier * table[k % per.p];
                        }
                    }
                    None => {
                        for k in lo..hi {
                            let t = self.time(x.t0, k);
                            let z = Complex64::from_polar(1.0, 2.0 * PI * f * t);
                            // Horner in z = exp(j 2 pi F t)
                            let s = row.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
                            let env = gaussian(self.sigma, t - tc);
                            x.samples[k] += Complex64::from_polar(env, 2.0 * PI * f_shift * t) * s;
                        }
                    }
                }
            }
        }
        Ok(x)
    }

    /// `Q[j] = sum_n c_n exp(j 2 pi n F (t0 + j ts))` for `j < p`; the
    /// subcarrier sum at sample `k` equals `Q[k mod p]`.
    fn periodic_synthesis(&self, row: &[Complex64], per: FreqPeriod, t0: f64) -> Vec<Complex64> {
        let twiddle = twiddles(per.p, 1.0);
        let base: Vec<Complex64> = row
            .iter()
            .enumerate()
            .map(|(n, c)| c * Complex64::from_polar(1.0, 2.0 * PI * n as f64 * self.lattice.f * t0))
            .collect();
        (0..per.p)
            .map(|j| {
                base.iter()
                    .enumerate()
                    .map(|(n, b)| b * twiddle[(n * per.q * j) % per.p])
                    .sum()
            })
            .collect()
    }

    fn check_index(&self, m: usize, n: usize) -> Result<()> {
        if m >= self.lattice.m || n >= self.lattice.n {
            return Err(Error::DimensionMismatch {
                expected: format!("m < {}, n < {}", self.lattice.m, self.lattice.n),
                found: format!("({m}, {n})"),
            });
        }
        Ok(())
    }

    /// Receive pulse `psi_{m,n}` evaluated at time `t`.
    pub fn receive_pulse(&self, rx: &PulseSpec, coset: Coset, m: usize, n: usize, t: f64) -> Complex64 {
        let (tc, fc) = self.lattice.center(coset, m as i64, n as i64);
        let env = gaussian(self.sigma, t - tc - rx.delta_t);
        Complex64::from_polar(env, 2.0 * PI * (rx.delta_f * (t - tc) + fc * t))
    }

    /// Projection `<r, psi_{m,n}>` of one symbol position.
    pub fn demodulate(&self, r: &SampledSignal, rx: &PulseSpec, coset: Coset, m: usize, n: usize) -> Result<Complex64> {
        self.check_index(m, n)?;
        let (tc, _) = self.lattice.center(coset, m as i64, 0);
        let (lo, hi) = self.window(r, tc + rx.delta_t)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in lo..hi {
            let t = r.time(k);
            acc += r.samples[k] * self.receive_pulse(rx, coset, m, n, t).conj();
        }
        Ok(acc * r.ts)
    }

    /// Projections onto all `N` subcarriers of lattice column `(coset, m)`.
    pub fn demodulate_column(
        &self,
        r: &SampledSignal,
        rx: &PulseSpec,
        coset: Coset,
        m: usize,
    ) -> Result<Vec<Complex64>> {
        self.check_index(m, 0)?;
        if (r.ts - self.ts).abs() > 1e-12 * self.ts {
            return Err(Error::invalid("ts", "signal and modem sampling intervals differ"));
        }
        let (tc, _) = self.lattice.center(coset, m as i64, 0);
        let (lo, hi) = self.window(r, tc + rx.delta_t)?;
        let f = self.lattice.f;
        let f_shift = coset.shift() * f;
        let n_sub = self.lattice.n;
        // u[k] = r[k] g(t - tc - dt) exp(-j 2 pi (df (t - tc) + f_shift t)) ts
        let u = |k: usize| -> Complex64 {
            let t = r.time(k);
            let env = gaussian(self.sigma, t - tc - rx.delta_t);
            r.samples[k] * Complex64::from_polar(env * r.ts, -2.0 * PI * (rx.delta_f * (t - tc) + f_shift * t))
        };
        match self.period {
            Some(per) => {
                let mut folded = vec![Complex64::new(0.0, 0.0); per.p];
                for k in lo..hi {
                    folded[k % per.p] += u(k);
                }
                let twiddle = twiddles(per.p, -1.0);
                Ok((0..n_sub)
                    .map(|n| {
                        let s: Complex64 = folded
                            .iter()
                            .enumerate()
                            .map(|(j, v)| v * twiddle[(n * per.q * j) % per.p])
                            .sum();
                        s * Complex64::from_polar(1.0, -2.0 * PI * n as f64 * f * r.t0)
                    })
                    .collect())
            }
            None => {
                let mut out = vec![Complex64::new(0.0, 0.0); n_sub];
                for k in lo..hi {
                    let z = Complex64::from_polar(1.0, -2.0 * PI * f * r.time(k));
                    let mut p = u(k);
                    for y in out.iter_mut() {
                        *y += p;
                        p *= z;
                    }
                }
                Ok(out)
            }
        }
    }

    /// `<H[g_{m,n}], psi_{m,n}>` by direct construction: sample the isolated
    /// transmit pulse on the burst grid, pass it through the channel and
    /// project.
    pub fn effective_gain(
        &self,
        real: &ChannelRealization,
        rx: &PulseSpec,
        coset: Coset,
        m: usize,
        n: usize,
    ) -> Result<Complex64> {
        self.check_index(m, n)?;
        let (tc, fc) = self.lattice.center(coset, m as i64, n as i64);
        let pad = ((rx.delta_t.abs() + self.radius) / self.ts).ceil() as usize + 1;
        // window on the burst grid starting `pad` samples before the pulse support
        let k_center = ((tc - self.t0) / self.ts).round() as i64;
        let k_start = k_center - (self.radius_samples + pad) as i64;
        let t_start = self.t0 + k_start as f64 * self.ts;
        let n_samples = 2 * (self.radius_samples + pad) + 1;
        let samples = (0..n_samples)
            .map(|k| {
                let t = t_start + k as f64 * self.ts;
                if (t - tc).abs() <= self.radius {
                    Complex64::from_polar(gaussian(self.sigma, t - tc), 2.0 * PI * fc * t)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let x = SampledSignal::new(samples, self.ts, t_start)?;
        let y = apply_channel(real, &x)?;
        self.demodulate(&y, rx, coset, m, n)
    }

    /// Precomputed per-path kernels giving every symbol's effective gain in
    /// `O(paths)`; falls back to [`Modem::effective_gain`] when lattice
    /// centres are not on the sample grid.
    pub fn gain_table(&self, real: &ChannelRealization, rx: &PulseSpec) -> GainTable {
        let kernels = if self.aligned {
            Some(
                real.paths
                    .iter()
                    .map(|p| self.path_kernel(delay_samples(p.delay, self.ts), p.doppler, rx))
                    .collect(),
            )
        } else {
            None
        };
        GainTable {
            modem: self.clone(),
            real: real.clone(),
            rx: *rx,
            kernels,
        }
    }

    /// `K_p = ts sum_s g(s - d ts) g(s - dt) exp(j 2 pi (nu - df) s)` over the
    /// truncated supports of both pulses, `s` on the integer sample grid.
    fn path_kernel(&self, d: usize, nu: f64, rx: &PulseSpec) -> Complex64 {
        let ts = self.ts;
        let tau = d as f64 * ts;
        let lo = ((tau - self.radius) / ts)
            .ceil()
            .max(((rx.delta_t - self.radius) / ts).ceil()) as i64;
        let hi = ((tau + self.radius) / ts)
            .floor()
            .min(((rx.delta_t + self.radius) / ts).floor()) as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in lo..=hi {
            let s = j as f64 * ts;
            if (s - tau).abs() > self.radius + 1e-12 * ts {
                continue;
            }
            let w = gaussian(self.sigma, s - tau) * gaussian(self.sigma, s - rx.delta_t);
            acc += Complex64::from_polar(w, 2.0 * PI * (nu - rx.delta_f) * s);
        }
        acc * ts
    }
}

fn twiddles(p: usize, sign: f64) -> Vec<Complex64> {
    (0..p)
        .map(|i| Complex64::from_polar(1.0, sign * 2.0 * PI * i as f64 / p as f64))
        .collect()
}

/// Effective gains of one realization for one receive pulse.
#[derive(Debug, Clone)]
pub struct GainTable {
    modem: Modem,
    real: ChannelRealization,
    rx: PulseSpec,
    kernels: Option<Vec<Complex64>>,
}

impl GainTable {
    pub fn gain(&self, coset: Coset, m: usize, n: usize) -> Result<Complex64> {
        let Some(kernels) = &self.kernels else {
            return self.modem.effective_gain(&self.real, &self.rx, coset, m, n);
        };
        self.modem.check_index(m, n)?;
        let (tc, fc) = self.modem.lattice.center(coset, m as i64, n as i64);
        let ts = self.modem.ts;
        Ok(self
            .real
            .paths
            .iter()
            .zip(kernels)
            .map(|(p, k)| {
                let tau = delay_samples(p.delay, ts) as f64 * ts;
                p.gain * k * Complex64::from_polar(1.0, 2.0 * PI * (p.doppler * tc - fc * tau))
            })
            .sum())
    }
}

impl GainTable {
    /// Gains of all `N` subcarriers of lattice column `(coset, m)`.
    pub fn column(&self, coset: Coset, m: usize) -> Result<Vec<Complex64>> {
        let Some(kernels) = &self.kernels else {
            return (0..self.modem.lattice.n).map(|n| self.gain(coset, m, n)).collect();
        };
        self.modem.check_index(m, 0)?;
        let (tc, f0) = self.modem.lattice.center(coset, m as i64, 0);
        let ts = self.modem.ts;
        let mut out = vec![Complex64::new(0.0, 0.0); self.modem.lattice.n];
        for (p, k) in self.real.paths.iter().zip(kernels) {
            let tau = delay_samples(p.delay, ts) as f64 * ts;
            let mut b = p.gain * k * Complex64::from_polar(1.0, 2.0 * PI * (p.doppler * tc - f0 * tau));
            let step = Complex64::from_polar(1.0, -2.0 * PI * self.modem.lattice.f * tau);
            for o in out.iter_mut() {
                *o += b;
                b *= step;
            }
        }
        Ok(out)
    }
}

/// Sampled HMT burst for `grid`.
pub fn modulate(grid: &SymbolGrid, lattice: &LatticeSpec, pulse_sigma: f64, ts: f64) -> Result<SampledSignal> {
    Modem::new(*lattice, pulse_sigma, ts)?.modulate(grid)
}

/// Projection of `r` onto the receive pulse of symbol `(coset, m, n)`.
pub fn demodulate(
    r: &SampledSignal,
    lattice: &LatticeSpec,
    rx: &PulseSpec,
    coset: Coset,
    m: usize,
    n: usize,
) -> Result<Complex64> {
    Modem::new(*lattice, rx.sigma, r.ts)?.demodulate(r, rx, coset, m, n)
}

/// Effective channel gain `<H[g_{m,n}], psi_{m,n}>` at sampling interval `ts`.
pub fn effective_gain(
    real: &ChannelRealization,
    lattice: &LatticeSpec,
    rx: &PulseSpec,
    ts: f64,
    coset: Coset,
    m: usize,
    n: usize,
) -> Result<Complex64> {
    Modem::new(*lattice, rx.sigma, ts)?.effective_gain(real, rx, coset, m, n)
}

/// One-tap genie equalizer `y / gain`.
pub fn equalize_genie(y: Complex64, eff_gain: Complex64) -> Result<Complex64> {
    if eff_gain.norm() <= GAIN_FLOOR {
        return Err(Error::GainUnderflow(eff_gain.norm()));
    }
    Ok(y / eff_gain)
}
