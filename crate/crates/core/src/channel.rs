//! WSSUS doubly dispersive channel.
//!
//! A scattering function `S_H(tau, nu)` (unit mass, no path loss) describes
//! the channel statistics; a [`ChannelRealization`] is a finite set of
//! discrete delay-Doppler paths drawn from it and applied to sampled signals
//! as `y(t) = sum_p h_p x(t - tau_p) exp(j 2 pi nu_p t)`.
//!
//! Realizations serialize to JSON as
//! `{"scattering": {"kind": "uni", "tau_max": .., "f_d": ..} | null,
//!   "seed": u64 | null, "paths": [{"delay": s, "doppler": Hz, "gain": [re, im]}, ..]}`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::lattice::LatticeSpec;
use crate::pulses::SampledSignal;

/// Exponential delay profiles are truncated at this many RMS delay spreads.
pub const EXP_DELAY_TRUNCATION: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScatteringKind {
    /// Uniform delay profile on `(0, tau_max]`, uniform Doppler on `(-f_d, f_d)`.
    Uni,
    /// Exponential delay profile, U-shaped (Jakes) Doppler spectrum.
    Exp,
}

impl ScatteringKind {
    pub fn name(self) -> &'static str {
        match self {
            ScatteringKind::Uni => "uni",
            ScatteringKind::Exp => "exp",
        }
    }
}

impl fmt::Display for ScatteringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScatteringKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uni" | "dd-uni" | "uniform" => Ok(ScatteringKind::Uni),
            "exp" | "dd-exp" | "exponential" => Ok(ScatteringKind::Exp),
            other => Err(Error::invalid("channel", format!("unknown scattering kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScatteringSpec {
    Uni { tau_max: f64, f_d: f64 },
    Exp { tau_rms: f64, f_d: f64 },
}

impl ScatteringSpec {
    pub fn uni(tau_max: f64, f_d: f64) -> Result<Self> {
        let s = ScatteringSpec::Uni { tau_max, f_d };
        s.validate()?;
        Ok(s)
    }

    pub fn exp(tau_rms: f64, f_d: f64) -> Result<Self> {
        let s = ScatteringSpec::Exp { tau_rms, f_d };
        s.validate()?;
        Ok(s)
    }

    /// Builds a channel with spread factor `spread = delay * f_d` and
    /// `delay / f_d = delay_doppler_ratio`.
    pub fn from_spread(kind: ScatteringKind, spread: f64, delay_doppler_ratio: f64) -> Result<Self> {
        ensure_positive("spread", spread)?;
        ensure_positive("delay_doppler_ratio", delay_doppler_ratio)?;
        let delay = (spread * delay_doppler_ratio).sqrt();
        let f_d = (spread / delay_doppler_ratio).sqrt();
        match kind {
            ScatteringKind::Uni => Self::uni(delay, f_d),
            ScatteringKind::Exp => Self::exp(delay, f_d),
        }
    }

    /// Channel whose delay/Doppler aspect ratio equals the lattice's `T / F`.
    pub fn lattice_matched(kind: ScatteringKind, spread: f64, lattice: &LatticeSpec) -> Result<Self> {
        Self::from_spread(kind, spread, lattice.t / lattice.f)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("delay spread", self.delay_spread())?;
        ensure_positive("f_d", self.max_doppler())
    }

    pub fn kind(&self) -> ScatteringKind {
        match self {
            ScatteringSpec::Uni { .. } => ScatteringKind::Uni,
            ScatteringSpec::Exp { .. } => ScatteringKind::Exp,
        }
    }

    /// `tau_max` for DD-UNI, `tau_rms` for DD-EXP.
    pub fn delay_spread(&self) -> f64 {
        match *self {
            ScatteringSpec::Uni { tau_max, .. } => tau_max,
            ScatteringSpec::Exp { tau_rms, .. } => tau_rms,
        }
    }

    pub fn max_doppler(&self) -> f64 {
        match *self {
            ScatteringSpec::Uni { f_d, .. } | ScatteringSpec::Exp { f_d, .. } => f_d,
        }
    }

    /// Channel spread factor, delay spread times maximum Doppler.
    pub fn spread_factor(&self) -> f64 {
        self.delay_spread() * self.max_doppler()
    }

    /// Same family and Doppler, different delay spread.
    pub fn with_delay_spread(&self, delay: f64) -> Result<Self> {
        match *self {
            ScatteringSpec::Uni { f_d, .. } => Self::uni(delay, f_d),
            ScatteringSpec::Exp { f_d, .. } => Self::exp(delay, f_d),
        }
    }

    /// Marginal delay density.
    pub fn delay_density(&self, tau: f64) -> f64 {
        match *self {
            ScatteringSpec::Uni { tau_max, .. } => {
                if tau > 0.0 && tau <= tau_max {
                    1.0 / tau_max
                } else {
                    0.0
                }
            }
            ScatteringSpec::Exp { tau_rms, .. } => {
                if tau > 0.0 {
                    (-tau / tau_rms).exp() / tau_rms
                } else {
                    0.0
                }
            }
        }
    }

    /// Marginal Doppler density; diverges (integrably) at `|nu| -> f_d` for DD-EXP.
    pub fn doppler_density(&self, nu: f64) -> f64 {
        let f_d = self.max_doppler();
        if nu.abs() >= f_d {
            return 0.0;
        }
        match self {
            ScatteringSpec::Uni { .. } => 0.5 / f_d,
            ScatteringSpec::Exp { .. } => {
                let r = nu / f_d;
                1.0 / (PI * f_d * (1.0 - r * r).sqrt())
            }
        }
    }

    /// Scattering function `S_H(tau, nu)`, in 1/(s Hz).
    pub fn density(&self, tau: f64, nu: f64) -> f64 {
        self.delay_density(tau) * self.doppler_density(nu)
    }

    fn sample_delay<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            ScatteringSpec::Uni { tau_max, .. } => {
                // (0, tau_max]
                tau_max * (1.0 - rng.random::<f64>())
            }
            ScatteringSpec::Exp { tau_rms, .. } => {
                let d = Exp::new(1.0 / tau_rms).expect("positive rate");
                loop {
                    let tau: f64 = d.sample(rng);
                    if tau > 0.0 && tau <= EXP_DELAY_TRUNCATION * tau_rms {
                        break tau;
                    }
                }
            }
        }
    }

    fn sample_doppler<R: Rng>(&self, rng: &mut R) -> f64 {
        let f_d = self.max_doppler();
        loop {
            let u: f64 = rng.random();
            let nu = match self {
                ScatteringSpec::Uni { .. } => f_d * (2.0 * u - 1.0),
                // inverse CDF of the arcsine (U-shape) law
                ScatteringSpec::Exp { .. } => f_d * (PI * (u - 0.5)).sin(),
            };
            if nu.abs() < f_d {
                break nu;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    /// Delay, seconds.
    pub delay: f64,
    /// Doppler shift, Hz.
    pub doppler: f64,
    pub gain: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub scattering: Option<ScatteringSpec>,
    pub seed: Option<u64>,
    pub paths: Vec<Path>,
}

impl ChannelRealization {
    pub fn from_paths(paths: Vec<Path>) -> Result<Self> {
        if paths.is_empty() {
            return Err(Error::invalid("paths", "a realization needs at least one path"));
        }
        if paths
            .iter()
            .any(|p| !p.delay.is_finite() || p.delay < 0.0 || !p.doppler.is_finite())
        {
            return Err(Error::invalid(
                "paths",
                "delays must be finite and >= 0, Dopplers finite",
            ));
        }
        Ok(Self {
            scattering: None,
            seed: None,
            paths,
        })
    }

    /// Single path with `tau = 0`, `nu = 0`, `h = 1`.
    pub fn identity() -> Self {
        Self {
            scattering: None,
            seed: None,
            paths: vec![Path {
                delay: 0.0,
                doppler: 0.0,
                gain: Complex64::new(1.0, 0.0),
            }],
        }
    }

    pub fn power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }

    /// Largest delay in whole samples at sampling interval `ts`.
    pub fn max_delay_samples(&self, ts: f64) -> usize {
        self.paths.iter().map(|p| delay_samples(p.delay, ts)).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s)?;
        if r.paths.is_empty() {
            return Err(Error::invalid("paths", "a realization needs at least one path"));
        }
        Ok(r)
    }
}

/// Delay rounded to the nearest whole sample.
#[inline]
pub fn delay_samples(delay: f64, ts: f64) -> usize {
    (delay / ts).round() as usize
}

/// Draws `n_paths` discrete paths from `spec`: delays and Dopplers i.i.d.
/// from the marginals, equal-magnitude gains with uniform random phases,
/// renormalized so that `sum |h_p|^2 = 1` exactly.
pub fn sample_realization(spec: &ScatteringSpec, n_paths: usize, seed: u64) -> Result<ChannelRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = sample_realization_with(spec, n_paths, &mut rng)?;
    r.seed = Some(seed);
    Ok(r)
}

pub(crate) fn sample_realization_with<R: Rng>(
    spec: &ScatteringSpec,
    n_paths: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    spec.validate()?;
    if n_paths == 0 {
        return Err(Error::invalid("n_paths", "must be >= 1"));
    }
    let amp = 1.0 / (n_paths as f64).sqrt();
    let mut paths: Vec<Path> = (0..n_paths)
        .map(|_| {
            let delay = spec.sample_delay(rng);
            let doppler = spec.sample_doppler(rng);
            let phase = 2.0 * PI * rng.random::<f64>();
            Path {
                delay,
                doppler,
                gain: Complex64::from_polar(amp, phase),
            }
        })
        .collect();
    let norm = paths.iter().map(|p| p.gain.norm_sqr()).sum::<f64>().sqrt();
    for p in &mut paths {
        p.gain /= norm;
    }
    Ok(ChannelRealization {
        scattering: Some(*spec),
        seed: None,
        paths,
    })
}

/// Applies the realization. Delays are rounded to whole samples; the Doppler
/// phase uses the absolute time of each output sample. The output starts at
/// the input's `t0` and is longer by the largest delay.
pub fn apply_channel(real: &ChannelRealization, x: &SampledSignal) -> Result<SampledSignal> {
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    let ts = x.ts;
    let extra = real.max_delay_samples(ts);
    let mut y = vec![Complex64::new(0.0, 0.0); x.len() + extra];
    for p in &real.paths {
        let d = delay_samples(p.delay, ts);
        let out = &mut y[d..d + x.len()];
        if p.doppler == 0.0 {
            for (o, s) in out.iter_mut().zip(&x.samples) {
                *o += p.gain * s;
            }
            continue;
        }
        let w = 2.0 * PI * p.doppler;
        let t_start = x.t0 + d as f64 * ts;
        let step = Complex64::from_polar(1.0, w * ts);
        let mut rot = Complex64::new(0.0, 0.0);
        for (k, (o, s)) in out.iter_mut().zip(&x.samples).enumerate() {
            // resynchronize the recursion periodically to bound phase drift
            if k % 256 == 0 {
                rot = Complex64::from_polar(1.0, w * (t_start + k as f64 * ts));
            }
            *o += p.gain * rot * s;
            rot *= step;
        }
    }
    SampledSignal::new(y, ts, x.t0)
}

/// Additive white noise with per-sample variance `sigma_w2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma_w2: f64,
}

impl NoiseSpec {
    pub fn new(sigma_w2: f64) -> Result<Self> {
        if sigma_w2.is_finite() && sigma_w2 >= 0.0 {
            Ok(Self { sigma_w2 })
        } else {
            Err(Error::invalid(
                "sigma_w2",
                format!("must be finite and >= 0, got {sigma_w2}"),
            ))
        }
    }

    /// Noise whose projection onto any unit-energy pulse has variance
    /// `projected_var`: per-sample variance `projected_var / ts`.
    pub fn from_projected(projected_var: f64, ts: f64) -> Result<Self> {
        ensure_positive("ts", ts)?;
        Self::new(projected_var / ts)
    }
}

/// Adds circularly-symmetric complex Gaussian noise. Deterministic given `seed`.
pub fn add_noise(x: &SampledSignal, noise: &NoiseSpec, seed: u64) -> SampledSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = x.clone();
    if noise.sigma_w2 == 0.0 {
        return y;
    }
    let s = (0.5 * noise.sigma_w2).sqrt();
    for v in &mut y.samples {
        *v += complex_normal(&mut rng) * s;
    }
    y
}

/// Standard complex normal with unit variance per component.
#[inline]
pub(crate) fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn impulse(len: usize, at: usize, ts: f64, t0: f64) -> SampledSignal {
        let mut s = vec![Complex64::new(0.0, 0.0); len];
        s[at] = Complex64::new(1.0, 0.0);
        SampledSignal::new(s, ts, t0).unwrap()
    }

    fn random_signal(len: usize, seed: u64) -> SampledSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = (0..len).map(|_| complex_normal(&mut rng)).collect();
        SampledSignal::new(s, 1e-6, -3e-5).unwrap()
    }

    #[test]
    fn uniform_density_value() {
        let s = ScatteringSpec::uni(1e-5, 1e4).unwrap();
        assert!((s.density(5e-6, 2e3) - 5.0).abs() < 1e-12);
        assert_eq!(s.density(2e-5, 0.0), 0.0);
        assert_eq!(s.density(5e-6, 1e4), 0.0);
    }

    #[test]
    fn exp_density_edge_blows_up() {
        let s = ScatteringSpec::exp(1e-5, 1e4).unwrap();
        let inner = s.density(1e-6, 0.0);
        let edge = s.density(1e-6, 1e4 * (1.0 - 1e-12));
        assert!(edge > 1e5 * inner);
        assert_eq!(s.density(-1e-6, 0.0), 0.0);
    }

    #[test]
    fn spread_split() {
        let l = LatticeSpec::reference();
        let s = ScatteringSpec::lattice_matched(ScatteringKind::Uni, 0.1, &l).unwrap();
        assert!((s.spread_factor() - 0.1).abs() < 1e-12);
        assert!((s.delay_spread() / s.max_doppler() - l.t / l.f).abs() < 1e-20);
        assert!((s.delay_spread() - 2e-5).abs() < 1e-15);
        assert!(ScatteringSpec::from_spread(ScatteringKind::Exp, 0.0, 1.0).is_err());
    }

    #[test]
    fn scattering_json_schema() {
        let s = ScatteringSpec::exp(2e-5, 5e3).unwrap();
        let js = serde_json::to_value(s).unwrap();
        assert_eq!(js["kind"], "exp");
        assert_eq!(js["tau_rms"], 2e-5);
        let r = sample_realization(&s, 3, 9).unwrap();
        let back = ChannelRealization::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert!(ChannelRealization::from_json(r#"{"scattering":null,"seed":null,"paths":[]}"#).is_err());
    }

    #[test]
    fn single_path_has_unit_power() {
        let s = ScatteringSpec::uni(1e-5, 1e4).unwrap();
        let r = sample_realization(&s, 1, 0).unwrap();
        assert_eq!(r.paths.len(), 1);
        assert!((r.paths[0].gain.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn realizations_are_normalized_and_in_support() {
        for (i, s) in [
            ScatteringSpec::uni(2e-5, 5e3).unwrap(),
            ScatteringSpec::exp(2e-5, 5e3).unwrap(),
        ]
        .iter()
        .enumerate()
        {
            for seed in 0..50 {
                let r = sample_realization(s, 64, seed + 100 * i as u64).unwrap();
                assert!((r.power() - 1.0).abs() < 1e-14);
                for p in &r.paths {
                    assert!(p.delay > 0.0);
                    assert!(p.doppler.abs() < s.max_doppler());
                }
            }
        }
    }

    #[test]
    fn delay_moments() {
        let uni = ScatteringSpec::uni(2e-5, 5e3).unwrap();
        let exp = ScatteringSpec::exp(2e-5, 5e3).unwrap();
        let mean = |s: &ScatteringSpec| {
            let r = sample_realization(s, 100_000, 77).unwrap();
            r.paths.iter().map(|p| p.delay).sum::<f64>() / 1e5
        };
        assert!((mean(&uni) / 1e-5 - 1.0).abs() < 0.01);
        assert!((mean(&exp) / 2e-5 - 1.0).abs() < 0.02);
    }

    #[test]
    fn identity_channel() {
        let x = random_signal(50, 1);
        let y = apply_channel(&ChannelRealization::identity(), &x).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn pure_delay() {
        let x = random_signal(40, 2);
        let r = ChannelRealization::from_paths(vec![Path {
            delay: 7e-6,
            doppler: 0.0,
            gain: Complex64::new(1.0, 0.0),
        }])
        .unwrap();
        let y = apply_channel(&r, &x).unwrap();
        assert_eq!(y.len(), 47);
        assert_eq!(y.t0, x.t0);
        for k in 0..40 {
            assert_eq!(y.samples[k + 7], x.samples[k]);
        }
        assert!(y.samples[..7].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn two_path_impulse_response() {
        let ts = 1e-6;
        let t0 = -1e-5;
        let x = impulse(30, 4, ts, t0);
        let paths = vec![
            Path {
                delay: 2e-6,
                doppler: 1500.0,
                gain: Complex64::new(0.6, 0.0),
            },
            Path {
                delay: 9e-6,
                doppler: -700.0,
                gain: Complex64::new(0.0, 0.8),
            },
        ];
        let r = ChannelRealization::from_paths(paths.clone()).unwrap();
        let y = apply_channel(&r, &x).unwrap();
        let mut expect = vec![Complex64::new(0.0, 0.0); 39];
        for p in &paths {
            let k = 4 + (p.delay / ts).round() as usize;
            let t = t0 + k as f64 * ts;
            expect[k] += p.gain * Complex64::from_polar(1.0, 2.0 * PI * p.doppler * t);
        }
        for (a, b) in y.samples.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn doppler_phase_recursion_is_accurate() {
        let ts = 1e-6;
        let x = SampledSignal::new(vec![Complex64::new(1.0, 0.0); 5000], ts, -1e-3).unwrap();
        let r = ChannelRealization::from_paths(vec![Path {
            delay: 0.0,
            doppler: 9876.5,
            gain: Complex64::new(1.0, 0.0),
        }])
        .unwrap();
        let y = apply_channel(&r, &x).unwrap();
        for k in (0..5000).step_by(97) {
            let e = Complex64::from_polar(1.0, 2.0 * PI * 9876.5 * x.time(k));
            assert!((y.samples[k] - e).norm() < 1e-12);
        }
    }

    #[test]
    fn empty_signal_rejected() {
        assert!(SampledSignal::new(vec![], 1e-6, 0.0).is_err());
    }

    #[test]
    fn zero_noise_is_identity() {
        let x = random_signal(64, 3);
        assert_eq!(add_noise(&x, &NoiseSpec::new(0.0).unwrap(), 1), x);
        assert!(NoiseSpec::new(-1.0).is_err());
    }

    #[test]
    fn noise_statistics() {
        let x = SampledSignal::zeros(1_000_000, 1e-6, 0.0).unwrap();
        let y = add_noise(&x, &NoiseSpec::new(2.5).unwrap(), 42);
        let n = y.len() as f64;
        let var = y.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        assert!((var / 2.5 - 1.0).abs() < 0.01, "variance {var}");
        let sre = y.samples.iter().map(|z| z.re * z.re).sum::<f64>();
        let sim = y.samples.iter().map(|z| z.im * z.im).sum::<f64>();
        let cross = y.samples.iter().map(|z| z.re * z.im).sum::<f64>();
        let rho = cross / (sre * sim).sqrt();
        assert!(rho.abs() < 0.01, "correlation {rho}");
        assert_eq!(add_noise(&x, &NoiseSpec::new(2.5).unwrap(), 42), y);
    }
}
