//! Analytic SINR of the projection receiver over WSSUS channels.
//!
//! For a receive pulse offset by `(dt, df)` and symbols of power `sigma_c2`:
//!
//! - signal energy `sigma_c2 D(-dt) Phi(-df)`,
//! - interference-plus-noise `sigma_c2 sum_{k != 0} D(t_k - dt) Phi(f_k - df) + noise`,
//!
//! where `D` / `Phi` are the delay and Doppler factors in [`factors`] and the
//! sum runs over both cosets of the unbounded hexagonal lattice (truncated
//! once the omitted terms fall below `1e-12`).

pub mod appendix;
pub mod factors;
pub mod offsets;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::{ScatteringKind, ScatteringSpec};
use crate::error::{ensure_positive, Error, Result};
use crate::lattice::{Coset, LatticeSpec};
use crate::numeric::{from_db, golden_section_max, grid_argmax, linspace, to_db};

pub use appendix::{verify_ambiguity, verify_appendix_a, verify_appendix_b, Check, ValidationReport};
pub use factors::{delay_factor, doppler_factor};
pub use offsets::{
    closed_form_offset_exp, closed_form_offset_uni, exp_offset_report, max_sinr_offset, numeric_offset_exp,
    ExpOffsetReport,
};

/// Largest lattice term allowed outside the truncated interference sum.
pub const TRUNCATION_THRESHOLD: f64 = 1e-12;
const MAX_RADIUS: i64 = 256;
/// Grid points per axis of the upper-bound search.
pub const UB_GRID: usize = 41;

/// How white noise enters the interference-plus-noise energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseTerm {
    /// `sigma_w2 ||psi||^2 = sigma_w2`: the variance of white noise projected
    /// onto the unit-energy receive pulse, independent of the offsets.
    #[default]
    ReceivePulseEnergy,
    /// `sigma_w2 |A_{g,psi}(0,0)|`, which shrinks as the receive pulse moves
    /// away from the transmit pulse.
    CrossAmbiguity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OffsetMethod {
    ClosedForm,
    GridSearch,
    /// 1-D maximization of the exact delay factor (closed-form fallback).
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffsetResult {
    pub delta_t: f64,
    pub delta_f: f64,
    pub sinr_db: f64,
    pub method: OffsetMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinrParams {
    pub scattering: ScatteringSpec,
    pub lattice: LatticeSpec,
    /// Pulse dispersion, s^2.
    pub sigma: f64,
    pub sigma_c2: f64,
    pub sigma_w2: f64,
    /// Initial half-width `max(|m|, |n|)` of the interference sum; grown
    /// automatically until the omitted terms are negligible.
    pub trunc_radius: i64,
    pub noise_term: NoiseTerm,
}

impl SinrParams {
    /// Unit symbol power and noise variance set by `snr_db = sigma_c2 / sigma_w2`.
    pub fn new(scattering: ScatteringSpec, lattice: LatticeSpec, sigma: f64, snr_db: f64) -> Result<Self> {
        let p = Self {
            scattering,
            lattice,
            sigma,
            sigma_c2: 1.0,
            sigma_w2: from_db(-snr_db),
            trunc_radius: 4,
            noise_term: NoiseTerm::default(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Reference lattice and pulse.
    pub fn reference(scattering: ScatteringSpec, snr_db: f64) -> Result<Self> {
        Self::new(
            scattering,
            LatticeSpec::reference(),
            crate::defaults::pulse_sigma(),
            snr_db,
        )
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.sigma_w2 = self.sigma_c2 * from_db(-snr_db);
        self
    }

    pub fn with_noise_term(mut self, noise_term: NoiseTerm) -> Self {
        self.noise_term = noise_term;
        self
    }

    pub fn snr_db(&self) -> f64 {
        to_db(self.sigma_c2 / self.sigma_w2)
    }

    pub fn validate(&self) -> Result<()> {
        self.scattering.validate()?;
        self.lattice.validate()?;
        ensure_positive("sigma", self.sigma)?;
        if !(self.sigma_c2 >= 0.0 && self.sigma_w2 >= 0.0) || self.sigma_c2 + self.sigma_w2 == 0.0 {
            return Err(Error::invalid(
                "sigma_c2/sigma_w2",
                "powers must be non-negative and not both zero",
            ));
        }
        if self.trunc_radius < 1 {
            return Err(Error::invalid("trunc_radius", "must be at least 1"));
        }
        Ok(())
    }

    fn noise_energy(&self, dt: f64, df: f64) -> f64 {
        match self.noise_term {
            NoiseTerm::ReceivePulseEnergy => self.sigma_w2,
            NoiseTerm::CrossAmbiguity => {
                self.sigma_w2 * (-0.5 * PI * (dt * dt / self.sigma + self.sigma * df * df)).exp()
            }
        }
    }
}

/// Interferer geometry: distinct lattice times / frequencies and the
/// `(time, frequency)` index pairs of every point except the probe.
#[derive(Debug, Clone)]
struct LatticeSum {
    times: Vec<f64>,
    freqs: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    origin: (usize, usize),
}

impl LatticeSum {
    fn new(lattice: &LatticeSpec, radius: i64) -> Self {
        let width = (2 * radius + 1) as usize;
        let idx = |c: Coset, v: i64| 2 * (v + radius) as usize + c.index() as usize - 1;
        let mut times = vec![0.0; 2 * width];
        let mut freqs = vec![0.0; 2 * width];
        for c in Coset::BOTH {
            for v in -radius..=radius {
                let (t, f) = lattice.center(c, v, v);
                times[idx(c, v)] = t;
                freqs[idx(c, v)] = f;
            }
        }
        let origin = (idx(Coset::First, 0), idx(Coset::First, 0));
        let pairs = lattice
            .infinite_points(radius)
            .map(|p| (idx(p.coset, p.m), idx(p.coset, p.n)))
            .filter(|&ij| ij != origin)
            .collect();
        Self {
            times,
            freqs,
            pairs,
            origin,
        }
    }

    fn delay_terms(&self, p: &SinrParams, dt: f64) -> Vec<f64> {
        self.times
            .iter()
            .map(|t| delay_factor(&p.scattering, p.sigma, t - dt))
            .collect()
    }

    fn doppler_terms(&self, p: &SinrParams, df: f64) -> Result<Vec<f64>> {
        self.freqs
            .iter()
            .map(|f| doppler_factor(&p.scattering, p.sigma, f - df))
            .collect()
    }

    /// `(signal, interference)` factor sums, without powers.
    fn combine(&self, d: &[f64], phi: &[f64]) -> (f64, f64) {
        let s = d[self.origin.0] * phi[self.origin.1];
        let i = self.pairs.iter().map(|&(a, b)| d[a] * phi[b]).sum();
        (s, i)
    }
}

/// Largest single term on the first ring outside `radius`.
fn outer_ring_max(p: &SinrParams, dt: f64, df: f64, radius: i64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for pt in p.lattice.ring_points(radius + 1) {
        let d = delay_factor(&p.scattering, p.sigma, pt.t_center - dt);
        // the Doppler factor is at most one
        if d < TRUNCATION_THRESHOLD {
            continue;
        }
        worst = worst.max(d * doppler_factor(&p.scattering, p.sigma, pt.f_center - df)?);
    }
    Ok(worst)
}

/// Smallest radius (from `p.trunc_radius` up) whose omitted terms are all
/// below [`TRUNCATION_THRESHOLD`] at every listed offset pair.
fn required_radius(p: &SinrParams, offsets: &[(f64, f64)]) -> Result<i64> {
    let mut r = p.trunc_radius;
    while r < MAX_RADIUS {
        let mut ok = true;
        for &(dt, df) in offsets {
            if outer_ring_max(p, dt, df, r)? >= TRUNCATION_THRESHOLD {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(r);
        }
        r += 1;
    }
    log::warn!("interference sum truncated at radius {MAX_RADIUS} before reaching threshold");
    Ok(MAX_RADIUS)
}

/// Expected received symbol energy `sigma_c2 D(-dt) Phi(-df)`.
pub fn signal_energy(p: &SinrParams, delta_t: f64, delta_f: f64) -> Result<f64> {
    Ok(p.sigma_c2 * delay_factor(&p.scattering, p.sigma, -delta_t) * doppler_factor(&p.scattering, p.sigma, -delta_f)?)
}

/// Interference (all other lattice symbols, both cosets) plus noise energy.
pub fn interference_energy(p: &SinrParams, delta_t: f64, delta_f: f64) -> Result<f64> {
    Ok(energies(p, delta_t, delta_f)?.1)
}

/// `(signal, interference + noise)`.
pub fn energies(p: &SinrParams, delta_t: f64, delta_f: f64) -> Result<(f64, f64)> {
    p.validate()?;
    let r = required_radius(p, &[(delta_t, delta_f)])?;
    let sum = LatticeSum::new(&p.lattice, r);
    let (s, i) = sum.combine(&sum.delay_terms(p, delta_t), &sum.doppler_terms(p, delta_f)?);
    Ok((p.sigma_c2 * s, p.sigma_c2 * i + p.noise_energy(delta_t, delta_f)))
}

/// SINR as a linear ratio, any scattering family.
pub fn sinr_linear(p: &SinrParams, delta_t: f64, delta_f: f64) -> Result<f64> {
    let (s, e) = energies(p, delta_t, delta_f)?;
    Ok(s / e)
}

/// SINR in dB, any scattering family.
pub fn sinr_db(p: &SinrParams, delta_t: f64, delta_f: f64) -> Result<f64> {
    Ok(to_db(sinr_linear(p, delta_t, delta_f)?))
}

fn require_kind(p: &SinrParams, kind: ScatteringKind) -> Result<()> {
    if p.scattering.kind() != kind {
        return Err(Error::WrongScattering {
            expected: kind.name(),
            found: p.scattering.kind().name(),
        });
    }
    Ok(())
}

/// SINR (dB) over a DD-UNI channel.
pub fn sinr_uni(p: &SinrParams, delta_t: f64, delta_f: f64) -> Result<f64> {
    require_kind(p, ScatteringKind::Uni)?;
    sinr_db(p, delta_t, delta_f)
}

/// SINR (dB) over a DD-EXP channel.
pub fn sinr_exp(p: &SinrParams, delta_t: f64, delta_f: f64) -> Result<f64> {
    require_kind(p, ScatteringKind::Exp)?;
    sinr_db(p, delta_t, delta_f)
}

/// Offsets of the Max-SINR receiver with their SINR.
pub fn max_sinr_result(p: &SinrParams) -> Result<OffsetResult> {
    let (delta_t, delta_f, method) = match p.scattering.kind() {
        ScatteringKind::Uni => {
            let (dt, df) = closed_form_offset_uni(&p.scattering)?;
            (dt, df, OffsetMethod::ClosedForm)
        }
        ScatteringKind::Exp => {
            let r = exp_offset_report(p.sigma, &p.scattering)?;
            (r.selected, 0.0, r.method)
        }
    };
    Ok(OffsetResult {
        delta_t,
        delta_f,
        sinr_db: sinr_db(p, delta_t, delta_f)?,
        method,
    })
}

/// Timing-offset search interval: `[0, tau_max]` or `[0, 5 tau_rms]`.
pub fn timing_span(scat: &ScatteringSpec) -> f64 {
    match *scat {
        ScatteringSpec::Uni { tau_max, .. } => tau_max,
        ScatteringSpec::Exp { tau_rms, .. } => offsets::EXP_SEARCH_SPAN * tau_rms,
    }
}

/// Maximizes the full SINR (interference included) over `(dt, df)`: a
/// 41 x 41 grid on `[0, span] x (-f_d, f_d)` followed by alternating
/// golden-section refinement along each axis.
pub fn upper_bound_search(p: &SinrParams) -> Result<OffsetResult> {
    p.validate()?;
    let span = timing_span(&p.scattering);
    let f_d = p.scattering.max_doppler();
    let half = (UB_GRID / 2) as f64;
    let dts = linspace(0.0, span, UB_GRID);
    let dfs: Vec<f64> = (0..UB_GRID).map(|j| f_d * (j as f64 - half) / (half + 1.0)).collect();
    let corners = [
        (0.0, dfs[0]),
        (0.0, dfs[UB_GRID - 1]),
        (span, dfs[0]),
        (span, dfs[UB_GRID - 1]),
    ];
    let radius = required_radius(p, &corners)?;
    let sum = LatticeSum::new(&p.lattice, radius);

    let d_rows: Vec<Vec<f64>> = dts.iter().map(|&dt| sum.delay_terms(p, dt)).collect();
    let phi_cols = dfs
        .iter()
        .map(|&df| sum.doppler_terms(p, df))
        .collect::<Result<Vec<_>>>()?;
    let eval = |d: &[f64], phi: &[f64], dt: f64, df: f64| {
        let (s, i) = sum.combine(d, phi);
        p.sigma_c2 * s / (p.sigma_c2 * i + p.noise_energy(dt, df))
    };
    let mut grid = Vec::with_capacity(UB_GRID * UB_GRID);
    for (i, d) in d_rows.iter().enumerate() {
        for (j, phi) in phi_cols.iter().enumerate() {
            grid.push(eval(d, phi, dts[i], dfs[j]));
        }
    }
    let (best, _) = grid_argmax(&grid).ok_or_else(|| Error::invalid("sinr", "no finite grid value"))?;
    let (mut dt, mut df) = (dts[best / UB_GRID], dfs[best % UB_GRID]);

    // Coordinate refinement. Brackets are one grid cell either side of the
    // incumbent, clipped to the search box.
    let dt_step = span / (UB_GRID - 1) as f64;
    let df_step = f_d / (half + 1.0);
    let f_edge = f_d * (1.0 - 1e-9);
    let mut phi = sum.doppler_terms(p, df)?;
    let mut value = 0.0;
    for _ in 0..4 {
        let lo = (dt - dt_step).max(0.0);
        let hi = (dt + dt_step).min(span);
        let (x, _) = golden_section_max(|x| eval(&sum.delay_terms(p, x), &phi, x, df), lo, hi, 1e-7 * span);
        dt = x;
        let d = sum.delay_terms(p, dt);
        let lo = (df - df_step).max(-f_edge);
        let hi = (df + df_step).min(f_edge);
        let (y, v) = golden_section_max(
            |y| match sum.doppler_terms(p, y) {
                Ok(phi) => eval(&d, &phi, dt, y),
                Err(_) => f64::NAN,
            },
            lo,
            hi,
            1e-7 * 2.0 * f_d,
        );
        df = y;
        phi = sum.doppler_terms(p, df)?;
        value = v;
    }
    // never report worse than the best grid cell
    let grid_best = grid[best];
    if grid_best > value {
        dt = dts[best / UB_GRID];
        df = dfs[best % UB_GRID];
        value = grid_best;
    }
    Ok(OffsetResult {
        delta_t: dt,
        delta_f: df,
        sinr_db: to_db(value),
        method: OffsetMethod::GridSearch,
    })
}
