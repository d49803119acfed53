//! One realization of the link: channel draw, random bursts, unit noise and
//! the projections of both onto every requested receive pulse.

use std::ops::Range;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{derive_seed, SimConfig, Stream};
use crate::channel::{add_noise, apply_channel, sample_realization, NoiseSpec};
use crate::error::{Error, Result};
use crate::lattice::{random_grid_with, Coset, SymbolGrid};
use crate::modem::Modem;
use crate::pulses::{PulseSpec, SampledSignal};

/// Unit symbol power; SNR points scale the noise instead.
pub(crate) const SYMBOL_POWER: f64 = 1.0;

/// Interior probes of one lattice column for one receive pulse.
pub(crate) struct Column<'a> {
    pub pulse: usize,
    pub coset: Coset,
    pub m: usize,
    pub n: Range<usize>,
    /// Effective gains of all `N` positions.
    pub gains: &'a [Complex64],
    /// Projections of the noiseless received burst.
    pub y: &'a [Complex64],
    /// Projections of unit-variance noise.
    pub w: &'a [Complex64],
    pub grid: &'a SymbolGrid,
}

/// Signal, interference and unit-noise energy summed over the interior probes
/// of one realization.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct ProbeSums {
    pub signal: f64,
    pub interference: f64,
    pub noise: f64,
}

impl ProbeSums {
    pub fn add(&mut self, c: &Column<'_>) {
        for n in c.n.clone() {
            let s = c.grid.get(c.coset, c.m, n);
            let g = c.gains[n];
            self.signal += SYMBOL_POWER * g.norm_sqr();
            self.interference += (c.y[n] - s * g).norm_sqr();
            self.noise += c.w[n].norm_sqr();
        }
    }
}

pub(crate) struct Engine<'a> {
    cfg: &'a SimConfig,
    modem: Modem,
    columns: Vec<(Coset, usize)>,
    n_range: Range<usize>,
    noise: NoiseSpec,
}

impl<'a> Engine<'a> {
    pub fn new(cfg: &'a SimConfig) -> Result<Self> {
        cfg.validate()?;
        let modem = Modem::new(cfg.lattice, cfg.pulse_sigma, cfg.ts)?;
        let (m_lo, m_hi) = (cfg.guard, cfg.lattice.m - cfg.guard);
        let n_range = if modem.wraps_in_frequency() {
            0..cfg.lattice.n
        } else {
            cfg.guard..cfg.lattice.n.saturating_sub(cfg.guard)
        };
        if n_range.is_empty() {
            return Err(Error::invalid("guard", "no interior subcarriers left"));
        }
        let columns = Coset::BOTH
            .iter()
            .flat_map(|&c| (m_lo..m_hi).map(move |m| (c, m)))
            .collect();
        Ok(Self {
            cfg,
            modem,
            columns,
            n_range,
            noise: NoiseSpec::from_projected(1.0, cfg.ts)?,
        })
    }

    /// Probe positions per burst.
    pub fn probes_per_burst(&self) -> usize {
        self.columns.len() * self.n_range.len()
    }

    /// Runs realization `index` and hands every interior column, for every
    /// pulse in `pulses`, to `visit`.
    pub fn run<F>(&self, index: u64, pulses: &[PulseSpec], mut visit: F) -> Result<()>
    where
        F: FnMut(&Column<'_>),
    {
        let cfg = self.cfg;
        let real = sample_realization(
            &cfg.scattering,
            cfg.n_paths,
            derive_seed(cfg.seed, Stream::Channel, index),
        )?;
        let tables: Vec<_> = pulses.iter().map(|p| self.modem.gain_table(&real, p)).collect();
        let gains: Vec<Vec<Vec<Complex64>>> = tables
            .iter()
            .map(|t| self.columns.iter().map(|&(c, m)| t.column(c, m)).collect())
            .collect::<Result<_>>()?;
        let mut sym_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, Stream::Symbols, index));
        let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, Stream::Noise, index));
        for _ in 0..cfg.n_bursts_per_realization {
            let grid = random_grid_with(&cfg.lattice, cfg.constellation, SYMBOL_POWER, &mut sym_rng)?;
            let y = apply_channel(&real, &self.modem.modulate(&grid)?)?;
            let blank = SampledSignal::zeros(y.len(), y.ts, y.t0)?;
            let w = add_noise(&blank, &self.noise, noise_rng.random());
            for (pi, rx) in pulses.iter().enumerate() {
                for (ci, &(coset, m)) in self.columns.iter().enumerate() {
                    let y_col = self.modem.demodulate_column(&y, rx, coset, m)?;
                    let w_col = self.modem.demodulate_column(&w, rx, coset, m)?;
                    visit(&Column {
                        pulse: pi,
                        coset,
                        m,
                        n: self.n_range.clone(),
                        gains: &gains[pi][ci],
                        y: &y_col,
                        w: &w_col,
                        grid: &grid,
                    });
                }
            }
        }
        Ok(())
    }

    /// Per-pulse probe sums of realization `index`.
    pub fn sums(&self, index: u64, pulses: &[PulseSpec]) -> Result<Vec<ProbeSums>> {
        let mut out = vec![ProbeSums::default(); pulses.len()];
        self.run(index, pulses, |c| out[c.pulse].add(c))?;
        Ok(out)
    }

    /// [`Engine::sums`] over realizations `range` in parallel, in index order.
    pub fn sums_range<P>(&self, range: Range<u64>, pulses_for: P) -> Result<Vec<Vec<ProbeSums>>>
    where
        P: Fn(u64) -> Result<Vec<PulseSpec>> + Sync,
    {
        range.into_par_iter().map(|i| self.sums(i, &pulses_for(i)?)).collect()
    }
}
