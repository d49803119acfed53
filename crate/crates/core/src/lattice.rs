//! Hexagonal time-frequency lattice, split into two rectangular cosets.
//!
//! Coset 1 places symbol `(m, n)` at `(m T, n F)`; coset 2 at
//! `(m T + T/2, n F + F/2)`. The union is a hexagonal lattice of density
//! `2 / (T F)` when `T / F` is chosen accordingly.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Time spacing T, seconds.
    pub t: f64,
    /// Frequency spacing F, Hz.
    pub f: f64,
    /// Time indices per coset.
    pub m: usize,
    /// Frequency indices per coset.
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Coset {
    First,
    Second,
}

impl Coset {
    pub const BOTH: [Coset; 2] = [Coset::First, Coset::Second];

    /// 1 or 2.
    pub fn index(self) -> u8 {
        match self {
            Coset::First => 1,
            Coset::Second => 2,
        }
    }

    /// Fraction of (T, F) the coset is shifted by: 0 or 1/2.
    pub fn shift(self) -> f64 {
        match self {
            Coset::First => 0.0,
            Coset::Second => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    pub coset: Coset,
    pub m: i64,
    pub n: i64,
    pub t_center: f64,
    pub f_center: f64,
}

impl LatticeSpec {
    pub fn new(t: f64, f: f64, m: usize, n: usize) -> Result<Self> {
        let spec = Self { t, f, m, n };
        spec.validate()?;
        Ok(spec)
    }

    /// Reference link: T = 100 us, F = 25 kHz, 40 subcarriers, 20 symbols.
    pub fn reference() -> Self {
        use crate::defaults::*;
        Self {
            t: SYMBOL_PERIOD,
            f: SUBCARRIER_SPACING,
            m: SYMBOLS_PER_BURST,
            n: SUBCARRIERS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("T", self.t)?;
        ensure_positive("F", self.f)?;
        if self.m == 0 || self.n == 0 {
            return Err(Error::invalid("M/N", "index ranges must be non-empty"));
        }
        Ok(())
    }

    /// Symbols per unit time-bandwidth, `2 / (T F)`.
    pub fn density(&self) -> f64 {
        2.0 / (self.t * self.f)
    }

    /// Time-frequency centre of symbol `(m, n)` in `coset`.
    pub fn center(&self, coset: Coset, m: i64, n: i64) -> (f64, f64) {
        let s = coset.shift();
        ((m as f64 + s) * self.t, (n as f64 + s) * self.f)
    }

    pub fn point(&self, coset: Coset, m: i64, n: i64) -> LatticePoint {
        let (t_center, f_center) = self.center(coset, m, n);
        LatticePoint {
            coset,
            m,
            n,
            t_center,
            f_center,
        }
    }

    /// All `2 M N` points of the finite grid, coset 1 first, row-major in `m`.
    pub fn points(&self) -> Vec<LatticePoint> {
        let mut out = Vec::with_capacity(2 * self.m * self.n);
        for coset in Coset::BOTH {
            for m in 0..self.m as i64 {
                for n in 0..self.n as i64 {
                    out.push(self.point(coset, m, n));
                }
            }
        }
        out
    }

    /// Points of the unbounded lattice with `|m|, |n| <= radius` in both cosets.
    pub fn infinite_points(&self, radius: i64) -> impl Iterator<Item = LatticePoint> + '_ {
        Coset::BOTH.into_iter().flat_map(move |c| {
            (-radius..=radius).flat_map(move |m| (-radius..=radius).map(move |n| self.point(c, m, n)))
        })
    }

    /// Points whose index lies exactly on the ring `max(|m|, |n|) == radius`.
    pub fn ring_points(&self, radius: i64) -> impl Iterator<Item = LatticePoint> + '_ {
        self.infinite_points(radius)
            .filter(move |p| p.m.abs() == radius || p.n.abs() == radius)
    }
}

/// Symbol alphabet. Both are Gray mapped and normalized to unit average power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    Qpsk,
    Qam16,
}

impl Constellation {
    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Constellation::Qpsk => 2,
            Constellation::Qam16 => 4,
        }
    }

    /// Unit-power symbol for the low `bits_per_symbol` bits of `bits`.
    pub fn map(self, bits: u32) -> Complex64 {
        match self {
            Constellation::Qpsk => {
                let i = if bits & 1 == 0 { 1.0 } else { -1.0 };
                let q = if bits & 2 == 0 { 1.0 } else { -1.0 };
                Complex64::new(i, q) * FRAC_1_SQRT_2
            }
            Constellation::Qam16 => {
                let scale = 1.0 / 10f64.sqrt();
                Complex64::new(gray4_level(bits & 3), gray4_level((bits >> 2) & 3)) * scale
            }
        }
    }

    /// Minimum-distance hard decision on a unit-power symbol estimate.
    pub fn demap(self, z: Complex64) -> u32 {
        match self {
            Constellation::Qpsk => u32::from(z.re < 0.0) | (u32::from(z.im < 0.0) << 1),
            Constellation::Qam16 => {
                let s = 10f64.sqrt();
                gray4_bits(z.re * s) | (gray4_bits(z.im * s) << 2)
            }
        }
    }

    pub fn points(self) -> Vec<Complex64> {
        (0..1u32 << self.bits_per_symbol()).map(|b| self.map(b)).collect()
    }
}

// Gray order along one axis: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
fn gray4_level(b: u32) -> f64 {
    match b {
        0 => -3.0,
        1 => -1.0,
        3 => 1.0,
        _ => 3.0,
    }
}

fn gray4_bits(x: f64) -> u32 {
    if x < -2.0 {
        0
    } else if x < 0.0 {
        1
    } else if x < 2.0 {
        3
    } else {
        2
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constellation::Qpsk => "qpsk",
            Constellation::Qam16 => "16qam",
        })
    }
}

impl FromStr for Constellation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" | "4qam" => Ok(Constellation::Qpsk),
            "16qam" | "qam16" => Ok(Constellation::Qam16),
            other => Err(Error::UnsupportedConstellation(other.to_string())),
        }
    }
}

/// Symbols of one burst. Each coset is stored row-major as `[m * N + n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    pub m: usize,
    pub n: usize,
    pub coset1: Vec<Complex64>,
    pub coset2: Vec<Complex64>,
    pub constellation: Constellation,
    pub symbol_power: f64,
}

impl SymbolGrid {
    pub fn zeros(spec: &LatticeSpec, constellation: Constellation, symbol_power: f64) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); spec.m * spec.n];
        Self {
            m: spec.m,
            n: spec.n,
            coset1: zero.clone(),
            coset2: zero,
            constellation,
            symbol_power,
        }
    }

    fn idx(&self, m: usize, n: usize) -> usize {
        assert!(m < self.m && n < self.n, "symbol index ({m}, {n}) out of range");
        m * self.n + n
    }

    pub fn get(&self, coset: Coset, m: usize, n: usize) -> Complex64 {
        let i = self.idx(m, n);
        match coset {
            Coset::First => self.coset1[i],
            Coset::Second => self.coset2[i],
        }
    }

    pub fn set(&mut self, coset: Coset, m: usize, n: usize, value: Complex64) {
        let i = self.idx(m, n);
        match coset {
            Coset::First => self.coset1[i] = value,
            Coset::Second => self.coset2[i] = value,
        }
    }

    pub fn coset(&self, coset: Coset) -> &[Complex64] {
        match coset {
            Coset::First => &self.coset1,
            Coset::Second => &self.coset2,
        }
    }

    /// Checks the grid shape against `spec`.
    pub fn check_shape(&self, spec: &LatticeSpec) -> Result<()> {
        if self.m != spec.m
            || self.n != spec.n
            || self.coset1.len() != spec.m * spec.n
            || self.coset2.len() != spec.m * spec.n
        {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{} per coset", spec.m, spec.n),
                found: format!(
                    "{}x{} ({} / {} symbols)",
                    self.m,
                    self.n,
                    self.coset1.len(),
                    self.coset2.len()
                ),
            });
        }
        Ok(())
    }

    /// Element-wise sum of two grids of the same shape.
    pub fn add(&self, other: &SymbolGrid) -> Result<SymbolGrid> {
        if self.m != other.m || self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.m, self.n),
                found: format!("{}x{}", other.m, other.n),
            });
        }
        let add = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(SymbolGrid {
            coset1: add(&self.coset1, &other.coset1),
            coset2: add(&self.coset2, &other.coset2),
            ..self.clone()
        })
    }
}

/// Draws i.i.d. uniform constellation symbols scaled to average power
/// `symbol_power`. Deterministic given `seed`.
pub fn random_grid(
    spec: &LatticeSpec,
    constellation: Constellation,
    symbol_power: f64,
    seed: u64,
) -> Result<SymbolGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_grid_with(spec, constellation, symbol_power, &mut rng)
}

pub(crate) fn random_grid_with<R: Rng>(
    spec: &LatticeSpec,
    constellation: Constellation,
    symbol_power: f64,
    rng: &mut R,
) -> Result<SymbolGrid> {
    spec.validate()?;
    ensure_positive("symbol_power", symbol_power)?;
    let amp = symbol_power.sqrt();
    let order = 1u32 << constellation.bits_per_symbol();
    let mut draw = |len: usize| -> Vec<Complex64> {
        (0..len)
            .map(|_| constellation.map(rng.random_range(0..order)) * amp)
            .collect()
    };
    let coset1 = draw(spec.m * spec.n);
    let coset2 = draw(spec.m * spec.n);
    Ok(SymbolGrid {
        m: spec.m,
        n: spec.n,
        coset1,
        coset2,
        constellation,
        symbol_power,
    })
}
