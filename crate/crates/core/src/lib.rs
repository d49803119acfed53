//! Link-level analysis and simulation of Hexagonal Multicarrier Transmission
//! (HMT) over WSSUS doubly dispersive channels.
//!
//! The crate is organised bottom-up:
//!
//! - [`pulses`]: Gaussian prototype pulse, sampling, ambiguity functions.
//! - [`lattice`]: hexagonal time-frequency lattice split into two rectangular
//!   cosets, constellations and random symbol grids.
//! - [`channel`]: scattering functions (DD-UNI / DD-EXP), discrete path
//!   realizations, channel application and AWGN.
//! - [`modem`]: HMT modulator, projection receiver (TPR / Max-SINR) and genie
//!   one-tap equalization.
//! - [`sinr`]: analytic SINR, upper-bound search, closed-form Max-SINR timing
//!   offsets and numerical checks of their derivations.
//! - [`montecarlo`]: measured SINR, BER and estimation-error robustness curves.
//!
//! All times are in seconds, frequencies in Hz and the pulse dispersion
//! `sigma` in seconds squared.

pub mod channel;
pub mod error;
pub mod lattice;
pub mod modem;
pub mod montecarlo;
pub mod numeric;
pub mod pulses;
pub mod sinr;

pub use channel::{ChannelRealization, NoiseSpec, Path, ScatteringKind, ScatteringSpec};
pub use error::{Error, Result};
pub use lattice::{Constellation, Coset, LatticePoint, LatticeSpec, SymbolGrid};
pub use modem::{ReceiverMode, ReceiverSpec};
pub use montecarlo::{CurvePoint, EstimationError, Metric, ReceiverChoice, SimConfig};
pub use num_complex::Complex64;
pub use pulses::{PulseSpec, SampledSignal};
pub use sinr::{NoiseTerm, OffsetMethod, OffsetResult, SinrParams};

/// Reference system parameters of the simulated HMT link.
pub mod defaults {
    /// Lattice time spacing T, seconds.
    pub const SYMBOL_PERIOD: f64 = 1e-4;
    /// Lattice frequency spacing F, Hz.
    pub const SUBCARRIER_SPACING: f64 = 2.5e4;
    /// Number of subcarriers per coset.
    pub const SUBCARRIERS: usize = 40;
    /// Multicarrier symbols per coset in one burst.
    pub const SYMBOLS_PER_BURST: usize = 20;
    /// Sampling interval, seconds.
    pub const SAMPLING_INTERVAL: f64 = 1e-6;
    /// Carrier frequency, Hz. Metadata only; processing is complex baseband.
    pub const CARRIER_FREQUENCY: f64 = 5e9;
    /// Discrete paths per channel realization.
    pub const PATHS: usize = 64;
    /// Pulses are truncated at this many `sqrt(sigma)` around their centre.
    pub const TRUNCATION_WIDTHS: f64 = 6.0;

    /// Pulse dispersion `sigma = T / (sqrt(3) F)`.
    pub fn pulse_sigma() -> f64 {
        SYMBOL_PERIOD / (3f64.sqrt() * SUBCARRIER_SPACING)
    }
}
