//! Closed-form Max-SINR receive-pulse offsets.
//!
//! Both rules come from maximizing the SINR numerator alone (the interference
//! term is treated as offset independent). DD-UNI: the delay factor is a
//! Gaussian window averaged over a symmetric box, so the optimum sits at the
//! box centre. DD-EXP: the delay factor is `a(dt) b(dt)` with
//! `a = exp(sigma/(4 pi tau^2) - dt/tau)` and `b = sqrt(sigma)/2 erfc(...)`;
//! replacing `erfc` by a rational approximation turns the stationarity
//! condition into a quadratic.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::factors::delay_factor;
use super::OffsetMethod;
use crate::channel::{ScatteringKind, ScatteringSpec};
use crate::error::{ensure_positive, Error, Result};
use crate::numeric::golden_section_max;

/// Search span for DD-EXP timing offsets, in multiples of `tau_rms`.
pub const EXP_SEARCH_SPAN: f64 = 5.0;

fn wrong_kind(expected: ScatteringKind, scat: &ScatteringSpec) -> Error {
    Error::WrongScattering {
        expected: expected.name(),
        found: scat.kind().name(),
    }
}

/// `(tau_max / 2, 0)`.
pub fn closed_form_offset_uni(scat: &ScatteringSpec) -> Result<(f64, f64)> {
    match *scat {
        ScatteringSpec::Uni { tau_max, .. } => Ok((0.5 * tau_max, 0.0)),
        _ => Err(wrong_kind(ScatteringKind::Uni, scat)),
    }
}

/// Both DD-EXP timing offsets: the quadratic-root closed form and the exact
/// maximizer of `a(dt) b(dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpOffsetReport {
    /// Discriminant of the quadratic under the radical.
    pub discriminant: f64,
    /// Closed-form root, `None` when the discriminant is negative or the root
    /// violates `dt > 0`.
    pub closed_form: Option<f64>,
    /// Golden-section maximizer of the exact delay factor.
    pub numeric: f64,
    /// Offset actually used: the closed form when valid, else the numeric one.
    pub selected: f64,
    pub method: OffsetMethod,
}

/// Evaluates the printed quadratic-root expression
/// `dt = c - sqrt(sigma/(2 pi)) (3.28 k - sqrt(3.28^2 k^2 - 3.52 (k^2 - 4))) / 1.76`
/// with `k = sqrt(sigma) / tau_rms`, `c = sigma / (2 pi tau_rms)`.
/// Returns `(discriminant, root)`.
pub fn exp_quadratic_root(sigma: f64, tau_rms: f64) -> (f64, f64) {
    let k = sigma.sqrt() / tau_rms;
    let disc = 3.28 * 3.28 * k * k - 3.52 * (k * k - 4.0);
    let x = (3.28 * k - disc.max(0.0).sqrt()) / 1.76;
    let c = sigma / (2.0 * PI * tau_rms);
    (disc, c - (sigma / (2.0 * PI)).sqrt() * x)
}

/// `ln(a(dt) b(dt))` up to a constant; log-concave in `dt`.
pub fn exp_timing_objective(sigma: f64, scat: &ScatteringSpec, delta_t: f64) -> f64 {
    delay_factor(scat, sigma, -delta_t).ln()
}

/// Maximizer of the DD-EXP delay factor over `[0, 5 tau_rms]`.
pub fn numeric_offset_exp(sigma: f64, scat: &ScatteringSpec) -> Result<f64> {
    let ScatteringSpec::Exp { tau_rms, .. } = *scat else {
        return Err(wrong_kind(ScatteringKind::Exp, scat));
    };
    ensure_positive("sigma", sigma)?;
    let (x, _) = golden_section_max(
        |dt| exp_timing_objective(sigma, scat, dt),
        0.0,
        EXP_SEARCH_SPAN * tau_rms,
        1e-9 * tau_rms,
    );
    Ok(x)
}

pub fn exp_offset_report(sigma: f64, scat: &ScatteringSpec) -> Result<ExpOffsetReport> {
    let ScatteringSpec::Exp { tau_rms, .. } = *scat else {
        return Err(wrong_kind(ScatteringKind::Exp, scat));
    };
    ensure_positive("sigma", sigma)?;
    let (disc, root) = exp_quadratic_root(sigma, tau_rms);
    let numeric = numeric_offset_exp(sigma, scat)?;
    let (closed_form, selected, method) = select_offset(disc, root, numeric);
    Ok(ExpOffsetReport {
        discriminant: disc,
        closed_form,
        numeric,
        selected,
        method,
    })
}

fn select_offset(disc: f64, root: f64, numeric: f64) -> (Option<f64>, f64, OffsetMethod) {
    if disc >= 0.0 && root > 0.0 && root.is_finite() {
        (Some(root), root, OffsetMethod::ClosedForm)
    } else {
        log::warn!(
            "closed-form timing offset invalid (discriminant {disc:.3e}, root {root:.3e}); \
             using numeric maximizer {numeric:.3e}"
        );
        (None, numeric, OffsetMethod::Numeric)
    }
}

/// `(dt, 0)` from the quadratic-root closed form, falling back to the numeric
/// maximizer (with a warning) when the root is unusable.
pub fn closed_form_offset_exp(sigma: f64, scat: &ScatteringSpec) -> Result<(f64, f64)> {
    Ok((exp_offset_report(sigma, scat)?.selected, 0.0))
}

/// Max-SINR receive offsets for either scattering family.
pub fn max_sinr_offset(sigma: f64, scat: &ScatteringSpec) -> Result<(f64, f64)> {
    match scat.kind() {
        ScatteringKind::Uni => closed_form_offset_uni(scat),
        ScatteringKind::Exp => closed_form_offset_exp(sigma, scat),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defaults;
    use crate::numeric::linspace;

    #[test]
    fn uni_offset() {
        let s = ScatteringSpec::uni(1e-5, 1e4).unwrap();
        assert_eq!(closed_form_offset_uni(&s).unwrap(), (5e-6, 0.0));
        let tiny = ScatteringSpec::uni(1e-15, 1e4).unwrap();
        assert!(closed_form_offset_uni(&tiny).unwrap().0 < 1e-15);
        let e = ScatteringSpec::exp(1e-5, 1e4).unwrap();
        assert!(matches!(closed_form_offset_uni(&e), Err(Error::WrongScattering { .. })));
    }

    #[test]
    fn exp_root_reference_value() {
        // sigma = T/(sqrt(3) F), tau_rms = 20 us
        let (disc, dt) = exp_quadratic_root(defaults::pulse_sigma(), 2e-5);
        assert!(disc > 0.0);
        assert!((dt / 2e-5 - 0.697).abs() < 2e-3, "{}", dt / 2e-5);
    }

    #[test]
    fn numeric_offset_matches_fine_grid() {
        let sigma = defaults::pulse_sigma();
        let scat = ScatteringSpec::exp(2e-5, 5e3).unwrap();
        let x = numeric_offset_exp(sigma, &scat).unwrap();
        let grid = linspace(0.0, 5.0 * 2e-5, 10_001);
        let best = grid
            .iter()
            .copied()
            .max_by(|a, b| {
                let fa = delay_factor(&scat, sigma, -a);
                let fb = delay_factor(&scat, sigma, -b);
                fa.total_cmp(&fb)
            })
            .unwrap();
        assert!((x - best).abs() <= 1e-3 * best);
    }

    #[test]
    fn fallback_on_invalid_root() {
        assert_eq!(
            select_offset(1.0, 2e-6, 3e-6),
            (Some(2e-6), 2e-6, OffsetMethod::ClosedForm)
        );
        assert_eq!(select_offset(-1.0, 2e-6, 3e-6), (None, 3e-6, OffsetMethod::Numeric));
        assert_eq!(select_offset(1.0, -2e-6, 3e-6), (None, 3e-6, OffsetMethod::Numeric));
        // the discriminant 7.2384 k^2 + 14.08 never goes negative
        for tau in [1e-7, 1e-6, 1e-5, 1e-4, 1e-3] {
            let (disc, root) = exp_quadratic_root(defaults::pulse_sigma(), tau);
            assert!(disc > 0.0 && root > 0.0);
        }
    }

    #[test]
    fn numeric_offset_grows_with_delay_spread() {
        let sigma = defaults::pulse_sigma();
        let mut prev = 0.0;
        for tau in [5e-6, 1e-5, 2e-5, 4e-5, 8e-5, 1.6e-4] {
            let x = numeric_offset_exp(sigma, &ScatteringSpec::exp(tau, 5e3).unwrap()).unwrap();
            assert!(x > prev, "tau {tau}: {x} <= {prev}");
            prev = x;
        }
    }

    #[test]
    fn dispatch() {
        let sigma = defaults::pulse_sigma();
        let e = ScatteringSpec::exp(2e-5, 5e3).unwrap();
        let (dt, df) = max_sinr_offset(sigma, &e).unwrap();
        assert_eq!(df, 0.0);
        assert_eq!(dt, exp_quadratic_root(sigma, 2e-5).1);
        assert!(numeric_offset_exp(sigma, &ScatteringSpec::uni(1e-5, 1e3).unwrap()).is_err());
    }
}
