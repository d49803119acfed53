//! Numerical checks of the two closed-form offset derivations.
//!
//! DD-UNI: the SINR numerator separates into a delay and a Doppler factor;
//! setting each derivative to zero balances two half-Gaussian moment
//! integrals, `alpha(dt) = beta(dt)` in time and `kappa(df) = chi(df)` in
//! frequency, which hold at `(tau_max/2, 0)`.
//!
//! DD-EXP: the delay factor is `a(dt) b(dt)` with `b` an `erfc`; the
//! rational `erfc` approximation, the stationarity residual, and the
//! Doppler-derivative `Xi(df)` (odd, with negative slope) are checked.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::factors::{delay_factor, doppler_factor};
use super::offsets::numeric_offset_exp;
use super::SinrParams;
use crate::channel::{ScatteringKind, ScatteringSpec};
use crate::error::{Error, Result};
use crate::numeric::{erfc, erfc_approx, linspace, Integrator};
use crate::pulses::{ambiguity_closed, ambiguity_numeric};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            value,
            tolerance,
            detail: detail.into(),
        }
    }

    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self::new(name, value <= tolerance, value, tolerance, detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn new(suite: &str) -> Self {
        Self {
            suite: suite.to_string(),
            checks: Vec::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.checks.extend(other.checks);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn fine() -> Integrator {
    Integrator::with_tolerance(1e-12, 1e-300)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn require(p: &SinrParams, kind: ScatteringKind) -> Result<()> {
    if p.scattering.kind() != kind {
        return Err(Error::WrongScattering {
            expected: kind.name(),
            found: p.scattering.kind().name(),
        });
    }
    if p.sigma <= 0.0 {
        return Err(Error::invalid("sigma", "must be positive"));
    }
    Ok(())
}

/// `int_0^upper (2 pi x / s) exp(-pi x^2 / s) dx` by quadrature.
fn half_moment(s: f64, upper: f64) -> Result<f64> {
    fine().integrate(|x| 2.0 * PI * x / s * (-PI * x * x / s).exp(), 0.0, upper)
}

/// Time balance `(alpha(dt), beta(dt))`.
pub fn uni_time_balance(sigma: f64, tau_max: f64, dt: f64) -> Result<(f64, f64)> {
    Ok((half_moment(sigma, tau_max - dt)?, half_moment(sigma, dt)?))
}

/// Frequency balance `(kappa(df), chi(df))`.
pub fn uni_frequency_balance(sigma: f64, f_d: f64, df: f64) -> Result<(f64, f64)> {
    Ok((half_moment(1.0 / sigma, f_d - df)?, half_moment(1.0 / sigma, f_d + df)?))
}

pub fn verify_appendix_a(p: &SinrParams, n_points: usize) -> Result<ValidationReport> {
    require(p, ScatteringKind::Uni)?;
    let ScatteringSpec::Uni { tau_max, f_d } = p.scattering else {
        unreachable!()
    };
    let sigma = p.sigma;
    let n = n_points.max(3);
    let mut report = ValidationReport::new("uniform scattering offsets");

    // (a) the numerator is the product of a delay and a Doppler factor:
    // compare against a direct 2-D integral of S_H |A_{g,psi}|^2
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let dt = tau_max * (i as f64 + 0.5) / n as f64;
        let df = f_d * (0.8 * (2.0 * i as f64 / (n - 1) as f64 - 1.0));
        let inner = |tau: f64| -> Result<f64> {
            let g_t = (-PI * (tau - dt).powi(2) / sigma).exp();
            let v = fine().integrate(|nu| (-PI * sigma * (nu - df).powi(2)).exp(), -f_d, f_d)?;
            Ok(g_t * v / (2.0 * tau_max * f_d))
        };
        // propagate inner failures as NaN so the check fails visibly
        let direct = fine()
            .integrate(|tau| inner(tau).unwrap_or(f64::NAN), 0.0, tau_max)
            .unwrap_or(f64::NAN);
        let product = delay_factor(&p.scattering, sigma, -dt) * doppler_factor(&p.scattering, sigma, -df)?;
        worst = worst.max(if direct.is_nan() {
            f64::INFINITY
        } else {
            rel(direct, product)
        });
    }
    report.push(Check::at_most(
        "separable numerator",
        worst,
        1e-8,
        format!("direct 2-D integral vs factor product, {n} offset pairs"),
    ));

    let (alpha, beta) = uni_time_balance(sigma, tau_max, 0.5 * tau_max)?;
    report.push(Check::at_most(
        "time balance at tau_max/2",
        rel(alpha, beta),
        1e-8,
        format!("alpha = {alpha:.12e}, beta = {beta:.12e}"),
    ));
    let (alpha, beta) = uni_time_balance(sigma, tau_max, 0.25 * tau_max)?;
    report.push(Check::new(
        "time imbalance at tau_max/4",
        alpha > beta,
        alpha - beta,
        0.0,
        "alpha exceeds beta left of the centre",
    ));

    let (kappa, chi) = uni_frequency_balance(sigma, f_d, 0.0)?;
    report.push(Check::at_most(
        "frequency balance at 0",
        rel(kappa, chi),
        1e-12,
        format!("kappa = {kappa:.12e}, chi = {chi:.12e}"),
    ));
    let (kappa, chi) = uni_frequency_balance(sigma, f_d, 0.3 * f_d)?;
    report.push(Check::new(
        "frequency imbalance at 0.3 f_d",
        rel(kappa, chi) > 1e-6,
        rel(kappa, chi),
        1e-6,
        format!("kappa = {kappa:.6e}, chi = {chi:.6e}"),
    ));

    // (d) the delay factor rises up to tau_max/2 and falls after it
    let h = 1e-4 * tau_max;
    let slope = |dt: f64| delay_factor(&p.scattering, sigma, -(dt + h)) - delay_factor(&p.scattering, sigma, -(dt - h));
    let grid = linspace(0.0, tau_max, 2 * (n / 2) + 1);
    let mut bad = 0usize;
    for &dt in &grid {
        let s = slope(dt);
        let centre = (dt - 0.5 * tau_max).abs() < 0.5 * h;
        if (!centre && dt < 0.5 * tau_max && s <= 0.0) || (!centre && dt > 0.5 * tau_max && s >= 0.0) {
            bad += 1;
        }
    }
    report.push(Check::new(
        "delay-factor slope changes sign at tau_max/2",
        bad == 0,
        bad as f64,
        0.0,
        format!("{} grid points, {bad} with wrong slope sign", grid.len()),
    ));
    Ok(report)
}

/// `b(dt) = sqrt(sigma)/2 erfc(sqrt(pi/sigma) (c - dt))`, `c = sigma/(2 pi tau_rms)`.
pub fn exp_b_closed(sigma: f64, tau_rms: f64, dt: f64) -> f64 {
    let c = sigma / (2.0 * PI * tau_rms);
    0.5 * sigma.sqrt() * erfc((PI / sigma).sqrt() * (c - dt))
}

/// `b(dt)` as the Gaussian tail integral `int_0^inf exp(-pi/sigma (tau - dt + c)^2) dtau`.
pub fn exp_b_quadrature(sigma: f64, tau_rms: f64, dt: f64) -> Result<f64> {
    let c = sigma / (2.0 * PI * tau_rms);
    let peak = (dt - c).max(0.0);
    let upper = peak + 12.0 * sigma.sqrt();
    let f = |tau: f64| (-PI / sigma * (tau - dt + c).powi(2)).exp();
    Ok(fine().integrate(f, 0.0, peak)? + fine().integrate(f, peak, upper)?)
}

/// Stationarity residual of `a b` divided by `a`: `-b/tau_rms + db/ddt`.
pub fn exp_stationarity_residual(sigma: f64, tau_rms: f64, dt: f64) -> f64 {
    let c = sigma / (2.0 * PI * tau_rms);
    -exp_b_closed(sigma, tau_rms, dt) / tau_rms + (-PI / sigma * (c - dt).powi(2)).exp()
}

/// `Xi(df) = int S_nu(nu) 2 pi sigma (nu - df) exp(-pi sigma (nu - df)^2) dnu`
/// (U-shape weight, `nu = f_d sin(theta)`), up to a positive constant.
pub fn exp_xi(sigma: f64, f_d: f64, df: f64) -> Result<f64> {
    xi_integrator(sigma).integrate(
        |th| {
            let v = f_d * th.sin() - df;
            2.0 * PI * sigma * v * (-PI * sigma * v * v).exp()
        },
        -0.5 * PI,
        0.5 * PI,
    )
}

/// Absolute tolerance for the sign-changing Doppler integrands, whose
/// integral can vanish.
fn xi_integrator(sigma: f64) -> Integrator {
    Integrator::with_tolerance(1e-12, 1e-14 * (2.0 * PI * sigma).sqrt())
}

/// `dXi/d(df)`, same weighting as [`exp_xi`].
pub fn exp_xi_slope(sigma: f64, f_d: f64, df: f64) -> Result<f64> {
    Integrator::with_tolerance(1e-12, 1e-14 * 2.0 * PI * sigma).integrate(
        |th| {
            let v = f_d * th.sin() - df;
            2.0 * PI * sigma * (2.0 * PI * sigma * v * v - 1.0) * (-PI * sigma * v * v).exp()
        },
        -0.5 * PI,
        0.5 * PI,
    )
}

/// Ambiguity-function checks on an `n_points x n_points` grid of
/// `|tau| <= 3 sqrt(sigma)`, `|nu| <= 3 / sqrt(sigma)`: closed form vs
/// Riemann sum at sampling interval `ts`, `|A| <= 1` with `A(0,0) = 1`, and
/// the symmetry `A(-tau,-nu) = exp(-j 2 pi nu tau) conj(A(tau,nu))`.
pub fn verify_ambiguity(sigma: f64, ts: f64, n_points: usize) -> Result<ValidationReport> {
    crate::error::ensure_positive("sigma", sigma)?;
    crate::error::ensure_positive("ts", ts)?;
    if n_points < 2 {
        return Err(Error::invalid("n_points", "need at least 2 points per axis"));
    }
    let taus = linspace(-3.0 * sigma.sqrt(), 3.0 * sigma.sqrt(), n_points);
    let nus = linspace(-3.0 / sigma.sqrt(), 3.0 / sigma.sqrt(), n_points);
    let (mut err, mut peak, mut sym) = (0.0f64, 0.0f64, 0.0f64);
    for &tau in &taus {
        for &nu in &nus {
            let a = ambiguity_numeric(sigma, tau, nu, ts);
            err = err.max((a - ambiguity_closed(sigma, tau, nu)).norm());
            peak = peak.max(a.norm());
            let mirrored = ambiguity_numeric(sigma, -tau, -nu, ts);
            let expect = Complex64::from_polar(1.0, -2.0 * PI * nu * tau) * a.conj();
            sym = sym.max((mirrored - expect).norm());
        }
    }
    let origin = (ambiguity_numeric(sigma, 0.0, 0.0, ts) - 1.0).norm();
    let mut r = ValidationReport::new("ambiguity");
    r.push(Check::at_most(
        "closed form = numeric integral",
        err,
        1e-5,
        format!("{} grid points", n_points * n_points),
    ));
    r.push(Check::at_most(
        "|A| <= 1",
        peak - 1.0,
        1e-12,
        "peak magnitude minus one",
    ));
    r.push(Check::at_most("A(0,0) = 1", origin, 1e-9, "unit pulse energy"));
    r.push(Check::at_most(
        "reflection symmetry",
        sym,
        1e-12,
        "A(-tau,-nu) vs conjugate",
    ));
    Ok(r)
}

pub fn verify_appendix_b(p: &SinrParams, n_points: usize) -> Result<ValidationReport> {
    require(p, ScatteringKind::Exp)?;
    let ScatteringSpec::Exp { tau_rms, f_d } = p.scattering else {
        unreachable!()
    };
    let sigma = p.sigma;
    let n = n_points.max(3);
    let mut report = ValidationReport::new("exponential scattering offsets");

    let worst = linspace(0.0, 5.0 * tau_rms, n)
        .into_iter()
        .map(|dt| exp_b_quadrature(sigma, tau_rms, dt).map(|q| rel(q, exp_b_closed(sigma, tau_rms, dt))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    report.push(Check::at_most(
        "erfc closed form of b",
        worst,
        1e-8,
        format!("relative deviation from quadrature over {n} offsets in [0, 5 tau_rms]"),
    ));

    let worst = linspace(0.1, 3.0, n)
        .into_iter()
        .map(|y| rel(erfc(y), erfc_approx(y * 2f64.sqrt())))
        .fold(0.0, f64::max);
    report.push(Check::at_most(
        "rational erfc approximation",
        worst,
        0.02,
        "maximum relative error for x/sqrt(2) in [0.1, 3]",
    ));

    let x = numeric_offset_exp(sigma, &p.scattering)?;
    let h = 1e-3 * tau_rms;
    let (left, right) = (
        exp_stationarity_residual(sigma, tau_rms, x - h),
        exp_stationarity_residual(sigma, tau_rms, x + h),
    );
    report.push(Check::new(
        "stationarity residual changes sign at the maximizer",
        left > 0.0 && right < 0.0,
        x,
        0.0,
        format!("dt* = {x:.6e} s, residual {left:.3e} / {right:.3e}"),
    ));

    let offsets: Vec<f64> = (0..n).map(|i| f_d * (i as f64 + 1.0) / (n as f64 + 1.0)).collect();
    let xi: Vec<(f64, f64)> = offsets
        .iter()
        .map(|&df| Ok((exp_xi(sigma, f_d, df)?, exp_xi(sigma, f_d, -df)?)))
        .collect::<Result<_>>()?;
    let scale = xi.iter().map(|(a, _)| a.abs()).fold(f64::MIN_POSITIVE, f64::max);
    let odd = xi.iter().map(|(a, b)| (a + b).abs() / scale).fold(0.0, f64::max);
    report.push(Check::at_most(
        "Xi is odd",
        odd,
        1e-9,
        format!("max |Xi(df) + Xi(-df)| / max |Xi| over {n} offsets"),
    ));
    let at_zero = exp_xi(sigma, f_d, 0.0)?.abs() / scale;
    report.push(Check::at_most("Xi vanishes at 0", at_zero, 1e-9, "|Xi(0)| / max |Xi|"));

    let slopes: Vec<f64> = (0..n)
        .map(|i| f_d * (2.0 * (i as f64 + 1.0) / (n as f64 + 1.0) - 1.0))
        .map(|df| exp_xi_slope(sigma, f_d, df))
        .collect::<Result<_>>()?;
    let max_slope = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    report.push(Check::new(
        "Xi slope negative on (-f_d, f_d)",
        max_slope < 0.0,
        max_slope,
        0.0,
        format!("largest slope over {n} offsets, sigma f_d^2 = {:.3}", sigma * f_d * f_d),
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defaults;
    use crate::lattice::LatticeSpec;

    fn params(kind: ScatteringKind, spread: f64) -> SinrParams {
        let l = LatticeSpec::reference();
        SinrParams::reference(ScatteringSpec::lattice_matched(kind, spread, &l).unwrap(), 20.0).unwrap()
    }

    #[test]
    fn ambiguity_suite_passes_and_rejects_bad_input() {
        let r = verify_ambiguity(defaults::pulse_sigma(), defaults::SAMPLING_INTERVAL, 9).unwrap();
        assert!(r.all_passed(), "{r:?}");
        assert_eq!(r.checks.len(), 4);
        assert!(verify_ambiguity(-1.0, 1e-6, 9).is_err());
    }

    #[test]
    fn balances() {
        let s = defaults::pulse_sigma();
        let (a, b) = uni_time_balance(s, 2e-5, 1e-5).unwrap();
        assert!(rel(a, b) < 1e-12);
        let (a, b) = uni_time_balance(s, 2e-5, 5e-6).unwrap();
        assert!(a > b);
        // closed form 1 - exp(-pi x^2 / s)
        assert!((a - (1.0 - (-PI * 1.5e-5f64.powi(2) / s).exp())).abs() < 1e-12);
        let (k, c) = uni_frequency_balance(s, 5e3, 1.5e3).unwrap();
        assert!(k < c);
    }

    #[test]
    fn b_at_its_centre() {
        let s = defaults::pulse_sigma();
        let tau = 2e-5;
        let c = s / (2.0 * PI * tau);
        assert!((exp_b_closed(s, tau, c) - 0.5 * s.sqrt()).abs() < 1e-18);
        assert!(rel(exp_b_quadrature(s, tau, c).unwrap(), 0.5 * s.sqrt()) < 1e-10);
    }

    #[test]
    fn approximation_reference_point() {
        let exact = erfc(1.0 / 2f64.sqrt());
        let approx = 2.0 * (-0.5f64).exp() / (1.64 + 4.76f64.sqrt());
        assert!((exact - 0.317_311).abs() < 1e-6);
        assert!(rel(exact, approx) < 0.02);
    }

    #[test]
    fn xi_examples() {
        let s = defaults::pulse_sigma();
        assert!(exp_xi(s, 5e3, 0.0).unwrap().abs() < 1e-15);
        let a = exp_xi(s, 5e3, 1e3).unwrap();
        let b = exp_xi(s, 5e3, -1e3).unwrap();
        assert!((a + b).abs() < 1e-12 * a.abs());
        assert!(a < 0.0);
    }

    #[test]
    fn suites_pass_at_reference_spreads() {
        for spread in [0.07, 0.1, 0.2, 0.35] {
            let a = verify_appendix_a(&params(ScatteringKind::Uni, spread), 21).unwrap();
            assert!(a.all_passed(), "{spread}: {a:#?}");
            let b = verify_appendix_b(&params(ScatteringKind::Exp, spread), 21).unwrap();
            assert!(b.all_passed(), "{spread}: {b:#?}");
        }
    }

    #[test]
    fn wrong_family_rejected() {
        assert!(verify_appendix_a(&params(ScatteringKind::Exp, 0.1), 5).is_err());
        assert!(verify_appendix_b(&params(ScatteringKind::Uni, 0.1), 5).is_err());
    }

    #[test]
    fn report_serializes() {
        let r = verify_appendix_a(&params(ScatteringKind::Uni, 0.1), 5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert!(v["checks"].as_array().unwrap().len() >= 5);
    }
}
