//! One-dimensional factors of the scattering-weighted squared cross-ambiguity.
//!
//! For a Gaussian pulse pair `|A_{g,psi}(tau, nu)|^2` splits into a delay and
//! a Doppler Gaussian, and both scattering functions are separable, so every
//! lattice term of the SINR is a product
//!
//! - `delay_factor(a)   = int S_tau(tau) exp(-pi (tau + a)^2 / sigma) dtau`
//! - `doppler_factor(b) = int S_nu(nu)  exp(-pi sigma (nu + b)^2)    dnu`
//!
//! with `a = t_k - dt`, `b = f_k - df` for the interferer at `(t_k, f_k)`.

use std::f64::consts::PI;

use crate::channel::ScatteringSpec;
use crate::error::Result;
use crate::numeric::{erf, erfc, Integrator};

/// `erf(c + h) - erf(c - h)` for `h >= 0`, without cancellation for narrow
/// windows or windows inside one tail.
pub fn erf_window(c: f64, h: f64) -> f64 {
    if h < 0.025 {
        // 4-point Gauss-Legendre on (2/sqrt(pi)) exp(-x^2)
        const NODES: [f64; 2] = [0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
        const WEIGHTS: [f64; 2] = [0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
        let s: f64 = NODES
            .iter()
            .zip(WEIGHTS)
            .map(|(x, w)| w * ((-(c - h * x).powi(2)).exp() + (-(c + h * x).powi(2)).exp()))
            .sum();
        return s * h * 2.0 / PI.sqrt();
    }
    let (x1, x2) = (c - h, c + h);
    if x1 >= 1.0 {
        erfc(x1) - erfc(x2)
    } else if x2 <= -1.0 {
        erfc(-x2) - erfc(-x1)
    } else {
        erf(x2) - erf(x1)
    }
}

/// Scaled complementary error function `exp(x^2) erfc(x)` for `x >= 0`.
pub fn erfcx(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 20.0 {
        (x * x).exp() * erfc(x)
    } else {
        // asymptotic series, relative error < 1e-11 beyond x = 20
        let r = 1.0 / (x * x);
        (1.0 - 0.5 * r * (1.0 - 1.5 * r * (1.0 - 2.5 * r))) / (x * PI.sqrt())
    }
}

pub fn delay_factor(scat: &ScatteringSpec, sigma: f64, a: f64) -> f64 {
    match *scat {
        ScatteringSpec::Uni { tau_max, .. } => {
            let s = (PI / sigma).sqrt();
            sigma.sqrt() / (2.0 * tau_max) * erf_window(s * (a + 0.5 * tau_max), s * 0.5 * tau_max)
        }
        ScatteringSpec::Exp { tau_rms, .. } => {
            // complete the square: exp(a/tau + sigma/(4 pi tau^2)) * Gaussian tail
            let c = sigma / (2.0 * PI * tau_rms);
            let z = (PI / sigma).sqrt() * (a + c);
            let scale = sigma.sqrt() / (2.0 * tau_rms);
            if z >= 0.0 {
                scale * (-PI * a * a / sigma).exp() * erfcx(z)
            } else {
                scale * (a / tau_rms + sigma / (4.0 * PI * tau_rms * tau_rms)).exp() * erfc(z)
            }
        }
    }
}

pub fn doppler_factor(scat: &ScatteringSpec, sigma: f64, b: f64) -> Result<f64> {
    match *scat {
        ScatteringSpec::Uni { f_d, .. } => {
            let s = (PI * sigma).sqrt();
            Ok(erf_window(s * b, s * f_d) / (4.0 * f_d * sigma.sqrt()))
        }
        ScatteringSpec::Exp { f_d, .. } => {
            // nu = f_d sin(theta) turns the U-shape weight into d(theta) / pi
            Integrator::with_tolerance(1e-10, 1e-300).integrate(
                |th| {
                    let v = f_d * th.sin() + b;
                    (-PI * sigma * v * v).exp() / PI
                },
                -0.5 * PI,
                0.5 * PI,
            )
        }
    }
}

/// [`delay_factor`] by direct quadrature of the delay profile; oracle for the
/// closed forms. DD-EXP integrates over `[0, 10 tau_rms]`.
pub fn delay_factor_quadrature(scat: &ScatteringSpec, sigma: f64, a: f64) -> Result<f64> {
    let upper = match *scat {
        ScatteringSpec::Uni { tau_max, .. } => tau_max,
        ScatteringSpec::Exp { tau_rms, .. } => crate::channel::EXP_DELAY_TRUNCATION * tau_rms,
    };
    // split at the Gaussian peak so the panels resolve it
    let peak = (-a).clamp(0.0, upper);
    let integrand = |tau: f64| scat.delay_density(tau) * (-PI * (tau + a).powi(2) / sigma).exp();
    let q = Integrator::with_tolerance(1e-12, 1e-300);
    Ok(q.integrate(integrand, 0.0, peak)? + q.integrate(integrand, peak, upper)?)
}
