//! Small numerical kernels shared by the analytic and validation code.

pub mod optimize;
pub mod quadrature;
pub mod special;

pub use optimize::{golden_section_max, grid_argmax};
pub use quadrature::{GaussLegendre, Integrator};
pub use special::{erf, erfc, erfc_approx};

/// Converts a linear power ratio to decibels.
pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Converts decibels to a linear power ratio.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `n` evenly spaced points on `[a, b]` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
                .collect()
        }
    }
}
