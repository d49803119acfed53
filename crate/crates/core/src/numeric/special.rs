//! Error-function family.
//!
//! `erf` / `erfc` delegate to `libm` (a port of the musl/FreeBSD routines,
//! accurate to about one ulp). [`erfc_approx`] is the two-constant rational
//! approximation that underlies the closed-form DD-EXP timing offset.

/// Error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function, accurate in the far tail.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Approximates `erfc(x / sqrt(2))` for `x > 0` as
/// `2 exp(-x^2/2) / (1.64 x + sqrt(0.76 x^2 + 4))`.
pub fn erfc_approx(x: f64) -> f64 {
    2.0 * (-0.5 * x * x).exp() / (1.64 * x + (0.76 * x * x + 4.0).sqrt())
}
