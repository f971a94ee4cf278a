//! Special functions and quadrature used by the analytic coverage formulas.

mod quadrature;
mod sici;

pub use quadrature::{
    integrate_finite, integrate_semi_infinite, try_integrate_finite, try_integrate_semi_infinite,
    try_integrate_semi_infinite_scaled, IntegralResult, QuadratureSpec,
};
pub use sici::{cosine_integral_ci, sine_integral, sine_integral_si, SICI_CROSSOVER};

use std::f64::consts::PI;

/// B(1/2, 1/2) = π.
pub fn beta_half_half() -> f64 {
    PI
}

/// B(1 − 1/κ, 1/κ) = Γ(1 − 1/κ)Γ(1/κ) = π / sin(π/κ), defined for κ > 1.
pub fn beta_reflection(kappa: f64) -> f64 {
    PI / (PI / kappa).sin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_half_half_is_pi() {
        assert_eq!(beta_half_half(), PI);
        assert!((beta_reflection(2.0) - beta_half_half()).abs() < 1e-15);
    }

    #[test]
    fn beta_kappa_three_matches_direct_integral() {
        // B(2/3, 1/3) = ∫_0^1 t^{-1/3}(1−t)^{-2/3} dt, split at 1/2. On the
        // left t = s³ and on the right 1 − t = s³ leave smooth integrands.
        let spec = QuadratureSpec::default();
        let cut = 0.5f64.cbrt();
        let left = integrate_finite(|s| 3.0 * s * (1.0 - s * s * s).powf(-2.0 / 3.0), 0.0, cut, &spec).unwrap();
        let right = integrate_finite(|s| 3.0 * (1.0 - s * s * s).powf(-1.0 / 3.0), 0.0, cut, &spec).unwrap();
        let brute = left.value + right.value;
        let closed = beta_reflection(3.0);
        assert!((closed - 2.0 * PI / 3f64.sqrt()).abs() < 1e-14);
        assert!((closed - 3.6276).abs() < 1e-4);
        assert!((brute - closed).abs() < 1e-12, "{brute} vs {closed}");
    }
}
