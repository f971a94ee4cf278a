use std::f64::consts::PI;

use super::params::{check_kappa, NetworkParams, SirThreshold};
use super::AnalyticEvaluator;
use crate::error::Result;
use crate::specfun::try_integrate_semi_infinite_scaled;

impl AnalyticEvaluator {
    /// ∫_{ξ^{-1/κ}}^∞ du / (1 + u^κ).
    fn dl_tail_integral(&self, xi: SirThreshold, kappa: f64) -> Result<f64> {
        let lower = xi.linear().powf(-1.0 / kappa);
        let scale = lower.max(1.0);
        try_integrate_semi_infinite_scaled(|u| Ok(1.0 / (1.0 + u.powf(kappa))), lower, scale, &self.quadrature)?
            .converged_value()
    }

    /// Density-free downlink coverage probability for any κ > 1.
    pub fn dl_coverage(&self, xi: SirThreshold, kappa: f64) -> Result<f64> {
        check_kappa(kappa)?;
        let tail = self.dl_tail_integral(xi, kappa)?;
        Ok(1.0 / (1.0 + xi.linear().powf(1.0 / kappa) * tail))
    }

    /// Downlink coverage from the integral over the tagged-BS distance `r`
    /// with its Rayleigh density, still carrying λ:
    ///
    /// `p_d = 2λ̃ ∫_0^∞ exp(−λ̃r²) exp(−λ̃r² ξ^{1/κ} ∫_{ξ^{-1/κ}}^∞ du/(1+u^κ)) r dr`.
    pub fn dl_coverage_with_density(&self, xi: SirThreshold, params: &NetworkParams) -> Result<f64> {
        params.validate()?;
        let kappa = params.kappa();
        let lt = params.lambda_tilde();
        let growth = 1.0 + xi.linear().powf(1.0 / kappa) * self.dl_tail_integral(xi, kappa)?;
        let integrand = |r: f64| Ok(2.0 * lt * r * (-lt * r * r * growth).exp());
        try_integrate_semi_infinite_scaled(integrand, 0.0, 1.0 / lt.sqrt(), &self.quadrature)?.converged_value()
    }

    /// Plain-quadrature variant of [`dl_coverage`](Self::dl_coverage) with
    /// the unit-scale map, used as a cross-check of the scaled route.
    #[cfg(test)]
    pub(crate) fn dl_coverage_unscaled(&self, xi: SirThreshold, kappa: f64) -> Result<f64> {
        let lower = xi.linear().powf(-1.0 / kappa);
        let tail = crate::specfun::integrate_semi_infinite(|u| 1.0 / (1.0 + u.powf(kappa)), lower, &self.quadrature)?
            .converged_value()?;
        Ok(1.0 / (1.0 + xi.linear().powf(1.0 / kappa) * tail))
    }
}

/// Downlink coverage for α = 4:
/// `p_d = 1 / (1 + √ξ (π/2 − arctan(1/√ξ)))`.
pub fn dl_coverage_alpha4(xi: SirThreshold) -> f64 {
    let s = xi.linear().sqrt();
    // π/2 − arctan(1/s) = arctan(s) for s > 0.
    1.0 / (1.0 + s * s.atan())
}

/// Downlink coverage for α = 6 with `c = ξ^{-1/3}`:
/// `p_d = 6c / (6c + ln(c²−c+1) + √3(π − 2 arctan((2c−1)/√3)) − 2 ln(c+1))`.
pub fn dl_coverage_alpha6(xi: SirThreshold) -> f64 {
    let c = xi.linear().cbrt().recip();
    let sqrt3 = 3f64.sqrt();
    // ln(c²−c+1) − 2 ln(c+1) folded into one logarithm: the two grow
    // together and cancel for large c.
    let logs = ((c * c - c + 1.0) / ((c + 1.0) * (c + 1.0))).ln();
    let y = (2.0 * c - 1.0) / sqrt3;
    // π − 2 arctan(y) = 2 arctan(1/y) for y > 0; avoids cancellation.
    let angle = if y > 0.0 {
        2.0 * (1.0 / y).atan()
    } else {
        PI - 2.0 * y.atan()
    };
    6.0 * c / (6.0 * c + logs + sqrt3 * angle)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi_db(db: f64) -> SirThreshold {
        SirThreshold::from_db(db).unwrap()
    }

    #[test]
    fn alpha4_at_zero_db() {
        let p = dl_coverage_alpha4(xi_db(0.0));
        assert!((p - 1.0 / (1.0 + PI / 4.0)).abs() < 1e-15);
        assert!((p - 0.5601).abs() < 5e-5);
    }

    #[test]
    fn alpha4_at_ten_db() {
        assert!((dl_coverage_alpha4(xi_db(10.0)) - 0.20005).abs() < 5e-6);
    }

    #[test]
    fn alpha4_large_threshold_asymptote() {
        let xi = xi_db(80.0);
        let p = dl_coverage_alpha4(xi);
        let asymptote = 2.0 / (PI * xi.linear().sqrt());
        assert!((p / asymptote - 1.0).abs() < 1e-3);
    }

    #[test]
    fn alpha6_at_zero_db_matches_literal_form() {
        let literal = 6.0 / (6.0 + 3f64.sqrt() * (PI - PI / 3.0) - 2.0 * 2f64.ln());
        let p = dl_coverage_alpha6(xi_db(0.0));
        assert!((p - literal).abs() < 1e-15);
        assert!((p - 0.72804).abs() < 5e-6);
    }

    #[test]
    fn alpha6_at_fifteen_db() {
        assert!((dl_coverage_alpha6(xi_db(15.0)) - 0.26099).abs() < 5e-6);
    }

    #[test]
    fn alpha6_small_threshold_tends_to_one() {
        assert!((dl_coverage_alpha6(xi_db(-60.0)) - 1.0).abs() < 1e-5);
        assert!(dl_coverage_alpha6(xi_db(-60.0)) <= 1.0);
    }

    #[test]
    fn general_matches_closed_forms() {
        let eval = AnalyticEvaluator::default();
        for db in -15..=15 {
            let xi = xi_db(db as f64);
            let g2 = eval.dl_coverage(xi, 2.0).unwrap();
            let g3 = eval.dl_coverage(xi, 3.0).unwrap();
            assert!((g2 - dl_coverage_alpha4(xi)).abs() < 1e-8, "{db} dB");
            assert!((g3 - dl_coverage_alpha6(xi)).abs() < 1e-8, "{db} dB");
        }
    }

    #[test]
    fn scaled_and_unscaled_tail_agree() {
        let eval = AnalyticEvaluator::default();
        for db in [-30.0, -10.0, 0.0, 20.0] {
            let a = eval.dl_coverage(xi_db(db), 2.5).unwrap();
            let b = eval.dl_coverage_unscaled(xi_db(db), 2.5).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn with_density_reproduces_density_free_value() {
        let eval = AnalyticEvaluator::default();
        let xi = xi_db(0.0);
        for (alpha, lambda, expected) in [(4.0, 1e-5, 0.5601), (4.0, 1e-4, 0.5601), (6.0, 3e-6, 0.72804)] {
            let params = NetworkParams::new(lambda, alpha, 0.0, 1.0).unwrap();
            let p = eval.dl_coverage_with_density(xi, &params).unwrap();
            assert!((p - expected).abs() < 5e-5, "alpha {alpha} lambda {lambda}: {p}");
            assert!((p - eval.dl_coverage(xi, alpha / 2.0).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn limits() {
        let eval = AnalyticEvaluator::default();
        for kappa in [1.5, 2.0, 3.0] {
            assert!(eval.dl_coverage(xi_db(-60.0), kappa).unwrap() > 0.99);
            assert!(eval.dl_coverage(xi_db(60.0), kappa).unwrap() < 0.01);
        }
    }

    #[test]
    fn rejects_kappa_at_or_below_one() {
        let eval = AnalyticEvaluator::default();
        assert!(eval.dl_coverage(xi_db(0.0), 1.0).is_err());
    }
}
