//! Analytic coverage probabilities.
//!
//! Downlink: `p_d = 1 / (1 + ξ^{1/κ} ∫_{ξ^{-1/κ}}^∞ du / (1 + u^κ))`.
//!
//! Uplink (interfering UEs relocated onto their serving base stations):
//!
//! ```text
//! p_u = ∫_0^∞ exp(−z − c(z)·J(c(z))) dz,   c(z) = ξ z^{κ(1−ε)},
//! J(c) = ∫_0^∞ ∫_0^u e^{−x} x^{εκ} / (c x^{εκ} + u^κ) dx du
//! ```
//!
//! together with the λ-carrying integrals these reduce from, and the special
//! cases ε = 0 (general κ, and κ = 2 via Si/Ci) and ε = 1.

mod curve;
mod dl;
mod params;
mod ul;

use std::cell::Cell;

use serde::Serialize;

pub use curve::{coverage_curve, coverage_point, LinkMode};
pub use dl::{dl_coverage_alpha4, dl_coverage_alpha6};
pub(crate) use params::check_epsilon;
pub use params::{CoverageMethod, CoveragePoint, NetworkParams, SirThreshold, ThresholdGrid};

use crate::error::{Error, Result};
use crate::specfun::QuadratureSpec;

/// Accuracy and cost settings for every analytic evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticEvaluator {
    pub quadrature: QuadratureSpec,
    /// Lower limit of the outer uplink integral in the normalised variable
    /// `z = πλr²`. Zero gives the exact integral; a small positive value
    /// reproduces evaluations that start "just outside the origin".
    pub outer_lower_limit: f64,
    /// Ceiling on integrand evaluations for a single nested (uplink) value.
    pub evaluation_ceiling: u64,
}

impl Default for AnalyticEvaluator {
    fn default() -> Self {
        AnalyticEvaluator {
            quadrature: QuadratureSpec::default(),
            outer_lower_limit: 0.0,
            evaluation_ceiling: 10_000_000,
        }
    }
}

impl AnalyticEvaluator {
    pub fn new(quadrature: QuadratureSpec) -> Result<Self> {
        quadrature.validate()?;
        Ok(AnalyticEvaluator {
            quadrature,
            ..Default::default()
        })
    }

    pub fn with_outer_lower_limit(mut self, z0: f64) -> Result<Self> {
        if !(z0 >= 0.0 && z0 < self.z_max()) {
            return Err(Error::invalid("outer_lower_limit", "must lie in [0, z_max)"));
        }
        self.outer_lower_limit = z0;
        Ok(self)
    }

    /// Truncation point of the outer uplink integral. The integrand is
    /// bounded by `e^{−z}`, so the discarded tail is below `abs_tol·e^{−5}`.
    pub fn z_max(&self) -> f64 {
        -self.quadrature.abs_tol.ln() + 5.0
    }

    fn budget(&self) -> Budget {
        Budget {
            used: Cell::new(0),
            ceiling: self.evaluation_ceiling,
        }
    }
}

/// Shared evaluation counter for one nested integral.
pub(crate) struct Budget {
    used: Cell<u64>,
    ceiling: u64,
}

impl Budget {
    #[inline]
    fn tick(&self) {
        self.used.set(self.used.get() + 1);
    }

    fn check(&self) -> Result<()> {
        if self.used.get() > self.ceiling {
            Err(Error::PerformanceBudgetExceeded { ceiling: self.ceiling })
        } else {
            Ok(())
        }
    }

    #[cfg(test)]
    pub(crate) fn used(&self) -> u64 {
        self.used.get()
    }
}
