use serde::Serialize;

use crate::error::{Error, Result};

/// Physical parameters of the network model.
///
/// `alpha` is the single source of truth for the path-loss exponent;
/// `kappa() = alpha / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetworkParams {
    /// Base-station density in BS/m².
    pub lambda: f64,
    pub alpha: f64,
    /// Fractional power-control factor (uplink only).
    pub epsilon: f64,
    /// Transmit power in watts. Cancels out of every SIR; kept for the
    /// simulator's bookkeeping.
    pub power: f64,
}

impl NetworkParams {
    pub fn new(lambda: f64, alpha: f64, epsilon: f64, power: f64) -> Result<Self> {
        let params = NetworkParams {
            lambda,
            alpha,
            epsilon,
            power,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda", "density must be positive and finite"));
        }
        check_alpha(self.alpha)?;
        check_epsilon(self.epsilon)?;
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::invalid("power", "must be positive and finite"));
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.alpha / 2.0
    }

    /// π·λ, the density in units of "expected points per unit squared radius".
    pub fn lambda_tilde(&self) -> f64 {
        std::f64::consts::PI * self.lambda
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 2.0 && alpha.is_finite()) {
        return Err(Error::invalid(
            "alpha",
            format!("path-loss exponent must exceed 2, got {alpha}"),
        ));
    }
    Ok(())
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(Error::invalid("kappa", format!("must exceed 1, got {kappa}")));
    }
    Ok(())
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::invalid("epsilon", format!("must lie in [0, 1], got {epsilon}")));
    }
    Ok(())
}

/// SIR threshold ξ, carried in both dB and linear form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SirThreshold {
    db: f64,
    linear: f64,
}

impl SirThreshold {
    pub fn from_db(db: f64) -> Result<Self> {
        let linear = 10f64.powf(db / 10.0);
        if !(db.is_finite() && linear > 0.0 && linear.is_finite()) {
            return Err(Error::invalid("xi_db", format!("threshold {db} dB is not usable")));
        }
        Ok(SirThreshold { db, linear })
    }

    pub fn from_linear(linear: f64) -> Result<Self> {
        if !(linear > 0.0 && linear.is_finite()) {
            return Err(Error::invalid(
                "xi",
                format!("linear threshold must be positive, got {linear}"),
            ));
        }
        Ok(SirThreshold {
            db: 10.0 * linear.log10(),
            linear,
        })
    }

    pub fn db(&self) -> f64 {
        self.db
    }

    pub fn linear(&self) -> f64 {
        self.linear
    }
}

/// Strictly increasing list of SIR thresholds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdGrid {
    points: Vec<SirThreshold>,
}

impl ThresholdGrid {
    pub fn new(points: Vec<SirThreshold>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("grid", "threshold grid must not be empty"));
        }
        if points.windows(2).any(|w| w[1].linear() <= w[0].linear()) {
            return Err(Error::invalid("grid", "thresholds must be strictly increasing"));
        }
        Ok(ThresholdGrid { points })
    }

    /// `min_db, min_db + step_db, …` up to `max_db` inclusive. Points are
    /// computed as `min_db + i·step_db` so no rounding accumulates.
    pub fn from_db_range(min_db: f64, max_db: f64, step_db: f64) -> Result<Self> {
        if !(step_db > 0.0 && step_db.is_finite()) {
            return Err(Error::invalid("step_db", "must be positive"));
        }
        if !(min_db.is_finite() && max_db.is_finite()) || min_db > max_db {
            return Err(Error::invalid("xi range", "need finite min_db <= max_db"));
        }
        let steps = ((max_db - min_db) / step_db + 1e-9).floor() as usize;
        let points = (0..=steps)
            .map(|i| SirThreshold::from_db(min_db + i as f64 * step_db))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    pub fn points(&self) -> &[SirThreshold] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Default for ThresholdGrid {
    /// −15 dB to 15 dB in 1 dB steps.
    fn default() -> Self {
        ThresholdGrid::from_db_range(-15.0, 15.0, 1.0).expect("static grid is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CoverageMethod {
    AnalyticGeneral,
    AnalyticClosedForm,
    Simulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveragePoint {
    pub threshold: SirThreshold,
    pub probability: f64,
    pub method: CoverageMethod,
    /// Monte Carlo standard error; zero for analytic points.
    pub stderr: f64,
}
