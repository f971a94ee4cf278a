use serde::{Deserialize, Serialize};

use super::dl::{dl_coverage_alpha4, dl_coverage_alpha6};
use super::params::{check_epsilon, check_kappa, CoverageMethod, CoveragePoint, SirThreshold, ThresholdGrid};
use super::AnalyticEvaluator;
use crate::error::Result;
use crate::parallel::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkMode {
    #[serde(alias = "downlink")]
    Dl,
    #[serde(alias = "uplink")]
    Ul,
}

impl std::fmt::Display for LinkMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LinkMode::Dl => "dl",
            LinkMode::Ul => "ul",
        })
    }
}

/// Evaluates one point with the cheapest formula that applies.
pub fn coverage_point(
    mode: LinkMode,
    xi: SirThreshold,
    kappa: f64,
    epsilon: f64,
    evaluator: &AnalyticEvaluator,
) -> Result<CoveragePoint> {
    check_kappa(kappa)?;
    check_epsilon(epsilon)?;
    let (probability, method) = match mode {
        LinkMode::Dl if kappa == 2.0 => (dl_coverage_alpha4(xi), CoverageMethod::AnalyticClosedForm),
        LinkMode::Dl if kappa == 3.0 => (dl_coverage_alpha6(xi), CoverageMethod::AnalyticClosedForm),
        LinkMode::Dl => (evaluator.dl_coverage(xi, kappa)?, CoverageMethod::AnalyticGeneral),
        LinkMode::Ul if epsilon == 0.0 && kappa == 2.0 => (
            evaluator.ul_coverage_eps0_alpha4(xi)?,
            CoverageMethod::AnalyticClosedForm,
        ),
        LinkMode::Ul if epsilon == 0.0 => (evaluator.ul_coverage_eps0(xi, kappa)?, CoverageMethod::AnalyticGeneral),
        LinkMode::Ul if epsilon == 1.0 => (evaluator.ul_coverage_eps1(xi, kappa)?, CoverageMethod::AnalyticGeneral),
        LinkMode::Ul => (
            evaluator.ul_coverage(xi, kappa, epsilon)?,
            CoverageMethod::AnalyticGeneral,
        ),
    };
    Ok(CoveragePoint {
        threshold: xi,
        probability,
        method,
        stderr: 0.0,
    })
}

/// Analytic coverage curve over `grid`, returned in grid order whatever
/// the execution strategy.
pub fn coverage_curve(
    mode: LinkMode,
    grid: &ThresholdGrid,
    kappa: f64,
    epsilon: f64,
    evaluator: &AnalyticEvaluator,
    execution: Execution,
) -> Result<Vec<CoveragePoint>> {
    execution
        .map_ordered(grid.points(), |&xi| coverage_point(mode, xi, kappa, epsilon, evaluator))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_grid_equals_scalar() {
        let eval = AnalyticEvaluator::default();
        let grid = ThresholdGrid::from_db_range(0.0, 0.0, 1.0).unwrap();
        let xi = grid.points()[0];
        let curve = coverage_curve(LinkMode::Dl, &grid, 2.5, 0.0, &eval, Execution::Sequential).unwrap();
        assert_eq!(curve.len(), 1);
        assert_eq!(curve[0].probability, eval.dl_coverage(xi, 2.5).unwrap());
        assert_eq!(curve[0].method, CoverageMethod::AnalyticGeneral);
    }

    #[test]
    fn dispatch_picks_closed_forms() {
        let eval = AnalyticEvaluator::default();
        let xi = SirThreshold::from_db(0.0).unwrap();
        let p = coverage_point(LinkMode::Dl, xi, 2.0, 0.0, &eval).unwrap();
        assert_eq!(p.method, CoverageMethod::AnalyticClosedForm);
        assert_eq!(p.probability, dl_coverage_alpha4(xi));
        let p = coverage_point(LinkMode::Ul, xi, 2.0, 0.0, &eval).unwrap();
        assert_eq!(p.method, CoverageMethod::AnalyticClosedForm);
        let p = coverage_point(LinkMode::Ul, xi, 3.0, 0.0, &eval).unwrap();
        assert_eq!(p.method, CoverageMethod::AnalyticGeneral);
    }

    #[test]
    fn parallel_curve_keeps_grid_order() {
        let eval = AnalyticEvaluator::default();
        let grid = ThresholdGrid::default();
        let seq = coverage_curve(LinkMode::Dl, &grid, 2.5, 0.0, &eval, Execution::Sequential).unwrap();
        let par = coverage_curve(LinkMode::Dl, &grid, 2.5, 0.0, &eval, Execution::with_threads(4)).unwrap();
        assert_eq!(seq, par);
        assert!(seq.windows(2).all(|w| w[0].threshold.db() < w[1].threshold.db()));
    }

    #[test]
    fn rejects_invalid_parameters() {
        let eval = AnalyticEvaluator::default();
        let grid = ThresholdGrid::default();
        assert!(coverage_curve(LinkMode::Ul, &grid, 3.0, 1.5, &eval, Execution::Sequential).is_err());
        assert!(coverage_curve(LinkMode::Dl, &grid, 0.9, 0.0, &eval, Execution::Sequential).is_err());
    }
}
