use std::time::Instant;

use serde::Serialize;

use super::{dl_realization, ul_realization, DiscardReason, RealizationOutcome};
use crate::analytic::{check_epsilon, LinkMode, NetworkParams, ThresholdGrid};
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::spatial::{RngStream, SimWindow, DEFAULT_MAX_ATTEMPTS};

/// Harness density in BS/m². With the 2000 m window this puts 400 base
/// stations in a realization; at 1e-5 (40 per window) the missing
/// out-of-window interference inflates high-threshold coverage by ~0.02.
pub const DEFAULT_LAMBDA: f64 = 1e-4;
pub const DEFAULT_WINDOW_SIDE: f64 = 2000.0;
pub const DEFAULT_REALIZATIONS: u64 = 3000;
pub const DEFAULT_SEED: u64 = 42;

/// Expected base stations per window in the density-invariance experiment.
pub const INVARIANCE_EXPECTED_BS: f64 = 40.0;

/// Seed offset between the λ values of one invariance experiment.
const LAMBDA_SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DiscardCounts {
    pub empty_field: u64,
    pub attempt_budget_exhausted: u64,
}

impl DiscardCounts {
    pub fn total(&self) -> u64 {
        self.empty_field + self.attempt_budget_exhausted
    }
}

/// Per-(threshold, series) coverage counts. Series are power-control
/// factors in the uplink and a single series in the downlink.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepAccumulator {
    thresholds: usize,
    series: usize,
    covered: Vec<u64>,
    realizations_used: u64,
    discards: DiscardCounts,
}

impl SweepAccumulator {
    pub fn new(thresholds: usize, series: usize) -> Self {
        SweepAccumulator {
            thresholds,
            series,
            covered: vec![0; thresholds * series],
            realizations_used: 0,
            discards: DiscardCounts::default(),
        }
    }

    /// Adds one realization. `thresholds` must be ascending; each series
    /// counts every threshold below its first failure.
    pub fn record(&mut self, outcome: &RealizationOutcome, thresholds: &[f64]) {
        match outcome.discarded {
            Some(DiscardReason::EmptyField) => self.discards.empty_field += 1,
            Some(DiscardReason::AttemptBudgetExhausted) => self.discards.attempt_budget_exhausted += 1,
            None => {
                self.realizations_used += 1;
                for (s, &sir) in outcome.sir.iter().enumerate() {
                    let cleared = thresholds.iter().take_while(|&&xi| sir > xi).count();
                    let row = &mut self.covered[s * self.thresholds..(s + 1) * self.thresholds];
                    row[..cleared].iter_mut().for_each(|c| *c += 1);
                }
            }
        }
    }

    pub fn merge(mut self, other: SweepAccumulator) -> Self {
        debug_assert_eq!((self.thresholds, self.series), (other.thresholds, other.series));
        for (a, b) in self.covered.iter_mut().zip(other.covered) {
            *a += b;
        }
        self.realizations_used += other.realizations_used;
        self.discards.empty_field += other.discards.empty_field;
        self.discards.attempt_budget_exhausted += other.discards.attempt_budget_exhausted;
        self
    }

    pub fn covered(&self, series: usize) -> &[u64] {
        &self.covered[series * self.thresholds..(series + 1) * self.thresholds]
    }

    pub fn realizations_used(&self) -> u64 {
        self.realizations_used
    }

    pub fn discards(&self) -> DiscardCounts {
        self.discards
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorResult {
    pub p_hat: f64,
    pub stderr: f64,
    /// Normal-approximation 95% interval, clipped to [0, 1].
    pub ci95: (f64, f64),
    pub covered: u64,
    pub realizations: u64,
}

impl EstimatorResult {
    pub fn from_counts(covered: u64, realizations: u64) -> Result<Self> {
        if realizations == 0 {
            return Err(Error::invalid(
                "realizations",
                "no realization survived to estimate from",
            ));
        }
        let n = realizations as f64;
        let p_hat = covered as f64 / n;
        let stderr = (p_hat * (1.0 - p_hat) / n).sqrt();
        let half = 1.96 * stderr;
        Ok(EstimatorResult {
            p_hat,
            stderr,
            ci95: ((p_hat - half).max(0.0), (p_hat + half).min(1.0)),
            covered,
            realizations,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub mode: LinkMode,
    /// `epsilon` here is ignored; uplink factors come from `epsilons`.
    pub params: NetworkParams,
    pub epsilons: Vec<f64>,
    pub window: SimWindow,
    pub grid: ThresholdGrid,
    pub n_realizations: u64,
    pub master_seed: u64,
    pub max_attempts: u64,
}

impl SweepConfig {
    pub fn new(
        mode: LinkMode,
        params: NetworkParams,
        epsilons: Vec<f64>,
        window: SimWindow,
        grid: ThresholdGrid,
        n_realizations: u64,
        master_seed: u64,
    ) -> Self {
        SweepConfig {
            mode,
            params,
            epsilons,
            window,
            grid,
            n_realizations,
            master_seed,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }

    /// Power-control factor of each series: the configured list in the
    /// uplink, a single 0 in the downlink.
    fn series_epsilons(&self) -> Vec<f64> {
        match self.mode {
            LinkMode::Dl => vec![0.0],
            LinkMode::Ul => self.epsilons.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_realizations == 0 {
            return Err(Error::invalid("realizations", "need at least one realization"));
        }
        if self.mode == LinkMode::Ul {
            if self.epsilons.is_empty() {
                return Err(Error::invalid("epsilon", "uplink sweep needs at least one value"));
            }
            for &e in &self.epsilons {
                check_epsilon(e)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub mode: LinkMode,
    pub master_seed: u64,
    pub n_realizations: u64,
    pub realizations_used: u64,
    pub discards: DiscardCounts,
    pub window_side: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub epsilons: Vec<f64>,
    pub warnings: Vec<String>,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSeries {
    pub epsilon: f64,
    /// One estimate per grid threshold, in grid order.
    pub estimates: Vec<EstimatorResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub series: Vec<SweepSeries>,
    pub accumulator: SweepAccumulator,
    pub metadata: RunMetadata,
}

/// Simulates `n_realizations` independent networks, realization `i` on
/// stream `i` of `master_seed`, and estimates coverage at every threshold.
/// Counts are merged by addition, so the result does not depend on how
/// realizations are spread over workers.
pub fn run_sweep(config: &SweepConfig, execution: Execution) -> Result<SweepResult> {
    config.validate()?;
    let started = Instant::now();
    let epsilons = config.series_epsilons();
    let thresholds: Vec<f64> = config.grid.points().iter().map(|t| t.linear()).collect();
    let realize = |id: u64| -> Result<RealizationOutcome> {
        let stream = RngStream::new(config.master_seed, id);
        match config.mode {
            LinkMode::Dl => dl_realization(&config.params, config.window, stream),
            LinkMode::Ul => ul_realization(&config.params, &epsilons, config.window, stream, config.max_attempts),
        }
    };

    let folded = execution.fold_range(
        config.n_realizations,
        || Ok(SweepAccumulator::new(thresholds.len(), epsilons.len())),
        |acc: &mut Result<SweepAccumulator>, id| {
            if let Ok(a) = acc {
                match realize(id) {
                    Ok(outcome) => a.record(&outcome, &thresholds),
                    Err(e) => *acc = Err(e),
                }
            }
        },
        |a, b| match (a, b) {
            (Ok(a), Ok(b)) => Ok(a.merge(b)),
            (Err(e), _) | (_, Err(e)) => Err(e),
        },
    );
    let accumulator = folded?;

    let series = epsilons
        .iter()
        .enumerate()
        .map(|(s, &epsilon)| {
            let estimates = accumulator
                .covered(s)
                .iter()
                .map(|&c| EstimatorResult::from_counts(c, accumulator.realizations_used()))
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepSeries { epsilon, estimates })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut warnings: Vec<String> = config
        .window
        .sparsity_warning(config.params.lambda)
        .into_iter()
        .collect();
    let discards = accumulator.discards();
    if discards.total() > 0 {
        warnings.push(format!(
            "{} of {} realizations discarded ({} empty, {} attempt cap)",
            discards.total(),
            config.n_realizations,
            discards.empty_field,
            discards.attempt_budget_exhausted
        ));
    }
    let metadata = RunMetadata {
        mode: config.mode,
        master_seed: config.master_seed,
        n_realizations: config.n_realizations,
        realizations_used: accumulator.realizations_used(),
        discards,
        window_side: config.window.side(),
        lambda: config.params.lambda,
        alpha: config.params.alpha,
        epsilons: match config.mode {
            LinkMode::Dl => Vec::new(),
            LinkMode::Ul => epsilons.clone(),
        },
        warnings,
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    Ok(SweepResult {
        series,
        accumulator,
        metadata,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceConfig {
    pub mode: LinkMode,
    pub kappa: f64,
    pub epsilon: f64,
    pub grid: ThresholdGrid,
    pub lambdas: Vec<f64>,
    pub n_realizations: u64,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceCurve {
    pub lambda: f64,
    pub window_side: f64,
    pub master_seed: u64,
    pub estimates: Vec<EstimatorResult>,
    pub metadata: RunMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub curves: Vec<InvarianceCurve>,
    /// Largest pairwise |p̂_i − p̂_j| at each threshold.
    pub gaps: Vec<f64>,
    /// Largest pairwise `3·√(se_i² + se_j²)` at each threshold.
    pub noise_bounds: Vec<f64>,
    pub max_gap: f64,
}

impl InvarianceReport {
    pub fn passes(&self) -> bool {
        self.gaps.iter().zip(&self.noise_bounds).all(|(g, b)| g <= b)
    }
}

/// Simulated coverage at several densities. Each λ gets a window of side
/// `√(40/λ)`, so every run sees the same expected number of base stations,
/// and its own seed: with a shared seed the realizations would be exact
/// rescalings of one another and the comparison would say nothing.
pub fn density_invariance_experiment(config: &InvarianceConfig, execution: Execution) -> Result<InvarianceReport> {
    if config.lambdas.len() < 2 {
        return Err(Error::invalid("lambdas", "need at least two densities"));
    }
    let mut curves = Vec::with_capacity(config.lambdas.len());
    for (i, &lambda) in config.lambdas.iter().enumerate() {
        let params = NetworkParams::new(lambda, 2.0 * config.kappa, config.epsilon, 1.0)?;
        let window = SimWindow::new((INVARIANCE_EXPECTED_BS / lambda).sqrt())?;
        let master_seed = config
            .master_seed
            .wrapping_add((i as u64).wrapping_mul(LAMBDA_SEED_STRIDE));
        let sweep = SweepConfig::new(
            config.mode,
            params,
            vec![config.epsilon],
            window,
            config.grid.clone(),
            config.n_realizations,
            master_seed,
        );
        let result = run_sweep(&sweep, execution)?;
        let estimates = result
            .series
            .into_iter()
            .next()
            .map(|s| s.estimates)
            .unwrap_or_default();
        curves.push(InvarianceCurve {
            lambda,
            window_side: window.side(),
            master_seed,
            estimates,
            metadata: result.metadata,
        });
    }

    let points = config.grid.len();
    let mut gaps = vec![0.0f64; points];
    let mut noise_bounds = vec![0.0f64; points];
    for a in 0..curves.len() {
        for b in a + 1..curves.len() {
            for k in 0..points {
                let (x, y) = (&curves[a].estimates[k], &curves[b].estimates[k]);
                gaps[k] = gaps[k].max((x.p_hat - y.p_hat).abs());
                noise_bounds[k] = noise_bounds[k].max(3.0 * x.stderr.hypot(y.stderr));
            }
        }
    }
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    Ok(InvarianceReport {
        curves,
        gaps,
        noise_bounds,
        max_gap,
    })
}
