use std::path::{Path, PathBuf};
use std::time::Instant;

use cellcov::analytic::{coverage_curve, AnalyticEvaluator, CoveragePoint, LinkMode, NetworkParams};
use cellcov::montecarlo::{
    density_invariance_experiment, run_sweep, DiscardCounts, EstimatorResult, InvarianceConfig, SweepConfig,
    DEFAULT_LAMBDA, DEFAULT_REALIZATIONS, DEFAULT_SEED, DEFAULT_WINDOW_SIDE,
};
use cellcov::reference::{reference_curve, Provenance};
use serde::Serialize;

use crate::config::{Format, Method, RunConfig};
use crate::error::CliError;
use crate::records::{write_csv, write_json, CurveRecord};

/// Everything about a curve run that is a function of its configuration;
/// safe to embed in outputs that must be byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveMetadata {
    pub mode: LinkMode,
    pub method: Method,
    pub alpha: f64,
    pub epsilons: Vec<f64>,
    pub xi_min: f64,
    pub xi_max: f64,
    pub xi_step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationMetadata>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationMetadata {
    pub lambda: f64,
    pub window_side: f64,
    pub master_seed: u64,
    pub n_realizations: u64,
    pub realizations_used: u64,
    pub discards: DiscardCounts,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveOutput {
    pub records: Vec<CurveRecord>,
    pub metadata: CurveMetadata,
    pub wall_time_secs: f64,
    pub workers: usize,
}

/// Analytic and/or simulated curves for every power-control factor of the
/// configuration, one record per (ε, ξ) in that order.
pub fn cmd_curve(config: &RunConfig) -> Result<CurveOutput, CliError> {
    curve_run(config, &[]).map(|run| run.output)
}

/// A curve run together with the unrounded values behind its records.
struct CurveRun {
    output: CurveOutput,
    analytic: Option<Vec<Vec<CoveragePoint>>>,
    simulated: Option<Vec<Vec<EstimatorResult>>>,
}

fn curve_run(config: &RunConfig, tags: &[String]) -> Result<CurveRun, CliError> {
    config.validate()?;
    let started = Instant::now();
    let execution = config.execution();
    let grid = config.grid()?;
    let epsilons = config.series_epsilons();

    let analytic = if config.method.analytic() {
        let evaluator = AnalyticEvaluator::default();
        let curves = epsilons
            .iter()
            .map(|&e| coverage_curve(config.mode, &grid, config.kappa(), e, &evaluator, execution))
            .collect::<cellcov::Result<Vec<_>>>()?;
        Some(curves)
    } else {
        None
    };

    let sweep = if config.method.simulated() {
        let sweep_config = SweepConfig::new(
            config.mode,
            config.params()?,
            epsilons.clone(),
            config.window()?,
            grid.clone(),
            config.realizations,
            config.seed,
        );
        Some(run_sweep(&sweep_config, execution)?)
    } else {
        None
    };

    let mut records = Vec::with_capacity(epsilons.len() * grid.len());
    for (s, &epsilon) in epsilons.iter().enumerate() {
        for (k, xi) in grid.points().iter().enumerate() {
            let a = analytic.as_ref().map(|c| (c[s][k].probability, c[s][k].method));
            let m = sweep.as_ref().map(|r| &r.series[s].estimates[k]);
            records.push(CurveRecord::new(xi.db(), epsilon, a, m, tags));
        }
    }

    let metadata = CurveMetadata {
        mode: config.mode,
        method: config.method,
        alpha: config.alpha,
        epsilons: epsilons.clone(),
        xi_min: config.xi_min,
        xi_max: config.xi_max,
        xi_step: config.xi_step,
        simulation: sweep.as_ref().map(|r| SimulationMetadata {
            lambda: r.metadata.lambda,
            window_side: r.metadata.window_side,
            master_seed: r.metadata.master_seed,
            n_realizations: r.metadata.n_realizations,
            realizations_used: r.metadata.realizations_used,
            discards: r.metadata.discards,
            warnings: r.metadata.warnings.clone(),
        }),
    };
    Ok(CurveRun {
        output: CurveOutput {
            records,
            metadata,
            wall_time_secs: started.elapsed().as_secs_f64(),
            workers: execution.workers(),
        },
        analytic,
        simulated: sweep.map(|r| r.series.into_iter().map(|s| s.estimates).collect()),
    })
}

/// Encodes curve records in the configured format.
pub fn render_curve(output: &CurveOutput, format: Format) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&output.records, &mut buf)?,
        Format::Json => write_json(&output.records, &output.metadata, &mut buf)?,
    }
    Ok(buf)
}

/// Run facts that legitimately differ between identical runs.
#[derive(Debug, Serialize)]
struct Sidecar<'a, M: Serialize> {
    metadata: &'a M,
    wall_time_secs: f64,
    workers: usize,
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes `body` to `out` (stdout when `None`) and the timing sidecar next
/// to it; without an output path the timing goes to stderr.
pub fn emit<M: Serialize>(
    body: &[u8],
    out: Option<&Path>,
    metadata: &M,
    wall_time_secs: f64,
    workers: usize,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_file(path, body)?;
            let sidecar = Sidecar {
                metadata,
                wall_time_secs,
                workers,
            };
            write_file(&sidecar_path(path), &serde_json::to_vec_pretty(&sidecar)?)?;
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(body)
                .map_err(|e| CliError::io("stdout", e))?;
            eprintln!("wall time {wall_time_secs:.2} s on {workers} worker(s)");
        }
    }
    Ok(())
}

fn write_file(path: &Path, body: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
    }
    std::fs::write(path, body).map_err(|e| CliError::io(path.display().to_string(), e))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticInvariance {
    pub epsilon: f64,
    pub tolerance: f64,
    /// `values[i][k]`: coverage at `lambdas[i]`, threshold `k`.
    pub values: Vec<Vec<f64>>,
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulatedInvariance {
    pub epsilon: f64,
    pub realizations: u64,
    pub window_sides: Vec<f64>,
    pub gaps: Vec<f64>,
    pub noise_bounds: Vec<f64>,
    pub max_gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceSummary {
    pub mode: LinkMode,
    pub alpha: f64,
    pub lambdas: Vec<f64>,
    pub xi_db: Vec<f64>,
    pub analytic: Vec<AnalyticInvariance>,
    pub simulated: Vec<SimulatedInvariance>,
    pub pass: bool,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

/// Pairwise tolerance on the λ-carrying analytic forms.
pub fn invariance_tolerance(mode: LinkMode) -> f64 {
    match mode {
        LinkMode::Dl => 1e-6,
        LinkMode::Ul => 1e-5,
    }
}

fn max_pairwise_gap(values: &[Vec<f64>], k: usize) -> f64 {
    let mut gap = 0.0f64;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            gap = gap.max((a[k] - b[k]).abs());
        }
    }
    gap
}

/// Evaluates the density-carrying analytic forms at every λ and compares
/// them pairwise; optionally repeats the comparison by simulation.
pub fn cmd_validate_invariance(
    config: &RunConfig,
    lambdas: &[f64],
    simulate: bool,
) -> Result<InvarianceSummary, CliError> {
    config.validate()?;
    if lambdas.len() < 2 {
        return Err(CliError::config("lambdas", "need at least two densities"));
    }
    let started = Instant::now();
    let execution = config.execution();
    let grid = config.grid()?;
    let evaluator = AnalyticEvaluator::default();
    let tolerance = invariance_tolerance(config.mode);

    let mut analytic = Vec::new();
    let mut simulated = Vec::new();
    for epsilon in config.series_epsilons() {
        let mut values = Vec::with_capacity(lambdas.len());
        for &lambda in lambdas {
            let params =
                NetworkParams::new(lambda, config.alpha, epsilon, 1.0).map_err(crate::error::as_config_error)?;
            let curve = execution
                .map_ordered(grid.points(), |&xi| match config.mode {
                    LinkMode::Dl => evaluator.dl_coverage_with_density(xi, &params),
                    LinkMode::Ul => evaluator.ul_coverage_with_density(xi, &params),
                })
                .into_iter()
                .collect::<cellcov::Result<Vec<f64>>>()?;
            values.push(curve);
        }
        let gaps: Vec<f64> = (0..grid.len()).map(|k| max_pairwise_gap(&values, k)).collect();
        let max_gap = gaps.iter().copied().fold(0.0, f64::max);
        analytic.push(AnalyticInvariance {
            epsilon,
            tolerance,
            values,
            gaps,
            max_gap,
            pass: max_gap <= tolerance,
        });

        if simulate {
            let report = density_invariance_experiment(
                &InvarianceConfig {
                    mode: config.mode,
                    kappa: config.kappa(),
                    epsilon,
                    grid: grid.clone(),
                    lambdas: lambdas.to_vec(),
                    n_realizations: config.realizations,
                    master_seed: config.seed,
                },
                execution,
            )?;
            simulated.push(SimulatedInvariance {
                epsilon,
                realizations: config.realizations,
                window_sides: report.curves.iter().map(|c| c.window_side).collect(),
                pass: report.passes(),
                gaps: report.gaps,
                noise_bounds: report.noise_bounds,
                max_gap: report.max_gap,
            });
        }
    }
    let pass = analytic.iter().all(|a| a.pass) && simulated.iter().all(|s| s.pass);
    Ok(InvarianceSummary {
        mode: config.mode,
        alpha: config.alpha,
        lambdas: lambdas.to_vec(),
        xi_db: grid.points().iter().map(|x| x.db()).collect(),
        analytic,
        simulated,
        pass,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureOptions {
    pub lambda: f64,
    pub side: f64,
    pub realizations: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            lambda: DEFAULT_LAMBDA,
            side: DEFAULT_WINDOW_SIDE,
            realizations: DEFAULT_REALIZATIONS,
            seed: DEFAULT_SEED,
            out_dir: PathBuf::from("figures"),
            threads: None,
        }
    }
}

/// Largest deviation over a curve and how many points broke the bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub max_abs: f64,
    pub worst_xi_db: f64,
    pub failures: usize,
    pub points: usize,
    pub pass: bool,
}

impl Deviation {
    fn from_points(points: impl IntoIterator<Item = (f64, f64, f64)>) -> Self {
        let mut d = Deviation {
            max_abs: 0.0,
            worst_xi_db: f64::NAN,
            failures: 0,
            points: 0,
            pass: true,
        };
        for (xi_db, gap, bound) in points {
            d.points += 1;
            if gap.is_nan() || gap > d.max_abs {
                d.max_abs = gap;
                d.worst_xi_db = xi_db;
            }
            if gap.is_nan() || gap > bound {
                d.failures += 1;
                d.pass = false;
            }
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureCurveReport {
    pub link: LinkMode,
    pub alpha: f64,
    /// Against the published analytic points.
    pub analytic_tolerance: f64,
    pub analytic_vs_published: Deviation,
    /// `|p̂ − p| ≤ max(3·stderr, 0.015)` at every threshold.
    pub simulated_vs_analytic: Deviation,
    /// Informational: against the published simulated points.
    pub simulated_vs_published_max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureReport {
    pub options: FigureOptions,
    pub curves: Vec<FigureCurveReport>,
    pub files: Vec<PathBuf>,
    pub pass: bool,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

pub const SIM_AGREEMENT_FLOOR: f64 = 0.015;

fn published_tolerance(link: LinkMode) -> f64 {
    match link {
        LinkMode::Dl => 5e-4,
        LinkMode::Ul => 1e-3,
    }
}

/// Analytic and simulated curves for both links at α ∈ {4, 6} (uplink
/// without power control), written as one CSV per link plus `report.json`
/// comparing them with each other and with the published points.
pub fn cmd_reproduce_figures(options: &FigureOptions) -> Result<FigureReport, CliError> {
    let started = Instant::now();
    let mut curves = Vec::new();
    let mut files = Vec::new();
    for (link, file) in [(LinkMode::Dl, "fig3_downlink.csv"), (LinkMode::Ul, "fig4_uplink.csv")] {
        let mut records = Vec::new();
        for alpha in [4.0, 6.0] {
            let config = RunConfig {
                mode: link,
                method: Method::Both,
                alpha,
                epsilons: vec![0.0],
                lambda: options.lambda,
                side: options.side,
                realizations: options.realizations,
                seed: options.seed,
                threads: options.threads,
                ..RunConfig::default()
            };
            let run = curve_run(&config, &[format!("alpha={alpha}")])?;
            curves.push(compare_with_published(link, alpha, &config, &run)?);
            records.extend(run.output.records);
        }
        let path = options.out_dir.join(file);
        let mut buf = Vec::new();
        write_csv(&records, &mut buf)?;
        write_file(&path, &buf)?;
        files.push(path);
    }
    let pass = curves
        .iter()
        .all(|c| c.analytic_vs_published.pass && c.simulated_vs_analytic.pass);
    let report_path = options.out_dir.join("report.json");
    files.push(report_path.clone());
    let report = FigureReport {
        options: options.clone(),
        curves,
        files,
        pass,
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    write_file(&report_path, &serde_json::to_vec_pretty(&report)?)?;
    Ok(report)
}

fn compare_with_published(
    link: LinkMode,
    alpha: f64,
    config: &RunConfig,
    run: &CurveRun,
) -> Result<FigureCurveReport, CliError> {
    // Comparisons use the unrounded values, not the 6-digit record fields.
    let grid = config.grid()?;
    let (exact, estimates) = match (&run.analytic, &run.simulated) {
        (Some(a), Some(s)) => (&a[0], &s[0]),
        _ => return Err(CliError::Serialization("figure runs need both methods".into())),
    };
    let index_of = |xi_db: f64| grid.points().iter().position(|x| x.db() == xi_db);
    let tol = published_tolerance(link);
    let published = reference_curve(link, alpha, Provenance::PublishedAnalytic)?;
    let analytic_vs_published = Deviation::from_points(published.iter().filter_map(|p| {
        let k = index_of(p.xi_db)?;
        Some((p.xi_db, (exact[k].probability - p.probability).abs(), tol))
    }));
    let simulated_vs_analytic = Deviation::from_points(exact.iter().zip(estimates).map(|(a, e)| {
        let bound = (3.0 * e.stderr).max(SIM_AGREEMENT_FLOOR);
        (a.threshold.db(), (e.p_hat - a.probability).abs(), bound)
    }));
    let simulated_vs_published_max_abs = reference_curve(link, alpha, Provenance::PublishedSimulated)?
        .iter()
        .filter_map(|p| Some((estimates[index_of(p.xi_db)?].p_hat - p.probability).abs()))
        .fold(0.0, f64::max);
    Ok(FigureCurveReport {
        link,
        alpha,
        analytic_tolerance: tol,
        analytic_vs_published,
        simulated_vs_analytic,
        simulated_vs_published_max_abs,
    })
}
