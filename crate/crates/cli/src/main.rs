use std::path::PathBuf;
use std::process::ExitCode;

use cellcov_cli::commands::{emit, render_curve, FigureOptions};
use cellcov_cli::{cmd_curve, cmd_reproduce_figures, cmd_validate_invariance, CliError, ConfigOverrides, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "cellcov",
    version,
    about = "Coverage probability of Poisson cellular networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic and/or simulated coverage curve.
    Curve(CurveArgs),
    /// Check that coverage does not depend on the base-station density.
    ValidateInvariance(InvarianceArgs),
    /// Regenerate the downlink and uplink figure data and compare it with
    /// the published points.
    ReproduceFigures(FigureArgs),
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// JSON file with any of the flag fields; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Debug, Args)]
struct InvarianceArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
    /// Densities to compare, comma separated (at least two).
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    /// Also run the Monte Carlo comparison.
    #[arg(long)]
    simulate: bool,
}

#[derive(Debug, Args)]
struct FigureArgs {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    side: Option<f64>,
    #[arg(long)]
    realizations: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "figures")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Curve(args) => {
            let config = RunConfig::resolve(args.config.as_deref(), &args.overrides)?;
            let output = cmd_curve(&config)?;
            let body = render_curve(&output, config.format)?;
            emit(
                &body,
                config.out.as_deref(),
                &output.metadata,
                output.wall_time_secs,
                output.workers,
            )
        }
        Command::ValidateInvariance(args) => {
            let config = RunConfig::resolve(args.config.as_deref(), &args.overrides)?;
            let summary = cmd_validate_invariance(&config, &args.lambdas, args.simulate)?;
            let mut body = serde_json::to_vec_pretty(&summary)?;
            body.push(b'\n');
            let workers = config.execution().workers();
            emit(
                &body,
                config.out.as_deref(),
                &summary.lambdas,
                summary.wall_time_secs,
                workers,
            )?;
            for a in &summary.analytic {
                eprintln!(
                    "analytic  eps={}  max gap {:.3e}  (tol {:.0e})  {}",
                    a.epsilon,
                    a.max_gap,
                    a.tolerance,
                    verdict(a.pass)
                );
            }
            for s in &summary.simulated {
                eprintln!(
                    "simulated eps={}  max gap {:.4}  {}",
                    s.epsilon,
                    s.max_gap,
                    verdict(s.pass)
                );
            }
            if summary.pass {
                Ok(())
            } else {
                Err(CliError::ValidationFailed("coverage differs across densities".into()))
            }
        }
        Command::ReproduceFigures(args) => {
            let defaults = FigureOptions::default();
            let options = FigureOptions {
                lambda: args.lambda.unwrap_or(defaults.lambda),
                side: args.side.unwrap_or(defaults.side),
                realizations: args.realizations.unwrap_or(defaults.realizations),
                seed: args.seed.unwrap_or(defaults.seed),
                out_dir: args.out,
                threads: args.threads,
            };
            let report = cmd_reproduce_figures(&options)?;
            for c in &report.curves {
                eprintln!(
                    "{} alpha={}  analytic vs published max {:.2e} ({} of {} over {:.0e}) {}  |  sim vs analytic max {:.4} ({} over bound) {}",
                    c.link,
                    c.alpha,
                    c.analytic_vs_published.max_abs,
                    c.analytic_vs_published.failures,
                    c.analytic_vs_published.points,
                    c.analytic_tolerance,
                    verdict(c.analytic_vs_published.pass),
                    c.simulated_vs_analytic.max_abs,
                    c.simulated_vs_analytic.failures,
                    verdict(c.simulated_vs_analytic.pass),
                );
            }
            eprintln!("wall time {:.1} s", report.wall_time_secs);
            if report.pass {
                Ok(())
            } else {
                Err(CliError::ValidationFailed(
                    "figure data disagrees with its references".into(),
                ))
            }
        }
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
