//! `pbn` — experiment runner for positive-and-biased-negative classification.
//!
//! `pbn run --experiment situation2` reproduces one of the published
//! comparison tables (adjusted PbN vs naive PbN vs PN) and writes it as CSV
//! or Markdown, deterministically for a given seed.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pbn::harness::{
    emit_table, run_experiment, ExperimentConfig, ExperimentId, SigmaEstimator, TableFormat,
};
use pbn::selection::KGrid;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "pbn", version, about = "PbN classification experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and emit its summary table.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment id: situation1..situation4, phi_sensitivity_large,
    /// phi_sensitivity_small, or wireless.
    #[arg(long)]
    experiment: ExperimentId,

    /// Number of trials (default: 10 synthetic, 100 benchmark).
    #[arg(long)]
    trials: Option<usize>,

    /// Base seed; all per-trial randomness derives from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Table format.
    #[arg(long, default_value = "csv")]
    format: TableFormat,

    /// Override the observed-negative mass ρ (default: π·n_bN/n_P).
    #[arg(long)]
    rho: Option<f64>,

    /// Use a known false-negative-rate prior φ instead of estimating it
    /// per trial.
    #[arg(long)]
    phi: Option<f64>,

    /// Comma-separated exponent grid for k selection (e.g. "0.5,1,2").
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<f64>>,

    /// Path to the UCI Wireless Indoor Localization data file
    /// (required for --experiment wireless).
    #[arg(long)]
    data: Option<PathBuf>,

    /// Observation-posterior estimator: "analytic" (synthetic only) or
    /// "kde".
    #[arg(long)]
    sigma: Option<String>,

    /// Gaussian KDE bandwidth (used with --sigma kde; default 0.1).
    #[arg(long)]
    bandwidth: Option<f64>,
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::new(args.experiment);
    if let Some(trials) = args.trials {
        config.n_trials = trials;
    }
    config.seed = args.seed;
    config.rho = args.rho;
    config.phi = args.phi;
    if let Some(grid) = &args.k_grid {
        config.k_grid = KGrid::new(grid.clone()).context("invalid --k-grid")?;
    }
    config.data_path = args.data.clone();
    match args.sigma.as_deref() {
        None => {
            if let (SigmaEstimator::Kde { .. }, Some(h)) = (config.sigma, args.bandwidth) {
                config.sigma = SigmaEstimator::Kde { bandwidth: h };
            }
        }
        Some("analytic") => {
            if args.bandwidth.is_some() {
                bail!("--bandwidth only applies to --sigma kde");
            }
            config.sigma = SigmaEstimator::Analytic;
        }
        Some("kde") => {
            config.sigma = SigmaEstimator::Kde { bandwidth: args.bandwidth.unwrap_or(0.1) };
        }
        Some(other) => bail!("unknown --sigma {other:?} (expected analytic or kde)"),
    }
    Ok(config)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let config = build_config(&args)?;
            let rows = run_experiment(&config)
                .with_context(|| format!("experiment {} failed", args.experiment))?;
            let table = emit_table(&rows, args.format)?;
            match &args.out {
                Some(path) => std::fs::write(path, &table)
                    .with_context(|| format!("cannot write {}", path.display()))?,
                None => print!("{table}"),
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_run(argv: &[&str]) -> RunArgs {
        let cli = Cli::try_parse_from(argv).expect("argv should parse");
        let Command::Run(args) = cli.command;
        args
    }

    #[test]
    fn parses_full_flag_set() {
        let args = parse_run(&[
            "pbn",
            "run",
            "--experiment",
            "situation2",
            "--trials",
            "3",
            "--seed",
            "7",
            "--format",
            "markdown",
            "--rho",
            "0.2",
            "--phi",
            "0.05",
            "--k-grid",
            "0.5,1,2",
            "--sigma",
            "kde",
            "--bandwidth",
            "0.3",
        ]);
        let config = build_config(&args).unwrap();
        assert_eq!(config.id, ExperimentId::Situation2);
        assert_eq!(config.n_trials, 3);
        assert_eq!(config.seed, 7);
        assert_eq!(config.rho, Some(0.2));
        assert_eq!(config.phi, Some(0.05));
        assert_eq!(config.k_grid.values(), [0.5, 1.0, 2.0]);
        assert_eq!(config.sigma, SigmaEstimator::Kde { bandwidth: 0.3 });
    }

    #[test]
    fn defaults_apply_per_experiment() {
        let args = parse_run(&["pbn", "run", "--experiment", "wireless"]);
        let config = build_config(&args).unwrap();
        assert_eq!(config.n_trials, 100);
        assert_eq!(config.seed, 1);
        assert_eq!(config.sigma, SigmaEstimator::Kde { bandwidth: 0.1 });
        assert_eq!(config.k_grid.values(), KGrid::benchmark().values());
    }

    #[test]
    fn bandwidth_overrides_kde_default_without_sigma_flag() {
        let args =
            parse_run(&["pbn", "run", "--experiment", "wireless", "--bandwidth", "0.25"]);
        let config = build_config(&args).unwrap();
        assert_eq!(config.sigma, SigmaEstimator::Kde { bandwidth: 0.25 });
    }

    #[test]
    fn bandwidth_with_analytic_sigma_is_rejected() {
        let args = parse_run(&[
            "pbn",
            "run",
            "--experiment",
            "situation1",
            "--sigma",
            "analytic",
            "--bandwidth",
            "0.2",
        ]);
        assert!(build_config(&args).is_err());
    }

    #[test]
    fn unknown_sigma_is_rejected() {
        let args =
            parse_run(&["pbn", "run", "--experiment", "situation1", "--sigma", "spline"]);
        assert!(build_config(&args).is_err());
    }

    #[test]
    fn empty_k_grid_is_rejected() {
        let cli = Cli::try_parse_from([
            "pbn",
            "run",
            "--experiment",
            "situation1",
            "--k-grid",
            "",
        ]);
        // clap yields a single empty-string token, which fails float parsing.
        assert!(cli.is_err());
    }
}
