//! Command-line front end: bound computation, posterior optimization, CGF
//! estimation, and Monte Carlo validation with reproducible configs.
//!
//! Exit codes are a stable contract: 0 success, 2 config parse error,
//! 3 domain/precondition error, 4 validation-assertion failure.

mod commands;
mod config;
mod errors;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "pacbayes",
    version,
    about = "PAC-Bayes bound computation, posterior optimization, and Monte Carlo validation"
)]
struct Cli {
    /// Seed override for randomized commands (takes precedence over config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output base path; validation commands write <out>.csv and <out>.json,
    /// curve commands write the CSV there directly.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Stdout format. Defaults to json, except `cgf estimate` which defaults
    /// to csv.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate generalization bounds from a query config.
    #[command(subcommand)]
    Bound(BoundCmd),
    /// Optimize the posterior of a finite model class.
    #[command(subcommand)]
    Posterior(PosteriorCmd),
    /// Monte Carlo validation runs.
    #[command(subcommand)]
    Validate(ValidateCmd),
    /// Empirical CGF estimation and the gradient-envelope ratio.
    #[command(subcommand)]
    Cgf(CgfCmd),
}

#[derive(Subcommand)]
enum BoundCmd {
    /// Evaluate one bound: config carries the query and a bound spec.
    Compute {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate a list of bounds on the same query.
    Compare {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum PosteriorCmd {
    /// Minimize the bound over (posterior, λ), or over the posterior alone
    /// at --fixed-lambda.
    Optimize {
        /// Model-class JSON file.
        #[arg(long)]
        class: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long = "fixed-lambda")]
        fixed_lambda: Option<f64>,
    },
}

#[derive(Subcommand)]
enum ValidateCmd {
    /// Bound coverage at confidence 1-δ.
    Coverage {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Exponential dominance of the scaled transform of the gap.
    Lemma2 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// The n/(n-m) exponential-moment ceiling.
    Expmoment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Subcommand)]
enum CgfCmd {
    /// Evaluate the plug-in CGF of a loss sample over a λ-grid.
    Estimate {
        /// One-column CSV of losses (optional header).
        #[arg(long)]
        samples: PathBuf,
        /// Grid as start:stop:step.
        #[arg(long = "lambda-grid", default_value = "0:5:0.05")]
        lambda_grid: String,
    },
    /// Ratio of the plug-in CGF to the gradient envelope, with its λ→0 limit.
    Logsobolev {
        /// Two-column CSV of loss,grad_norm2 (optional header).
        #[arg(long)]
        samples: PathBuf,
        /// Grid as start:stop:step; defaults to 0.05:5:0.05.
        #[arg(long = "lambda-grid")]
        lambda_grid: Option<String>,
    },
}

fn run(cli: Cli) -> errors::CliResult<()> {
    let format = |fallback| cli.format.unwrap_or(fallback);
    match &cli.command {
        Command::Bound(BoundCmd::Compute { config }) => {
            commands::bound_compute(config, format(OutputFormat::Json))
        }
        Command::Bound(BoundCmd::Compare { config }) => {
            commands::bound_compare(config, format(OutputFormat::Json))
        }
        Command::Posterior(PosteriorCmd::Optimize {
            class,
            delta,
            fixed_lambda,
        }) => commands::posterior_optimize(class, *delta, *fixed_lambda, format(OutputFormat::Json)),
        Command::Validate(ValidateCmd::Coverage { config, workers }) => {
            commands::validate_coverage(config, cli.seed, *workers, cli.out.as_deref())
        }
        Command::Validate(ValidateCmd::Lemma2 { config, workers }) => {
            commands::validate_survival(config, cli.seed, *workers, cli.out.as_deref())
        }
        Command::Validate(ValidateCmd::Expmoment { config, workers }) => {
            commands::validate_exp_moment(config, cli.seed, *workers, cli.out.as_deref())
        }
        Command::Cgf(CgfCmd::Estimate {
            samples,
            lambda_grid,
        }) => commands::cgf_estimate(
            samples,
            lambda_grid,
            format(OutputFormat::Csv),
            cli.out.as_deref(),
        ),
        Command::Cgf(CgfCmd::Logsobolev {
            samples,
            lambda_grid,
        }) => commands::cgf_logsobolev(
            samples,
            lambda_grid.as_deref(),
            format(OutputFormat::Json),
            cli.out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
