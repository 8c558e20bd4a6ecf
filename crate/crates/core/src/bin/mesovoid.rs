use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mesovoid::cloud::DEFAULT_GATE;
use mesovoid::error::Result;
use mesovoid::field::FieldKind;
use mesovoid::io::{
    cmd_eval, cmd_generate, cmd_solve, cmd_study, cmd_validate, to_json, EvalOptions, GenerateOptions, OutputFormat,
    SolveOptions, StudyOptions, ValidateOptions,
};
use mesovoid::solver::SolveMethod;

/// Meso-scale displacement fields for elastic solids with clouds of small
/// spherical cavities.
#[derive(Parser)]
#[command(name = "mesovoid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random admissible cloud of equal cavities.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        region_radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Gate constant c in eps < c d.
        #[arg(long, default_value_t = DEFAULT_GATE)]
        gate: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve for the dipole coefficients of every cavity.
    Solve {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        background: PathBuf,
        /// dense | neumann
        #[arg(long, default_value = "dense")]
        method: SolveMethod,
        #[arg(long)]
        out: PathBuf,
        /// Write diagnostics here instead of standard output.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Evaluate the approximate displacement field on a grid.
    Eval {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long)]
        background: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        /// far | uniform
        #[arg(long, default_value = "uniform")]
        kind: FieldKind,
        /// csv | vtk
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the numerical check suite.
    Validate {
        #[arg(long)]
        cloud: Option<PathBuf>,
        #[arg(long)]
        background: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Measure the decay of the boundary traction residual with the cavity radius.
    Study {
        #[arg(long)]
        cloud: Option<PathBuf>,
        #[arg(long)]
        background: Option<PathBuf>,
        /// Comma-separated cavity radii.
        #[arg(long, value_delimiter = ',')]
        eps_list: Option<Vec<f64>>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { n, d, eps, region_radius, seed, lambda, mu, gate, out } => {
            let cloud =
                cmd_generate(&GenerateOptions { n, d, eps, region_radius, seed, lambda, mu, gate_c: gate, out })?;
            eprintln!("generated {} voids", cloud.len());
        }
        Command::Solve { cloud, background, method, out, diagnostics } => {
            let print = diagnostics.is_none();
            let diag = cmd_solve(&SolveOptions { cloud, background, method, out, diagnostics })?;
            if print {
                print!("{}", to_json(&diag));
            }
        }
        Command::Eval { cloud, coeffs, background, grid, kind, format, out } => {
            let summary = cmd_eval(&EvalOptions { cloud, coeffs, background, grid, kind, format, out })?;
            eprintln!("evaluated {} points ({} masked)", summary.points, summary.masked);
            if summary.far_warnings > 0 {
                eprintln!(
                    "warning: {} points lie within unit distance of the cloud region where the far-field formula is not asymptotically valid",
                    summary.far_warnings
                );
            }
        }
        Command::Validate { cloud, background, report } => {
            let print = report.is_none();
            let text = cmd_validate(&ValidateOptions { cloud, background, report })?;
            if print {
                print!("{text}");
            }
        }
        Command::Study { cloud, background, eps_list, report } => {
            let print = report.is_none();
            let text = cmd_study(&StudyOptions { cloud, background, eps_list, report })?;
            if print {
                print!("{text}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
