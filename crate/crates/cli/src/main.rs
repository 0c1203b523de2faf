//! `pucci-profile`: existence gate, profiles, shooting classification, strip
//! relaxation and the piecewise-cosine family from the command line.
//!
//! Exit codes: 0 on success, 1 on numerical failure, 2 on invalid input.

mod commands;
mod manifest;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::manifest::Failure;

#[derive(Debug, Parser)]
#[command(name = "pucci-profile", version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct Problem {
    /// Nonlinearity JSON file (`{"kind": "cubic"}` or `{"kind": "table", "points": [[t, f], ...]}`),
    /// or the word `cubic` for `f(u) = u - u³`.
    #[arg(long)]
    pub spec: String,
    /// Lower ellipticity constant.
    #[arg(long = "a", allow_negative_numbers = true)]
    pub lower: f64,
    /// Upper ellipticity constant.
    #[arg(long = "A", allow_negative_numbers = true)]
    pub upper: f64,
    /// Gradient exponent, greater than -1.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the conditions under which a heteroclinic profile exists.
    Gate {
        #[command(flatten)]
        problem: Problem,
    },
    /// Heteroclinic profile by quadrature, or the shooting trajectory for a given slope.
    Profile {
        #[command(flatten)]
        problem: Problem,
        /// Initial slope; without it the heteroclinic profile is built.
        #[arg(long, allow_negative_numbers = true)]
        delta: Option<f64>,
        /// Half-width of the shooting interval.
        #[arg(long, default_value_t = 20.0)]
        xmax: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Output path; `.csv`, `.json` and `.manifest.json` files share its stem.
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Classify the Cauchy problem for one slope or a sweep of slopes.
    Classify {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, allow_negative_numbers = true, required_unless_present = "sweep", conflicts_with = "sweep")]
        delta: Option<f64>,
        /// `lo:hi:n`, n evenly spaced slopes from lo to hi.
        #[arg(long, allow_hyphen_values = true)]
        sweep: Option<String>,
        /// Half-width of the integration interval.
        #[arg(long, default_value_t = 40.0)]
        xmax: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Relative tolerance for treating a slope as the threshold.
        #[arg(long, default_value_t = pucci_profile::tol::MATCH)]
        tol_match: f64,
        /// Output path; `.csv`, `.json` and `.manifest.json` files share its stem.
        /// Results go to stdout when absent.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Relax a configured strip problem to a steady state.
    PdeRun {
        #[arg(long)]
        config: std::path::PathBuf,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Evaluate and check the piecewise-cosine solutions u_{k,m}.
    Counterexample {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        /// Check the residual at random points and the ordering against u_{k,k}.
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for `u.csv` and the manifest.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    manifest::configure_threads()?;
    match cli.command {
        Command::Gate { problem } => commands::gate(&problem),
        Command::Profile {
            problem,
            delta,
            xmax,
            tol,
            out,
        } => commands::profile(&problem, delta, xmax, tol, &out),
        Command::Classify {
            problem,
            delta,
            sweep,
            xmax,
            tol,
            tol_match,
            out,
        } => commands::classify(
            &problem,
            commands::ClassifyArgs {
                delta,
                sweep: sweep.as_deref(),
                xmax,
                tol,
                tol_match,
                out: out.as_deref(),
            },
        ),
        Command::PdeRun { config, out } => commands::pde_run(&config, &out),
        Command::Counterexample {
            k,
            m,
            check,
            samples,
            seed,
            out,
        } => commands::counterexample(k, m, check, samples, seed, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
