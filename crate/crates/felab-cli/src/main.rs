//! `felab`: convergence studies, curved-mesh demos, and config-driven
//! solves on top of the felab library.
//!
//! Exit codes are machine-checkable: 0 on success, 2 for configuration
//! errors (including bad flags and bad JSON), 3 for solver failures.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Problem, RunConfig, Solver};
use run::CliError;

#[derive(Parser)]
#[command(name = "felab", version, about = "Adaptive finite elements from the command line")]
struct Cli {
    /// Worker threads for matrix-free operators; FELAB_THREADS overrides.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on a ladder of uniformly refined meshes and print a CSV table
    /// of errors and observed convergence rates.
    Convergence(ConvergenceArgs),
    /// Self-contained demonstrations.
    #[command(subcommand)]
    Demo(Demo),
    /// Run one solve described by a JSON config file.
    Solve(SolveArgs),
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Space dimension.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Polynomial degree of the element.
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// Polynomial degree of the cell geometry mapping.
    #[arg(long, default_value_t = 1)]
    mapping_degree: usize,
    /// Inclusive range of refinement levels, e.g. 3..6.
    #[arg(long, value_parser = parse_levels, default_value = "3..6")]
    levels: (usize, usize),
    /// Model problem; only sinsin has an exact solution to converge to.
    #[arg(long, value_enum, default_value = "sinsin")]
    problem: Problem,
    /// Linear solver.
    #[arg(long, value_enum, default_value = "assembled-cg")]
    solver: Solver,
    /// Relative residual tolerance of the linear solver.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Demo {
    /// Ring mesh adaptively refined toward the inner circle, written as
    /// VTK with per-cell refinement levels.
    Circle(CircleArgs),
}

#[derive(Args)]
struct CircleArgs {
    /// Number of adaptive refinement steps.
    #[arg(long, default_value_t = 3)]
    steps: usize,
    /// Output VTK path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// JSON run configuration; unknown keys are rejected.
    #[arg(long)]
    config: PathBuf,
}

fn parse_levels(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected an inclusive range A..B, got `{s}`"))?;
    let a: usize = a
        .trim()
        .parse()
        .map_err(|_| format!("bad lower level `{a}`"))?;
    let b: usize = b
        .trim()
        .parse()
        .map_err(|_| format!("bad upper level `{b}`"))?;
    if a > b {
        return Err(format!("empty level range {a}..{b}"));
    }
    Ok((a, b))
}

fn resolve_threads(flag: usize, env: Option<&str>) -> Result<usize, String> {
    let n = match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("FELAB_THREADS must be a positive integer, got `{v}`"))?,
        None => flag,
    };
    if n == 0 {
        return Err("thread count must be at least 1".into());
    }
    Ok(n)
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let env = std::env::var("FELAB_THREADS").ok();
    let threads = match resolve_threads(cli.threads, env.as_deref()) {
        Ok(n) => n,
        Err(msg) => {
            eprintln!("configuration error: {msg}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
    {
        eprintln!("configuration error: thread pool: {e}");
        return ExitCode::from(2);
    }

    let result = match cli.command {
        Command::Convergence(args) => {
            let cfg = RunConfig {
                dim: args.dim,
                degree: args.degree,
                mapping_degree: args.mapping_degree,
                min_level: args.levels.0,
                max_level: args.levels.1,
                problem: args.problem,
                solver: args.solver,
                tolerance: args.tol,
                csv_out: args.out,
                vtk_out: None,
            };
            match cfg.validate() {
                Ok(()) => run::convergence(&cfg),
                Err(msg) => Err(CliError::Config(msg)),
            }
        }
        Command::Demo(Demo::Circle(args)) => run::demo_circle(args.steps, &args.out),
        Command::Solve(args) => run::solve_from_file(&args.config),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(e)) => {
            eprintln!("run failed: {e}");
            ExitCode::from(3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_ranges_are_inclusive_pairs() {
        assert_eq!(parse_levels("3..6").unwrap(), (3, 6));
        assert_eq!(parse_levels("4..4").unwrap(), (4, 4));
        assert!(parse_levels("6..3").is_err());
        assert!(parse_levels("3").is_err());
        assert!(parse_levels("a..b").is_err());
    }

    #[test]
    fn env_var_overrides_the_flag() {
        assert_eq!(resolve_threads(1, None).unwrap(), 1);
        assert_eq!(resolve_threads(1, Some("4")).unwrap(), 4);
        assert!(resolve_threads(1, Some("zero")).is_err());
        assert!(resolve_threads(0, None).is_err());
        assert!(resolve_threads(1, Some("0")).is_err());
    }
}
