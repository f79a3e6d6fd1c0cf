//! `se2group`: kernel estimation, stimulus generation, lifting, grouping and
//! mean-field simulation from the command line.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 bad input or configuration.

mod commands;
mod config;
mod output;
mod render;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "se2group",
    version,
    about = "Perceptual grouping with SE(2) connectivity kernels"
)]
struct Cli {
    /// Flat `key = value` file; any flag given on the command line wins.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory (default: $SE2GROUP_OUT_DIR, else the current directory).
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate the connectivity kernel by Monte Carlo path sampling.
    Kernel(commands::kernel::Args),
    /// Generate a contour-in-noise stimulus.
    Stimulus(commands::stimulus::Args),
    /// Lift a PGM image to oriented elements.
    Lift(commands::lift::Args),
    /// Extract perceptual units from a stimulus.
    Group(commands::group::Args),
    /// Simulate the mean-field activity equation on a stimulus.
    Simulate(commands::simulate::Args),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<se2group::Error>())
        .any(se2group::Error::is_numerical);
    if numerical {
        1
    } else {
        2
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(path) => config::read_config(path)?,
        None => Default::default(),
    };
    let name = match &cli.command {
        Command::Kernel(_) => "kernel",
        Command::Stimulus(_) => "stimulus",
        Command::Lift(_) => "lift",
        Command::Group(_) => "group",
        Command::Simulate(_) => "simulate",
    };
    let mut resolver = config::Resolver::new(file, name);
    let out_dir = output::resolve_out_dir(cli.out_dir, resolver.consume("out-dir"));
    match cli.command {
        Command::Kernel(args) => commands::kernel::run(args, resolver, out_dir),
        Command::Stimulus(args) => commands::stimulus::run(args, resolver, out_dir),
        Command::Lift(args) => commands::lift::run(args, resolver, out_dir),
        Command::Group(args) => commands::group::run(args, resolver, out_dir),
        Command::Simulate(args) => commands::simulate::run(args, resolver, out_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerical_errors_map_to_one() {
        let e = anyhow::Error::new(se2group::Error::Singular { mu: 1.0 }).context("solving");
        assert_eq!(exit_code(&e), 1);
        let e = anyhow::Error::new(se2group::Error::InvalidParameter("x".into()));
        assert_eq!(exit_code(&e), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("missing file")), 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
