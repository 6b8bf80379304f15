use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hdirac_cli::{parse_config, run_suite, ConfigError, Suite};

#[derive(Parser)]
#[command(name = "hdirac", version, about = "Verification and simulation suites for the Hartree-Dirac equation")]
struct Cli {
    /// TOML config; keys may be overridden by HDIRAC_<SECTION>_<KEY>.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the parallel suites.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Dirac algebra identities, null-form gain and partitions of unity.
    VerifyAlgebra,
    /// Strichartz norms of free annulus data against the loss exponent.
    SweepStrichartz,
    /// Cube-localized Strichartz norms over (k, k').
    SweepLocal,
    /// Bilinear null-form sweep in the configured sign regime.
    SweepBilinear,
    /// Strang solve with charge and scattering diagnostics.
    Solve,
    /// Annulus witness for the third Picard iterate.
    Illposed,
    /// Summary of the suite reports in the output directory.
    Report,
}

impl Command {
    fn suite(self) -> Suite {
        match self {
            Command::VerifyAlgebra => Suite::VerifyAlgebra,
            Command::SweepStrichartz => Suite::SweepStrichartz,
            Command::SweepLocal => Suite::SweepLocal,
            Command::SweepBilinear => Suite::SweepBilinear,
            Command::Solve => Suite::Solve,
            Command::Illposed => Suite::Illposed,
            Command::Report => Suite::Report,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match parse_config(cli.config.as_deref(), std::env::vars()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(s) = cli.seed {
        cfg.sweep.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.output.dir = o;
    }
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", ConfigError(format!("--threads: {e}")));
            return ExitCode::from(2);
        }
    }
    match run_suite(&cfg, cli.command.suite()) {
        Ok(report) => {
            print!("{}", report.table());
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
