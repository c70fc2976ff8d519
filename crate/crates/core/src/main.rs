use std::path::PathBuf;
use std::process::ExitCode;

use acstab::harness::{self, exit_code_for, Subcommand};
use acstab::Error;
use clap::{Args, Parser};

/// Verification lab for the mixed additive-cubic functional equation.
///
/// Exit status: 0 all checks hold, 1 a check failed, 2 config or usage error,
/// 3 divergent stability series.
#[derive(Parser)]
#[command(name = "acstab", version, about)]
enum Cli {
    /// Residuals of the difference operator and both characterisations.
    CheckLemmas(Run),
    /// Exact replay of the catalogued derivation chain.
    ReplayChain(Run),
    /// Recover the additive and cubic parts and check the stability bound.
    Recover(Run),
    /// Closed-form constants against truncated series.
    Bounds(Run),
    /// Grid of recoveries over exponents, theta and noise amplitude.
    Sweep(Run),
}

#[derive(Args)]
struct Run {
    /// JSON experiment config (sweep spec for `sweep`).
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory; overrides $ACSTAB_OUT_DIR and the config.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let (cmd, run) = match Cli::parse() {
        Cli::CheckLemmas(r) => (Subcommand::CheckLemmas, r),
        Cli::ReplayChain(r) => (Subcommand::ReplayChain, r),
        Cli::Recover(r) => (Subcommand::Recover, r),
        Cli::Bounds(r) => (Subcommand::Bounds, r),
        Cli::Sweep(r) => (Subcommand::Sweep, r),
    };
    let code = match harness::run(cmd, &run.config, run.out.as_deref()) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            println!("{}", if outcome.passed { "PASS" } else { "FAIL" });
            outcome.exit_code()
        }
        Err(e @ Error::Divergent { .. }) => {
            eprintln!("divergent series: {e}");
            exit_code_for(&e)
        }
        Err(e) => {
            eprintln!("{} failed: {e}", cmd.name());
            exit_code_for(&e)
        }
    };
    ExitCode::from(code as u8)
}
