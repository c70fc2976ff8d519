//! Experiment runners behind the `acstab` command line.
//!
//! Every runner reads one [`ExperimentConfig`] (or a [`SweepSpec`]), writes
//! its reports into an output directory and returns a [`RunOutcome`] whose
//! `passed` flag drives the process exit status. Outputs depend only on the
//! config: parallel work is collected in input order and all maps are sorted.

mod config;
mod lemmas;
mod recovery;
mod series;
mod sweep;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

pub use config::{
    AtomSpec, BoundsSpec, DirectionKeyword, DirectionSpec, ExperimentConfig, Family, LemmaSpec, Literal, ModelSpec,
    OutputSpec, PhiKeyword, PhiSpec, ProductCase, RandomSpec, SampleSpec, SeriesCase, SumCase, SweepFamily, SweepSpec,
    CONFIG_SCHEMA_VERSION,
};
pub use lemmas::{run_check_lemmas, run_replay_chain, FamilySummary, LemmaRow, ReplayRow};
pub use recovery::{recover_from_config, resolve_phi, run_recover, RecoveryRow};
pub use series::{run_bounds, ConsistencyRow, SeriesRow};
pub use sweep::{run_sweep, SweepRow};

/// Version stamped into every JSON report and CSV row.
pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "ACSTAB_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "acstab-out";

/// Exit statuses of the command line.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const DIVERGENT: i32 = 3;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    CheckLemmas,
    ReplayChain,
    Recover,
    Bounds,
    Sweep,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::CheckLemmas => "check-lemmas",
            Subcommand::ReplayChain => "replay-chain",
            Subcommand::Recover => "recover",
            Subcommand::Bounds => "bounds",
            Subcommand::Sweep => "sweep",
        }
    }

    /// Base name of the report files.
    pub fn stem(self) -> &'static str {
        match self {
            Subcommand::CheckLemmas => "check_lemmas",
            Subcommand::ReplayChain => "replay_chain",
            Subcommand::Recover => "recover",
            Subcommand::Bounds => "bounds",
            Subcommand::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            exit::PASS
        } else {
            exit::CHECK_FAILED
        }
    }
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Divergent { .. } => exit::DIVERGENT,
        Error::Overflow { .. } => exit::CHECK_FAILED,
        _ => exit::CONFIG,
    }
}

/// `explicit` (command line) wins, then `$ACSTAB_OUT_DIR`, then the config,
/// then `acstab-out`.
pub fn output_dir(explicit: Option<&Path>, configured: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(env) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(env);
    }
    configured.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Loads the config for `cmd` from `config` and runs it.
pub fn run(cmd: Subcommand, config: &Path, out: Option<&Path>) -> Result<RunOutcome> {
    if cmd == Subcommand::Sweep {
        let spec = SweepSpec::from_path(config)?;
        let dir = output_dir(out, spec.template.output.dir.as_deref());
        return run_sweep(&spec, &dir);
    }
    let cfg = ExperimentConfig::from_path(config)?;
    let dir = output_dir(out, cfg.output.dir.as_deref());
    match cmd {
        Subcommand::CheckLemmas => run_check_lemmas(&cfg, &dir),
        Subcommand::ReplayChain => run_replay_chain(&cfg, &dir),
        Subcommand::Recover => run_recover(&cfg, &dir),
        Subcommand::Bounds => run_bounds(&cfg, &dir),
        Subcommand::Sweep => unreachable!("handled above"),
    }
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

pub(crate) fn write_json<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    prepare(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::File::create(&path)?.write_all(text.as_bytes())?;
    Ok(path)
}

pub(crate) fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T], header: &[&str]) -> Result<PathBuf> {
    prepare(dir)?;
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(path)
}

/// Space-separated coordinate literals.
pub(crate) fn join_literals(lits: &[String]) -> String {
    lits.join(" ")
}

/// `None` for non-finite values, which JSON cannot carry.
pub(crate) fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}
