//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{load_experiment, load_scenario};
use crate::control::DEFAULT_ORACLE_CAP;
use crate::csvio::{write_jamming_csv, write_trace_csv};
use crate::error::{Error, Result};
use crate::experiment::{oracle_check, run_experiment};
use crate::metrics::{jamming_incidents, mean_ospa, power_summary};
use crate::sim::run_scenario;

#[derive(Debug, Parser)]
#[command(name = "trackjam", about = "Cooperative target tracking and jamming simulator", disable_version_flag = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and write its trace.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Run a single, sweep or ablation experiment.
    Experiment {
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the output directory named in the experiment file.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Compare GRASP with exhaustive search on capped planning problems.
    OracleCheck {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
        cap: u128,
    },
    /// Print the version.
    Version,
}

fn create_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| Error::Io { path: p.into(), source: e })
}

/// Executes a parsed command, writing human-readable progress to `out`.
pub fn execute(cmd: Command, out: &mut dyn Write) -> Result<()> {
    let say = |out: &mut dyn Write, s: String| {
        let _ = writeln!(out, "{s}");
    };
    match cmd {
        Command::Version => say(out, format!("trackjam {}", env!("CARGO_PKG_VERSION"))),
        Command::Run { config, seed, out_dir } => {
            let mut cfg = load_scenario(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let trace = run_scenario(&cfg)?;
            create_dir(&out_dir)?;
            let path = out_dir.join("trace.csv");
            write_trace_csv(&trace, &path)?;
            let jam = jamming_incidents(&trace, cfg.jamming_threshold_w());
            write_jamming_csv(&trace, &jam.events, &out_dir.join("jamming.csv"))?;
            let p = power_summary(&trace)?;
            say(out, format!("wrote {}", path.display()));
            say(out, format!("steps: {}  seed: {}", trace.len(), cfg.seed));
            say(out, format!("mean OSPA (m): {}", mean_ospa(&trace).unwrap_or(0.0)));
            say(out, format!("jamming incidents per agent: {}", jam.mean_per_agent()));
            say(out, format!("mean target received power (W): {}", p.mean_target_received_w));
            say(out, format!("mean agent interference (W): {}", p.mean_agent_interference_w));
        }
        Command::Experiment { spec, seed, out_dir, trials } => {
            let mut s = load_experiment(&spec)?;
            if let Some(v) = seed {
                s.seed = v;
            }
            if let Some(t) = trials {
                s.n_trials = t;
            }
            s.validate()?;
            let dir = out_dir.unwrap_or_else(|| PathBuf::from(&s.out_dir));
            create_dir(&dir)?;
            let o = run_experiment(&s, &dir)?;
            say(out, format!("wrote {} trace files and {}", o.trace_files.len(), o.summary_file.display()));
        }
        Command::OracleCheck { config, seed, trials, cap } => {
            let mut cfg = load_scenario(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let r = oracle_check(&cfg, trials, cap)?;
            say(out, format!("instances: {}  optimal: {}  infeasible: {}", r.instances, r.matches, r.infeasible));
        }
    }
    Ok(())
}

/// Parses `args` and runs the command. Returns the process exit code: 0 on
/// success, 1 for invalid input, 2 for failures while running.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match execute(cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
