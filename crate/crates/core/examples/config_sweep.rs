//! The eight action-set and beam-width configurations, one short trial
//! each, written to a summary CSV.
//!
//! `cargo run --release --example config_sweep [out_dir]`

use std::path::PathBuf;

use trackjam::config::{ExperimentKind, ExperimentSpec};
use trackjam::csvio::read_summary_csv;
use trackjam::experiment::run_experiment;

fn main() -> trackjam::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("trackjam_sweep"), PathBuf::from);
    let mut spec = ExperimentSpec { kind: ExperimentKind::Sweep, n_trials: 1, ..Default::default() };
    spec.scenario.n_steps = 10;
    spec.scenario.control.n_samples = 1_000;
    spec.scenario.control.n_iterations = 10;

    for (name, cfg) in spec.variants() {
        println!("{name}: {} actions per agent, beam {} deg", cfg.grid().len(), cfg.sensing.cone_angle_deg);
    }
    let o = run_experiment(&spec, &out)?;
    for r in read_summary_csv(&o.summary_file)? {
        if r.metric == "jamming_incidents_per_agent" || r.metric == "ospa_m" {
            println!("{:<8} {:<28} {:.3}", r.configuration, r.metric, r.value);
        }
    }
    println!("wrote {}", o.summary_file.display());
    Ok(())
}
