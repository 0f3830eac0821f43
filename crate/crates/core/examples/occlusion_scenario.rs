//! Runs the three-agent reference scenario and prints the team's existence
//! probability and tracking error per step.
//!
//! `cargo run --release --example occlusion_scenario [out_dir]`

use std::path::{Path, PathBuf};

use trackjam::config::load_scenario;
use trackjam::csvio::write_trace_csv;
use trackjam::metrics::{jamming_incidents, power_summary};
use trackjam::sim::run_scenario;

fn main() -> trackjam::Result<()> {
    let cfg = load_scenario(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/occlusion.toml"))?;
    let trace = run_scenario(&cfg)?;

    println!("step present  fused_e  ospa_m  levels (dBW)");
    for s in &trace.steps {
        let levels: Vec<String> = s.agents.iter().map(|a| a.level.to_string()).collect();
        println!("{:>4} {:>7}  {:>7.3}  {:>6.2}  {}", s.step, s.truth_present, s.fused_existence, s.ospa_m, levels.join(" "));
    }
    let jam = jamming_incidents(&trace, cfg.jamming_threshold_w());
    let p = power_summary(&trace)?;
    println!("jamming incidents per agent: {}", jam.mean_per_agent());
    println!("mean power at target: {:.3e} W, at agents: {:.3e} W", p.mean_target_received_w, p.mean_agent_interference_w);

    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&dir).map_err(|e| trackjam::Error::Io { path: dir.clone(), source: e })?;
        write_trace_csv(&trace, &dir.join("occlusion_trace.csv"))?;
        println!("trace written to {}", dir.join("occlusion_trace.csv").display());
    }
    Ok(())
}
