//! Paired trials with the interference constraints on and off.
//!
//! `cargo run --release --example constraint_ablation [n_trials]`

use trackjam::config::{ExperimentKind, ExperimentSpec};
use trackjam::experiment::{run_trials, summarize};

fn main() -> trackjam::Result<()> {
    let n_trials = std::env::args().nth(1).and_then(|v| v.parse().ok()).unwrap_or(3);
    let mut spec = ExperimentSpec { kind: ExperimentKind::Ablation, n_trials, ..Default::default() };
    spec.scenario.n_steps = 15;
    spec.scenario.control.n_samples = 2_000;
    spec.scenario.control.n_iterations = 20;

    let runs = run_trials(&spec)?;
    for r in summarize(&runs)? {
        if !r.metric.starts_with("seed_") {
            println!("{:<22} {:<28} {:.4e}", r.configuration, r.metric, r.value);
        }
    }
    Ok(())
}
