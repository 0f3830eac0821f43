//! Repeated seeded trials over scenario variants, with per-trial traces
//! and an aggregated summary on disk.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::{ExperimentKind, ExperimentSpec, ScenarioConfig};
use crate::control::{exhaustive_oracle, grasp_solve, interference_feasible, ControlProblem};
use crate::csvio::{write_jamming_csv, write_summary_csv, write_trace_csv, SummaryRecord};
use crate::error::{Error, Result};
use crate::geometry::{aim_axis, Vec3};
use crate::metrics::{jamming_incidents, mean_ospa, power_summary};
use crate::sim::{run_scenario, stream, Trace, SOLVER_STREAM, SPAWN_STREAM};

/// Places the target uniformly in the box and every agent uniformly in the
/// ball of `radius` around it (restricted to the box), antennas facing the
/// target. All draws come from the spawn stream of `seed`, which also
/// becomes the scenario seed.
pub fn spawn_scenario(base: &ScenarioConfig, seed: u64, radius: f64, velocity_std: f64) -> Result<ScenarioConfig> {
    let mut rng = stream(seed, SPAWN_STREAM);
    let b = base.bounds();
    let target = Vec3::from_fn(|k, _| rng.random_range(b.min[k]..=b.max[k]));
    let vel_dist = Normal::new(0.0, velocity_std).map_err(|_| Error::Validation(vec!["spawn velocity std must be finite".into()]))?;
    let vel = Vec3::from_fn(|_, _| vel_dist.sample(&mut rng));
    let mut cfg = base.clone();
    cfg.seed = seed;
    cfg.target.initial_state = [target.x, target.y, target.z, vel.x, vel.y, vel.z];
    cfg.agents.initial_aim = Some([target.x, target.y, target.z]);
    for p in cfg.agents.positions.iter_mut() {
        let mut placed = None;
        for _ in 0..100_000 {
            let d = Vec3::from_fn(|_, _| rng.random_range(-radius..=radius));
            let q = target + d;
            if d.norm() <= radius && b.contains(&q) {
                placed = Some(q);
                break;
            }
        }
        let q = placed.unwrap_or(target);
        *p = [q.x, q.y, q.z];
    }
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRun {
    pub trial: usize,
    pub seed: u64,
    pub trace: Trace,
    /// Tolerance the trial's jamming incidents were counted against (W).
    pub jamming_threshold_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantRuns {
    pub name: String,
    pub trials: Vec<TrialRun>,
}

/// Per-trial scalar results, averaged into the summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialStats {
    pub jamming_incidents_per_agent: f64,
    pub target_received_w: f64,
    pub agent_interference_w: f64,
    pub transmit_w: f64,
    pub ospa_m: f64,
}

impl TrialRun {
    pub fn stats(&self) -> Result<TrialStats> {
        let p = power_summary(&self.trace)?;
        Ok(TrialStats {
            jamming_incidents_per_agent: jamming_incidents(&self.trace, self.jamming_threshold_w).mean_per_agent(),
            target_received_w: p.mean_target_received_w,
            agent_interference_w: p.mean_agent_interference_w,
            transmit_w: p.mean_transmit_w,
            ospa_m: mean_ospa(&self.trace).unwrap_or(0.0),
        })
    }
}

/// Runs every variant of `spec` for `n_trials` trials. Trial `k` uses seed
/// `spec.seed + k` in every variant, so variants are paired trial by
/// trial. Single experiments run the scenario as written; sweeps and
/// ablations spawn a fresh random geometry per trial.
pub fn run_trials(spec: &ExperimentSpec) -> Result<Vec<VariantRuns>> {
    spec.validate()?;
    spec.variants()
        .into_iter()
        .map(|(name, cfg)| {
            let trials = (0..spec.n_trials)
                .map(|k| {
                    let seed = spec.seed.wrapping_add(k as u64);
                    let scenario = match spec.kind {
                        ExperimentKind::Single => ScenarioConfig { seed, ..cfg.clone() },
                        _ => spawn_scenario(&cfg, seed, spec.spawn_radius, spec.spawn_velocity_std)?,
                    };
                    Ok(TrialRun {
                        trial: k,
                        seed,
                        jamming_threshold_w: scenario.jamming_threshold_w(),
                        trace: run_scenario(&scenario)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(VariantRuns { name, trials })
        })
        .collect()
}

/// Summary rows: the mean of every [`TrialStats`] field over trials, the
/// trial count and each trial's seed.
pub fn summarize(runs: &[VariantRuns]) -> Result<Vec<SummaryRecord>> {
    let mut out = Vec::new();
    for v in runs {
        let stats = v.trials.iter().map(TrialRun::stats).collect::<Result<Vec<_>>>()?;
        let n = stats.len().max(1) as f64;
        let mean = |f: fn(&TrialStats) -> f64| stats.iter().map(f).sum::<f64>() / n;
        let mut rec = |metric: &str, value: f64| {
            out.push(SummaryRecord { configuration: v.name.clone(), metric: metric.into(), value });
        };
        rec("n_trials", stats.len() as f64);
        rec("jamming_incidents_per_agent", mean(|s| s.jamming_incidents_per_agent));
        rec("target_received_w", mean(|s| s.target_received_w));
        rec("agent_interference_w", mean(|s| s.agent_interference_w));
        rec("transmit_w", mean(|s| s.transmit_w));
        rec("ospa_m", mean(|s| s.ospa_m));
        for t in &v.trials {
            rec(&format!("seed_trial_{:03}", t.trial), t.seed as f64);
        }
    }
    Ok(out)
}

/// Files written by [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub runs: Vec<VariantRuns>,
    pub trace_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
}

/// Runs the experiment and writes `{out}/{variant}/trial_XXX.csv`, the
/// matching `jamming_XXX.csv` event lists and `{out}/summary.csv`.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: &Path) -> Result<ExperimentOutput> {
    let runs = run_trials(spec)?;
    let mut trace_files = Vec::new();
    for v in &runs {
        let dir = out_dir.join(&v.name);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        for t in &v.trials {
            let p = dir.join(format!("trial_{:03}.csv", t.trial));
            write_trace_csv(&t.trace, &p)?;
            trace_files.push(p);
            let events = jamming_incidents(&t.trace, t.jamming_threshold_w).events;
            write_jamming_csv(&t.trace, &events, &dir.join(format!("jamming_{:03}.csv", t.trial)))?;
        }
    }
    let summary_file = out_dir.join("summary.csv");
    write_summary_csv(&summarize(&runs)?, &summary_file)?;
    Ok(ExperimentOutput { runs, trace_files, summary_file })
}

/// Agreement between GRASP and the exhaustive solver over a batch of
/// instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCheck {
    pub instances: usize,
    /// GRASP reached the oracle's objective.
    pub matches: usize,
    /// GRASP returned a joint that violates the interference constraints.
    pub infeasible: usize,
}

/// Builds the first-step planning problem of `cfg`, trimming each agent's
/// positions to those nearest the target so the joint space stays within
/// `cap`.
pub fn capped_problem(cfg: &ScenarioConfig, cap: u128) -> ControlProblem {
    let target = cfg.initial_target().pos;
    let positions = cfg.agent_positions();
    let aim = cfg.initial_aim();
    let axes: Vec<Vec3> = positions.iter().map(|p| aim_axis(p, &aim).unwrap_or(Vec3::z())).collect();
    let bounds = cfg.bounds();
    let mut prob = ControlProblem::from_grid(
        &positions,
        &axes,
        &cfg.grid(),
        &cfg.levels(),
        Some(&bounds),
        Some(target),
        cfg.control.n_required,
        cfg.tolerance_w(),
        cfg.sensing_params(),
    );
    prob.constraints_enabled = cfg.control.constraints_enabled;
    prob.neighbor_mode = cfg.neighbor_mode();
    let n = prob.n_agents() as f64;
    let per_agent = (cap as f64).powf(1.0 / n).floor() as usize;
    for a in &mut prob.agents {
        let keep = (per_agent / a.levels.len().max(1)).max(1);
        a.positions.sort_by(|p, q| (p - target).norm().total_cmp(&(q - target).norm()).then(cmp_lex(p, q)));
        a.positions.truncate(keep);
    }
    while prob.space_size() > cap {
        // rounding left the product too large: trim the widest agent
        let j = (0..prob.n_agents()).max_by_key(|&j| prob.agents[j].positions.len()).unwrap_or(0);
        if prob.agents[j].positions.len() <= 1 {
            break;
        }
        prob.agents[j].positions.pop();
    }
    prob
}

fn cmp_lex(a: &Vec3, b: &Vec3) -> std::cmp::Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z))
}

/// Compares GRASP against the exhaustive solver on `trials` spawned
/// geometries of `cfg` (trial `k` uses seed `cfg.seed + k`).
pub fn oracle_check(cfg: &ScenarioConfig, trials: usize, cap: u128) -> Result<OracleCheck> {
    cfg.validate()?;
    let mut report = OracleCheck { instances: 0, matches: 0, infeasible: 0 };
    for k in 0..trials {
        let seed = cfg.seed.wrapping_add(k as u64);
        let spawned = spawn_scenario(cfg, seed, 20.0, 1.0)?;
        let prob = capped_problem(&spawned, cap);
        let best = exhaustive_oracle(&prob, cap)?;
        let mut rng = stream(seed, SOLVER_STREAM);
        let got = grasp_solve(&prob, cfg.control.n_samples, cfg.control.n_iterations, &mut rng)?;
        report.instances += 1;
        if got.objective == best.objective {
            report.matches += 1;
        }
        if !interference_feasible(&got.joint, &prob) && prob.constraints_enabled {
            report.infeasible += 1;
        }
    }
    Ok(report)
}
