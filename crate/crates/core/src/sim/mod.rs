//! Closed-loop simulation: ground truth, per-agent filtering, message
//! exchange, planning, sensing and fusion, one step at a time.

mod bus;
mod rng;
mod trace;

pub use bus::message_bus_round;
pub use rng::{derive_rng_streams, stream, RngStreams, SOLVER_STREAM, SPAWN_STREAM, TRUTH_STREAM};
pub use trace::{AgentRecord, PlanMode, StepRecord, Trace};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{InitialBeliefKind, OcclusionMotion, Presence, ScenarioConfig};
use crate::control::{grasp_solve, hold_and_listen, select_best, ControlProblem, JointControl};
use crate::error::Result;
use crate::filter::{point_estimate, predict, update, BernoulliBelief};
use crate::fusion::{covariance_intersection, fuse_existence, inject_fused, GaussianEstimate};
use crate::geometry::{aim_axis, Aabb, Vec3};
use crate::metrics::ospa;
use crate::models::{generate_measurements, propagate, received_power, sample_birth, TargetState};

/// Keeps the target inside the box, reflecting the velocity component of
/// any face it crosses.
fn confine(x: &mut TargetState, b: &Aabb) {
    for k in 0..3 {
        if x.pos[k] < b.min[k] {
            x.pos[k] = b.min[k];
            x.vel[k] = x.vel[k].abs();
        } else if x.pos[k] > b.max[k] {
            x.pos[k] = b.max[k];
            x.vel[k] = -x.vel[k].abs();
        }
    }
}

/// Ground truth: the target state (kept while hidden) and whether it can
/// be observed.
struct Truth {
    state: Option<TargetState>,
    visible: bool,
}

impl Truth {
    fn advance(&mut self, t: usize, cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) {
        let dyn_ = cfg.dynamics();
        let noise = dyn_.noise_factor();
        let bounds = cfg.bounds();
        if t == 1 {
            self.state = Some(cfg.initial_target());
            self.visible = cfg.target.presence.scheduled(1).unwrap_or(true);
            return;
        }
        match &cfg.target.presence {
            Presence::Stochastic => {
                self.state = match self.state {
                    Some(x) => rng.random_bool(dyn_.p_survive).then(|| propagate(&x, dyn_.dt, &noise, rng)),
                    None => rng
                        .random_bool(dyn_.p_birth)
                        .then(|| sample_birth(&bounds, &(noise * dyn_.dt), rng)),
                };
                self.visible = self.state.is_some();
            }
            schedule => {
                let present = schedule.scheduled(t).unwrap_or(true);
                let frozen = !present && cfg.target.occlusion_motion == OcclusionMotion::Freeze;
                if let Some(x) = self.state.as_mut() {
                    if !frozen {
                        *x = propagate(x, dyn_.dt, &noise, rng);
                    }
                }
                self.visible = present;
            }
        }
        if let Some(x) = self.state.as_mut() {
            confine(x, &bounds);
        }
    }

    fn observed(&self) -> Option<&TargetState> {
        self.state.as_ref().filter(|_| self.visible)
    }
}

fn initial_belief(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> BernoulliBelief {
    let ib = &cfg.initial_belief;
    let n = cfg.filter.n_particles;
    match ib.kind {
        InitialBeliefKind::Cued => BernoulliBelief::around(ib.existence, n, &cfg.initial_target(), ib.position_std, ib.velocity_std, rng),
        InitialBeliefKind::Uniform => BernoulliBelief::uniform(ib.existence, n, &cfg.bounds(), cfg.filter.birth_velocity_std, rng),
    }
}

/// Solves the step's control problem, once or once per agent with the
/// best plan winning.
fn plan(prob: &ControlProblem, cfg: &ScenarioConfig, solver: &mut ChaCha8Rng) -> Result<(JointControl, PlanMode)> {
    if prob.target_estimate.is_none() {
        return Ok((hold_and_listen(prob), PlanMode::Search));
    }
    let c = &cfg.control;
    let outcome = if c.distributed {
        let seeds: Vec<u64> = (0..prob.n_agents()).map(|_| solver.random()).collect();
        let outs = seeds
            .iter()
            .map(|&s| grasp_solve(prob, c.n_samples, c.n_iterations, &mut ChaCha8Rng::seed_from_u64(s)))
            .collect::<Result<Vec<_>>>()?;
        select_best(&outs).map(|(_, o)| o.clone()).expect("at least one agent")
    } else {
        grasp_solve(prob, c.n_samples, c.n_iterations, solver)?
    };
    let mode = if outcome.found { PlanMode::Solved } else { PlanMode::Fallback };
    Ok((outcome.joint, mode))
}

/// Runs a validated scenario to completion. Identical configurations,
/// seed included, give identical traces.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Trace> {
    cfg.validate()?;
    let n = cfg.agents.positions.len();
    let mut streams = derive_rng_streams(cfg.seed, n);
    let fp = cfg.filter_params();
    let s = fp.sensing.clone();
    let bounds = cfg.bounds();
    let grid = cfg.grid();
    let levels = cfg.levels();
    let dt = cfg.target.dt;
    let ospa_p = cfg.ospa_params();

    let mut positions = cfg.agent_positions();
    let aim = cfg.initial_aim();
    let mut axes: Vec<Vec3> = positions.iter().map(|p| aim_axis(p, &aim).unwrap_or(Vec3::z())).collect();
    let mut beliefs: Vec<BernoulliBelief> = streams.agents.iter_mut().map(|r| initial_belief(cfg, r)).collect();
    let mut truth = Truth { state: None, visible: false };
    let mut last_fused: Option<(TargetState, usize)> = None;
    let mut trace = Trace { steps: Vec::with_capacity(cfg.n_steps) };

    for t in 1..=cfg.n_steps {
        truth.advance(t, cfg, &mut streams.truth);

        let preds: Vec<BernoulliBelief> = beliefs.iter().zip(&mut streams.agents).map(|(b, r)| predict(b, &fp, r)).collect();
        let local: Vec<Option<Vec3>> = preds.iter().map(|b| point_estimate(b).map(|(m, _)| m.pos)).collect();

        // every agent sees the same messages, so agent 0's view stands for all
        let payloads: Vec<Option<(Vec3, Option<Vec3>)>> = positions.iter().zip(&local).map(|(p, e)| Some((*p, *e))).collect();
        let inbox = message_bus_round(&payloads)?;
        let mut known: Vec<Vec3> = local[0].into_iter().collect();
        known.extend(inbox[0].iter().filter_map(|(_, (_, e))| *e));
        let target_estimate = if known.is_empty() {
            last_fused
                .filter(|(_, k)| t - k <= cfg.control.coast_steps)
                .map(|(x, k)| bounds.clamp(&(x.pos + x.vel * (dt * (t - k) as f64))))
        } else {
            Some(known.iter().sum::<Vec3>() / known.len() as f64)
        };

        let mut prob = ControlProblem::from_grid(
            &positions,
            &axes,
            &grid,
            &levels,
            Some(&bounds),
            target_estimate,
            cfg.control.n_required,
            cfg.tolerance_w(),
            s.clone(),
        );
        prob.constraints_enabled = cfg.control.constraints_enabled;
        prob.neighbor_mode = cfg.neighbor_mode();
        let (joint, mode) = plan(&prob, cfg, &mut streams.solver)?;

        let mut cones = Vec::with_capacity(n);
        for (j, a) in joint.actions.iter().enumerate() {
            positions[j] = a.position;
            axes[j] = prob.axis_for(j, &a.position);
            cones.push(s.cone(positions[j], axes[j])?);
        }
        let lvls: Vec<_> = joint.actions.iter().map(|a| a.level).collect();

        let scans: Vec<_> = (0..n)
            .map(|j| generate_measurements(truth.observed(), &positions[j], lvls[j], &cones[j], &s, &mut streams.truth))
            .collect();
        let posts: Vec<BernoulliBelief> = (0..n)
            .map(|j| update(&preds[j], &scans[j], &positions[j], lvls[j], &cones[j], &fp, &mut streams.agents[j]))
            .collect();
        let local_post: Vec<Option<(TargetState, nalgebra::Matrix6<f64>)>> = posts.iter().map(point_estimate).collect();

        let fused_e = fuse_existence(&posts.iter().map(|b| b.existence).collect::<Vec<_>>())?;
        let ests: Vec<GaussianEstimate> = local_post.iter().flatten().map(|(m, c)| GaussianEstimate { mean: *m, cov: *c }).collect();
        let fused = if ests.is_empty() { None } else { Some(covariance_intersection(&ests, cfg.ci_policy())?) };
        let existences: Vec<f64> = posts.iter().map(|b| b.existence).collect();
        beliefs = posts
            .into_iter()
            .zip(&mut streams.agents)
            .map(|(b, r)| inject_fused(b, fused_e, fused.as_ref(), cfg.fusion.inject_fraction, r))
            .collect();
        let fused_state = fused.filter(|_| fused_e > 0.5).map(|f| f.mean);
        if let Some(f) = fused_state {
            last_fused = Some((f, t));
        }

        let received_w: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 0.0 } else { received_power(&positions[i], &positions[j], lvls[j], &cones[j], &s) })
                    .collect()
            })
            .collect();
        let observed = truth.observed();
        let target_received_w = observed.map_or(0.0, |x| {
            (0..n).map(|j| received_power(&x.pos, &positions[j], lvls[j], &cones[j], &s)).sum()
        });
        let agents = (0..n)
            .map(|j| AgentRecord {
                position: positions[j],
                level: lvls[j],
                axis: axes[j],
                existence: existences[j],
                estimate: local_post[j].map(|(m, _)| m),
                interference_w: received_w[j].iter().sum(),
                n_measurements: scans[j].len(),
            })
            .collect();
        trace.steps.push(StepRecord {
            step: t,
            truth_present: truth.visible,
            truth: truth.state,
            agents,
            received_w,
            fused_existence: fused_e,
            fused: fused_state,
            target_received_w,
            ospa_m: ospa(observed.map(|x| &x.pos), fused_state.as_ref().map(|x| &x.pos), &ospa_p),
            plan: mode,
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::interference_feasible;
    use crate::control::{CandidateAction, JointControl};

    fn small() -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        c.n_steps = 4;
        c.filter.n_particles = 300;
        c.filter.n_birth_particles = 60;
        c.control.n_samples = 200;
        c.control.n_iterations = 3;
        c
    }

    #[test]
    fn absent_target_without_clutter_gives_empty_scans() {
        let mut c = small();
        c.n_steps = 1;
        c.target.presence = Presence::Intervals(vec![]);
        c.sensing.clutter_rate = 0.0;
        let tr = run_scenario(&c).unwrap();
        assert_eq!(tr.len(), 1);
        let st = &tr.steps[0];
        assert!(!st.truth_present);
        assert!(st.agents.iter().all(|a| a.n_measurements == 0));
        assert_eq!(st.target_received_w, 0.0);
    }

    #[test]
    fn runs_are_reproducible() {
        let c = small();
        assert_eq!(run_scenario(&c).unwrap(), run_scenario(&c).unwrap());
        let mut other = c.clone();
        other.seed += 1;
        assert_ne!(run_scenario(&c).unwrap(), run_scenario(&other).unwrap());
    }

    #[test]
    fn applied_controls_respect_the_constraints() {
        let tr = run_scenario(&small()).unwrap();
        let c = small();
        for st in tr.steps.iter().filter(|s| s.solver_found()) {
            for (i, a) in st.agents.iter().enumerate() {
                assert!(a.interference_w < c.tolerance_w(), "step {} agent {i}", st.step);
            }
        }
    }

    #[test]
    fn presence_follows_schedule() {
        let mut c = small();
        c.n_steps = 8;
        c.target.presence = Presence::Intervals(vec![(1, 2), (5, 8)]);
        let tr = run_scenario(&c).unwrap();
        let seen: Vec<bool> = tr.steps.iter().map(|s| s.truth_present).collect();
        assert_eq!(seen, vec![true, true, false, false, true, true, true, true]);
    }

    #[test]
    fn frozen_target_holds_still() {
        let mut c = small();
        c.n_steps = 4;
        c.target.presence = Presence::Intervals(vec![(1, 1), (4, 4)]);
        c.target.occlusion_motion = OcclusionMotion::Freeze;
        let tr = run_scenario(&c).unwrap();
        assert_eq!(tr.steps[1].truth, tr.steps[0].truth);
        assert_eq!(tr.steps[2].truth, tr.steps[0].truth);
        assert_ne!(tr.steps[3].truth, tr.steps[0].truth);
    }

    #[test]
    fn truth_is_confined() {
        let b = Aabb::new(Vec3::zeros(), Vec3::repeat(10.0));
        let mut x = TargetState::new(Vec3::new(-1.0, 5.0, 12.0), Vec3::new(-2.0, 1.0, 3.0));
        confine(&mut x, &b);
        assert_eq!(x.pos, Vec3::new(0.0, 5.0, 10.0));
        assert_eq!(x.vel, Vec3::new(2.0, 1.0, -3.0));
    }

    #[test]
    fn feasibility_recheck_matches_records() {
        // interference recorded in the trace is what the constraint sees
        let c = small();
        let tr = run_scenario(&c).unwrap();
        let st = &tr.steps[0];
        let joint = JointControl {
            actions: st.agents.iter().map(|a| CandidateAction { position: a.position, level: a.level }).collect(),
        };
        let mut prob = ControlProblem::from_grid(
            &c.agent_positions(),
            &st.agents.iter().map(|a| a.axis).collect::<Vec<_>>(),
            &c.grid(),
            &c.levels(),
            None,
            None,
            c.control.n_required,
            c.tolerance_w(),
            c.sensing_params(),
        );
        prob.constraints_enabled = true;
        let ok = st.agents.iter().all(|a| a.interference_w < c.tolerance_w());
        assert_eq!(interference_feasible(&joint, &prob), ok);
    }
}
