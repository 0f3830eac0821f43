//! Randomized invariants across module boundaries.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trackjam::config::{Presence, ScenarioConfig};
use trackjam::control::{grasp_solve, interference_feasible, xi_exactly_m, CandidateAction, ControlProblem, JointControl};
use trackjam::filter::{predict, update, BernoulliBelief};
use trackjam::geometry::{aim_axis, Vec3};
use trackjam::models::{admissible_controls, detection_prob, generate_measurements, ControlGrid, PowerLevel};
use trackjam::sim::run_scenario;

fn levels() -> Vec<PowerLevel> {
    vec![PowerLevel::Off, PowerLevel::Dbw(-50.0), PowerLevel::Dbw(-7.0), PowerLevel::Dbw(0.5)]
}

fn point(lo: f64, hi: f64) -> impl Strategy<Value = Vec3> {
    (lo..hi, lo..hi, lo..hi).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn small_problem(agents: &[Vec3], target: Vec3) -> ControlProblem {
    let cfg = ScenarioConfig::default();
    let axes: Vec<Vec3> = agents.iter().map(|p| aim_axis(p, &target).unwrap_or(Vec3::z())).collect();
    let grid = ControlGrid { radial_steps: vec![2.0], n_phi: 4, n_theta: 2, include_hover: true };
    ControlProblem::from_grid(agents, &axes, &grid, &levels(), Some(&cfg.bounds()), Some(target), 2, cfg.tolerance_w(), cfg.sensing_params())
}

fn sum_of_weights(b: &BernoulliBelief) -> f64 {
    b.particles.iter().map(|p| p.weight).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn poisson_binomial_sums_to_one(p in prop::collection::vec(0.0..=1.0f64, 0..=10)) {
        let total: f64 = (0..=p.len()).map(|m| xi_exactly_m(&p, m)).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn detection_monotone_in_range_and_level(
        d1 in 0.1..40.0f64, d2 in 0.1..40.0f64, li in 0usize..4, lj in 0usize..4, dir in point(-1.0, 1.0),
    ) {
        prop_assume!(dir.norm() > 1e-3);
        let s = ScenarioConfig::default().sensing_params();
        let axis = dir.normalize();
        let agent = Vec3::new(50.0, 50.0, 50.0);
        let cone = s.cone(agent, axis).unwrap();
        let (near, far) = (d1.min(d2), d1.max(d2));
        let l = levels();
        let (lo, hi) = (l[li.min(lj)], l[li.max(lj)]);
        let pd = |d: f64, lv| detection_prob(&(agent + axis * d), &agent, lv, &cone, &s);
        prop_assert!(pd(near, hi) >= pd(far, hi));
        prop_assert!(pd(near, lo) <= pd(near, hi));
    }

    #[test]
    fn admissible_positions_are_distinct(u in point(0.0, 100.0), n_phi in 2usize..10, n_theta in 1usize..10, hover in any::<bool>()) {
        let grid = ControlGrid { radial_steps: vec![1.0, 3.0, 5.0], n_phi, n_theta, include_hover: hover };
        let ps = admissible_controls(&u, &grid);
        for (i, a) in ps.iter().enumerate() {
            for b in &ps[i + 1..] {
                prop_assert!((a - b).norm() > 1e-9);
            }
        }
    }

    #[test]
    fn filter_weights_and_existence_stay_normalized(seed in any::<u64>(), e0 in 0.0..=1.0f64, level in 0usize..4, target in point(10.0, 90.0)) {
        let mut cfg = ScenarioConfig::default();
        cfg.filter.n_particles = 300;
        cfg.filter.n_birth_particles = 60;
        let fp = cfg.filter_params();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let agent = target + Vec3::new(4.0, 0.0, 0.0);
        let cone = fp.sensing.cone(agent, aim_axis(&agent, &target).unwrap()).unwrap();
        let lv = levels()[level];
        let mut b = BernoulliBelief::uniform(e0, fp.n_particles, &cfg.bounds(), 1.0, &mut rng);
        for _ in 0..5 {
            let pred = predict(&b, &fp, &mut rng);
            prop_assert!((0.0..=1.0).contains(&pred.existence));
            if !pred.particles.is_empty() {
                prop_assert!((sum_of_weights(&pred) - 1.0).abs() <= 1e-9);
            }
            let truth = trackjam::models::TargetState::new(target, Vec3::zeros());
            let ys = generate_measurements(Some(&truth), &agent, lv, &cone, &fp.sensing, &mut rng);
            b = update(&pred, &ys, &agent, lv, &cone, &fp, &mut rng);
            prop_assert!((0.0..=1.0).contains(&b.existence));
            if !b.particles.is_empty() {
                prop_assert!((sum_of_weights(&b) - 1.0).abs() <= 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn grasp_is_feasible_and_never_worse_than_its_greedy_phase(
        seed in any::<u64>(), target in point(20.0, 80.0), offsets in prop::collection::vec(point(-8.0, 8.0), 3),
    ) {
        let agents: Vec<Vec3> = offsets.iter().map(|o| target + o).collect();
        let prob = small_problem(&agents, target);
        let out = grasp_solve(&prob, 200, 5, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        if out.found {
            prop_assert!(interference_feasible(&out.joint, &prob));
            prop_assert!(out.objective >= out.greedy_best_objective);
        }
    }

    #[test]
    fn doubling_tolerances_keeps_joints_feasible(
        target in point(20.0, 80.0), offsets in prop::collection::vec(point(-8.0, 8.0), 3), picks in prop::collection::vec((0usize..64, 0usize..4), 3),
    ) {
        let agents: Vec<Vec3> = offsets.iter().map(|o| target + o).collect();
        let prob = small_problem(&agents, target);
        let joint = JointControl {
            actions: prob.agents.iter().zip(&picks).map(|(a, &(p, l))| CandidateAction {
                position: a.positions[p % a.positions.len()],
                level: a.levels[l % a.levels.len()],
            }).collect(),
        };
        let mut relaxed = prob.clone();
        relaxed.tolerances_w.iter_mut().for_each(|d| *d *= 2.0);
        if interference_feasible(&joint, &prob) {
            prop_assert!(interference_feasible(&joint, &relaxed));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn scenarios_are_deterministic_and_follow_their_schedule(seed in any::<u64>(), start in 1usize..4, len in 0usize..3) {
        let mut cfg = ScenarioConfig::default();
        cfg.seed = seed;
        cfg.n_steps = 6;
        cfg.control.n_samples = 100;
        cfg.control.n_iterations = 3;
        cfg.filter.n_particles = 400;
        cfg.filter.n_birth_particles = 100;
        cfg.target.presence = Presence::Intervals(vec![(start, start + len)]);
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        prop_assert_eq!(trackjam::csvio::trace_csv_string(&a), trackjam::csvio::trace_csv_string(&b));
        for s in &a.steps {
            prop_assert_eq!(s.truth_present, (start..=start + len).contains(&s.step));
        }
    }
}
