//! A single stationary agent filters a target that is present for ten
//! steps and then vanishes; missed detections then pull existence
//! down while the unobserved spatial density drifts out of the cone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trackjam::config::ScenarioConfig;
use trackjam::filter::{point_estimate, predict, update, BernoulliBelief};
use trackjam::geometry::{aim_axis, Vec3};
use trackjam::models::{generate_measurements, target_step, PowerLevel, TargetState};

fn main() -> trackjam::Result<()> {
    let cfg = ScenarioConfig::default();
    let fp = cfg.filter_params();
    let s = &fp.sensing;
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let agent = Vec3::new(44.0, 50.0, 50.0);
    let mut truth = TargetState::new(Vec3::new(50.0, 50.0, 50.0), Vec3::new(0.3, 0.0, 0.0));
    // cued start: a rough prior around the true state
    let mut belief = BernoulliBelief::around(0.5, fp.n_particles, &truth, 3.0, 1.0, &mut rng);
    let cone = s.cone(agent, aim_axis(&agent, &truth.pos)?)?;
    let level = PowerLevel::Dbw(0.5);

    println!("step present existence  n_meas  error_m");
    for t in 1..=25 {
        let present = t <= 10;
        if t > 1 {
            truth = target_step(&truth, &fp.dynamics, &mut rng);
        }
        let pred = predict(&belief, &fp, &mut rng);
        let ys = generate_measurements(present.then_some(&truth), &agent, level, &cone, s, &mut rng);
        belief = update(&pred, &ys, &agent, level, &cone, &fp, &mut rng);
        let err = point_estimate(&belief).map_or("-".to_string(), |(m, _)| format!("{:.2}", (m.pos - truth.pos).norm()));
        println!("{t:>4} {present:>7} {:>9.4} {:>7}  {err:>7}", belief.existence, ys.len());
    }
    Ok(())
}
