//! Detection probability and received power along an agent's boresight
//! for each transmit level.

use trackjam::config::ScenarioConfig;
use trackjam::geometry::Vec3;
use trackjam::models::{detection_prob, received_power};

fn main() -> trackjam::Result<()> {
    let cfg = ScenarioConfig::default();
    let s = cfg.sensing_params();
    let agent = Vec3::zeros();
    let cone = s.cone(agent, Vec3::x())?;

    print!("{:>8}", "range_m");
    for l in cfg.levels() {
        print!("  {:>14}", format!("p_D @ {l}"));
    }
    println!("  {:>12}", "P_rx @ max W");
    for r in [1.0, 3.0, 6.0, 9.0, 12.0, 20.0, 30.0, 40.0, 41.0] {
        let target = Vec3::new(r, 0.0, 0.0);
        print!("{r:>8.1}");
        for l in cfg.levels() {
            print!("  {:>14.4}", detection_prob(&target, &agent, l, &cone, &s));
        }
        println!("  {:>12.3e}", received_power(&target, &agent, s.l_max, &cone, &s));
    }

    // half the opening angle is the edge of the beam
    let edge = (cfg.sensing.cone_angle_deg / 2.0).to_radians();
    for deg in [0.0, 20.0, 39.0, 41.0] {
        let a = f64::to_radians(deg);
        let target = Vec3::new(5.0 * a.cos(), 5.0 * a.sin(), 0.0);
        println!("off-axis {deg:>4} deg (edge {:.0}): p_D = {:.3}", edge.to_degrees(), detection_prob(&target, &agent, s.l_max, &cone, &s));
    }
    Ok(())
}
