//! GRASP against exhaustive search on small planning problems drawn from
//! random three-agent geometries.

use trackjam::config::ScenarioConfig;
use trackjam::control::{exhaustive_oracle, grasp_solve, interference_feasible};
use trackjam::experiment::{capped_problem, spawn_scenario};
use trackjam::sim::{stream, SOLVER_STREAM};

fn main() -> trackjam::Result<()> {
    let base = ScenarioConfig::default();
    let cap = 20_000;
    let (mut matched, mut total) = (0, 0);
    println!("seed  space  oracle     grasp      feasible");
    for seed in 1..=10 {
        let cfg = spawn_scenario(&base, seed, 20.0, 1.0)?;
        let prob = capped_problem(&cfg, cap);
        let best = exhaustive_oracle(&prob, cap)?;
        let got = grasp_solve(&prob, 2_000, 20, &mut stream(seed, SOLVER_STREAM))?;
        total += 1;
        matched += usize::from(got.objective == best.objective);
        println!(
            "{seed:>4}  {:>5}  {:.6}  {:.6}  {}",
            prob.space_size(),
            best.objective,
            got.objective,
            interference_feasible(&got.joint, &prob)
        );
    }
    println!("GRASP reached the optimum in {matched}/{total} problems");
    Ok(())
}
