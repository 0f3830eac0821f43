//! Covariance intersection of two estimates that are each precise along a
//! different axis, and the fused existence of three agents.

use trackjam::fusion::{covariance_intersection, covariance_intersection_weighted, fuse_existence, CiWeightPolicy, GaussianEstimate};
use trackjam::geometry::Vec3;
use trackjam::models::TargetState;

fn estimate(x: f64, var: [f64; 6]) -> GaussianEstimate {
    let mut cov = nalgebra::Matrix6::zeros();
    for (k, v) in var.into_iter().enumerate() {
        cov[(k, k)] = v;
    }
    GaussianEstimate { mean: TargetState::new(Vec3::new(x, 0.0, 0.0), Vec3::zeros()), cov }
}

fn main() -> trackjam::Result<()> {
    let a = estimate(0.0, [1.0, 9.0, 4.0, 1.0, 1.0, 1.0]);
    let b = estimate(2.0, [9.0, 1.0, 4.0, 1.0, 1.0, 1.0]);

    for w in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let f = covariance_intersection_weighted(&[a.clone(), b.clone()], &[w, 1.0 - w])?;
        println!("omega {w:.2}: x = {:.3}, trace(C) = {:.3}", f.mean.pos.x, f.cov.trace());
    }
    let best = covariance_intersection(&[a, b], CiWeightPolicy::MinTrace)?;
    println!("min-trace: x = {:.3}, trace(C) = {:.3}", best.mean.pos.x, best.cov.trace());
    println!("fused existence of [0.9, 0.6, 0.3]: {}", fuse_existence(&[0.9, 0.6, 0.3])?);
    Ok(())
}
