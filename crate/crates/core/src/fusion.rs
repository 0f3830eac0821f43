//! Team fusion: existence averaging, covariance intersection of the
//! agents' Gaussian summaries, and re-injection of the fused estimate
//! into each particle belief.

use nalgebra::{Matrix6, Vector6};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::filter::{BernoulliBelief, Particle};
use crate::linalg::psd_factor;
use crate::models::TargetState;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianEstimate {
    pub mean: TargetState,
    pub cov: Matrix6<f64>,
}

/// What each agent broadcasts after its measurement update.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionMessage {
    pub agent_id: usize,
    pub existence: f64,
    /// Present exactly when `existence > 0.5`.
    pub estimate: Option<GaussianEstimate>,
}

/// How covariance-intersection weights are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CiWeightPolicy {
    /// Minimise the trace of the fused covariance (golden-section search).
    MinTrace,
    /// Fixed weight on the first operand of every pairwise fusion.
    Fixed(f64),
}

pub fn fuse_existence(es: &[f64]) -> Result<f64> {
    if es.is_empty() {
        return Err(Error::EmptyInput("no existence probabilities to fuse"));
    }
    Ok(es.iter().sum::<f64>() / es.len() as f64)
}

fn spd_inverse(c: &Matrix6<f64>) -> Result<Matrix6<f64>> {
    let sym = (c + c.transpose()) * 0.5;
    if let Some(ch) = sym.cholesky() {
        return Ok(ch.inverse());
    }
    (sym + Matrix6::identity() * 1e-9)
        .cholesky()
        .map(|ch| ch.inverse())
        .ok_or(Error::SingularCovariance)
}

/// Information-form convex combination with explicit weights:
/// `C^-1 = sum w_j C_j^-1`, `C^-1 x = sum w_j C_j^-1 x_j`.
pub fn covariance_intersection_weighted(estimates: &[GaussianEstimate], weights: &[f64]) -> Result<GaussianEstimate> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput("no estimates to fuse"));
    }
    let mut info = Matrix6::zeros();
    let mut info_mean = Vector6::zeros();
    for (est, &w) in estimates.iter().zip(weights) {
        let inv = spd_inverse(&est.cov)?;
        info += inv * w;
        info_mean += inv * est.mean.to_vector() * w;
    }
    let cov = spd_inverse(&info)?;
    let cov = (cov + cov.transpose()) * 0.5;
    Ok(GaussianEstimate {
        mean: TargetState::from_vector(&(cov * info_mean)),
        cov,
    })
}

fn ci_pair(a: &GaussianEstimate, b: &GaussianEstimate, policy: CiWeightPolicy) -> Result<GaussianEstimate> {
    let a_inv = spd_inverse(&a.cov)?;
    let b_inv = spd_inverse(&b.cov)?;
    let trace_at = |w: f64| -> f64 {
        spd_inverse(&(a_inv * w + b_inv * (1.0 - w)))
            .map(|c| c.trace())
            .unwrap_or(f64::INFINITY)
    };
    let w = match policy {
        CiWeightPolicy::Fixed(w) => w.clamp(0.0, 1.0),
        CiWeightPolicy::MinTrace => {
            let ratio = (5f64.sqrt() - 1.0) / 2.0;
            let (mut lo, mut hi) = (0.0, 1.0);
            let mut x1 = hi - ratio * (hi - lo);
            let mut x2 = lo + ratio * (hi - lo);
            let (mut f1, mut f2) = (trace_at(x1), trace_at(x2));
            for _ in 0..60 {
                if f1 <= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - ratio * (hi - lo);
                    f1 = trace_at(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + ratio * (hi - lo);
                    f2 = trace_at(x2);
                }
            }
            let mid = 0.5 * (lo + hi);
            // the minimum may sit on the boundary
            [(mid, trace_at(mid)), (0.0, trace_at(0.0)), (1.0, trace_at(1.0))]
                .into_iter()
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .map(|(w, _)| w)
                .unwrap_or(mid)
        }
    };
    covariance_intersection_weighted(&[a.clone(), b.clone()], &[w, 1.0 - w])
}

/// Covariance intersection of one or more estimates. More than two inputs
/// are fused pairwise, left to right in the given order.
pub fn covariance_intersection(estimates: &[GaussianEstimate], policy: CiWeightPolicy) -> Result<GaussianEstimate> {
    let (first, rest) = estimates
        .split_first()
        .ok_or(Error::EmptyInput("no estimates to fuse"))?;
    let mut acc = first.clone();
    for next in rest {
        acc = ci_pair(&acc, next, policy)?;
    }
    Ok(acc)
}

/// Overwrites the existence probability and, when a fused estimate is
/// available, replaces the `ceil(fraction * n)` lightest particles with
/// draws from it. The replacements share the mass they displaced.
pub fn inject_fused<R: Rng + ?Sized>(
    mut belief: BernoulliBelief,
    fused_e: f64,
    fused: Option<&GaussianEstimate>,
    fraction: f64,
    rng: &mut R,
) -> BernoulliBelief {
    belief.existence = fused_e;
    let Some(est) = fused else {
        return belief;
    };
    let n = belief.particles.len();
    let k = ((fraction.clamp(0.0, 1.0) * n as f64).ceil() as usize).min(n);
    if k == 0 {
        return belief;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| belief.particles[i].weight.total_cmp(&belief.particles[j].weight));
    let replaced = &order[..k];
    let mass: f64 = replaced.iter().map(|&i| belief.particles[i].weight).sum();
    let share = if mass > 0.0 { mass / k as f64 } else { 0.0 };

    let factor = psd_factor(&est.cov);
    let mean = est.mean.to_vector();
    for &i in replaced {
        let z = Vector6::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        belief.particles[i] = Particle {
            state: TargetState::from_vector(&(mean + factor * z)),
            weight: share,
        };
    }
    if mass <= 0.0 {
        // every replaced particle was weightless: nothing to share
        return belief;
    }
    belief.normalize();
    belief
}
