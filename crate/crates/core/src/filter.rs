//! Bernoulli particle filter: one target that may or may not exist,
//! represented by an existence probability and a weighted particle cloud.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix6, Vector6};
use rand::Rng;

use crate::geometry::{spherical_of, wrap_angle, Aabb, SensingCone, Vec3};
use crate::linalg::is_psd;
use crate::models::{propagate, sample_birth, Measurement, PowerLevel, SensingParams, TargetDynamicsParams, TargetState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub state: TargetState,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliBelief {
    pub existence: f64,
    pub particles: Vec<Particle>,
}

impl BernoulliBelief {
    /// Belief that the target certainly does not exist.
    pub fn null() -> Self {
        Self {
            existence: 0.0,
            particles: Vec::new(),
        }
    }

    /// `n` particles uniform over `region` with Gaussian velocities.
    pub fn uniform<R: Rng + ?Sized>(existence: f64, n: usize, region: &Aabb, velocity_std: f64, rng: &mut R) -> Self {
        let factor = Matrix3::identity() * velocity_std;
        let w = 1.0 / n as f64;
        let particles = (0..n)
            .map(|_| Particle {
                state: sample_birth(region, &factor, rng),
                weight: w,
            })
            .collect();
        Self { existence, particles }
    }

    /// `n` particles drawn around a cued state.
    pub fn around<R: Rng + ?Sized>(
        existence: f64,
        n: usize,
        center: &TargetState,
        position_std: f64,
        velocity_std: f64,
        rng: &mut R,
    ) -> Self {
        let w = 1.0 / n as f64;
        let particles = (0..n)
            .map(|_| {
                let mut s = [0.0; 6];
                for (k, v) in s.iter_mut().enumerate() {
                    let std = if k < 3 { position_std } else { velocity_std };
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    *v = center.to_array()[k] + std * z;
                }
                Particle {
                    state: TargetState::from_array(s),
                    weight: w,
                }
            })
            .collect();
        Self { existence, particles }
    }

    pub fn weight_sum(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    pub fn effective_sample_size(&self) -> f64 {
        let s2: f64 = self.particles.iter().map(|p| p.weight * p.weight).sum();
        if s2 > 0.0 {
            1.0 / s2
        } else {
            0.0
        }
    }

    pub(crate) fn normalize(&mut self) {
        let total = self.weight_sum();
        if total > 0.0 && total.is_finite() {
            for p in &mut self.particles {
                p.weight /= total;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterParams {
    pub n_particles: usize,
    pub n_birth_particles: usize,
    /// Resample when the effective sample size drops below this fraction
    /// of the particle count.
    pub resample_threshold: f64,
    pub dynamics: TargetDynamicsParams,
    pub sensing: SensingParams,
    /// Support of the uniform birth density.
    pub surveillance_box: Aabb,
    /// Standard deviation of birth-particle velocities per axis (m/s).
    pub birth_velocity_std: f64,
    /// Lower bound on the clutter rate used inside likelihood ratios.
    pub clutter_floor: f64,
}

/// Bernoulli prediction: existence `p_b (1 - e) + p_s e`, surviving
/// particles propagated through the motion model and a fresh batch of
/// birth particles carrying the birth mass.
pub fn predict<R: Rng + ?Sized>(b: &BernoulliBelief, p: &FilterParams, rng: &mut R) -> BernoulliBelief {
    let dyn_ = &p.dynamics;
    let e = b.existence;
    let e_pred = dyn_.p_birth * (1.0 - e) + dyn_.p_survive * e;
    if e_pred <= 0.0 {
        return BernoulliBelief::null();
    }
    let survive_mass = dyn_.p_survive * e / e_pred;
    let birth_mass = dyn_.p_birth * (1.0 - e) / e_pred;

    let noise = dyn_.noise_factor();
    let mut particles = Vec::with_capacity(b.particles.len() + p.n_birth_particles);
    if survive_mass > 0.0 {
        for q in &b.particles {
            particles.push(Particle {
                state: propagate(&q.state, dyn_.dt, &noise, rng),
                weight: q.weight * survive_mass,
            });
        }
    }
    if birth_mass > 0.0 && p.n_birth_particles > 0 {
        let vel = Matrix3::identity() * p.birth_velocity_std;
        let w = birth_mass / p.n_birth_particles as f64;
        for _ in 0..p.n_birth_particles {
            particles.push(Particle {
                state: sample_birth(&p.surveillance_box, &vel, rng),
                weight: w,
            });
        }
    }
    let mut out = BernoulliBelief {
        existence: e_pred,
        particles,
    };
    out.normalize();
    out
}

/// Gaussian measurement likelihood `N(y; h(x, u), Sigma_w)` with the
/// azimuth residual wrapped.
pub(crate) struct Likelihood {
    inv_var: Vec3,
    norm: f64,
}

impl Likelihood {
    pub(crate) fn new(s: &SensingParams) -> Self {
        let var = s.meas_noise_var.map(|v| v.max(1e-12));
        let det = var.x * var.y * var.z;
        Self {
            inv_var: var.map(|v| 1.0 / v),
            norm: 1.0 / ((2.0 * PI).powf(1.5) * det.sqrt()),
        }
    }

    #[inline]
    pub(crate) fn density(&self, y: &Measurement, h: &Measurement) -> f64 {
        let dr = y.rho - h.rho;
        let dt = wrap_angle(y.theta - h.theta);
        let dp = y.phi - h.phi;
        let m = dr * dr * self.inv_var.x + dt * dt * self.inv_var.y + dp * dp * self.inv_var.z;
        self.norm * (-0.5 * m).exp()
    }
}

/// Bernoulli measurement update against the scan `ys` collected by an
/// agent at `agent` transmitting at `level` through `cone`.
pub fn update<R: Rng + ?Sized>(
    b_pred: &BernoulliBelief,
    ys: &[Measurement],
    agent: &Vec3,
    level: PowerLevel,
    cone: &SensingCone,
    p: &FilterParams,
    rng: &mut R,
) -> BernoulliBelief {
    let e_pred = b_pred.existence;
    if e_pred <= 0.0 {
        return BernoulliBelief {
            existence: 0.0,
            particles: b_pred.particles.clone(),
        };
    }
    let s = &p.sensing;
    let ratio = s.level_ratio(level);
    let cos_half = s.cos_half();
    let lik = Likelihood::new(s);
    let clutter = p.clutter_floor.max(s.clutter_rate) * s.clutter_density();

    let mut integral_pd = 0.0;
    let mut integral_meas = 0.0;
    let mut new_weights = Vec::with_capacity(b_pred.particles.len());
    for q in &b_pred.particles {
        let d = q.state.pos - agent;
        let pd = s.detection_at(&d, &cone.axis, ratio, cos_half);
        let mut lr = 0.0;
        if pd > 0.0 && !ys.is_empty() {
            let h = spherical_of(&d);
            lr = ys.iter().map(|y| lik.density(y, &h)).sum::<f64>() / clutter;
        }
        integral_pd += q.weight * pd;
        integral_meas += q.weight * pd * lr;
        new_weights.push(q.weight * ((1.0 - pd) + pd * lr));
    }

    let q_t = (integral_pd - integral_meas).min(1.0 - 1e-12);
    let existence = ((1.0 - q_t) * e_pred / (1.0 - e_pred * q_t)).clamp(0.0, 1.0);

    let mut out = BernoulliBelief {
        existence,
        particles: b_pred.particles.clone(),
    };
    let total: f64 = new_weights.iter().sum();
    if total > 0.0 && total.is_finite() {
        for (q, w) in out.particles.iter_mut().zip(new_weights) {
            q.weight = w / total;
        }
    }

    let n = out.particles.len();
    if n > p.n_particles || out.effective_sample_size() < p.resample_threshold * n as f64 {
        out.particles = resample_systematic_to(&out.particles, p.n_particles, rng);
    }
    out
}

/// Weighted mean and covariance of the spatial density, available only
/// when the target is more likely present than not.
pub fn point_estimate(b: &BernoulliBelief) -> Option<(TargetState, Matrix6<f64>)> {
    if b.existence <= 0.5 || b.particles.is_empty() {
        return None;
    }
    let total = b.weight_sum();
    if !(total > 0.0) {
        return None;
    }
    let mut mean = Vector6::zeros();
    for q in &b.particles {
        mean += q.state.to_vector() * (q.weight / total);
    }
    let mut cov = Matrix6::zeros();
    for q in &b.particles {
        let d = q.state.to_vector() - mean;
        cov += d * d.transpose() * (q.weight / total);
    }
    cov = (cov + cov.transpose()) * 0.5;
    if cov.cholesky().is_none() || !is_psd(&cov) {
        cov += Matrix6::identity() * 1e-9;
    }
    Some((TargetState::from_vector(&mean), cov))
}

/// Systematic resampling to the same number of particles.
pub fn resample_systematic<R: Rng + ?Sized>(particles: &[Particle], rng: &mut R) -> Vec<Particle> {
    resample_systematic_to(particles, particles.len(), rng)
}

/// Systematic resampling to `n` equally weighted particles.
pub fn resample_systematic_to<R: Rng + ?Sized>(particles: &[Particle], n: usize, rng: &mut R) -> Vec<Particle> {
    if particles.is_empty() || n == 0 {
        return Vec::new();
    }
    let total: f64 = particles.iter().map(|p| p.weight).sum();
    let step = total / n as f64;
    let mut u = rng.random::<f64>() * step;
    let w = 1.0 / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut cum = particles[0].weight;
    let mut i = 0;
    for _ in 0..n {
        while u > cum && i + 1 < particles.len() {
            i += 1;
            cum += particles[i].weight;
        }
        out.push(Particle {
            state: particles[i].state,
            weight: w,
        });
        u += step;
    }
    out
}
