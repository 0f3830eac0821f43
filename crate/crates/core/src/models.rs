//! Target motion, agent mobility, the power-dependent detection model, the
//! path-loss received power model and measurement-set generation.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector6};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::geometry::{contains_offset, spherical_of, wrap_angle, Aabb, SensingCone, Spherical, Vec3};
use crate::linalg::psd_factor;

/// Position (m) and velocity (m/s) of the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub pos: Vec3,
    pub vel: Vec3,
}

impl TargetState {
    pub fn new(pos: Vec3, vel: Vec3) -> Self {
        Self { pos, vel }
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            pos: Vec3::new(a[0], a[1], a[2]),
            vel: Vec3::new(a[3], a[4], a[5]),
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.pos.x, self.pos.y, self.pos.z, self.vel.x, self.vel.y, self.vel.z]
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::from_column_slice(&self.to_array())
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            pos: Vec3::new(v[0], v[1], v[2]),
            vel: Vec3::new(v[3], v[4], v[5]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetDynamicsParams {
    pub dt: f64,
    /// Covariance of the acceleration noise, (m/s^2)^2.
    pub accel_noise_cov: Matrix3<f64>,
    pub p_birth: f64,
    pub p_survive: f64,
    pub birth_region: Aabb,
}

impl TargetDynamicsParams {
    pub fn noise_factor(&self) -> Matrix3<f64> {
        psd_factor(&self.accel_noise_cov)
    }
}

/// One step of the nearly-constant-velocity model driven by white
/// acceleration noise.
pub fn target_step<R: Rng + ?Sized>(x: &TargetState, params: &TargetDynamicsParams, rng: &mut R) -> TargetState {
    propagate(x, params.dt, &params.noise_factor(), rng)
}

/// [`target_step`] with a precomputed noise factor (`L L^T = Sigma_v`).
pub fn propagate<R: Rng + ?Sized>(x: &TargetState, dt: f64, noise_factor: &Matrix3<f64>, rng: &mut R) -> TargetState {
    let z = Vec3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    let nu = noise_factor * z;
    TargetState {
        pos: x.pos + x.vel * dt + nu * (0.5 * dt * dt),
        vel: x.vel + nu * dt,
    }
}

/// Uniform position inside `region` and Gaussian velocity with the given
/// sampling factor.
pub(crate) fn sample_birth<R: Rng + ?Sized>(region: &Aabb, vel_factor: &Matrix3<f64>, rng: &mut R) -> TargetState {
    let u = Vec3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
    let pos = region.min + (region.max - region.min).component_mul(&u);
    let z = Vec3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    TargetState { pos, vel: vel_factor * z }
}

/// Mobility action set: radial steps along a spherical lattice of
/// `n_phi` inclinations and `n_theta` azimuths.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlGrid {
    pub radial_steps: Vec<f64>,
    pub n_phi: usize,
    pub n_theta: usize,
    pub include_hover: bool,
}

impl Default for ControlGrid {
    fn default() -> Self {
        Self {
            radial_steps: vec![1.0, 3.0, 5.0],
            n_phi: 8,
            n_theta: 8,
            include_hover: true,
        }
    }
}

impl ControlGrid {
    /// Number of distinct displacements the grid generates.
    pub fn len(&self) -> usize {
        admissible_controls(&Vec3::zeros(), self).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// All positions reachable from `u` in one step. The two poles of every
/// radial shell are emitted once, and the hover action (zero displacement)
/// comes last when enabled.
pub fn admissible_controls(u: &Vec3, grid: &ControlGrid) -> Vec<Vec3> {
    let d_phi = PI / grid.n_phi as f64;
    let d_theta = 2.0 * PI / grid.n_theta as f64;
    let mut out: Vec<Vec3> = Vec::new();
    let push = |p: Vec3, out: &mut Vec<Vec3>| {
        if !out.iter().any(|q| (q - p).norm() <= 1e-9) {
            out.push(p);
        }
    };
    for &r in &grid.radial_steps {
        for l2 in 0..=grid.n_phi {
            if l2 == 0 {
                push(u + Vec3::new(0.0, 0.0, r), &mut out);
                continue;
            }
            if l2 == grid.n_phi {
                push(u + Vec3::new(0.0, 0.0, -r), &mut out);
                continue;
            }
            let (sp, cp) = (l2 as f64 * d_phi).sin_cos();
            for l3 in 1..=grid.n_theta {
                let (st, ct) = (l3 as f64 * d_theta).sin_cos();
                push(u + Vec3::new(r * sp * ct, r * sp * st, r * cp), &mut out);
            }
        }
    }
    if grid.include_hover {
        push(*u, &mut out);
    }
    out
}

/// Transmit power level: off, or a level in dBW (relative to 1 W).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerLevel {
    Off,
    Dbw(f64),
}

impl PowerLevel {
    pub fn linear(&self) -> f64 {
        match *self {
            PowerLevel::Off => 0.0,
            PowerLevel::Dbw(db) => db_to_linear(db),
        }
    }

    pub fn is_off(&self) -> bool {
        matches!(self, PowerLevel::Off)
    }
}

impl std::fmt::Display for PowerLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PowerLevel::Off => f.write_str("OFF"),
            PowerLevel::Dbw(db) => write!(f, "{db}"),
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `10 log10(w)`; zero watts maps to negative infinity.
pub fn linear_to_db(w: f64) -> f64 {
    if w <= 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * w.log10()
    }
}

/// How the `level / l_max` factor of the detection model is formed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectionRatioDomain {
    /// Ratio of linear watts.
    Linear,
    /// `(dB - floor) / (l_max dB - floor)`, clamped to `[0, 1]`.
    NormalizedDb { floor_dbw: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensingParams {
    pub p_d_max: f64,
    /// Reference range R_0 (m) inside which no path loss applies.
    pub r0: f64,
    pub path_loss_exp: f64,
    pub cone_height: f64,
    /// Full opening angle of the sensing cone (rad).
    pub cone_angle: f64,
    /// Diagonal of the measurement noise covariance: m^2, rad^2, rad^2.
    pub meas_noise_var: Vec3,
    pub clutter_rate: f64,
    /// Largest admissible transmit level.
    pub l_max: PowerLevel,
    pub ratio_domain: DetectionRatioDomain,
}

impl SensingParams {
    pub fn cone(&self, apex: Vec3, axis: Vec3) -> crate::Result<SensingCone> {
        SensingCone::new(apex, axis, self.cone_height, self.cone_angle)
    }

    /// Upper range bound of the clutter measurement space: the slant range
    /// of the sensing cone.
    pub fn rho_max(&self) -> f64 {
        self.cone_height / (self.cone_angle / 2.0).cos()
    }

    /// Uniform clutter density over `[0, rho_max] x (-pi, pi] x [0, pi]`.
    pub fn clutter_density(&self) -> f64 {
        1.0 / (self.rho_max() * 2.0 * PI * PI)
    }

    /// The `l / l_max` factor of the detection model.
    pub fn level_ratio(&self, level: PowerLevel) -> f64 {
        match (level, self.ratio_domain) {
            (PowerLevel::Off, _) => 0.0,
            (PowerLevel::Dbw(_), DetectionRatioDomain::Linear) => {
                let max = self.l_max.linear();
                if max > 0.0 {
                    level.linear() / max
                } else {
                    0.0
                }
            }
            (PowerLevel::Dbw(db), DetectionRatioDomain::NormalizedDb { floor_dbw }) => {
                let max_db = match self.l_max {
                    PowerLevel::Dbw(m) => m,
                    PowerLevel::Off => return 0.0,
                };
                if max_db <= floor_dbw {
                    return 0.0;
                }
                ((db - floor_dbw) / (max_db - floor_dbw)).clamp(0.0, 1.0)
            }
        }
    }

    /// Path-loss attenuation at range `eta`.
    #[inline]
    pub fn path_factor(&self, eta: f64) -> f64 {
        if eta < self.r0 {
            1.0
        } else if self.path_loss_exp == 2.0 {
            let q = self.r0 / eta;
            q * q
        } else {
            (self.r0 / eta).powf(self.path_loss_exp)
        }
    }

    /// Detection probability for an apex-relative offset, given the level
    /// ratio and `cos(opening / 2)`.
    #[inline]
    pub(crate) fn detection_at(&self, d: &Vec3, axis: &Vec3, ratio: f64, cos_half: f64) -> f64 {
        if ratio <= 0.0 || !contains_offset(d, axis, self.cone_height, cos_half) {
            return 0.0;
        }
        (ratio * self.p_d_max * self.path_factor(d.norm())).clamp(0.0, self.p_d_max)
    }

    /// Received power for an apex-relative offset.
    #[cfg(test)]
    pub(crate) fn power_at(&self, d: &Vec3, axis: &Vec3, linear_w: f64, cos_half: f64) -> f64 {
        if linear_w <= 0.0 || !contains_offset(d, axis, self.cone_height, cos_half) {
            return 0.0;
        }
        linear_w * self.path_factor(d.norm())
    }

    pub(crate) fn cos_half(&self) -> f64 {
        (self.cone_angle / 2.0).cos()
    }
}

/// Probability that an agent at `agent` transmitting at `level` through
/// `cone` detects a target at `target`.
pub fn detection_prob(target: &Vec3, agent: &Vec3, level: PowerLevel, cone: &SensingCone, s: &SensingParams) -> f64 {
    let ratio = s.level_ratio(level);
    if ratio <= 0.0 || !cone.contains(target) {
        return 0.0;
    }
    let eta = (target - agent).norm();
    (ratio * s.p_d_max * s.path_factor(eta)).clamp(0.0, s.p_d_max)
}

/// Power (W) received at `point` from an agent transmitting at `level`.
pub fn received_power(point: &Vec3, agent: &Vec3, level: PowerLevel, cone: &SensingCone, s: &SensingParams) -> f64 {
    let lin = level.linear();
    if lin <= 0.0 || !cone.contains(point) {
        return 0.0;
    }
    lin * s.path_factor((point - agent).norm())
}

pub type Measurement = Spherical;

/// Draws one scan: the target return (with probability
/// [`detection_prob`]) plus Poisson clutter uniform over the measurement
/// space.
pub fn generate_measurements<R: Rng + ?Sized>(
    target: Option<&TargetState>,
    agent: &Vec3,
    level: PowerLevel,
    cone: &SensingCone,
    s: &SensingParams,
    rng: &mut R,
) -> Vec<Measurement> {
    let mut out = Vec::new();
    if let Some(x) = target {
        let pd = detection_prob(&x.pos, agent, level, cone, s);
        let u: f64 = rng.random();
        if u < pd {
            let h = spherical_of(&(x.pos - agent));
            let mut noise = [0.0; 3];
            for (k, n) in noise.iter_mut().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                *n = z * s.meas_noise_var[k].max(0.0).sqrt();
            }
            out.push(Measurement {
                rho: (h.rho + noise[0]).max(0.0),
                theta: wrap_angle(h.theta + noise[1]),
                phi: reflect_inclination(h.phi + noise[2]),
            });
        }
    }
    if s.clutter_rate > 0.0 {
        let count = Poisson::new(s.clutter_rate).map(|p| p.sample(rng) as usize).unwrap_or(0);
        let rho_max = s.rho_max();
        for _ in 0..count {
            let rho = rng.random::<f64>() * rho_max;
            let theta = PI - rng.random::<f64>() * 2.0 * PI;
            let phi = rng.random::<f64>() * PI;
            out.push(Measurement { rho, theta, phi });
        }
    }
    out
}

/// Folds a perturbed inclination back into `[0, pi]`.
fn reflect_inclination(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        2.0 * PI - w
    } else {
        w
    }
}
