//! Vector algebra, spherical measurement coordinates and conic sensing
//! volumes.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Range / azimuth / inclination of a point relative to an observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spherical {
    pub rho: f64,
    pub theta: f64,
    pub phi: f64,
}

impl Spherical {
    pub fn to_cartesian(&self) -> Vec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vec3::new(self.rho * sp * ct, self.rho * sp * st, self.rho * cp)
    }
}

/// Axis-aligned box, used for the surveillance volume and the birth region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }

    pub fn clamp(&self, p: &Vec3) -> Vec3 {
        Vec3::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
            p.z.clamp(self.min.z, self.max.z),
        )
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn volume(&self) -> f64 {
        let d = self.max - self.min;
        d.x * d.y * d.z
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    // rem_euclid maps -pi to pi already; this catches the -0.0 / 2pi edge
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Range, azimuth and inclination of `target_pos` as seen from `agent_pos`.
///
/// Azimuth is `atan2(dy, dx)` in `(-pi, pi]`; inclination is measured from
/// the +z axis, `atan2(hypot(dx, dy), dz)` in `[0, pi]`.
pub fn measurement_fn(target_pos: &Vec3, agent_pos: &Vec3) -> Result<Spherical> {
    let d = target_pos - agent_pos;
    let rho = d.norm();
    if rho == 0.0 {
        return Err(Error::DegenerateGeometry("target and agent coincide"));
    }
    Ok(spherical_of(&d))
}

/// Same as [`measurement_fn`] on a displacement, without the coincidence
/// check (zero displacement maps to all zeros).
pub(crate) fn spherical_of(d: &Vec3) -> Spherical {
    let rho = d.norm();
    let mut theta = d.y.atan2(d.x);
    if theta == -PI {
        theta = PI;
    }
    let phi = d.x.hypot(d.y).atan2(d.z);
    Spherical { rho, theta, phi }
}

/// Unit vector pointing from `agent_pos` towards `aim_point`.
pub fn aim_axis(agent_pos: &Vec3, aim_point: &Vec3) -> Result<Vec3> {
    let d = aim_point - agent_pos;
    let n = d.norm();
    if n < 1e-12 {
        return Err(Error::DegenerateGeometry("aim point coincides with agent"));
    }
    Ok(d / n)
}

/// Right circular cone with its apex at the agent and its base plane
/// `height` metres along `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingCone {
    pub apex: Vec3,
    pub axis: Vec3,
    pub height: f64,
    pub opening_angle: f64,
    cos_half: f64,
}

impl SensingCone {
    /// `axis` is normalised here; a zero axis is rejected.
    pub fn new(apex: Vec3, axis: Vec3, height: f64, opening_angle: f64) -> Result<Self> {
        let n = axis.norm();
        if n < 1e-12 || !n.is_finite() {
            return Err(Error::DegenerateGeometry("cone axis has zero length"));
        }
        if !(height > 0.0) || !(opening_angle > 0.0 && opening_angle < PI) {
            return Err(Error::DegenerateGeometry("cone height or opening angle out of range"));
        }
        Ok(Self {
            apex,
            axis: axis / n,
            height,
            opening_angle,
            cos_half: (opening_angle / 2.0).cos(),
        })
    }

    /// Radius of the base disc, `tan(theta/2) * h`.
    pub fn base_radius(&self) -> f64 {
        (self.opening_angle / 2.0).tan() * self.height
    }

    /// Largest distance from the apex to any point of the cone.
    pub fn slant_range(&self) -> f64 {
        self.height / self.cos_half
    }

    pub fn contains(&self, point: &Vec3) -> bool {
        contains_offset(&(point - self.apex), &self.axis, self.height, self.cos_half)
    }
}

pub fn cone_contains(cone: &SensingCone, point: &Vec3) -> bool {
    cone.contains(point)
}

/// Containment test on an apex-relative offset with a precomputed
/// `cos(opening/2)`. Hot path for planning and filtering.
#[inline]
pub(crate) fn contains_offset(d: &Vec3, axis: &Vec3, height: f64, cos_half: f64) -> bool {
    let a = d.dot(axis);
    if a < 0.0 || a > height {
        return false;
    }
    let n2 = d.norm_squared();
    if n2 == 0.0 {
        return true;
    }
    a * a >= n2 * cos_half * cos_half
}
