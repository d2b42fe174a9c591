//! On-axis field of an axially magnetized cuboid permanent magnet.
//!
//! The magnet is modelled as two uniformly charged pole faces with surface
//! charge density `Br/μ0`. The north face sits at `z = +zm/2`, the south face
//! at `z = -zm/2`, and the origin is the magnet center. [`hz_quadrature`]
//! integrates the face kernels numerically; [`hz_closed_form`] evaluates the
//! arctangent solution and serves as its oracle.

use crate::error::{ensure_finite, Error, Result};
use crate::quadrature::GaussLegendre;
use crate::MU0;
use std::f64::consts::PI;

pub const DEFAULT_ORDER: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuboidMagnet {
    pub xm: f64,
    pub ym: f64,
    pub zm: f64,
    /// Remanent flux density, T.
    pub br: f64,
}

impl CuboidMagnet {
    pub fn new(xm: f64, ym: f64, zm: f64, br: f64) -> Result<Self> {
        for (name, v) in [("xm", xm), ("ym", ym), ("zm", zm), ("br", br)] {
            ensure_finite(name, v)?;
        }
        if xm <= 0.0 || ym <= 0.0 || zm <= 0.0 {
            return Err(Error::Argument(format!(
                "magnet side lengths must be positive, got {xm} × {ym} × {zm} m"
            )));
        }
        if br < 0.0 {
            return Err(Error::Argument(format!("remanence must be non-negative, got {br} T")));
        }
        Ok(CuboidMagnet { xm, ym, zm, br })
    }

    pub fn cube(side: f64, br: f64) -> Result<Self> {
        Self::new(side, side, side, br)
    }

    pub fn with_br(self, br: f64) -> Self {
        CuboidMagnet { br, ..self }
    }

    pub fn volume(&self) -> f64 {
        self.xm * self.ym * self.zm
    }
}

/// Evaluation point with the origin at the magnet center and `z` along the
/// magnetization axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxialPoint {
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
}

impl AxialPoint {
    pub fn on_axis(z0: f64) -> Self {
        AxialPoint { x0: 0.0, y0: 0.0, z0 }
    }

    /// Point on the axis `distance` in front of the north pole face.
    pub fn from_pole_face(magnet: &CuboidMagnet, distance: f64) -> Self {
        Self::on_axis(magnet.zm / 2.0 + distance)
    }
}

/// Paired field strength and flux density. Construct through [`FieldValue::from_h`]
/// or [`FieldValue::from_b`] so `b = μ0·h` always holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValue {
    h: f64,
    b: f64,
}

impl FieldValue {
    pub fn from_h(h: f64) -> Self {
        FieldValue { h, b: MU0 * h }
    }

    pub fn from_b(b: f64) -> Self {
        FieldValue { h: b / MU0, b }
    }

    /// A/m.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// T.
    pub fn b(&self) -> f64 {
        self.b
    }
}

/// `H_z` at `point` from tensor-product Gauss–Legendre quadrature over both
/// pole faces, `order` nodes per axis.
pub fn hz_quadrature(magnet: &CuboidMagnet, point: AxialPoint, order: usize) -> Result<FieldValue> {
    let kernel = quadrature_kernel(magnet, point, order)?;
    Ok(FieldValue::from_h(magnet.br / (4.0 * PI * MU0) * kernel))
}

/// Geometric part of the face integral: `H_z = Br/(4π μ0) · kernel`.
fn quadrature_kernel(magnet: &CuboidMagnet, point: AxialPoint, order: usize) -> Result<f64> {
    for (name, v) in [("x0", point.x0), ("y0", point.y0), ("z0", point.z0)] {
        ensure_finite(name, v)?;
    }
    if order < 4 {
        return Err(Error::Argument(format!("quadrature order must be ≥ 4, got {order}")));
    }
    let (hx, hy, hz) = (magnet.xm / 2.0, magnet.ym / 2.0, magnet.zm / 2.0);
    let inside = point.x0.abs() <= hx && point.y0.abs() <= hy && point.z0.abs() <= hz;
    if inside {
        return Err(Error::Domain(format!(
            "point ({}, {}, {}) m lies inside the magnet body",
            point.x0, point.y0, point.z0
        )));
    }
    if point.z0 <= hz {
        return Err(Error::Domain(format!(
            "axial evaluation requires z0 > zm/2 = {hz} m, got {}",
            point.z0
        )));
    }

    let rule = GaussLegendre::new(order);
    let dz_n = point.z0 - hz;
    let dz_s = point.z0 + hz;
    let kernel = rule.integrate_rect((-hx, hx), (-hy, hy), |x, y| {
        let dx = point.x0 - x;
        let dy = point.y0 - y;
        let rho2 = dx * dx + dy * dy;
        let r_n = (rho2 + dz_n * dz_n).sqrt();
        let r_s = (rho2 + dz_s * dz_s).sqrt();
        dz_n / (r_n * r_n * r_n) - dz_s / (r_s * r_s * r_s)
    });
    Ok(kernel)
}

/// Exact on-axis field `z` in front of the north pole face.
pub fn hz_closed_form(magnet: &CuboidMagnet, z: f64) -> Result<FieldValue> {
    ensure_finite("z", z)?;
    if z <= 0.0 {
        return Err(Error::Domain(format!(
            "distance from the pole face must be positive, got {z} m"
        )));
    }
    let b = magnet.br / PI * closed_form_kernel(magnet, z);
    Ok(FieldValue::from_b(b))
}

fn closed_form_kernel(magnet: &CuboidMagnet, z: f64) -> f64 {
    let (a, b) = (magnet.xm / 2.0, magnet.ym / 2.0);
    let face = |d: f64| (a * b / (d * (a * a + b * b + d * d).sqrt())).atan();
    face(z) - face(z + magnet.zm)
}

/// Remanence that makes [`hz_quadrature`] (default order) reproduce
/// `measured_b` on axis at `distance` from the north pole face.
///
/// The field is linear in `Br`, so this is a single division by the field of
/// a unit-remanence magnet.
pub fn calibrate_remanence(magnet: &CuboidMagnet, distance: f64, measured_b: f64) -> Result<f64> {
    calibrate_remanence_with_order(magnet, distance, measured_b, DEFAULT_ORDER)
}

pub fn calibrate_remanence_with_order(
    magnet: &CuboidMagnet,
    distance: f64,
    measured_b: f64,
    order: usize,
) -> Result<f64> {
    ensure_finite("distance", distance)?;
    ensure_finite("measured_b", measured_b)?;
    if distance <= 0.0 {
        return Err(Error::Domain(format!("distance must be positive, got {distance} m")));
    }
    if measured_b <= 0.0 {
        return Err(Error::Domain(format!(
            "measured flux density must be positive, got {measured_b} T"
        )));
    }
    let unit = magnet.with_br(1.0);
    let b_unit = hz_quadrature(&unit, AxialPoint::from_pole_face(&unit, distance), order)?.b();
    if !(b_unit > 0.0) || !b_unit.is_finite() {
        return Err(Error::Domain(format!(
            "geometric kernel vanishes for magnet {} × {} × {} m",
            magnet.xm, magnet.ym, magnet.zm
        )));
    }
    Ok(measured_b / b_unit)
}

/// Uniform field of magnitude `magnitude` (T) at angle `angle` (rad) from the
/// undeformed rod axis, as an in-plane vector.
pub fn uniform_field(magnitude: f64, angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [magnitude * c, magnitude * s]
}
