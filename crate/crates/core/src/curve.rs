//! Scalar descriptors of planar rod centerlines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rod::Equilibrium;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveSource {
    Simulation,
    Image,
    Synthetic,
}

/// Ordered planar points in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve2D {
    pub points: Vec<[f64; 2]>,
    pub source: CurveSource,
}

impl Curve2D {
    pub fn new(points: Vec<[f64; 2]>, source: CurveSource) -> Self {
        Curve2D { points, source }
    }

    pub fn from_equilibrium(eq: &Equilibrium) -> Self {
        Curve2D::new(eq.centerline.clone(), CurveSource::Simulation)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Translates the first point to the origin.
    pub fn translated_to_origin(&self) -> Curve2D {
        let [x0, y0] = self.points.first().copied().unwrap_or([0.0, 0.0]);
        Curve2D::new(
            self.points.iter().map(|p| [p[0] - x0, p[1] - y0]).collect(),
            self.source,
        )
    }

    /// Translates the root to the origin and rotates by `-base_tangent` so the
    /// clamp direction lies along +x.
    pub fn root_aligned(&self, base_tangent: f64) -> Curve2D {
        let (s, c) = (-base_tangent).sin_cos();
        let t = self.translated_to_origin();
        Curve2D::new(
            t.points
                .iter()
                .map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]])
                .collect(),
            self.source,
        )
    }

    pub fn scaled(&self, factor: f64) -> Curve2D {
        Curve2D::new(
            self.points.iter().map(|p| [p[0] * factor, p[1] * factor]).collect(),
            self.source,
        )
    }

    /// Checks the fit preconditions: at least three points and x strictly
    /// increasing once the root sits at the origin.
    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 3 {
            return Err(Error::Argument(format!(
                "curve needs at least 3 points, got {}",
                self.points.len()
            )));
        }
        if self.points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Argument("curve contains non-finite coordinates".to_string()));
        }
        if let Some(i) = (1..self.points.len()).find(|&i| self.points[i][0] <= self.points[i - 1][0]) {
            return Err(Error::Argument(format!(
                "curve x must be strictly increasing; point {i} has x = {} after {}",
                self.points[i][0],
                self.points[i - 1][0]
            )));
        }
        Ok(())
    }
}

/// One-parameter trajectory `y = a·x²` through the root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    /// 1/m (or the reciprocal of whatever unit the curve used).
    pub a: f64,
    pub rms_residual: f64,
    pub n_points: usize,
}

/// Least-squares `a` minimising `Σ (y − a x²)²` after moving the first point
/// to the origin: `a = Σ x² y / Σ x⁴`.
pub fn fit_quadratic(curve: &Curve2D) -> Result<QuadraticFit> {
    let c = curve.translated_to_origin();
    c.validate()?;
    let (sx2y, sx4) = c.points.iter().fold((0.0, 0.0), |(a, b), p| {
        let x2 = p[0] * p[0];
        (a + x2 * p[1], b + x2 * x2)
    });
    if !(sx4 > 0.0) {
        return Err(Error::DegenerateFit("all x coordinates are zero".to_string()));
    }
    let a = sx2y / sx4;
    let sse: f64 = c
        .points
        .iter()
        .map(|p| {
            let r = p[1] - a * p[0] * p[0];
            r * r
        })
        .sum();
    Ok(QuadraticFit {
        a,
        rms_residual: (sse / c.len() as f64).sqrt(),
        n_points: c.len(),
    })
}

/// Radius of the algebraic (Kåsa) least-squares circle. Collinear input gives
/// `f64::INFINITY`.
pub fn bending_radius(curve: &Curve2D) -> Result<f64> {
    let n = curve.points.len();
    if n < 3 {
        return Err(Error::Argument(format!("circle fit needs at least 3 points, got {n}")));
    }
    // Centre the data for conditioning.
    let (mx, my) = curve.points.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
    let (mx, my) = (mx / n as f64, my / n as f64);
    let scale = curve
        .points
        .iter()
        .map(|p| (p[0] - mx).hypot(p[1] - my))
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Ok(f64::INFINITY);
    }

    // Minimise Σ (u² + v² + D u + E v + F)² over (D, E, F) with u, v scaled.
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for p in &curve.points {
        let u = (p[0] - mx) / scale;
        let v = (p[1] - my) / scale;
        let row = [u, v, 1.0];
        let rhs = -(u * u + v * v);
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * rhs;
        }
    }
    let Some([d, e, f]) = solve3(ata, atb) else {
        return Ok(f64::INFINITY);
    };
    let r2 = (d * d + e * e) / 4.0 - f;
    let radius = r2.max(0.0).sqrt() * scale;
    if !radius.is_finite() || radius > 1e8 * scale {
        return Ok(f64::INFINITY);
    }
    Ok(radius)
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let norm = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * norm {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Hinge curvatures `κ_j = (θ_j − θ_{j−1}) / ℓ`, starting with the clamp hinge
/// `(θ_0 − θ_base) / ℓ`. One entry per segment, 1/m.
pub fn curvature_profile(eq: &Equilibrium) -> Result<Vec<f64>> {
    if eq.joint_angles.is_empty() || !(eq.segment_length > 0.0) {
        return Err(Error::Argument("equilibrium has no segments".to_string()));
    }
    let inv_l = 1.0 / eq.segment_length;
    let mut prev = eq.base_angle;
    Ok(eq
        .joint_angles
        .iter()
        .map(|&t| {
            let k = (t - prev) * inv_l;
            prev = t;
            k
        })
        .collect())
}

/// Turning-angle curvature of a polyline: one entry per chord, the first
/// measured against `base_tangent` (rad). Each turn is divided by the mean of
/// the two chord lengths, so a solved centerline reproduces
/// [`curvature_profile`] exactly. 1/m for curves in metres.
pub fn polyline_curvature(curve: &Curve2D, base_tangent: f64) -> Result<Vec<f64>> {
    if curve.points.len() < 2 || curve.points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Argument("polyline needs at least 2 finite points".to_string()));
    }
    let chords: Vec<[f64; 2]> = curve
        .points
        .windows(2)
        .map(|w| [w[1][0] - w[0][0], w[1][1] - w[0][1]])
        .collect();
    let mut prev = [base_tangent.cos(), base_tangent.sin()];
    let mut prev_len = None;
    let mut out = Vec::with_capacity(chords.len());
    for c in chords {
        let len = c[0].hypot(c[1]);
        if len == 0.0 {
            return Err(Error::DegenerateFit("polyline has repeated points".to_string()));
        }
        let turn = (prev[0] * c[1] - prev[1] * c[0]).atan2(prev[0] * c[0] + prev[1] * c[1]);
        let span = prev_len.map_or(len, |p: f64| 0.5 * (p + len));
        out.push(turn / span);
        prev = c;
        prev_len = Some(len);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic(points: Vec<[f64; 2]>) -> Curve2D {
        Curve2D::new(points, CurveSource::Synthetic)
    }

    #[test]
    fn exact_quadratic() {
        let fit = fit_quadratic(&synthetic(vec![[0.0, 0.0], [1.0, 2.0], [2.0, 8.0]])).unwrap();
        assert_eq!(fit.a, 2.0);
        assert_eq!(fit.rms_residual, 0.0);
        assert_eq!(fit.n_points, 3);
    }

    #[test]
    fn straight_line_fits_zero() {
        let pts = (0..10).map(|i| [i as f64, 0.0]).collect();
        let fit = fit_quadratic(&synthetic(pts)).unwrap();
        assert_eq!(fit.a, 0.0);
        assert_eq!(fit.rms_residual, 0.0);
    }

    #[test]
    fn quarter_arc_matches_brute_force_sum() {
        let r = 0.020;
        let pts: Vec<[f64; 2]> = (0..50)
            .map(|i| {
                let phi = i as f64 / 49.0 * (std::f64::consts::FRAC_PI_2 - 1e-3);
                [r * phi.sin(), r * (1.0 - phi.cos())]
            })
            .collect();
        let mut num = 0.0;
        let mut den = 0.0;
        for p in &pts {
            num += p[0].powi(2) * p[1];
            den += p[0].powi(4);
        }
        let fit = fit_quadratic(&synthetic(pts)).unwrap();
        assert_relative_eq!(fit.a, num / den, max_relative = 1e-14);
        assert!(fit.rms_residual > 0.0);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            fit_quadratic(&synthetic(vec![[0.0, 0.0], [1.0, 1.0]])),
            Err(Error::Argument(_))
        ));
        assert!(fit_quadratic(&synthetic(vec![[0.0, 0.0], [1.0, 1.0], [0.5, 2.0]])).is_err());
        assert!(fit_quadratic(&synthetic(vec![[0.0, 0.0], [0.0, 1.0], [0.0, 2.0]])).is_err());
    }

    #[test]
    fn circle_radius_exact() {
        let r = 0.015;
        let pts = (0..7)
            .map(|i| {
                let t = 0.3 + i as f64 * 0.2;
                [0.004 + r * t.cos(), -0.002 + r * t.sin()]
            })
            .collect();
        assert_relative_eq!(bending_radius(&synthetic(pts)).unwrap(), r, max_relative = 1e-9);
    }

    #[test]
    fn collinear_is_infinite() {
        let pts = (0..5).map(|i| [i as f64 * 1e-3, 2.0 * i as f64 * 1e-3]).collect();
        assert!(bending_radius(&synthetic(pts)).unwrap().is_infinite());
        let flat = (0..31).map(|i| [i as f64 * 1e-3, 0.0]).collect();
        assert!(bending_radius(&synthetic(flat)).unwrap().is_infinite());
        assert!(bending_radius(&synthetic(vec![[0.0, 0.0], [1.0, 1.0]])).is_err());
    }

    #[test]
    fn polyline_curvature_of_a_solved_rod_matches_the_hinges() {
        let spec = crate::rod::bundled("no2").unwrap();
        let rod = crate::rod::build_rod(&spec, 2.0).unwrap();
        let eq = crate::rod::solve_equilibrium(&rod, 0.05, std::f64::consts::FRAC_PI_2, &Default::default()).unwrap();
        let hinge = curvature_profile(&eq).unwrap();
        let poly = polyline_curvature(&Curve2D::from_equilibrium(&eq), 0.0).unwrap();
        assert_eq!(hinge.len(), poly.len());
        for (h, p) in hinge.iter().zip(&poly) {
            assert_relative_eq!(h, p, max_relative = 1e-9, epsilon = 1e-9);
        }
    }
}
