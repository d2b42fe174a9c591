//! Bending and Zeeman energies of a [`DiscreteRod`] and their derivatives.
//!
//! With hinge stiffness `k_j` and segment length `ℓ`:
//!
//! ```text
//! U_b = ½ k_0 (θ_0 − θ_base)² / ℓ + Σ_{j≥1} ½ k_j (θ_j − θ_{j−1})² / ℓ
//! U_z = −Σ_i m_i (B_x cos θ_i + B_y sin θ_i)
//! U_tip = −M θ_{n−1}
//! ```

use super::discrete::DiscreteRod;
use crate::error::Result;

/// External loading and boundary data for the energy functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loading {
    /// Uniform in-plane field, T.
    pub field: [f64; 2],
    /// Tangent direction imposed by the clamp, rad.
    pub base_angle: f64,
    /// Concentrated moment on the free end, N·m.
    pub tip_moment: f64,
}

impl Loading {
    pub fn field(field: [f64; 2]) -> Self {
        Loading {
            field,
            base_angle: 0.0,
            tip_moment: 0.0,
        }
    }
}

pub fn bending_energy(rod: &DiscreteRod, angles: &[f64]) -> Result<f64> {
    rod.check_len(angles)?;
    Ok(bending_energy_unchecked(rod, angles, 0.0))
}

pub fn zeeman_energy(rod: &DiscreteRod, angles: &[f64], field: [f64; 2]) -> Result<f64> {
    rod.check_len(angles)?;
    Ok(zeeman_energy_unchecked(rod, angles, field))
}

/// Gradient of `U_b + U_z` with respect to the segment angles, N·m.
pub fn energy_gradient(rod: &DiscreteRod, angles: &[f64], field: [f64; 2]) -> Result<Vec<f64>> {
    rod.check_len(angles)?;
    let mut g = vec![0.0; angles.len()];
    gradient_into(rod, angles, &Loading::field(field), &mut g);
    Ok(g)
}

pub(crate) fn bending_energy_unchecked(rod: &DiscreteRod, angles: &[f64], base_angle: f64) -> f64 {
    let inv_l = 1.0 / rod.segment_length;
    let mut prev = base_angle;
    let mut acc = 0.0;
    for (&theta, &k) in angles.iter().zip(&rod.hinge_stiffness) {
        let d = theta - prev;
        acc += 0.5 * k * d * d;
        prev = theta;
    }
    acc * inv_l
}

pub(crate) fn zeeman_energy_unchecked(rod: &DiscreteRod, angles: &[f64], field: [f64; 2]) -> f64 {
    -angles
        .iter()
        .zip(&rod.moment)
        .map(|(&t, &m)| {
            let (s, c) = t.sin_cos();
            m * (field[0] * c + field[1] * s)
        })
        .sum::<f64>()
}

pub(crate) fn total_energy(rod: &DiscreteRod, angles: &[f64], load: &Loading) -> f64 {
    let tip = angles.last().copied().unwrap_or(0.0);
    bending_energy_unchecked(rod, angles, load.base_angle) + zeeman_energy_unchecked(rod, angles, load.field)
        - load.tip_moment * tip
}

pub(crate) fn gradient_into(rod: &DiscreteRod, angles: &[f64], load: &Loading, g: &mut [f64]) {
    let n = angles.len();
    let inv_l = 1.0 / rod.segment_length;
    let k = &rod.hinge_stiffness;
    let [bx, by] = load.field;
    for i in 0..n {
        let prev = if i == 0 { load.base_angle } else { angles[i - 1] };
        let mut gi = k[i] * (angles[i] - prev) * inv_l;
        if i + 1 < n {
            gi -= k[i + 1] * (angles[i + 1] - angles[i]) * inv_l;
        }
        let (s, c) = angles[i].sin_cos();
        gi += rod.moment[i] * (bx * s - by * c);
        g[i] = gi;
    }
    if n > 0 {
        g[n - 1] -= load.tip_moment;
    }
}

/// Tridiagonal Hessian: `diag[i]` and `off[i]` = H[i][i+1] = H[i+1][i].
pub(crate) fn hessian_into(rod: &DiscreteRod, angles: &[f64], load: &Loading, diag: &mut [f64], off: &mut [f64]) {
    let n = angles.len();
    let inv_l = 1.0 / rod.segment_length;
    let k = &rod.hinge_stiffness;
    let [bx, by] = load.field;
    for i in 0..n {
        let mut d = k[i] * inv_l;
        if i + 1 < n {
            d += k[i + 1] * inv_l;
            off[i] = -k[i + 1] * inv_l;
        }
        let (s, c) = angles[i].sin_cos();
        d += rod.moment[i] * (bx * c + by * s);
        diag[i] = d;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rod::discrete::build_rod;
    use crate::rod::spec::bundled;
    use crate::Error;
    use approx::assert_relative_eq;

    #[test]
    fn straight_rod_has_no_bending_energy() {
        let rod = build_rod(&bundled("no2").unwrap(), 2.0).unwrap();
        assert_eq!(bending_energy(&rod, &vec![0.0; rod.len()]).unwrap(), 0.0);
        assert!(bending_energy(&rod, &vec![0.1; rod.len()]).unwrap() > 0.0);
    }

    #[test]
    fn arc_energy_approaches_continuum_value() {
        let (n, len, ei, total) = (100usize, 0.03, 2.0e-6, 0.8);
        let l = len / n as f64;
        let rod = DiscreteRod::uniform(n, l, ei, 0.0);
        let dtheta = total / n as f64;
        let angles: Vec<f64> = (1..=n).map(|i| i as f64 * dtheta).collect();
        let u = bending_energy(&rod, &angles).unwrap();
        assert_relative_eq!(u, n as f64 * 0.5 * ei * dtheta * dtheta / l, max_relative = 1e-12);
        assert_relative_eq!(u, 0.5 * ei / len * total * total, max_relative = 0.01);
    }

    #[test]
    fn doubling_side_scales_bending_by_sixteen() {
        let base = bundled("no2").unwrap();
        let mut fat = base.clone();
        fat.cross_section_side *= 2.0;
        let a = build_rod(&base, 2.0).unwrap();
        let b = build_rod(&fat, 2.0).unwrap();
        let angles: Vec<f64> = (0..a.len()).map(|i| (i as f64 * 0.37).sin() * 0.2).collect();
        assert_relative_eq!(
            bending_energy(&b, &angles).unwrap(),
            16.0 * bending_energy(&a, &angles).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn zeeman_alignment_cases() {
        let spec = bundled("no2").unwrap();
        let rod = build_rod(&spec, 2.0).unwrap();
        let zero = vec![0.0; rod.len()];
        assert_eq!(zeeman_energy(&rod, &zero, [0.0, 0.0]).unwrap(), 0.0);
        let b = 0.05;
        let volume = spec.total_length() * spec.cross_section_side.powi(2);
        let want = -(spec.residual_flux / crate::MU0) * volume * b;
        assert_relative_eq!(
            zeeman_energy(&rod, &zero, [b, 0.0]).unwrap(),
            want,
            max_relative = 1e-12
        );
        assert!(zeeman_energy(&rod, &zero, [0.0, b]).unwrap().abs() < 1e-25);
    }

    #[test]
    fn zero_state_has_zero_gradient() {
        let rod = build_rod(&bundled("no1").unwrap(), 2.0).unwrap();
        let g = energy_gradient(&rod, &vec![0.0; rod.len()], [0.0, 0.0]).unwrap();
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn arc_gradient_is_interior_free() {
        let (n, l, ei) = (30usize, 1e-3, 1.5e-6);
        let rod = DiscreteRod::uniform(n, l, ei, 0.0);
        let dtheta = 0.02;
        let angles: Vec<f64> = (1..=n).map(|i| i as f64 * dtheta).collect();
        let g = energy_gradient(&rod, &angles, [0.0, 0.0]).unwrap();
        for gi in &g[..n - 1] {
            assert!(gi.abs() < 1e-18);
        }
        assert_relative_eq!(g[n - 1], ei * dtheta / l, max_relative = 1e-12);
    }

    #[test]
    fn length_mismatch_is_an_argument_error() {
        let rod = DiscreteRod::uniform(5, 1e-3, 1e-6, 1e-6);
        assert!(matches!(bending_energy(&rod, &[0.0; 4]), Err(Error::Argument(_))));
        assert!(matches!(
            zeeman_energy(&rod, &[0.0; 6], [0.0, 1.0]),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            energy_gradient(&rod, &[], [0.0, 1.0]),
            Err(Error::Argument(_))
        ));
    }
}
