use super::spec::RodSpec;
use crate::error::{Error, Result};
use crate::MU0;

/// Segments per mm.
pub const DEFAULT_RESOLUTION: f64 = 2.0;
pub const MIN_SEGMENTS_PER_SECTION: usize = 3;
pub const MAX_SEGMENTS: usize = 100_000;

/// Section lengths are snapped to this grid (m) when looking for a common
/// segment length.
const LENGTH_QUANTUM: f64 = 1.0e-9;

/// Rigid-segment, elastic-hinge discretisation of a [`RodSpec`].
///
/// Segment `i` has tangent angle `θ_i`. Hinge 0 joins the clamp to segment 0;
/// hinge `j ≥ 1` joins segments `j-1` and `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteRod {
    pub segment_length: f64,
    /// E·I per segment, N·m².
    pub stiffness: Vec<f64>,
    /// Magnetic moment magnitude per segment, A·m².
    pub moment: Vec<f64>,
    /// Section index (0 bottom, 1 middle, 2 top) per segment.
    pub section: Vec<usize>,
    /// Hinge stiffness E·I, one per hinge (same length as `stiffness`).
    pub hinge_stiffness: Vec<f64>,
}

impl DiscreteRod {
    pub fn len(&self) -> usize {
        self.stiffness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stiffness.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.segment_length * self.len() as f64
    }

    /// Index of the first segment of each section.
    pub fn section_starts(&self) -> [usize; 3] {
        let mut starts = [0; 3];
        for s in 1..3 {
            starts[s] = self.section.iter().position(|&k| k == s).unwrap_or(self.len());
        }
        starts
    }

    /// A uniform rod of `n` segments: handy for analytic checks.
    pub fn uniform(n: usize, segment_length: f64, stiffness: f64, moment: f64) -> Self {
        DiscreteRod {
            segment_length,
            stiffness: vec![stiffness; n],
            moment: vec![moment; n],
            section: (0..n).map(|i| (3 * i / n.max(1)).min(2)).collect(),
            hinge_stiffness: vec![stiffness; n],
        }
    }

    pub(crate) fn check_len(&self, angles: &[f64]) -> Result<()> {
        if angles.len() != self.len() {
            return Err(Error::Argument(format!(
                "expected {} angles, got {}",
                self.len(),
                angles.len()
            )));
        }
        Ok(())
    }
}

/// Discretises `spec` with at least `resolution` segments per mm.
///
/// The segment length is the largest value ≤ 1/resolution that divides every
/// section length, so section boundaries fall on hinges.
pub fn build_rod(spec: &RodSpec, resolution: f64) -> Result<DiscreteRod> {
    spec.validate()?;
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::Argument(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let max_segment = 1.0e-3 / resolution;

    let mut quanta = [0u64; 3];
    for (q, s) in quanta.iter_mut().zip(&spec.sections) {
        let units = (s.length / LENGTH_QUANTUM).round();
        if ((units * LENGTH_QUANTUM - s.length) / s.length).abs() > 1e-9 || units < 1.0 {
            return Err(Error::Config(format!(
                "{}: {:?} section length {} m is not a whole number of nanometres; \
                 no common segment length exists",
                spec.name, s.label, s.length
            )));
        }
        *q = units as u64;
    }
    let common = quanta.iter().copied().fold(0, gcd);
    let common_len = common as f64 * LENGTH_QUANTUM;

    // Split the common divisor into `k` pieces: smallest k with common/k ≤ max_segment
    // and at least MIN_SEGMENTS_PER_SECTION segments in every section.
    let mut k = (common_len / max_segment * (1.0 - 1e-12)).ceil().max(1.0) as u64;
    let shortest = *quanta.iter().min().expect("three sections");
    let min_k = (MIN_SEGMENTS_PER_SECTION as u64 * common).div_ceil(shortest);
    k = k.max(min_k);
    let counts: Vec<u64> = quanta.iter().map(|&q| q / common * k).collect();
    let total: u64 = counts.iter().sum();
    if total as usize > MAX_SEGMENTS {
        return Err(Error::Config(format!(
            "{}: section lengths {:?} m need {} segments for exact section boundaries \
             (limit {}); round the lengths to a coarser grid",
            spec.name,
            spec.lengths(),
            total,
            MAX_SEGMENTS
        )));
    }

    let segment_length = spec.total_length() / total as f64;
    let side = spec.cross_section_side;
    let second_moment = side.powi(4) / 12.0;
    let magnetization = spec.residual_flux / MU0;
    let moment = magnetization * side * side * segment_length;

    let mut stiffness = Vec::with_capacity(total as usize);
    let mut section = Vec::with_capacity(total as usize);
    for (idx, (&count, s)) in counts.iter().zip(&spec.sections).enumerate() {
        for _ in 0..count {
            stiffness.push(s.youngs_modulus * second_moment);
            section.push(idx);
        }
    }
    let hinge_stiffness = hinge_stiffness(&stiffness);
    Ok(DiscreteRod {
        segment_length,
        moment: vec![moment; stiffness.len()],
        stiffness,
        section,
        hinge_stiffness,
    })
}

/// Hinge 0 takes the first segment's stiffness; interior hinges take the
/// harmonic mean of their neighbours (two half-segment springs in series).
fn hinge_stiffness(stiffness: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(stiffness.len());
    if let Some(&first) = stiffness.first() {
        out.push(first);
    }
    for w in stiffness.windows(2) {
        out.push(2.0 * w[0] * w[1] / (w[0] + w[1]));
    }
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
