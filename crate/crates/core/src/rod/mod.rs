//! Three-section graded rods and their planar magneto-elastic equilibria.

mod discrete;
mod energy;
mod solver;
pub mod spec;

pub use discrete::{build_rod, DiscreteRod, DEFAULT_RESOLUTION, MIN_SEGMENTS_PER_SECTION};
pub use energy::{bending_energy, energy_gradient, zeeman_energy, Loading};
pub use solver::{centerline, solve_equilibrium, Equilibrium, SolverOptions, TIE_BREAK_PERTURBATION};
pub use spec::{all_bundled, bundled, RodSpec, Section, SectionLabel};

/// Default field direction relative to the undeformed rod axis, rad.
pub const DEFAULT_FIELD_ANGLE: f64 = std::f64::consts::FRAC_PI_2;
