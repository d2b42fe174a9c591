//! Simulation and prediction toolkit for graded-stiffness magnetic soft
//! continuum rods.
//!
//! The crate is organised bottom-up:
//!
//! * [`field`]: on-axis field of a cuboid permanent magnet (surface-charge
//!   quadrature plus a closed-form oracle) and remanence calibration.
//! * [`rod`]: three-section rod specs, their discrete-elastica form, energies
//!   and the continuation equilibrium solver.
//! * [`curve`]: quadratic-coefficient, circle and curvature descriptors.
//! * [`surrogate`]: dataset generation and a small multi-branch regression
//!   network trained with L1 loss and Adam.
//! * [`pipeline`]: parameter sweeps, library output, SVG plots and PGM
//!   centerline extraction.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod curve;
pub mod error;
pub mod field;
pub mod pipeline;
pub mod quadrature;
pub mod rod;
pub mod surrogate;
pub mod units;

pub use curve::{
    bending_radius, curvature_profile, fit_quadratic, polyline_curvature, Curve2D, CurveSource, QuadraticFit,
};
pub use error::{Error, Result};
pub use field::{
    calibrate_remanence, hz_closed_form, hz_quadrature, uniform_field, AxialPoint, CuboidMagnet, FieldValue,
};
pub use rod::{
    bending_energy, build_rod, centerline, energy_gradient, solve_equilibrium, zeeman_energy, DiscreteRod, Equilibrium,
    RodSpec, Section, SectionLabel, SolverOptions,
};
pub use surrogate::{BendSample, Normalizer, SurrogateModel, TrainOptions, TrainReport};

/// Vacuum permeability, T·m/A.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;
