use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::curve::{bending_radius, fit_quadratic, Curve2D};
use crate::error::{Error, Result};
use crate::rod::spec::RodSpecFile;
use crate::rod::{build_rod, bundled, solve_equilibrium, RodSpec, SolverOptions, DEFAULT_RESOLUTION};

/// A spec named by bundled id / file path, or given inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecRef {
    Id(String),
    Inline(RodSpecFile),
}

/// On-disk sweep configuration (mT / degrees).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub specs: Vec<SpecRef>,
    #[serde(rename = "fields_mT")]
    pub fields_mt: Vec<f64>,
    #[serde(default = "default_angles")]
    pub angles_deg: Vec<f64>,
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default)]
    pub solver: SolverOptions,
}

fn default_angles() -> Vec<f64> {
    vec![90.0]
}

fn default_resolution() -> f64 {
    DEFAULT_RESOLUTION
}

impl SweepConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    /// Resolves spec references; relative paths are taken from `base_dir`.
    pub fn into_grid(self, base_dir: Option<&Path>) -> Result<SweepGrid> {
        let specs = self
            .specs
            .into_iter()
            .map(|r| resolve_spec(&r, base_dir))
            .collect::<Result<Vec<_>>>()?;
        let grid = SweepGrid {
            specs,
            fields: self.fields_mt.iter().map(|&f| crate::units::mt_to_t(f)).collect(),
            angles: self.angles_deg.iter().map(|d| d.to_radians()).collect(),
            resolution: self.resolution,
            solver: self.solver,
        };
        grid.validate()?;
        Ok(grid)
    }
}

pub fn resolve_spec(r: &SpecRef, base_dir: Option<&Path>) -> Result<RodSpec> {
    match r {
        SpecRef::Inline(f) => f.clone().try_into(),
        SpecRef::Id(id) => {
            if let Some(s) = bundled(id) {
                return Ok(s);
            }
            let mut path = PathBuf::from(id);
            if path.is_relative() {
                if let Some(dir) = base_dir {
                    path = dir.join(path);
                }
            }
            if path.is_file() {
                RodSpec::from_json_file(&path)
            } else {
                Err(Error::Config(format!(
                    "unknown spec `{id}`: not a bundled id (no1..no7) or an existing file"
                )))
            }
        }
    }
}

/// Fully resolved sweep in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub specs: Vec<RodSpec>,
    /// T
    pub fields: Vec<f64>,
    /// rad from the undeformed axis
    pub angles: Vec<f64>,
    pub resolution: f64,
    pub solver: SolverOptions,
}

impl SweepGrid {
    pub fn new(specs: Vec<RodSpec>, fields: Vec<f64>) -> Self {
        SweepGrid {
            specs,
            fields,
            angles: vec![crate::rod::DEFAULT_FIELD_ANGLE],
            resolution: DEFAULT_RESOLUTION,
            solver: SolverOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() {
            return Err(Error::Config("sweep has no specs".to_string()));
        }
        if self.fields.is_empty() {
            return Err(Error::Config("sweep has no field values".to_string()));
        }
        if self.angles.is_empty() {
            return Err(Error::Config("sweep has no field angles".to_string()));
        }
        if let Some(f) = self.fields.iter().find(|f| !(**f >= 0.0) || !f.is_finite()) {
            return Err(Error::Config(format!("field values must be finite and ≥ 0, got {f}")));
        }
        if !(self.resolution > 0.0) {
            return Err(Error::Config(format!(
                "resolution must be positive, got {}",
                self.resolution
            )));
        }
        for s in &self.specs {
            s.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.specs.len() * self.fields.len() * self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One grid point of the bending-prediction library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryRecord {
    pub spec_id: String,
    #[serde(rename = "field_mT")]
    pub field_mt: f64,
    pub angle_deg: f64,
    /// Quadratic coefficient, 1/mm. NaN when the point is not converged.
    pub a_per_mm: f64,
    /// Kasa circle radius, mm; infinite for a straight rod.
    pub radius_mm: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Solves and fits every grid point. Records come out spec-major, then field,
/// then angle, whatever the execution order.
pub fn run_sweep(grid: &SweepGrid) -> Result<Vec<LibraryRecord>> {
    run_sweep_with(grid, true)
}

pub fn run_sweep_with(grid: &SweepGrid, parallel: bool) -> Result<Vec<LibraryRecord>> {
    grid.validate()?;
    let rods = grid
        .specs
        .iter()
        .map(|s| build_rod(s, grid.resolution))
        .collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::with_capacity(grid.len());
    for si in 0..grid.specs.len() {
        for &field in &grid.fields {
            for &angle in &grid.angles {
                jobs.push((si, field, angle));
            }
        }
    }
    let solve = |&(si, field, angle): &(usize, f64, f64)| -> Result<LibraryRecord> {
        let eq = solve_equilibrium(&rods[si], field, angle, &grid.solver)?;
        let curve = Curve2D::from_equilibrium(&eq).root_aligned(grid.solver.base_angle);
        let fit = if eq.converged { fit_quadratic(&curve).ok() } else { None };
        let (a, radius) = match fit {
            Some(f) => (f.a * 1e-3, bending_radius(&curve)? * 1e3),
            None => (f64::NAN, f64::NAN),
        };
        Ok(LibraryRecord {
            spec_id: grid.specs[si].name.clone(),
            field_mt: crate::units::t_to_mt(field),
            angle_deg: angle.to_degrees(),
            a_per_mm: a,
            radius_mm: radius,
            converged: fit.is_some(),
            iterations: eq.iterations,
        })
    };
    if parallel {
        jobs.par_iter().map(solve).collect()
    } else {
        jobs.iter().map(solve).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rod::all_bundled;

    #[test]
    fn empty_field_list_is_config_error() {
        let grid = SweepGrid::new(all_bundled(), vec![]);
        assert!(matches!(run_sweep(&grid), Err(Error::Config(_))));
    }

    #[test]
    fn zero_field_record() {
        let grid = SweepGrid::new(vec![bundled("no2").unwrap()], vec![0.0]);
        let recs = run_sweep(&grid).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].a_per_mm, 0.0);
        assert!(recs[0].radius_mm.is_infinite());
        assert!(recs[0].converged);
    }

    #[test]
    fn unknown_spec_rejected_before_solving() {
        let cfg = SweepConfig {
            specs: vec![SpecRef::Id("no2".into()), SpecRef::Id("no-such-spec".into())],
            fields_mt: vec![10.0],
            angles_deg: vec![90.0],
            resolution: 2.0,
            solver: SolverOptions::default(),
        };
        assert!(matches!(cfg.into_grid(None), Err(Error::Config(_))));
    }

    #[test]
    fn config_parses_inline_and_ids() {
        let text = r#"{
            "specs": ["no1", {"name":"custom","sections":[{"length_mm":10,"e_MPa":20},{"length_mm":10,"e_MPa":15},{"length_mm":10,"e_MPa":10}],"side_mm":1.0,"residual_flux_mT":20}],
            "fields_mT": [10, 20],
            "solver": {"continuation_steps": 10}
        }"#;
        let cfg: SweepConfig = serde_json::from_str(text).unwrap();
        let grid = cfg.into_grid(None).unwrap();
        assert_eq!(grid.specs[1].name, "custom");
        assert_eq!(grid.len(), 4);
        assert_eq!(grid.solver.continuation_steps, 10);
        assert_eq!(grid.solver.max_iters, 500);
    }
}
