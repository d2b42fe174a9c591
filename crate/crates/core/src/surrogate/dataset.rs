use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

use crate::curve::{fit_quadratic, Curve2D};
use crate::error::{Error, Result};
use crate::rod::{build_rod, solve_equilibrium, RodSpec, SolverOptions};
use crate::units::{fmt_sig9, m_to_mm, mm_to_m, mpa_to_pa, mt_to_t, pa_to_mpa, t_to_mt};

/// Field, three moduli, three lengths, cross-section side.
pub const N_INPUTS: usize = 8;

pub const DATASET_HEADER: &str = "mt_mT,e1_MPa,e2_MPa,e3_MPa,l1_mm,l2_mm,l3_mm,cs_mm,a_per_mm";

/// One solved-and-fitted configuration, SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BendSample {
    /// Field magnitude, T.
    pub mt: f64,
    /// Section moduli bottom→top, Pa.
    pub e: [f64; 3],
    /// Section lengths bottom→top, m.
    pub l: [f64; 3],
    /// Cross-section side, m.
    pub cs: f64,
    /// Fitted quadratic coefficient, 1/m.
    pub a_hat: f64,
}

impl BendSample {
    pub fn features(&self) -> [f64; N_INPUTS] {
        [
            self.mt, self.e[0], self.e[1], self.e[2], self.l[0], self.l[1], self.l[2], self.cs,
        ]
    }
}

/// Settings shared by every solve when generating samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSettings {
    pub resolution: f64,
    pub field_angle: f64,
    pub solver: SolverOptions,
}

impl Default for SampleSettings {
    fn default() -> Self {
        SampleSettings {
            resolution: crate::rod::DEFAULT_RESOLUTION,
            field_angle: crate::rod::DEFAULT_FIELD_ANGLE,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetReport {
    /// Spec-major, field-minor order.
    pub samples: Vec<BendSample>,
    /// `(spec name, field T)` of every excluded, non-converged solve.
    pub excluded: Vec<(String, f64)>,
}

/// Solves and fits every `(spec, field)` pair. Pairs whose solve does not
/// converge are listed in [`DatasetReport::excluded`].
pub fn build_dataset(specs: &[RodSpec], fields: &[f64], settings: &SampleSettings) -> Result<DatasetReport> {
    let rods = specs
        .iter()
        .map(|s| build_rod(s, settings.resolution))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, f64)> = (0..specs.len())
        .flat_map(|i| fields.iter().map(move |&f| (i, f)))
        .collect();
    let results: Vec<Result<Option<BendSample>>> = jobs
        .par_iter()
        .map(|&(i, field)| {
            let eq = solve_equilibrium(&rods[i], field, settings.field_angle, &settings.solver)?;
            if !eq.converged {
                return Ok(None);
            }
            let fit = fit_quadratic(&Curve2D::from_equilibrium(&eq).root_aligned(settings.solver.base_angle))?;
            Ok(Some(BendSample {
                mt: field,
                e: specs[i].moduli(),
                l: specs[i].lengths(),
                cs: specs[i].cross_section_side,
                a_hat: fit.a,
            }))
        })
        .collect();

    let mut report = DatasetReport {
        samples: Vec::with_capacity(jobs.len()),
        excluded: Vec::new(),
    };
    for (&(i, field), r) in jobs.iter().zip(results) {
        match r? {
            Some(s) => report.samples.push(s),
            None => report.excluded.push((specs[i].name.clone(), field)),
        }
    }
    Ok(report)
}

/// Splits off every sample whose field equals `held_out_field` (to 1 nT).
/// Each distinct `(E, L, cs)` configuration must have exactly one such sample.
pub fn split_holdout(dataset: &[BendSample], held_out_field: f64) -> Result<(Vec<BendSample>, Vec<BendSample>)> {
    let same_field = |s: &BendSample| (s.mt - held_out_field).abs() <= 1e-9;
    let mut configs: Vec<([f64; 3], [f64; 3], f64)> = Vec::new();
    for s in dataset {
        let key = (s.e, s.l, s.cs);
        if !configs.contains(&key) {
            configs.push(key);
        }
    }
    for key in &configs {
        let hits = dataset
            .iter()
            .filter(|s| (s.e, s.l, s.cs) == *key && same_field(s))
            .count();
        if hits != 1 {
            return Err(Error::Argument(format!(
                "configuration E = {:?} MPa, L = {:?} mm has {hits} samples at the held-out field {} mT (need 1)",
                key.0.map(pa_to_mpa),
                key.1.map(m_to_mm),
                t_to_mt(held_out_field)
            )));
        }
    }
    Ok(dataset.iter().partition(|s| !same_field(s)))
}

pub fn write_dataset_csv(samples: &[BendSample]) -> String {
    let mut out = String::with_capacity(64 * (samples.len() + 1));
    out.push_str(DATASET_HEADER);
    out.push('\n');
    for s in samples {
        let cols = [
            t_to_mt(s.mt),
            pa_to_mpa(s.e[0]),
            pa_to_mpa(s.e[1]),
            pa_to_mpa(s.e[2]),
            m_to_mm(s.l[0]),
            m_to_mm(s.l[1]),
            m_to_mm(s.l[2]),
            m_to_mm(s.cs),
            s.a_hat * 1e-3,
        ];
        let line: Vec<String> = cols.iter().map(|&v| fmt_sig9(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn save_dataset_csv(path: &Path, samples: &[BendSample]) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(write_dataset_csv(samples).as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_dataset_csv<R: std::io::Read>(reader: R) -> Result<Vec<BendSample>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Config(format!("dataset header: {e}")))?
        .clone();
    let expected: Vec<&str> = DATASET_HEADER.split(',').collect();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::Config(format!(
            "dataset columns must be `{DATASET_HEADER}`, got `{}`",
            got.join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Config(format!("dataset row {}: {e}", line + 2)))?;
        let mut v = [0.0; 9];
        for (i, field) in rec.iter().enumerate().take(9) {
            v[i] = field
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("dataset row {} column {}: {e}", line + 2, expected[i])))?;
        }
        out.push(BendSample {
            mt: mt_to_t(v[0]),
            e: [mpa_to_pa(v[1]), mpa_to_pa(v[2]), mpa_to_pa(v[3])],
            l: [mm_to_m(v[4]), mm_to_m(v[5]), mm_to_m(v[6])],
            cs: mm_to_m(v[7]),
            a_hat: v[8] * 1e3,
        });
    }
    Ok(out)
}

pub fn load_dataset_csv(path: &Path) -> Result<Vec<BendSample>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset_csv(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rod::all_bundled;

    fn sample(e0: f64, mt: f64) -> BendSample {
        BendSample {
            mt,
            e: [e0, 15e6, 10e6],
            l: [0.01; 3],
            cs: 1e-3,
            a_hat: mt * 100.0,
        }
    }

    #[test]
    fn empty_grid_gives_empty_dataset() {
        let r = build_dataset(&all_bundled(), &[], &SampleSettings::default()).unwrap();
        assert!(r.samples.is_empty() && r.excluded.is_empty());
    }

    #[test]
    fn zero_field_gives_zero_coefficients() {
        let r = build_dataset(&all_bundled(), &[0.0], &SampleSettings::default()).unwrap();
        assert_eq!(r.samples.len(), 7);
        assert!(r.samples.iter().all(|s| s.a_hat == 0.0));
    }

    #[test]
    fn split_two_specs_three_fields() {
        let data: Vec<BendSample> = [20e6, 18e6]
            .iter()
            .flat_map(|&e| [0.01, 0.02, 0.03].map(|f| sample(e, f)))
            .collect();
        let (train, test) = split_holdout(&data, 0.02).unwrap();
        assert_eq!((train.len(), test.len()), (4, 2));
        assert!(test.iter().all(|s| s.mt == 0.02));
        assert!(split_holdout(&data, 0.05).is_err());
    }

    #[test]
    fn csv_round_trip_keeps_nine_digits() {
        let data = vec![sample(20e6, 0.05), sample(16e6, 0.12)];
        let text = write_dataset_csv(&data);
        assert_eq!(text.lines().count(), 3);
        let back = read_dataset_csv(text.as_bytes()).unwrap();
        for (a, b) in back.iter().zip(&data) {
            assert!((a.a_hat - b.a_hat).abs() <= 1e-8 * b.a_hat.abs());
            assert!((a.mt - b.mt).abs() <= 1e-9 * b.mt);
        }
        assert_eq!(write_dataset_csv(&back), text);
    }

    #[test]
    fn bad_header_rejected() {
        assert!(matches!(
            read_dataset_csv("a,b\n1,2\n".as_bytes()),
            Err(Error::Config(_))
        ));
    }
}
