use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{ensure_finite, Error, Result};
use crate::units::{m_to_mm, mm_to_m, mpa_to_pa, mt_to_t, pa_to_mpa, t_to_mt};

/// Young's modulus sanity band, Pa.
pub const MODULUS_BAND: (f64, f64) = (1.0e6, 100.0e6);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionLabel {
    Bottom,
    Middle,
    Top,
}

impl SectionLabel {
    pub const ALL: [SectionLabel; 3] = [SectionLabel::Bottom, SectionLabel::Middle, SectionLabel::Top];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    /// m
    pub length: f64,
    /// Pa
    pub youngs_modulus: f64,
    pub label: SectionLabel,
}

/// Three-section graded-stiffness rod with a square cross-section.
#[derive(Debug, Clone, PartialEq)]
pub struct RodSpec {
    pub name: String,
    /// Bottom (clamped) to top (free).
    pub sections: [Section; 3],
    /// Side of the square cross-section, m.
    pub cross_section_side: f64,
    /// Material remanence, T. Magnetization is frozen along the local tangent.
    pub residual_flux: f64,
}

impl RodSpec {
    /// Builds a spec from SI lengths (m), moduli (Pa), side (m) and remanence (T).
    pub fn new(
        name: impl Into<String>,
        lengths: [f64; 3],
        moduli: [f64; 3],
        cross_section_side: f64,
        residual_flux: f64,
    ) -> Result<Self> {
        let sections = [0, 1, 2].map(|i| Section {
            length: lengths[i],
            youngs_modulus: moduli[i],
            label: SectionLabel::ALL[i],
        });
        let spec = RodSpec {
            name: name.into(),
            sections,
            cross_section_side,
            residual_flux,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("cross_section_side", self.cross_section_side)?;
        ensure_finite("residual_flux", self.residual_flux)?;
        for s in &self.sections {
            ensure_finite("section length", s.length)?;
            ensure_finite("youngs_modulus", s.youngs_modulus)?;
            if s.length <= 0.0 {
                return Err(Error::Config(format!(
                    "{}: {:?} section length must be positive, got {} m",
                    self.name, s.label, s.length
                )));
            }
            if s.youngs_modulus < MODULUS_BAND.0 || s.youngs_modulus > MODULUS_BAND.1 {
                return Err(Error::Config(format!(
                    "{}: {:?} modulus {} MPa outside the [1, 100] MPa band",
                    self.name,
                    s.label,
                    pa_to_mpa(s.youngs_modulus)
                )));
            }
        }
        if self
            .sections
            .windows(2)
            .any(|w| w[1].youngs_modulus > w[0].youngs_modulus)
        {
            return Err(Error::Config(format!(
                "{}: stiffness must be non-increasing from bottom to top",
                self.name
            )));
        }
        if self.cross_section_side <= 0.0 {
            return Err(Error::Config(format!(
                "{}: cross-section side must be positive",
                self.name
            )));
        }
        if self.residual_flux < 0.0 {
            return Err(Error::Config(format!(
                "{}: residual flux must be non-negative",
                self.name
            )));
        }
        Ok(())
    }

    pub fn total_length(&self) -> f64 {
        self.sections.iter().map(|s| s.length).sum()
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.sections.map(|s| s.length)
    }

    pub fn moduli(&self) -> [f64; 3] {
        self.sections.map(|s| s.youngs_modulus)
    }

    /// Copy with every section set to `modulus`.
    pub fn uniform(&self, modulus: f64) -> Result<RodSpec> {
        RodSpec::new(
            format!("{}-uniform", self.name),
            self.lengths(),
            [modulus; 3],
            self.cross_section_side,
            self.residual_flux,
        )
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: RodSpecFile = serde_json::from_str(text).map_err(|e| Error::json("rod spec", e))?;
        file.try_into()
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: RodSpecFile = serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))?;
        file.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&RodSpecFile::from(self)).expect("rod spec serializes")
    }
}

/// On-disk rod spec in mm / MPa / mT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RodSpecFile {
    pub name: String,
    pub sections: Vec<SectionFile>,
    pub side_mm: f64,
    #[serde(rename = "residual_flux_mT")]
    pub residual_flux_mt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionFile {
    pub length_mm: f64,
    #[serde(rename = "e_MPa")]
    pub e_mpa: f64,
}

impl TryFrom<RodSpecFile> for RodSpec {
    type Error = Error;

    fn try_from(f: RodSpecFile) -> Result<Self> {
        if f.sections.len() != 3 {
            return Err(Error::Config(format!(
                "{}: expected exactly 3 sections, got {}",
                f.name,
                f.sections.len()
            )));
        }
        let lengths = [0, 1, 2].map(|i| mm_to_m(f.sections[i].length_mm));
        let moduli = [0, 1, 2].map(|i| mpa_to_pa(f.sections[i].e_mpa));
        RodSpec::new(f.name, lengths, moduli, mm_to_m(f.side_mm), mt_to_t(f.residual_flux_mt))
    }
}

impl From<&RodSpec> for RodSpecFile {
    fn from(s: &RodSpec) -> Self {
        RodSpecFile {
            name: s.name.clone(),
            sections: s
                .sections
                .iter()
                .map(|sec| SectionFile {
                    length_mm: m_to_mm(sec.length),
                    e_mpa: pa_to_mpa(sec.youngs_modulus),
                })
                .collect(),
            side_mm: m_to_mm(s.cross_section_side),
            residual_flux_mt: t_to_mt(s.residual_flux),
        }
    }
}

const BUNDLED: [(&str, &str); 7] = [
    ("no1", include_str!("../../specs/no1.json")),
    ("no2", include_str!("../../specs/no2.json")),
    ("no3", include_str!("../../specs/no3.json")),
    ("no4", include_str!("../../specs/no4.json")),
    ("no5", include_str!("../../specs/no5.json")),
    ("no6", include_str!("../../specs/no6.json")),
    ("no7", include_str!("../../specs/no7.json")),
];

/// The seven bundled graded rods `no1` … `no7`.
pub fn all_bundled() -> Vec<RodSpec> {
    BUNDLED
        .iter()
        .map(|(_, text)| RodSpec::from_json_str(text).expect("bundled spec is valid"))
        .collect()
}

pub fn bundled_ids() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(id, _)| *id)
}

/// Looks up a bundled spec by id (`no1` … `no7`, `1` … `7` also accepted).
pub fn bundled(id: &str) -> Option<RodSpec> {
    let key = id.trim().to_ascii_lowercase();
    let key = if key.chars().all(|c| c.is_ascii_digit()) {
        format!("no{key}")
    } else {
        key
    };
    BUNDLED
        .iter()
        .find(|(name, _)| *name == key)
        .map(|(_, text)| RodSpec::from_json_str(text).expect("bundled spec is valid"))
}
