use std::fmt::Write;

use super::sweep::LibraryRecord;
use crate::error::{Error, Result};
use crate::units::fmt_sig9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LibraryFormat {
    Csv,
    Json,
}

impl std::str::FromStr for LibraryFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(LibraryFormat::Csv),
            "json" => Ok(LibraryFormat::Json),
            other => Err(Error::Config(format!("unknown library format `{other}` (csv or json)"))),
        }
    }
}

pub const LIBRARY_HEADER: &str = "spec_id,field_mT,angle_deg,a_per_mm,radius_mm,converged,iterations";

/// Serializes records with a fixed column order, nine significant digits and
/// LF line endings. Non-finite values become `nan` / `inf` in CSV and `null`
/// in JSON.
pub fn write_library(records: &[LibraryRecord], format: LibraryFormat) -> Result<Vec<u8>> {
    if records.is_empty() {
        return Err(Error::Argument("library has no records".to_string()));
    }
    let mut out = String::new();
    match format {
        LibraryFormat::Csv => {
            out.push_str(LIBRARY_HEADER);
            out.push('\n');
            for r in records {
                let id = if r.spec_id.contains([',', '"', '\n']) {
                    format!("\"{}\"", r.spec_id.replace('"', "\"\""))
                } else {
                    r.spec_id.clone()
                };
                writeln!(
                    out,
                    "{id},{},{},{},{},{},{}",
                    fmt_sig9(r.field_mt),
                    fmt_sig9(r.angle_deg),
                    fmt_sig9(r.a_per_mm),
                    fmt_sig9(r.radius_mm),
                    r.converged,
                    r.iterations
                )
                .expect("write to string");
            }
        }
        LibraryFormat::Json => {
            out.push_str("[\n");
            for (i, r) in records.iter().enumerate() {
                let sep = if i + 1 < records.len() { "," } else { "" };
                writeln!(
                    out,
                    "  {{\"spec_id\": {}, \"field_mT\": {}, \"angle_deg\": {}, \"a_per_mm\": {}, \
                     \"radius_mm\": {}, \"converged\": {}, \"iterations\": {}}}{sep}",
                    serde_json::to_string(&r.spec_id).expect("string serializes"),
                    json_number(r.field_mt),
                    json_number(r.angle_deg),
                    json_number(r.a_per_mm),
                    json_number(r.radius_mm),
                    r.converged,
                    r.iterations
                )
                .expect("write to string");
            }
            out.push_str("]\n");
        }
    }
    Ok(out.into_bytes())
}

fn json_number(v: f64) -> String {
    if v.is_finite() {
        fmt_sig9(v)
    } else {
        "null".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> LibraryRecord {
        LibraryRecord {
            spec_id: "no2".into(),
            field_mt: 50.0,
            angle_deg: 90.0,
            a_per_mm: 0.012345678912,
            radius_mm: f64::INFINITY,
            converged: true,
            iterations: 17,
        }
    }

    #[test]
    fn one_record_csv() {
        let bytes = write_library(&[record()], LibraryFormat::Csv).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(
            text,
            format!("{LIBRARY_HEADER}\nno2,5.00000000e1,9.00000000e1,1.23456789e-2,inf,true,17\n")
        );
    }

    #[test]
    fn json_is_valid_and_deterministic() {
        let recs = vec![
            record(),
            LibraryRecord {
                spec_id: "a\"b".into(),
                ..record()
            },
        ];
        let a = write_library(&recs, LibraryFormat::Json).unwrap();
        let b = write_library(&recs, LibraryFormat::Json).unwrap();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 2);
        assert!(v[0]["radius_mm"].is_null());
        assert_eq!(v[1]["spec_id"], "a\"b");
    }

    #[test]
    fn empty_rejected() {
        assert!(write_library(&[], LibraryFormat::Csv).is_err());
    }
}
