//! x,y millimetre point files.

use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use magbend_core::units::fmt_sig9;

/// Reads two-column CSV; a non-numeric first row is taken as a header and
/// `#` lines are comments. `-` reads stdin.
pub fn read_points_mm(path: &Path) -> Result<Vec<[f64; 2]>> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text).context("reading stdin")?;
    } else {
        text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut points = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.with_context(|| format!("parsing {}", path.display()))?;
        if row.len() < 2 {
            bail!(magbend_core::Error::Argument(format!(
                "{}: row {} needs x,y",
                path.display(),
                i + 1
            )));
        }
        let parsed = (row[0].parse::<f64>(), row[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(y)) => points.push([x, y]),
            _ if i == 0 => continue,
            _ => bail!(magbend_core::Error::Argument(format!(
                "{}: row {} is not numeric",
                path.display(),
                i + 1
            ))),
        }
    }
    Ok(points)
}

pub fn write_points_mm(points_m: &[[f64; 2]]) -> String {
    let mut out = String::from("x_mm,y_mm\n");
    for p in points_m {
        out.push_str(&fmt_sig9(p[0] * 1e3));
        out.push(',');
        out.push_str(&fmt_sig9(p[1] * 1e3));
        out.push('\n');
    }
    out
}
