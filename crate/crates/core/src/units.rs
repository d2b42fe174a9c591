//! Boundary conversions. Everything inside the crate is SI.

pub const MM: f64 = 1.0e-3;
pub const MT: f64 = 1.0e-3;
pub const MPA: f64 = 1.0e6;

pub fn mm_to_m(mm: f64) -> f64 {
    mm * MM
}

pub fn m_to_mm(m: f64) -> f64 {
    m / MM
}

pub fn mt_to_t(mt: f64) -> f64 {
    mt * MT
}

pub fn t_to_mt(t: f64) -> f64 {
    t / MT
}

pub fn mpa_to_pa(mpa: f64) -> f64 {
    mpa * MPA
}

pub fn pa_to_mpa(pa: f64) -> f64 {
    pa / MPA
}

/// Formats `value` with nine significant digits in scientific notation.
///
/// Used for every number written to library files so the output is
/// byte-identical across runs and platforms.
pub fn fmt_sig9(value: f64) -> String {
    if value.is_nan() {
        "nan".to_string()
    } else if value.is_infinite() {
        if value > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if value == 0.0 {
        "0".to_string()
    } else {
        format!("{value:.8e}")
    }
}
