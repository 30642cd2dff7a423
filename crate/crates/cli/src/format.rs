//! Number formatting for CSV and reports.

/// Marker for grid points outside a curve's domain.
pub const NA: &str = "NA";

/// Rounds to 12 significant digits and prints the shortest string that reads
/// back to the rounded value. Magnitudes below `1e-5` use exponent form.
pub fn sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if (1e-5..1e16).contains(&rounded.abs()) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub fn sig12_or_na(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), sig12)
}
