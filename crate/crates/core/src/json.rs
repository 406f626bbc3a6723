//! Canonical JSON formatting for file outputs.
//!
//! Floats are written with 17 significant digits so that values round-trip
//! exactly and reruns produce byte-identical files.

/// `{:.16e}` gives one leading digit plus 16 fractional digits. Negative
/// zero is normalized to zero.
pub fn float17(value: f64) -> String {
    let v = if value == 0.0 { 0.0 } else { value };
    debug_assert!(v.is_finite(), "refusing to serialize non-finite float");
    format!("{v:.16e}")
}

pub fn float_array(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|&v| float17(v)).collect();
    format!("[{}]", parts.join(","))
}

pub fn uint_array(values: &[u64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(","))
}
