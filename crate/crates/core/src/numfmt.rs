//! Fixed float formatting for reproducible CSV/JSON output.

/// Significant digits written to every structured output.
pub const SIG_DIGITS: usize = 9;

/// Round to `SIG_DIGITS` significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Render a float with `SIG_DIGITS` significant digits in the shortest form
/// that round-trips the rounded value. Non-finite values become `nan`.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return "nan".to_string();
    }
    let r = round_sig(x);
    if r == 0.0 {
        return "0".to_string();
    }
    let s = format!("{r}");
    // Display never uses exponents; keep very small or large magnitudes compact.
    if s.len() > 16 {
        format!("{r:e}")
    } else {
        s
    }
}

/// JSON number with the same rounding as [`fmt_sig`]. Non-finite values map to null.
pub fn json_num(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(round_sig(x))
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_nine_digits() {
        assert_eq!(round_sig(1.23456789012), 1.23456789);
        assert_eq!(fmt_sig(2.0), "2");
        assert_eq!(fmt_sig(-0.5), "-0.5");
        assert_eq!(fmt_sig(1.602176634e-19), "1.60217663e-19");
        assert_eq!(fmt_sig(f64::NAN), "nan");
    }
}
