//! Deterministic number formatting for exported files.

/// Formats with nine significant digits, then lets the shortest round-trip
/// representation of the rounded value trim trailing noise. Re-parsing the
/// text reproduces the rounded value bit-exactly.
pub fn fmt_sig9(value: f64) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{value:.8e}").parse().expect("own formatting");
    format!("{rounded}")
}

#[cfg(test)]
mod tests {
    use super::fmt_sig9;

    #[test]
    fn short_decimals_stay_short() {
        assert_eq!(fmt_sig9(76_500.0), "76500");
        assert_eq!(fmt_sig9(0.9), "0.9");
        assert_eq!(fmt_sig9(-308.8), "-308.8");
        assert_eq!(fmt_sig9(0.0), "0");
    }

    #[test]
    fn long_decimals_round_to_nine_digits() {
        let text = fmt_sig9(8328.767123287671);
        assert_eq!(text, "8328.76712");
        let reparsed: f64 = text.parse().unwrap();
        assert_eq!(fmt_sig9(reparsed), text, "idempotent at 9 digits");
    }
}
