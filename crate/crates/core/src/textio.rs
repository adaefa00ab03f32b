//! Decimal formatting shared by the measure file format and CSV exports.

/// Formats a float with 17 significant digits, enough to round-trip any f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Formats a comma-separated list of floats at 17 significant digits.
pub fn fmt17_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt17(x)).collect::<Vec<_>>().join(",")
}

/// Renders one CSV row from already-formatted cells.
pub fn csv_row(cells: &[String]) -> String {
    cells.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_round_trips() {
        for &x in &[
            0.1,
            -std::f64::consts::PI,
            1.0 / 3.0,
            6.02e23,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }
}
