//! Relative-quality measures used in reports.

/// Percentage gap of `f_heuristic` above `f_reference`. NaN unless
/// `f_reference > 0`.
pub fn gap_percent(f_heuristic: f64, f_reference: f64) -> f64 {
    if f_reference > 0.0 {
        100.0 * (f_heuristic - f_reference) / f_reference
    } else {
        f64::NAN
    }
}

/// Percentage of `f_without` saved by `f_with`. NaN unless `f_without > 0`.
pub fn saving_rate(f_without: f64, f_with: f64) -> f64 {
    if f_without > 0.0 {
        100.0 * (f_without - f_with) / f_without
    } else {
        f64::NAN
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_examples() {
        assert!((gap_percent(103.0, 100.0) - 3.0).abs() < 1e-12);
        assert_eq!(gap_percent(100.0, 100.0), 0.0);
        assert!((gap_percent(98.0, 100.0) + 2.0).abs() < 1e-12);
        assert!(gap_percent(1.0, 0.0).is_nan());
    }

    #[test]
    fn saving_examples() {
        assert!((saving_rate(100.0, 85.72) - 14.28).abs() < 1e-9);
        assert_eq!(saving_rate(50.0, 50.0), 0.0);
        assert!(saving_rate(50.0, 60.0) < 0.0);
    }
}
