//! Fixed-precision number formatting shared by every text output.

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// One CSV line from already-formatted cells.
pub fn csv_line<S: AsRef<str>>(cells: &[S]) -> String {
    let mut out = cells.iter().map(|c| c.as_ref()).collect::<Vec<_>>().join(",");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE, 0.0] {
            let s = sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert_eq!(s.split('e').next().unwrap().trim_start_matches('-').replace('.', "").len(), 17);
        }
        assert_eq!(sig17(f64::NAN), "nan");
        assert_eq!(csv_line(&["a", "b"]), "a,b\n");
    }
}
