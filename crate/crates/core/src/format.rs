//! Locale-independent number formatting for text outputs.

/// Scientific notation with 17 significant digits; `-0` prints as `0`.
pub fn sig17(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Short form for parameter substitution: integers without a fraction,
/// otherwise the shortest round-tripping decimal.
pub fn plain(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}
