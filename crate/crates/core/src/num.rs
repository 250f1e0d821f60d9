//! Small numeric helpers shared by the parameter formulas.

/// Smallest `b` with `2^b >= x`; `ceil_log2(0) == ceil_log2(1) == 0`.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Bits needed to store any value in `0..=max`.
pub fn bits_for(max: u64) -> u64 {
    (64 - max.leading_zeros()).max(1) as u64
}

/// `ceil(x)` for a formula value, tolerant of float noise just above an integer.
pub fn ceil_formula(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r.max(0.0) as u64
    } else {
        x.ceil().max(0.0) as u64
    }
}

/// `floor(x)` with the same tolerance.
pub fn floor_formula(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as i64
    } else {
        x.floor() as i64
    }
}

/// `2^e` rounded up to an integer threshold, saturating at `u64::MAX`.
/// Negative exponents give 1, since counters are integers.
pub fn pow2_threshold(e: i64) -> u64 {
    if e <= 0 {
        1
    } else if e >= 64 {
        u64::MAX
    } else {
        1u64 << e
    }
}

/// Integer power with saturation.
pub fn pow_sat(base: u64, exp: u32) -> u64 {
    base.checked_pow(exp).unwrap_or(u64::MAX)
}

/// Mean and standard error of a 0/1 sample.
pub fn proportion(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 0.0);
    }
    let p = successes as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

/// Mean and standard error of a real sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log2_edges() {
        assert_eq!(ceil_log2(0), 0);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1025), 11);
        assert_eq!(bits_for(0), 1);
        assert_eq!(bits_for(255), 8);
        assert_eq!(bits_for(256), 9);
    }

    #[test]
    fn formula_rounding() {
        assert_eq!(ceil_formula(8.000000000000002), 8);
        assert_eq!(ceil_formula(8.01), 9);
        assert_eq!(floor_formula(2.9999999999999996), 3);
        assert_eq!(floor_formula(-1.2), -2);
        assert_eq!(pow2_threshold(-3), 1);
        assert_eq!(pow2_threshold(5), 32);
    }
}
