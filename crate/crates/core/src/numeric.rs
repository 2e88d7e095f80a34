//! Small numeric helpers shared across modules.

/// Relative slack used when a float that should be an integer lands a few
/// ulps above it (for example `1.0 / 0.1`).
const INTEGER_SNAP: f64 = 1e-9;

/// Ceiling that snaps values within a relative `1e-9` of an integer to that
/// integer.
pub fn ceil_snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= INTEGER_SNAP * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// ⌈1/x⌉ for `x` in (0, 1], saturating at `u64::MAX`.
pub fn ceil_recip(x: f64) -> u64 {
    assert!(x > 0.0, "ceil_recip needs a positive argument");
    let v = ceil_snap(1.0 / x);
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v as u64
    }
}

/// Bit length of a `u64` (zero has length zero).
pub fn bit_len(x: u64) -> u64 {
    u64::from(64 - x.leading_zeros())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recip_of_decimal_grid_points_is_exact() {
        assert_eq!(ceil_recip(0.1), 10);
        assert_eq!(ceil_recip(0.01), 100);
        assert_eq!(ceil_recip(1e-3), 1000);
        assert_eq!(ceil_recip(1e-4), 10_000);
        assert_eq!(ceil_recip(0.3), 4);
        assert_eq!(ceil_recip(0.05), 20);
        assert_eq!(ceil_recip(1e-6), 1_000_000);
    }

    #[test]
    fn bit_len_basics() {
        assert_eq!(bit_len(0), 0);
        assert_eq!(bit_len(1), 1);
        assert_eq!(bit_len(10), 4);
    }
}
