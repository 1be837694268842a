//! Closed-form reference functions for the squaring construction. They are
//! written directly from the tent-map identities and never touch networks.

/// Triangle wave `g(x) = 1 - 2|x - 1/2|`, extended to all of R.
pub fn tent(x: f64) -> f64 {
    1.0 - 2.0 * (x - 0.5).abs()
}

/// `s`-fold composition of [`tent`]; `s = 0` is the identity.
pub fn tent_iter(s: u32, x: f64) -> f64 {
    (0..s).fold(x, |acc, _| tent(acc))
}

/// `f_m(x) = x - sum_{s=1}^m g_s(x) / 4^s`, within `2^{-2m-2}` of `x^2` on `[0, 1]`.
pub fn fm_ref(m: u32, x: f64) -> f64 {
    let mut g = x;
    let mut acc = x;
    let mut scale = 1.0;
    for _ in 0..m {
        g = tent(g);
        scale *= 0.25;
        acc -= g * scale;
    }
    acc
}

/// Uniform squaring error of `f_m` on `[0, 1]`.
pub fn sq_error_bound(m: u32) -> f64 {
    2f64.powi(-2 * m as i32 - 2)
}

/// `a_m = 3 sum_{k=1}^m (2^k - 1) / 4^k`, the constant-channel entry of the
/// multiplication network's path row.
pub fn mult_path_a(m: u32) -> f64 {
    (1..=m)
        .map(|k| 3.0 * (2f64.powi(k as i32) - 1.0) / 4f64.powi(k as i32))
        .sum()
}

/// `b_m = 2 - 2^{-m}`.
pub fn mult_path_b(m: u32) -> f64 {
    2.0 - 2f64.powi(-(m as i32))
}

/// Path row of the squaring chain: `(sum_{k=1}^m (2^{k+1} - 2) / 4^k, 2 - 2^{-m})`.
pub fn sq_path_row(m: u32) -> [f64; 2] {
    let a = (1..=m)
        .map(|k| (2f64.powi(k as i32 + 1) - 2.0) / 4f64.powi(k as i32))
        .sum();
    [a, mult_path_b(m)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_endpoints() {
        assert_eq!(tent(0.0), 0.0);
        assert_eq!(tent(0.5), 1.0);
        assert_eq!(tent(1.0), 0.0);
        assert_eq!(tent_iter(0, 0.3), 0.3);
        assert_eq!(tent_iter(2, 0.25), 1.0);
    }

    #[test]
    fn fm_at_one_half() {
        assert_eq!(fm_ref(1, 0.5), 0.25);
    }

    #[test]
    fn fm_matches_tent_iter_sum() {
        for m in 1..=6 {
            for i in 0..=200 {
                let x = i as f64 / 200.0;
                let direct = x - (1..=m)
                    .map(|s| tent_iter(s, x) / 4f64.powi(s as i32))
                    .sum::<f64>();
                assert!((fm_ref(m, x) - direct).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fm_squaring_error_on_grid() {
        for m in 1..=10 {
            let bound = sq_error_bound(m);
            let worst = (0..=10_000)
                .map(|i| {
                    let x = i as f64 / 10_000.0;
                    (fm_ref(m, x) - x * x).abs()
                })
                .fold(0.0, f64::max);
            assert!(worst <= bound, "m={m}: {worst} > {bound}");
        }
    }

    #[test]
    fn closed_form_path_rows() {
        assert_eq!(sq_path_row(2), [0.875, 1.75]);
        assert_eq!(mult_path_a(2), 1.3125);
        assert_eq!(mult_path_a(1) + 2.0 * mult_path_b(1), 3.75);
    }
}
