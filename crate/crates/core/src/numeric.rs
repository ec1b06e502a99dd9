//! Log-space numeric helpers.
//!
//! Everything probabilistic in this crate runs in log space; these are the
//! few primitives it needs. `sigmoid` clamps its output into the open unit
//! interval so callers can take `ln(x)` and `ln(1 - x)` without hitting
//! infinities, while `log_sigmoid` avoids the round trip entirely.

/// Largest `f64` strictly below 1.
pub const ONE_MINUS_HALF_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

/// Numerically stable `1 / (1 + exp(-z))`, clamped into the open interval
/// `(0, 1)`.
pub fn sigmoid(z: f64) -> f64 {
    let s = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, ONE_MINUS_HALF_ULP)
}

/// `ln(1 + exp(z))` without overflow for large `z`.
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `ln(sigmoid(z))`, exact in the tails where `sigmoid` saturates.
pub fn log_sigmoid(z: f64) -> f64 {
    -softplus(-z)
}

/// `ln(exp(a) + exp(b))` with explicit handling of `-inf` operands.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

/// `ln(sum(exp(x)))` over a slice; `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|x| (x - m).exp()).sum();
    m + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_clamped_open() {
        assert!(sigmoid(1e9) < 1.0);
        assert!(sigmoid(-1e9) > 0.0);
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn log_sigmoid_matches_ln_in_safe_range() {
        for z in [-10.0, -1.0, 0.0, 0.3, 5.0] {
            assert!((log_sigmoid(z) - sigmoid(z).ln()).abs() < 1e-12);
        }
        // Far tail where ln(sigmoid) would saturate.
        assert!((log_sigmoid(-800.0) - (-800.0)).abs() < 1e-9);
    }

    #[test]
    fn log_add_exp_handles_neg_inf() {
        assert_eq!(
            log_add_exp(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 1.5), 1.5);
        let v = log_add_exp(0.25_f64.ln(), 0.25_f64.ln());
        assert!((v - 0.5_f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn log_sum_exp_empty_is_neg_inf() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
