//! Shared oracle helpers for the integration suites: quadrature, classical
//! test statistics, and random instance builders. These stay independent of
//! the library's own numeric paths except where a check is explicitly about
//! library output.

use monoalign_core::{EmissionScores, LatticeInstance, NoiseSource, TransitionLogits};

/// Asymptotic Kolmogorov-Smirnov critical value at the 1% level:
/// `D_crit = 1.62762 / sqrt(n)`.
pub const KS_CRITICAL_1PCT: f64 = 1.62762;

/// Chi-square critical value, 1 degree of freedom, 0.1% level.
pub const CHI2_1DF_CRITICAL_01PCT: f64 = 10.828;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tolerance: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tolerance: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tolerance {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tolerance / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tolerance / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    recurse(
        f,
        a,
        b,
        fa,
        fm,
        fb,
        simpson(fa, fm, fb, a, b),
        tolerance,
        50,
    )
}

/// Two-sample 2x2 homogeneity chi-square statistic for (successes, total)
/// counts from two samplers.
pub fn chi_square_2x2(success_a: usize, n_a: usize, success_b: usize, n_b: usize) -> f64 {
    let table = [
        [success_a as f64, (n_a - success_a) as f64],
        [success_b as f64, (n_b - success_b) as f64],
    ];
    let row: Vec<f64> = table.iter().map(|r| r[0] + r[1]).collect();
    let col = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let grand = row[0] + row[1];
    let mut chi2 = 0.0;
    for (r, row_sum) in table.iter().zip(&row) {
        for (c, &col_sum) in r.iter().zip(&col) {
            let expected = row_sum * col_sum / grand;
            let d = c - expected;
            chi2 += d * d / expected;
        }
    }
    chi2
}

/// One-sample KS statistic of `samples` against the CDF `f`, restricted to
/// sample points where `in_window` holds. Sorts a copy of the samples;
/// empirical ranks stay global so the statistic is the sup of
/// `|F_n(x) - F(x)|` over the window.
pub fn ks_statistic(
    samples: &[f64],
    f: impl Fn(f64) -> f64,
    in_window: impl Fn(f64) -> bool,
) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (k, &x) in sorted.iter().enumerate() {
        if !in_window(x) {
            continue;
        }
        let cdf = f(x);
        let below = k as f64 / n;
        let above = (k + 1) as f64 / n;
        d = d.max((cdf - below).abs()).max((above - cdf).abs());
    }
    d
}

/// Transition-only random instance: dimensions uniform with
/// `1 <= I <= max_i`, `I <= J <= max_j`, logits uniform on
/// `[-logit_span, logit_span]`.
pub fn random_instance(
    seed: u64,
    max_i: usize,
    max_j: usize,
    logit_span: f64,
    lambda: f64,
) -> LatticeInstance {
    let mut noise = NoiseSource::from_seed(seed);
    let num_inputs = 1 + (noise.uniform() * max_i as f64) as usize;
    let max_outputs =
        (num_inputs + (noise.uniform() * (max_j - num_inputs + 1) as f64) as usize).min(max_j);
    let model = TransitionLogits::from_fn(num_inputs, max_outputs, lambda, |_, _| {
        logit_span * (2.0 * noise.uniform() - 1.0)
    })
    .unwrap();
    LatticeInstance::new(model)
}

/// Attach random finite emission scores drawn from `[-3, 0)`.
pub fn with_random_emission(instance: LatticeInstance, seed: u64) -> LatticeInstance {
    let mut noise = NoiseSource::from_seed(seed);
    let (i, j) = (instance.num_inputs(), instance.max_outputs());
    let scores = (0..i * j).map(|_| -3.0 * noise.uniform()).collect();
    let emission = EmissionScores::new(i, j, scores).unwrap();
    instance.with_emission(emission).unwrap()
}
