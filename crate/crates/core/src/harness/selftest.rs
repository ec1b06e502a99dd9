//! Built-in oracle cross-checks, exposed through the CLI `selftest`
//! subcommand. Each check pits an implementation against an independent
//! route to the same quantity and reports one pass/fail line.

use crate::decoding::{decode, greedy_step, DistributionKind, SearchConfig, SearchMode};
use crate::distributions::{
    binconcrete_sample, binconcrete_sample_grad, binconcrete_transform, discretize,
    sample_bernoulli, BinConcreteParams, NoiseSource, TransitionAction,
};
use crate::harness::split_seed;
use crate::lattice::{enumerate_paths, path_log_prob, LatticeInstance, TransitionLogits};
use crate::likelihood::{brute_force_marginal, forward_marginal};
use crate::numeric::{log_add_exp, log_sigmoid, sigmoid};

/// Result of one self-test check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// Run the whole battery. All checks are seeded and deterministic.
pub fn run_selftest() -> Vec<CheckOutcome> {
    vec![
        check_forward_vs_brute_force(),
        check_density_normalization(),
        check_discretization_law(),
        check_gradient(),
        check_beam_reductions(),
        check_hand_fixture(),
    ]
}

fn random_instance(seed: u64, lambda: f64) -> LatticeInstance {
    let mut noise = NoiseSource::from_seed(seed);
    let num_inputs = 1 + (noise.uniform() * 4.0) as usize;
    let max_outputs = num_inputs + (noise.uniform() * (8 - num_inputs) as f64) as usize;
    let model = TransitionLogits::from_fn(num_inputs, max_outputs, lambda, |_, _| {
        6.0 * noise.uniform() - 3.0
    })
    .expect("valid random model");
    LatticeInstance::new(model)
}

fn check_forward_vs_brute_force() -> CheckOutcome {
    let mut worst = 0.0f64;
    for trial in 0..60u64 {
        let lambda = [1.0, 0.2, 0.05][(trial % 3) as usize];
        let instance = random_instance(
            split_seed(2024, &format!("selftest/forward/{trial}")),
            lambda,
        );
        let f = forward_marginal(&instance).unwrap();
        let b = brute_force_marginal(&instance).unwrap();
        worst = worst.max((f - b).abs());
    }
    CheckOutcome::new(
        "forward recursion matches brute-force path sum",
        worst <= 1e-10,
        format!("max |delta log| = {worst:.3e} over 60 random instances (tolerance 1e-10)"),
    )
}

/// Integrand of the density in log-odds space: with `x = sigmoid(t)` the
/// change of variables multiplies the density by `x (1 - x)`, and every term
/// of the log-density is expressible through `log_sigmoid(t)` without ever
/// materializing `x` near the interval ends.
fn log_density_logit_space(t: f64, params: &BinConcreteParams) -> f64 {
    let lambda = params.lambda();
    let log_alpha = params.log_alpha();
    let log_x = log_sigmoid(t);
    let log_1mx = log_sigmoid(-t);
    let log_num = lambda.ln() + log_alpha + (-lambda - 1.0) * (log_x + log_1mx);
    let log_den = 2.0 * log_add_exp(log_alpha - lambda * log_x, -lambda * log_1mx);
    // Jacobian ln(x (1 - x)).
    log_num - log_den + log_x + log_1mx
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tolerance: f64) -> f64 {
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
        48,
    )
}

fn check_density_normalization() -> CheckOutcome {
    let mut worst = 0.0f64;
    for log_alpha in [0.5f64.ln(), 2.0f64.ln()] {
        for lambda in [1.0, 0.2] {
            let params = BinConcreteParams::new(log_alpha, lambda).unwrap();
            let half_width = (20.0 + log_alpha.abs()) / lambda;
            let integral = adaptive_simpson(
                &|t| log_density_logit_space(t, &params).exp(),
                -half_width,
                half_width,
                1e-9,
            );
            worst = worst.max((integral - 1.0).abs());
        }
    }
    CheckOutcome::new(
        "binary Concrete density integrates to one",
        worst <= 1e-6,
        format!("max |integral - 1| = {worst:.3e} over the alpha/lambda grid (tolerance 1e-6)"),
    )
}

fn check_discretization_law() -> CheckOutcome {
    let log_alpha = 3.0f64.ln();
    let p = sigmoid(log_alpha);
    let n = 50_000usize;
    let mut ok = true;
    let mut details = Vec::new();
    for (idx, lambda) in [1.0, 0.2, 0.05].into_iter().enumerate() {
        let params = BinConcreteParams::new(log_alpha, lambda).unwrap();
        let mut noise = NoiseSource::from_seed(split_seed(31, &format!("selftest/disc/{idx}")));
        let emits = (0..n)
            .filter(|_| {
                discretize(binconcrete_sample(&params, &mut noise)) == TransitionAction::Emit
            })
            .count();
        let freq = emits as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        if (freq - p).abs() >= 3.0 * sigma {
            ok = false;
        }
        details.push(format!("lambda={lambda}: {freq:.4}"));
    }
    let mut bernoulli_noise = NoiseSource::from_seed(split_seed(31, "selftest/disc/bernoulli"));
    let bern = (0..n)
        .filter(|_| sample_bernoulli(log_alpha, &mut bernoulli_noise) == TransitionAction::Emit)
        .count();
    let bern_freq = bern as f64 / n as f64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    if (bern_freq - p).abs() >= 3.0 * sigma {
        ok = false;
    }
    CheckOutcome::new(
        "discretized Concrete samples match the Bernoulli law at every temperature",
        ok,
        format!(
            "target {p:.4}; {}; bernoulli {bern_freq:.4} (3-sigma bands at n = {n})",
            details.join("; ")
        ),
    )
}

fn check_gradient() -> CheckOutcome {
    let mut noise = NoiseSource::from_seed(47);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let lambda = 0.1 + 1.4 * noise.uniform();
        let log_alpha = -1.0 + 2.0 * noise.uniform();
        let t = -3.0 + 6.0 * noise.uniform();
        let l = lambda * t - log_alpha;
        let grad = binconcrete_sample_grad(&BinConcreteParams::new(log_alpha, lambda).unwrap(), l);
        let up = binconcrete_transform(&BinConcreteParams::new(log_alpha + h, lambda).unwrap(), l);
        let down =
            binconcrete_transform(&BinConcreteParams::new(log_alpha - h, lambda).unwrap(), l);
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((grad - fd).abs() / grad.abs());
    }
    CheckOutcome::new(
        "reparameterized gradient matches central finite differences",
        worst <= 1e-5,
        format!("max relative error = {worst:.3e} over 20 points (tolerance 1e-5)"),
    )
}

fn check_beam_reductions() -> CheckOutcome {
    let mut ok = true;
    let mut detail = String::from("beam-1 = greedy and exhaustive beam = argmax on 25 instances");
    for trial in 0..25u64 {
        let instance = random_instance(split_seed(59, &format!("selftest/beam/{trial}")), 1.0);
        let width_one = SearchConfig {
            beam_width: 1,
            stochastic: false,
            distribution: DistributionKind::Logistic,
            lambda: 1.0,
            mode: SearchMode::FixedLength,
            max_outputs: 0,
            seed: 0,
        };
        let (beam1_path, _) = decode(&instance, &width_one).unwrap();

        // Stepwise greedy with infeasible actions overridden.
        let model = instance.model();
        let (num_inputs, max_outputs) = (model.num_inputs(), model.max_outputs());
        let mut greedy = vec![1usize];
        let mut noise = NoiseSource::from_seed(0);
        for j in 2..=max_outputs {
            let i = *greedy.last().unwrap();
            let emit_ok = num_inputs - i <= max_outputs - j;
            let shift_ok = i < num_inputs;
            let action = if !emit_ok {
                TransitionAction::Shift
            } else if !shift_ok {
                TransitionAction::Emit
            } else {
                greedy_step(
                    model.log_alpha(i, j),
                    1.0,
                    false,
                    DistributionKind::Logistic,
                    &mut noise,
                )
                .unwrap()
            };
            greedy.push(if action == TransitionAction::Emit {
                i
            } else {
                i + 1
            });
        }
        if beam1_path.positions() != greedy.as_slice() {
            ok = false;
            detail = format!("beam-1 diverged from greedy on trial {trial}");
            break;
        }

        let paths = enumerate_paths(num_inputs, max_outputs).unwrap();
        let best = paths
            .iter()
            .map(|p| (p, path_log_prob(p, model, None).unwrap()))
            .reduce(|a, b| if b.1 > a.1 { b } else { a })
            .unwrap();
        let exhaustive = SearchConfig {
            beam_width: paths.len().max(1),
            ..width_one
        };
        let (wide_path, wide_score) = decode(&instance, &exhaustive).unwrap();
        if wide_path != *best.0 || (wide_score - best.1).abs() > 1e-9 {
            ok = false;
            detail = format!("exhaustive beam missed the argmax path on trial {trial}");
            break;
        }
    }
    CheckOutcome::new("beam search reductions hold", ok, detail)
}

fn check_hand_fixture() -> CheckOutcome {
    let flat = LatticeInstance::new(TransitionLogits::new(2, 3, 1.0, vec![0.0; 6]).unwrap());
    let marginal = forward_marginal(&flat).unwrap();
    let marginal_ok = (marginal - 0.5f64.ln()).abs() <= 1e-12;

    let logit = |p: f64| (p / (1.0 - p)).ln();
    let model = TransitionLogits::from_fn(2, 3, 1.0, |i, j| match (i, j) {
        (1, 2) => logit(0.6),
        (1, 3) => logit(0.9),
        (2, 3) => logit(0.9),
        _ => 0.0,
    })
    .unwrap();
    let instance = LatticeInstance::new(model);
    let base = SearchConfig {
        beam_width: 1,
        stochastic: false,
        distribution: DistributionKind::Logistic,
        lambda: 1.0,
        mode: SearchMode::FixedLength,
        max_outputs: 0,
        seed: 0,
    };
    let (greedy_path, greedy_score) = decode(&instance, &base).unwrap();
    let (beam_path, beam_score) = decode(
        &instance,
        &SearchConfig {
            beam_width: 2,
            ..base
        },
    )
    .unwrap();
    let divergence_ok = greedy_path.positions() == [1, 1, 2]
        && beam_path.positions() == [1, 2, 2]
        && (greedy_score.exp() - 0.06).abs() <= 1e-12
        && (beam_score.exp() - 0.36).abs() <= 1e-12;

    CheckOutcome::new(
        "hand-computed fixtures reproduce",
        marginal_ok && divergence_ok,
        format!(
            "flat 2x3 marginal = {marginal:.6} (want {:.6}); greedy {:.2e} vs beam-2 {:.2e}",
            0.5f64.ln(),
            greedy_score.exp(),
            beam_score.exp()
        ),
    )
}
