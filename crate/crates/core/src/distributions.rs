//! Sampling primitives for the binary Emit/Shift transition variable.
//!
//! Two routes lead from a transition logit to a discrete action. The
//! Logistic route perturbs the log-odds with Logistic noise and takes an
//! argmax, which is the two-class Gumbel-max trick collapsed to a single
//! noise draw ([`sample_bernoulli`]). The binary Concrete route puts the same
//! noise *inside* a temperature sigmoid ([`binconcrete_sample`]), yielding a
//! continuous relaxation with the closed-form density of
//! [`binconcrete_log_density`]; thresholding the relaxed sample
//! ([`discretize`]) recovers a discrete action whose law does not depend on
//! the temperature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{log_add_exp, sigmoid, ONE_MINUS_HALF_ULP};

/// Floor kept between uniform draws and the ends of `(0, 1)` so that
/// `ln(u)` and `ln(1 - u)` stay finite. Half an ulp of 1.
const UNIFORM_FLOOR: f64 = f64::EPSILON / 2.0;

/// The binary alignment transition: re-emit from the current input position,
/// or advance to the next one.
///
/// `Emit` orders before `Shift`; tie-breaking throughout the crate prefers
/// `Emit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionAction {
    Emit,
    Shift,
}

/// Location/temperature parameters of the binary Concrete distribution.
///
/// `log_alpha` is the log of the location ratio `alpha = alpha1 / alpha2`;
/// `lambda` is the temperature. Both validated at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinConcreteParams {
    log_alpha: f64,
    lambda: f64,
}

impl BinConcreteParams {
    pub fn new(log_alpha: f64, lambda: f64) -> Result<Self> {
        if !log_alpha.is_finite() {
            return Err(Error::invalid(
                "log_alpha",
                format!("must be finite, got {log_alpha}"),
            ));
        }
        check_lambda(lambda)?;
        Ok(Self { log_alpha, lambda })
    }

    pub fn log_alpha(&self) -> f64 {
        self.log_alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::invalid(
            "lambda",
            format!("must be positive and finite, got {lambda}"),
        ));
    }
    Ok(())
}

/// Seeded stream of standard-uniform draws, clamped away from 0 and 1.
///
/// The clamp guards every downstream `ln(u)` / `ln(1 - u)`; identical seeds
/// give identical streams. One `NoiseSource` belongs to one logical task;
/// parallel work uses independently seeded sources.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Next uniform draw in the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        let u: f64 = self.rng.random();
        u.clamp(UNIFORM_FLOOR, ONE_MINUS_HALF_ULP)
    }
}

/// Map a uniform draw to a standard-Logistic variate: `ln(u) - ln(1 - u)`.
pub fn logistic_from_uniform(u: f64) -> f64 {
    u.ln() - (-u).ln_1p()
}

/// Draw one standard-Logistic variate. This is the difference of the two
/// Gumbel noises of the two-class Gumbel-max trick; the Gumbels themselves
/// are never materialized.
pub fn sample_logistic(noise: &mut NoiseSource) -> f64 {
    logistic_from_uniform(noise.uniform())
}

/// Temperature sigmoid `1 / (1 + exp(-x / lambda))`, strictly inside `(0, 1)`.
///
/// Strictly increasing in `x`; small `lambda` sharpens it toward a step.
pub fn sigmoid_temp(x: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(sigmoid(x / lambda))
}

/// Emit probability `alpha1 = sigmoid(log_alpha, lambda)`.
///
/// The Shift probability is `1 - alpha1`, so the pair sums to one by
/// construction and `alpha1 / (1 - alpha1) = exp(log_alpha)` when
/// `lambda = 1`.
pub fn emit_prob(log_alpha: f64, lambda: f64) -> Result<f64> {
    sigmoid_temp(log_alpha, lambda)
}

/// Sample a transition by the collapsed Gumbel-max rule: draw Logistic noise
/// `L` and return `Emit` iff `L + log_alpha >= 0`.
///
/// `P(Emit) = sigmoid(log_alpha)`. The boundary `L + log_alpha == 0` is a
/// probability-zero event resolved to `Emit`.
pub fn sample_bernoulli(log_alpha: f64, noise: &mut NoiseSource) -> TransitionAction {
    let l = sample_logistic(noise);
    if l + log_alpha >= 0.0 {
        TransitionAction::Emit
    } else {
        TransitionAction::Shift
    }
}

/// Deterministic part of the binary Concrete sampler:
/// `sigmoid((log_alpha + L) / lambda)` for a given Logistic noise `L`.
///
/// Exposed separately so gradient checks and search can reuse a fixed noise
/// value.
pub fn binconcrete_transform(params: &BinConcreteParams, logistic_noise: f64) -> f64 {
    sigmoid((params.log_alpha + logistic_noise) / params.lambda)
}

/// Draw a relaxed transition sample `X` in `(0, 1)` from the binary Concrete
/// distribution.
pub fn binconcrete_sample(params: &BinConcreteParams, noise: &mut NoiseSource) -> f64 {
    binconcrete_transform(params, sample_logistic(noise))
}

/// Log-density of the binary Concrete distribution at `x` in the open unit
/// interval.
///
/// Evaluated entirely in log space; the denominator's two terms can overflow
/// `x^-lambda` in linear space, so they are combined with a log-add-exp.
pub fn binconcrete_log_density(x: f64, params: &BinConcreteParams) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::invalid(
            "x",
            format!("must lie strictly inside (0, 1), got {x}"),
        ));
    }
    let lambda = params.lambda;
    let log_alpha = params.log_alpha;
    let log_x = x.ln();
    let log_1mx = (-x).ln_1p();
    let log_num = lambda.ln() + log_alpha + (-lambda - 1.0) * (log_x + log_1mx);
    let log_den = 2.0 * log_add_exp(log_alpha - lambda * log_x, -lambda * log_1mx);
    Ok(log_num - log_den)
}

/// Threshold a relaxed sample at 1/2: `Emit` iff `x >= 0.5`.
///
/// The boundary `x == 0.5` has probability zero and resolves to `Emit`.
pub fn discretize(x: f64) -> TransitionAction {
    debug_assert!(x > 0.0 && x < 1.0, "relaxed sample out of (0, 1): {x}");
    if x >= 0.5 {
        TransitionAction::Emit
    } else {
        TransitionAction::Shift
    }
}

/// Derivative of the reparameterized Concrete sample with respect to
/// `log_alpha`, holding the noise fixed: `s (1 - s) / lambda` with
/// `s = sigmoid((log_alpha + L) / lambda)`.
pub fn binconcrete_sample_grad(params: &BinConcreteParams, logistic_noise: f64) -> f64 {
    let s = binconcrete_transform(params, logistic_noise);
    s * (1.0 - s) / params.lambda
}
