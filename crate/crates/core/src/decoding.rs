//! Alignment search: deterministic or stochastic, greedy or beam.
//!
//! One engine covers the whole grid. At every output step each live
//! hypothesis expands with the feasible subset of {Emit, Shift}; candidates
//! are ranked by their cumulative score plus a *decision term* for the new
//! transition, and the best `beam_width` survive. The decision term is where
//! the four conditions differ:
//!
//! * deterministic — the true transition log-probabilities (no noise); with
//!   `beam_width = 1` this is exactly the stepwise argmax rule,
//! * stochastic Logistic — Logistic noise lands on the Emit branch *after*
//!   the sigmoid link: `ln alpha1 + L` vs `ln alpha2`,
//! * stochastic binary Concrete — the same noise goes *inside* the
//!   temperature sigmoid and both branches take the log of the relaxed
//!   sample: `ln s` vs `ln(1 - s)` with `s = sigmoid((logit + L) / lambda)`.
//!
//! One noise draw is consumed per hypothesis expansion, and only when both
//! actions are feasible, so a width-1 stochastic search consumes the exact
//! noise stream of repeated [`greedy_step`] calls. Noise perturbs ranking
//! only: hypothesis scores are always true log-probabilities under the
//! instance's model, and the returned score is the true score of the
//! returned path.

use serde::{Deserialize, Serialize};

use crate::distributions::{
    binconcrete_sample, check_lambda, discretize, sample_bernoulli, sample_logistic,
    BinConcreteParams, NoiseSource, TransitionAction,
};
use crate::error::{Error, Result};
use crate::lattice::{AlignmentPath, LatticeInstance};
use crate::numeric::log_sigmoid;

/// Which continuous distribution supplies the stochastic decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Logistic,
    BinConcrete,
}

impl std::fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistributionKind::Logistic => "logistic",
            DistributionKind::BinConcrete => "binconcrete",
        })
    }
}

/// Whether the search must land on the last input at step `J`, or may stop
/// early / run to a cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Produce a complete path of exactly `J` steps; infeasible actions are
    /// overridden so the path always ends at input `I`.
    FixedLength,
    /// Decode until a Shift would move past the last input (that final Shift
    /// is charged to the score) or until `max_outputs` steps.
    OpenEnded,
}

/// Full description of one search condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub beam_width: usize,
    pub stochastic: bool,
    pub distribution: DistributionKind,
    /// Temperature of the decision rule. Scoring always uses the instance's
    /// own temperature; the two coincide in every harness condition.
    pub lambda: f64,
    pub mode: SearchMode,
    /// Step cap for [`SearchMode::OpenEnded`]; ignored for fixed-length.
    pub max_outputs: usize,
    pub seed: u64,
}

impl SearchConfig {
    fn validate(&self, instance: &LatticeInstance) -> Result<()> {
        if self.beam_width < 1 {
            return Err(Error::invalid("beam_width", "must be at least 1"));
        }
        check_lambda(self.lambda)?;
        match self.mode {
            SearchMode::FixedLength => {
                if instance.num_inputs() > instance.max_outputs() {
                    return Err(Error::Infeasible {
                        num_inputs: instance.num_inputs(),
                        max_outputs: instance.max_outputs(),
                    });
                }
            }
            SearchMode::OpenEnded => {
                if self.max_outputs < 1 || self.max_outputs > instance.max_outputs() {
                    return Err(Error::invalid(
                        "max_outputs",
                        format!(
                            "must be in 1..={} (the instance's J), got {}",
                            instance.max_outputs(),
                            self.max_outputs
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// One live search hypothesis. `score` is the true cumulative
/// log-probability of `path_prefix` (transitions plus any emission); noise
/// draws are never stored.
#[derive(Debug, Clone)]
pub struct BeamHypothesis {
    pub path_prefix: AlignmentPath,
    pub position: usize,
    pub step: usize,
    pub score: f64,
}

/// Single Emit/Shift decision for one cell.
///
/// Deterministic: `Emit` iff the logit is nonnegative (the argmax of
/// `alpha1` vs `alpha2`, ties to `Emit`), identical for both distributions
/// and every temperature. Stochastic Logistic: a Bernoulli draw with
/// `P(Emit) = sigmoid(log_alpha / lambda)`. Stochastic binary Concrete: a
/// relaxed sample thresholded at 1/2.
pub fn greedy_step(
    log_alpha: f64,
    lambda: f64,
    stochastic: bool,
    distribution: DistributionKind,
    noise: &mut NoiseSource,
) -> Result<TransitionAction> {
    check_lambda(lambda)?;
    if !stochastic {
        return Ok(if log_alpha >= 0.0 {
            TransitionAction::Emit
        } else {
            TransitionAction::Shift
        });
    }
    match distribution {
        DistributionKind::Logistic => Ok(sample_bernoulli(log_alpha / lambda, noise)),
        DistributionKind::BinConcrete => {
            let params = BinConcreteParams::new(log_alpha, lambda)?;
            Ok(discretize(binconcrete_sample(&params, noise)))
        }
    }
}

/// Decision-term pair (Emit, Shift) for ranking one expansion.
fn decision_pair(
    log_alpha: f64,
    lambda: f64,
    distribution: DistributionKind,
    noise_draw: Option<f64>,
) -> (f64, f64) {
    match (noise_draw, distribution) {
        (None, _) => (
            log_sigmoid(log_alpha / lambda),
            log_sigmoid(-log_alpha / lambda),
        ),
        (Some(l), DistributionKind::Logistic) => (
            log_sigmoid(log_alpha / lambda) + l,
            log_sigmoid(-log_alpha / lambda),
        ),
        (Some(l), DistributionKind::BinConcrete) => {
            let z = (log_alpha + l) / lambda;
            (log_sigmoid(z), log_sigmoid(-z))
        }
    }
}

struct Candidate {
    parent: usize,
    position: usize,
    action: TransitionAction,
    rank: f64,
    true_score: f64,
    finished: bool,
}

fn candidate_order(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    b.rank
        .total_cmp(&a.rank)
        .then(a.action.cmp(&b.action))
        .then(a.position.cmp(&b.position))
}

/// Search the instance for an alignment path under the given condition.
/// Returns the selected path and its true log-probability.
///
/// Deterministic runs ignore the seed and are bit-reproducible; stochastic
/// runs are bit-reproducible per seed. Among the final candidates the path
/// with the highest true score is returned (first in beam order on ties).
pub fn decode(instance: &LatticeInstance, config: &SearchConfig) -> Result<(AlignmentPath, f64)> {
    config.validate(instance)?;
    let mut noise = NoiseSource::from_seed(config.seed);
    match config.mode {
        SearchMode::FixedLength => decode_fixed(instance, config, &mut noise),
        SearchMode::OpenEnded => decode_open(instance, config, &mut noise),
    }
}

fn root_hypothesis(instance: &LatticeInstance) -> BeamHypothesis {
    let emis0 = instance.emission().map_or(0.0, |e| e.score(1, 1));
    BeamHypothesis {
        path_prefix: AlignmentPath::new(vec![1]),
        position: 1,
        step: 1,
        score: emis0,
    }
}

fn extend_beam(
    beam: &[BeamHypothesis],
    selected: Vec<Candidate>,
    step: usize,
) -> Vec<BeamHypothesis> {
    selected
        .into_iter()
        .map(|c| {
            let parent = &beam[c.parent];
            let mut positions = parent.path_prefix.positions().to_vec();
            positions.push(c.position);
            BeamHypothesis {
                path_prefix: AlignmentPath::new(positions),
                position: c.position,
                step,
                score: c.true_score,
            }
        })
        .collect()
}

fn best_by_true_score(finalists: Vec<(AlignmentPath, f64)>) -> (AlignmentPath, f64) {
    finalists
        .into_iter()
        .reduce(|best, cur| if cur.1 > best.1 { cur } else { best })
        .expect("at least one finalist")
}

fn decode_fixed(
    instance: &LatticeInstance,
    config: &SearchConfig,
    noise: &mut NoiseSource,
) -> Result<(AlignmentPath, f64)> {
    let model = instance.model();
    let num_inputs = model.num_inputs();
    let max_outputs = model.max_outputs();
    let emis = |i: usize, j: usize| instance.emission().map_or(0.0, |e| e.score(i, j));

    let mut beam = vec![root_hypothesis(instance)];
    for j in 2..=max_outputs {
        let mut candidates = Vec::with_capacity(beam.len() * 2);
        for (parent, hyp) in beam.iter().enumerate() {
            let i = hyp.position;
            // A child at position p can still finish iff I - p <= J - j.
            let emit_ok = num_inputs - i <= max_outputs - j;
            let shift_ok = i < num_inputs;
            debug_assert!(emit_ok || shift_ok, "stuck hypothesis at ({i}, {j})");
            let draw = if config.stochastic && emit_ok && shift_ok {
                Some(sample_logistic(noise))
            } else {
                None
            };
            let (d_emit, d_shift) = decision_pair(
                model.log_alpha(i, j),
                config.lambda,
                config.distribution,
                draw,
            );
            if emit_ok {
                candidates.push(Candidate {
                    parent,
                    position: i,
                    action: TransitionAction::Emit,
                    rank: hyp.score + emis(i, j) + d_emit,
                    true_score: hyp.score + emis(i, j) + model.log_emit(i, j),
                    finished: false,
                });
            }
            if shift_ok {
                candidates.push(Candidate {
                    parent,
                    position: i + 1,
                    action: TransitionAction::Shift,
                    rank: hyp.score + emis(i + 1, j) + d_shift,
                    true_score: hyp.score + emis(i + 1, j) + model.log_shift(i, j),
                    finished: false,
                });
            }
        }
        assert!(
            !candidates.is_empty(),
            "beam emptied by feasibility pruning"
        );
        candidates.sort_by(candidate_order);
        candidates.truncate(config.beam_width);
        beam = extend_beam(&beam, candidates, j);
    }

    debug_assert!(beam.iter().all(|h| h.position == num_inputs));
    let finalists = beam.into_iter().map(|h| (h.path_prefix, h.score)).collect();
    Ok(best_by_true_score(finalists))
}

fn decode_open(
    instance: &LatticeInstance,
    config: &SearchConfig,
    noise: &mut NoiseSource,
) -> Result<(AlignmentPath, f64)> {
    let model = instance.model();
    let num_inputs = model.num_inputs();
    let emis = |i: usize, j: usize| instance.emission().map_or(0.0, |e| e.score(i, j));

    let mut finished: Vec<(AlignmentPath, f64)> = Vec::new();
    let mut beam = vec![root_hypothesis(instance)];
    for j in 2..=config.max_outputs {
        if beam.is_empty() {
            break;
        }
        let mut candidates = Vec::with_capacity(beam.len() * 2);
        for (parent, hyp) in beam.iter().enumerate() {
            let i = hyp.position;
            // Both actions are always available here: Shift at the last
            // input is the stopping event and is charged to the score.
            let draw = if config.stochastic {
                Some(sample_logistic(noise))
            } else {
                None
            };
            let (d_emit, d_shift) = decision_pair(
                model.log_alpha(i, j),
                config.lambda,
                config.distribution,
                draw,
            );
            candidates.push(Candidate {
                parent,
                position: i,
                action: TransitionAction::Emit,
                rank: hyp.score + emis(i, j) + d_emit,
                true_score: hyp.score + emis(i, j) + model.log_emit(i, j),
                finished: false,
            });
            if i < num_inputs {
                candidates.push(Candidate {
                    parent,
                    position: i + 1,
                    action: TransitionAction::Shift,
                    rank: hyp.score + emis(i + 1, j) + d_shift,
                    true_score: hyp.score + emis(i + 1, j) + model.log_shift(i, j),
                    finished: false,
                });
            } else {
                candidates.push(Candidate {
                    parent,
                    position: i,
                    action: TransitionAction::Shift,
                    rank: hyp.score + d_shift,
                    true_score: hyp.score + model.log_shift(i, j),
                    finished: true,
                });
            }
        }
        candidates.sort_by(candidate_order);
        candidates.truncate(config.beam_width);
        let (done, live): (Vec<Candidate>, Vec<Candidate>) =
            candidates.into_iter().partition(|c| c.finished);
        for c in &done {
            finished.push((beam[c.parent].path_prefix.clone(), c.true_score));
        }
        beam = extend_beam(&beam, live, j);
    }

    let mut finalists = finished;
    finalists.extend(beam.into_iter().map(|h| (h.path_prefix, h.score)));
    Ok(best_by_true_score(finalists))
}

/// Average length of the consecutive-Emit run before the first Shift under
/// repeated Bernoulli draws at a constant logit. The run length is geometric
/// with mean `alpha1 / alpha2`; runs are capped at 2^20 emits.
pub fn expected_emit_run_check(log_alpha: f64, trials: usize, noise: &mut NoiseSource) -> f64 {
    assert!(trials >= 1, "trials must be >= 1");
    const MAX_RUN: u32 = 1 << 20;
    let mut total: u64 = 0;
    for _ in 0..trials {
        let mut run = 0u32;
        while run < MAX_RUN && sample_bernoulli(log_alpha, noise) == TransitionAction::Emit {
            run += 1;
        }
        total += u64::from(run);
    }
    total as f64 / trials as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{path_log_prob, validate_path, TransitionLogits};

    fn config(beam_width: usize, stochastic: bool, seed: u64) -> SearchConfig {
        SearchConfig {
            beam_width,
            stochastic,
            distribution: DistributionKind::Logistic,
            lambda: 1.0,
            mode: SearchMode::FixedLength,
            max_outputs: 0,
            seed,
        }
    }

    /// Logits realizing Emit probabilities 0.6 at (1,2), 0.9 at (1,3) and
    /// 0.9 at (2,3); greedy commits to Emit at step 2 and ends on the
    /// 0.6 * 0.1 = 0.06 path while beam-2 keeps the 0.4 * 0.9 = 0.36 path.
    fn divergence_instance() -> LatticeInstance {
        let logit = |p: f64| (p / (1.0 - p)).ln();
        let model = TransitionLogits::from_fn(2, 3, 1.0, |i, j| match (i, j) {
            (1, 2) => logit(0.6),
            (1, 3) => logit(0.9),
            (2, 3) => logit(0.9),
            _ => 0.0,
        })
        .unwrap();
        LatticeInstance::new(model)
    }

    #[test]
    fn greedy_step_deterministic_is_a_sign_test() {
        let mut noise = NoiseSource::from_seed(0);
        for dist in [DistributionKind::Logistic, DistributionKind::BinConcrete] {
            for lambda in [1.0, 0.2, 0.05] {
                let emit = greedy_step(0.847, lambda, false, dist, &mut noise).unwrap();
                assert_eq!(emit, TransitionAction::Emit);
                let shift = greedy_step(-0.1, lambda, false, dist, &mut noise).unwrap();
                assert_eq!(shift, TransitionAction::Shift);
            }
        }
    }

    #[test]
    fn stochastic_binconcrete_emit_rate_is_temperature_free() {
        let log_alpha = 3.0_f64.ln();
        let p = 0.75;
        let n = 100_000usize;
        for lambda in [1.0, 0.2, 0.05] {
            let mut noise = NoiseSource::from_seed(41);
            let emits = (0..n)
                .filter(|_| {
                    greedy_step(
                        log_alpha,
                        lambda,
                        true,
                        DistributionKind::BinConcrete,
                        &mut noise,
                    )
                    .unwrap()
                        == TransitionAction::Emit
                })
                .count();
            let freq = emits as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (freq - p).abs() < 3.0 * sigma,
                "lambda={lambda} freq={freq}"
            );
        }
    }

    #[test]
    fn greedy_commits_and_beam_recovers() {
        let instance = divergence_instance();
        let (greedy_path, greedy_score) = decode(&instance, &config(1, false, 0)).unwrap();
        assert_eq!(greedy_path.positions(), &[1, 1, 2]);
        assert!((greedy_score.exp() - 0.06).abs() < 1e-12);

        let (beam_path, beam_score) = decode(&instance, &config(2, false, 0)).unwrap();
        assert_eq!(beam_path.positions(), &[1, 2, 2]);
        assert!((beam_score.exp() - 0.36).abs() < 1e-12);
    }

    #[test]
    fn returned_score_is_true_path_log_prob() {
        let instance = divergence_instance();
        for stochastic in [false, true] {
            for width in [1, 2, 4] {
                let (path, score) = decode(&instance, &config(width, stochastic, 7)).unwrap();
                let truth = path_log_prob(&path, instance.model(), None).unwrap();
                assert!((score - truth).abs() < 1e-9);
                assert!(validate_path(&path, 2, true).is_ok());
            }
        }
    }

    #[test]
    fn deterministic_decode_ignores_seed() {
        let instance = divergence_instance();
        let (p1, s1) = decode(&instance, &config(2, false, 1)).unwrap();
        let (p2, s2) = decode(&instance, &config(2, false, 999)).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(s1.to_bits(), s2.to_bits());
    }

    #[test]
    fn stochastic_decode_reproducible_per_seed() {
        let model =
            TransitionLogits::from_fn(5, 12, 1.0, |i, j| 0.3 * ((i * 13 + j * 5) as f64).sin())
                .unwrap();
        let instance = LatticeInstance::new(model);
        let (p1, _) = decode(&instance, &config(3, true, 42)).unwrap();
        let (p2, _) = decode(&instance, &config(3, true, 42)).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn infeasible_fixed_length_is_an_error() {
        let model = TransitionLogits::new(4, 3, 1.0, vec![0.0; 12]).unwrap();
        let err = decode(&LatticeInstance::new(model), &config(1, false, 0)).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }

    #[test]
    fn open_ended_stops_on_shift_past_end_and_charges_it() {
        // One input, Shift strongly preferred: stops immediately after step 1.
        let model = TransitionLogits::new(1, 6, 1.0, vec![-4.0; 6]).unwrap();
        let instance = LatticeInstance::new(model);
        let cfg = SearchConfig {
            mode: SearchMode::OpenEnded,
            max_outputs: 6,
            ..config(1, false, 0)
        };
        let (path, score) = decode(&instance, &cfg).unwrap();
        assert_eq!(path.positions(), &[1]);
        // Charged exactly the Shift that leaves the lattice at step 2.
        let expected = instance.model().log_shift(1, 2);
        assert!((score - expected).abs() < 1e-12);
    }

    #[test]
    fn open_ended_truncates_at_cap() {
        // Emit strongly preferred: runs to the cap without finishing.
        let model = TransitionLogits::new(2, 8, 1.0, vec![4.0; 16]).unwrap();
        let instance = LatticeInstance::new(model);
        let cfg = SearchConfig {
            mode: SearchMode::OpenEnded,
            max_outputs: 5,
            ..config(1, false, 0)
        };
        let (path, _) = decode(&instance, &cfg).unwrap();
        assert_eq!(path.positions(), &[1, 1, 1, 1, 1]);
        assert!(validate_path(&path, 2, false).is_ok());
    }

    #[test]
    fn open_ended_rejects_bad_cap() {
        let model = TransitionLogits::new(2, 4, 1.0, vec![0.0; 8]).unwrap();
        let instance = LatticeInstance::new(model);
        let cfg = SearchConfig {
            mode: SearchMode::OpenEnded,
            max_outputs: 9,
            ..config(1, false, 0)
        };
        assert!(decode(&instance, &cfg).is_err());
    }

    #[test]
    fn emit_run_lengths_match_geometric_mean() {
        let mut noise = NoiseSource::from_seed(61);
        let mean_even = expected_emit_run_check(0.0, 100_000, &mut noise);
        assert!((mean_even - 1.0).abs() < 0.05, "got {mean_even}");

        let mean_three = expected_emit_run_check(3.0_f64.ln(), 100_000, &mut noise);
        assert!((mean_three - 3.0).abs() < 0.15, "got {mean_three}");

        let mean_tiny = expected_emit_run_check(-12.0, 50_000, &mut noise);
        assert!(mean_tiny < 0.01, "got {mean_tiny}");
    }
}
