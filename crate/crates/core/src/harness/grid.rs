//! The condition grid: distribution x temperature x search x randomness,
//! decoded over shared instance sets and aggregated into per-condition
//! records.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::decoding::{decode, DistributionKind, SearchConfig, SearchMode};
use crate::error::{Error, Result};
use crate::harness::generator::{generate_instance, GeneratorSpec};
use crate::harness::split_seed;

/// Search method axis of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchKind {
    Greedy,
    Beam,
}

impl std::fmt::Display for SearchKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SearchKind::Greedy => "greedy",
            SearchKind::Beam => "beam",
        })
    }
}

/// Randomness axis of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Randomness {
    Deterministic,
    Stochastic,
}

impl std::fmt::Display for Randomness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Randomness::Deterministic => "deterministic",
            Randomness::Stochastic => "stochastic",
        })
    }
}

/// Repeated decodes per instance for stochastic conditions, used for the
/// run-to-run variance metric.
pub const STOCHASTIC_REPEATS: usize = 5;

/// Axes of the experiment. [`ConditionGrid::default`] is the full
/// 2 x 3 x 2 x 2 grid: both distributions, temperatures 1.0 / 0.2 / 0.05,
/// greedy and beam-10, deterministic and stochastic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionGrid {
    pub distributions: Vec<DistributionKind>,
    pub lambdas: Vec<f64>,
    pub searches: Vec<SearchKind>,
    pub beam_width: usize,
    pub randomness: Vec<Randomness>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ConditionGrid {
    fn default() -> Self {
        Self {
            distributions: vec![DistributionKind::Logistic, DistributionKind::BinConcrete],
            lambdas: vec![1.0, 0.2, 0.05],
            searches: vec![SearchKind::Greedy, SearchKind::Beam],
            beam_width: 10,
            randomness: vec![Randomness::Deterministic, Randomness::Stochastic],
            trials: 20,
            seed: 0,
        }
    }
}

impl ConditionGrid {
    pub fn validate(&self) -> Result<()> {
        if self.distributions.is_empty() {
            return Err(Error::invalid("distributions", "must not be empty"));
        }
        if self.lambdas.is_empty() {
            return Err(Error::invalid("lambdas", "must not be empty"));
        }
        if let Some(bad) = self.lambdas.iter().find(|l| !l.is_finite() || **l <= 0.0) {
            return Err(Error::invalid(
                "lambdas",
                format!("temperatures must be positive and finite, found {bad}"),
            ));
        }
        if self.searches.is_empty() {
            return Err(Error::invalid("searches", "must not be empty"));
        }
        if self.randomness.is_empty() {
            return Err(Error::invalid("randomness", "must not be empty"));
        }
        if self.beam_width < 1 {
            return Err(Error::invalid("beam_width", "must be at least 1"));
        }
        if self.trials < 1 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        Ok(())
    }
}

/// Aggregated metrics for one grid condition.
///
/// These are desk-scale proxies: exact-match accuracy against the sampled
/// truth path, mean absolute per-input segment-length error, mean negative
/// log-probability of the decoded paths, and the across-repeat variance of
/// that quantity for stochastic conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub distribution: DistributionKind,
    pub lambda: f64,
    pub search: SearchKind,
    pub randomness: Randomness,
    pub path_accuracy: f64,
    pub duration_mae: f64,
    pub decoded_nll: f64,
    pub run_variance: f64,
}

/// Run every condition in the grid over `trials` fresh instances each.
///
/// Instances are keyed by `(grid seed, lambda, instance index)` alone, so
/// all conditions at one temperature see identical instances and their
/// records are directly comparable. Deterministic conditions decode each
/// instance once; stochastic conditions decode [`STOCHASTIC_REPEATS`] times
/// with distinct seeds. The generator spec's `lambda` and `seed` fields are
/// overridden per condition and instance.
pub fn run_grid(grid: &ConditionGrid, spec: &GeneratorSpec) -> Result<Vec<ResultRecord>> {
    grid.validate()?;
    spec.validate()?;
    let mut records =
        Vec::with_capacity(grid.distributions.len() * grid.lambdas.len() * grid.searches.len());
    for &distribution in &grid.distributions {
        for &lambda in &grid.lambdas {
            for &search in &grid.searches {
                for &randomness in &grid.randomness {
                    records.push(run_condition(
                        grid,
                        spec,
                        distribution,
                        lambda,
                        search,
                        randomness,
                    )?);
                }
            }
        }
    }
    Ok(records)
}

fn run_condition(
    grid: &ConditionGrid,
    spec: &GeneratorSpec,
    distribution: DistributionKind,
    lambda: f64,
    search: SearchKind,
    randomness: Randomness,
) -> Result<ResultRecord> {
    let stochastic = randomness == Randomness::Stochastic;
    let beam_width = match search {
        SearchKind::Greedy => 1,
        SearchKind::Beam => grid.beam_width,
    };
    let repeats = if stochastic { STOCHASTIC_REPEATS } else { 1 };

    let mut matches = 0usize;
    let mut mae_sum = 0.0;
    let mut nll_sum = 0.0;
    let mut variance_sum = 0.0;
    for instance_idx in 0..grid.trials {
        let gen_seed = split_seed(
            grid.seed,
            &format!("gen/lambda={lambda:.6}/instance={instance_idx}"),
        );
        let gen_spec = GeneratorSpec {
            lambda,
            seed: gen_seed,
            ..spec.clone()
        };
        let instance = generate_instance(&gen_spec)?;
        let truth = instance
            .truth_path()
            .expect("generated instances carry a truth path");
        let truth_segments = truth.segment_lengths(instance.num_inputs());

        let mut nlls = Vec::with_capacity(repeats);
        for repeat in 0..repeats {
            let decode_seed = split_seed(
                grid.seed,
                &format!(
                    "decode/distribution={distribution}/lambda={lambda:.6}/search={search}/randomness={randomness}/instance={instance_idx}/repeat={repeat}"
                ),
            );
            let config = SearchConfig {
                beam_width,
                stochastic,
                distribution,
                lambda,
                mode: SearchMode::FixedLength,
                max_outputs: 0,
                seed: decode_seed,
            };
            let (path, score) = decode(&instance, &config)?;
            if &path == truth {
                matches += 1;
            }
            let segments = path.segment_lengths(instance.num_inputs());
            let abs_err: usize = segments
                .iter()
                .zip(&truth_segments)
                .map(|(&a, &b)| a.abs_diff(b))
                .sum();
            mae_sum += abs_err as f64 / instance.num_inputs() as f64;
            nll_sum += -score;
            nlls.push(-score);
        }
        if stochastic {
            variance_sum += sample_variance(&nlls);
        }
    }

    let decodes = (grid.trials * repeats) as f64;
    Ok(ResultRecord {
        distribution,
        lambda,
        search,
        randomness,
        path_accuracy: matches as f64 / decodes,
        duration_mae: mae_sum / decodes,
        decoded_nll: nll_sum / decodes,
        run_variance: if stochastic {
            variance_sum / grid.trials as f64
        } else {
            0.0
        },
    })
}

fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)
}

/// Fixed CSV schema for experiment output.
pub const CSV_HEADER: &str =
    "distribution,lambda,search,randomness,path_accuracy,duration_mae,decoded_nll,run_variance";

/// Render records as CSV with the fixed column order and six-decimal
/// fixed-point reals; byte-stable for identical inputs.
pub fn render_csv(records: &[ResultRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{:.6},{},{},{:.6},{:.6},{:.6},{:.6}",
            r.distribution,
            r.lambda,
            r.search,
            r.randomness,
            r.path_accuracy,
            r.duration_mae,
            r.decoded_nll,
            r.run_variance
        )
        .expect("writing to a String cannot fail");
    }
    out
}
