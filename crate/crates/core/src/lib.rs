//! Hard monotonic alignment between an input sequence and a longer output
//! sequence, modeled through binary Emit/Shift transitions.
//!
//! At every output step the alignment either re-emits from its current input
//! position (`Emit`) or advances to the next one (`Shift`); a table of
//! logits with a temperature `lambda` gives the per-cell Emit probability
//! `sigmoid(logit / lambda)`. On that state space the crate provides:
//!
//! * [`distributions`] — Logistic noise, Gumbel-max Bernoulli sampling, the
//!   binary Concrete relaxation with its exact log-density, discretization,
//!   and the reparameterized derivative of the relaxed sampler;
//! * [`lattice`] — logit tables, monotone paths, the transition kernel,
//!   path scoring, exhaustive enumeration, and the JSON instance format;
//! * [`likelihood`] — the exact marginal over all complete alignments by a
//!   log-space forward recursion, cross-checked by brute force;
//! * [`decoding`] — deterministic and stochastic greedy/beam search for both
//!   noise placements, with feasibility pruning for fixed-length decoding;
//! * [`harness`] — seeded synthetic instances, the experiment grid with CSV
//!   output, and a self-test battery.
//!
//! All randomness flows through explicitly seeded [`NoiseSource`] streams;
//! identical seeds give bit-identical results.

pub mod decoding;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod likelihood;
pub mod numeric;

pub use decoding::{
    decode, expected_emit_run_check, greedy_step, BeamHypothesis, DistributionKind, SearchConfig,
    SearchMode,
};
pub use distributions::{
    binconcrete_log_density, binconcrete_sample, binconcrete_sample_grad, binconcrete_transform,
    discretize, emit_prob, sample_bernoulli, sample_logistic, sigmoid_temp, BinConcreteParams,
    NoiseSource, TransitionAction,
};
pub use error::{Error, Result};
pub use harness::{
    generate_instance, render_csv, run_grid, run_selftest, split_seed, CheckOutcome, ConditionGrid,
    GeneratorSpec, Randomness, ResultRecord, SearchKind, CSV_HEADER,
};
pub use lattice::{
    enumerate_paths, path_count, path_log_prob, transition_log_prob, validate_path, AlignmentPath,
    EmissionScores, LatticeInstance, PathViolation, TransitionLogits,
};
pub use likelihood::{
    brute_force_marginal, forward_marginal, negative_log_likelihood, ForwardTable,
};
