//! The alignment state space: logit tables, monotone paths, the Emit/Shift
//! transition kernel, path scoring, and exhaustive enumeration.
//!
//! Indices are 1-based throughout the public surface: input positions run
//! `1..=I`, output steps `1..=J`, matching the on-disk JSON schema. A path
//! `z_1..z_J` starts at `z_1 = 1`, moves by increments of 0 (`Emit`) or 1
//! (`Shift`), and is *complete* when `z_J = I`. No probability factor is
//! charged at step 1 and none past step `J`.

use serde::{Deserialize, Serialize};

use crate::distributions::check_lambda;
use crate::error::{Error, Result};
use crate::numeric::log_sigmoid;

/// Hard cap on how many paths [`enumerate_paths`] will materialize.
pub const MAX_ENUMERATED_PATHS: u64 = 1_000_000;

/// Dense table of Emit/Shift log-odds, one per `(input, output-step)` cell,
/// plus the temperature that maps a logit to its Emit probability
/// `alpha1 = sigmoid(logit / lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionLogits {
    num_inputs: usize,
    max_outputs: usize,
    lambda: f64,
    logits: Vec<f64>,
}

impl TransitionLogits {
    /// Build from a row-major `I x J` table (input-major, step-minor).
    pub fn new(
        num_inputs: usize,
        max_outputs: usize,
        lambda: f64,
        logits: Vec<f64>,
    ) -> Result<Self> {
        if num_inputs == 0 {
            return Err(Error::invalid("I", "must be at least 1"));
        }
        if max_outputs == 0 {
            return Err(Error::invalid("J", "must be at least 1"));
        }
        check_lambda(lambda)?;
        let expected = num_inputs
            .checked_mul(max_outputs)
            .ok_or_else(|| Error::invalid("logits", "I*J overflows"))?;
        if logits.len() != expected {
            return Err(Error::invalid(
                "logits",
                format!("expected {expected} values (I*J), got {}", logits.len()),
            ));
        }
        if let Some(bad) = logits.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "logits",
                format!("all values must be finite, found {bad}"),
            ));
        }
        Ok(Self {
            num_inputs,
            max_outputs,
            lambda,
            logits,
        })
    }

    /// Table filled by a function of the 1-based cell `(i, j)`.
    pub fn from_fn(
        num_inputs: usize,
        max_outputs: usize,
        lambda: f64,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut logits = Vec::with_capacity(num_inputs * max_outputs);
        for i in 1..=num_inputs {
            for j in 1..=max_outputs {
                logits.push(f(i, j));
            }
        }
        Self::new(num_inputs, max_outputs, lambda, logits)
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn max_outputs(&self) -> usize {
        self.max_outputs
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(self.in_range(i, j), "cell ({i}, {j}) out of range");
        (i - 1) * self.max_outputs + (j - 1)
    }

    pub(crate) fn in_range(&self, i: usize, j: usize) -> bool {
        (1..=self.num_inputs).contains(&i) && (1..=self.max_outputs).contains(&j)
    }

    /// Raw logit at 1-based cell `(i, j)`. Panics out of range.
    pub fn log_alpha(&self, i: usize, j: usize) -> f64 {
        self.logits[self.offset(i, j)]
    }

    /// `ln alpha1(i, j)`: log-probability of `Emit` at the cell.
    pub fn log_emit(&self, i: usize, j: usize) -> f64 {
        log_sigmoid(self.log_alpha(i, j) / self.lambda)
    }

    /// `ln alpha2(i, j) = ln(1 - alpha1(i, j))`: log-probability of `Shift`.
    pub fn log_shift(&self, i: usize, j: usize) -> f64 {
        log_sigmoid(-self.log_alpha(i, j) / self.lambda)
    }
}

/// Optional per-cell output log-likelihoods, added on top of transition
/// scores. Absent emission is equivalent to an all-zero table.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionScores {
    num_inputs: usize,
    max_outputs: usize,
    scores: Vec<f64>,
}

impl EmissionScores {
    pub fn new(num_inputs: usize, max_outputs: usize, scores: Vec<f64>) -> Result<Self> {
        let expected = num_inputs
            .checked_mul(max_outputs)
            .ok_or_else(|| Error::invalid("emission", "I*J overflows"))?;
        if scores.len() != expected {
            return Err(Error::invalid(
                "emission",
                format!("expected {expected} values (I*J), got {}", scores.len()),
            ));
        }
        if let Some(bad) = scores.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "emission",
                format!("all values must be finite, found {bad}"),
            ));
        }
        Ok(Self {
            num_inputs,
            max_outputs,
            scores,
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn max_outputs(&self) -> usize {
        self.max_outputs
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Score at 1-based cell `(i, j)`. Panics out of range.
    pub fn score(&self, i: usize, j: usize) -> f64 {
        assert!(
            (1..=self.num_inputs).contains(&i) && (1..=self.max_outputs).contains(&j),
            "cell ({i}, {j}) out of range"
        );
        self.scores[(i - 1) * self.max_outputs + (j - 1)]
    }
}

/// A monotone alignment: 1-based input positions `z_1..z_J`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlignmentPath {
    positions: Vec<usize>,
}

impl AlignmentPath {
    /// Wrap raw positions without validation; see [`validate_path`].
    pub fn new(positions: Vec<usize>) -> Self {
        Self { positions }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn last(&self) -> Option<usize> {
        self.positions.last().copied()
    }

    /// Output steps spent on each input: `lengths[i - 1] = |{j : z_j = i}|`.
    /// For a valid path the lengths sum to the path length.
    pub fn segment_lengths(&self, num_inputs: usize) -> Vec<usize> {
        let mut lengths = vec![0usize; num_inputs];
        for &p in &self.positions {
            if p >= 1 && p <= num_inputs {
                lengths[p - 1] += 1;
            }
        }
        lengths
    }
}

/// First structural violation found in a path, with its 1-based step index.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathViolation {
    #[error("path is empty")]
    Empty,
    #[error("step 1 must align to input 1, got {got}")]
    StartNotOne { got: usize },
    #[error("step {step}: increment from {from} to {to} is not 0 or 1")]
    BadIncrement { step: usize, from: usize, to: usize },
    #[error("step {step}: position {position} outside 1..={num_inputs}")]
    OutOfBounds {
        step: usize,
        position: usize,
        num_inputs: usize,
    },
    #[error("path ends at input {last} instead of {num_inputs}")]
    Incomplete { last: usize, num_inputs: usize },
}

/// Check a path against the lattice invariants: starts at 1, unit
/// increments, positions within `1..=num_inputs`, and (when
/// `require_complete`) ends at `num_inputs`. Reports the first violation.
pub fn validate_path(
    path: &AlignmentPath,
    num_inputs: usize,
    require_complete: bool,
) -> std::result::Result<(), PathViolation> {
    let pos = path.positions();
    let Some(&first) = pos.first() else {
        return Err(PathViolation::Empty);
    };
    if first != 1 {
        return Err(PathViolation::StartNotOne { got: first });
    }
    if num_inputs < 1 {
        return Err(PathViolation::OutOfBounds {
            step: 1,
            position: first,
            num_inputs,
        });
    }
    for step in 2..=pos.len() {
        let from = pos[step - 2];
        let to = pos[step - 1];
        if to != from && to != from + 1 {
            return Err(PathViolation::BadIncrement { step, from, to });
        }
        if to > num_inputs {
            return Err(PathViolation::OutOfBounds {
                step,
                position: to,
                num_inputs,
            });
        }
    }
    if require_complete {
        let last = *pos.last().expect("nonempty");
        if last != num_inputs {
            return Err(PathViolation::Incomplete { last, num_inputs });
        }
    }
    Ok(())
}

/// Log-probability of moving to input `z` at output step `j` given the
/// previous position `z_prev`.
///
/// `Emit` (`z == z_prev`) costs `ln alpha1(z, j)`; `Shift`
/// (`z == z_prev + 1`) costs `ln alpha2(z - 1, j)`; any other move has
/// probability zero and returns `-inf`. The two live branches out of a state
/// exponentiate and sum to one.
pub fn transition_log_prob(
    z_prev: usize,
    z: usize,
    j: usize,
    model: &TransitionLogits,
) -> Result<f64> {
    let num_inputs = model.num_inputs();
    let max_outputs = model.max_outputs();
    if z_prev < 1 || z_prev > num_inputs || z < 1 || z > num_inputs {
        return Err(Error::IndexOutOfRange {
            i: z_prev.min(z),
            j,
            num_inputs,
            max_outputs,
        });
    }
    if j < 2 || j > max_outputs {
        return Err(Error::IndexOutOfRange {
            i: z,
            j,
            num_inputs,
            max_outputs,
        });
    }
    if z == z_prev {
        Ok(model.log_emit(z, j))
    } else if z == z_prev + 1 {
        Ok(model.log_shift(z - 1, j))
    } else {
        Ok(f64::NEG_INFINITY)
    }
}

/// Total log-probability of a path prefix: transition factors for steps
/// `2..=len` plus emission scores for steps `1..=len`. Step 1 carries no
/// transition factor (the alignment is pinned to input 1) and a complete
/// path is not charged for leaving the last input.
pub fn path_log_prob(
    path: &AlignmentPath,
    model: &TransitionLogits,
    emission: Option<&EmissionScores>,
) -> Result<f64> {
    validate_path(path, model.num_inputs(), false)?;
    if path.len() > model.max_outputs() {
        return Err(Error::invalid(
            "path",
            format!("length {} exceeds J = {}", path.len(), model.max_outputs()),
        ));
    }
    if let Some(e) = emission {
        if e.num_inputs() != model.num_inputs() || e.max_outputs() != model.max_outputs() {
            return Err(Error::invalid(
                "emission",
                format!(
                    "shape {}x{} does not match lattice {}x{}",
                    e.num_inputs(),
                    e.max_outputs(),
                    model.num_inputs(),
                    model.max_outputs()
                ),
            ));
        }
    }
    let pos = path.positions();
    let mut total = 0.0;
    for (idx, &p) in pos.iter().enumerate() {
        let j = idx + 1;
        if j >= 2 {
            total += transition_log_prob(pos[idx - 1], p, j, model)?;
        }
        if let Some(e) = emission {
            total += e.score(p, j);
        }
    }
    Ok(total)
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for step in 1..=k {
        acc = acc.saturating_mul((n - k + step) as u128) / step as u128;
    }
    acc
}

/// Number of complete monotone paths for an `I x J` lattice:
/// `C(J - 1, I - 1)`, saturating at `u128::MAX`.
pub fn path_count(num_inputs: usize, max_outputs: usize) -> u128 {
    if num_inputs == 0 || max_outputs == 0 || num_inputs > max_outputs {
        return 0;
    }
    binomial(max_outputs as u64 - 1, num_inputs as u64 - 1)
}

/// Every complete monotone path for an `I x J` lattice, in lexicographic
/// order of positions. `I > J` yields an empty collection; a count above
/// [`MAX_ENUMERATED_PATHS`] is rejected.
pub fn enumerate_paths(num_inputs: usize, max_outputs: usize) -> Result<Vec<AlignmentPath>> {
    if num_inputs == 0 {
        return Err(Error::invalid("I", "must be at least 1"));
    }
    if max_outputs == 0 {
        return Err(Error::invalid("J", "must be at least 1"));
    }
    if num_inputs > max_outputs {
        return Ok(Vec::new());
    }
    let count = path_count(num_inputs, max_outputs);
    if count > MAX_ENUMERATED_PATHS as u128 {
        return Err(Error::EnumerationGuard {
            count,
            limit: MAX_ENUMERATED_PATHS,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut prefix = Vec::with_capacity(max_outputs);
    prefix.push(1usize);
    extend_all(&mut prefix, num_inputs, max_outputs, &mut out);
    debug_assert_eq!(out.len() as u128, count);
    Ok(out)
}

fn extend_all(
    prefix: &mut Vec<usize>,
    num_inputs: usize,
    max_outputs: usize,
    out: &mut Vec<AlignmentPath>,
) {
    let j = prefix.len();
    let i = *prefix.last().expect("nonempty prefix");
    if j == max_outputs {
        if i == num_inputs {
            out.push(AlignmentPath::new(prefix.clone()));
        }
        return;
    }
    // Emit keeps the position; prune branches that can no longer reach the
    // last input in the remaining steps.
    if num_inputs - i < max_outputs - j {
        prefix.push(i);
        extend_all(prefix, num_inputs, max_outputs, out);
        prefix.pop();
    }
    if i < num_inputs {
        prefix.push(i + 1);
        extend_all(prefix, num_inputs, max_outputs, out);
        prefix.pop();
    }
}

/// A bundled experiment instance: the logit table plus optional emission
/// scores and an optional ground-truth path.
///
/// Serializes to the flat JSON schema
/// `{"I", "J", "lambda", "logits", "emission"?, "truth_path"?}` with
/// row-major `I x J` tables and a 1-based `truth_path` of length `J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceWire", into = "InstanceWire")]
pub struct LatticeInstance {
    model: TransitionLogits,
    emission: Option<EmissionScores>,
    truth_path: Option<AlignmentPath>,
}

impl LatticeInstance {
    pub fn new(model: TransitionLogits) -> Self {
        Self {
            model,
            emission: None,
            truth_path: None,
        }
    }

    pub fn with_emission(mut self, emission: EmissionScores) -> Result<Self> {
        if emission.num_inputs() != self.model.num_inputs()
            || emission.max_outputs() != self.model.max_outputs()
        {
            return Err(Error::invalid(
                "emission",
                format!(
                    "shape {}x{} does not match lattice {}x{}",
                    emission.num_inputs(),
                    emission.max_outputs(),
                    self.model.num_inputs(),
                    self.model.max_outputs()
                ),
            ));
        }
        self.emission = Some(emission);
        Ok(self)
    }

    /// Attach a ground-truth path; must be complete and exactly `J` long.
    pub fn with_truth_path(mut self, path: AlignmentPath) -> Result<Self> {
        if path.len() != self.model.max_outputs() {
            return Err(Error::invalid(
                "truth_path",
                format!(
                    "length {} does not match J = {}",
                    path.len(),
                    self.model.max_outputs()
                ),
            ));
        }
        validate_path(&path, self.model.num_inputs(), true)?;
        self.truth_path = Some(path);
        Ok(self)
    }

    pub fn model(&self) -> &TransitionLogits {
        &self.model
    }

    pub fn emission(&self) -> Option<&EmissionScores> {
        self.emission.as_ref()
    }

    pub fn truth_path(&self) -> Option<&AlignmentPath> {
        self.truth_path.as_ref()
    }

    pub fn num_inputs(&self) -> usize {
        self.model.num_inputs()
    }

    pub fn max_outputs(&self) -> usize {
        self.model.max_outputs()
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceWire {
    #[serde(rename = "I")]
    num_inputs: usize,
    #[serde(rename = "J")]
    max_outputs: usize,
    lambda: f64,
    logits: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    emission: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truth_path: Option<Vec<usize>>,
}

impl TryFrom<InstanceWire> for LatticeInstance {
    type Error = Error;

    fn try_from(wire: InstanceWire) -> Result<Self> {
        let model =
            TransitionLogits::new(wire.num_inputs, wire.max_outputs, wire.lambda, wire.logits)?;
        let mut instance = LatticeInstance::new(model);
        if let Some(scores) = wire.emission {
            instance = instance.with_emission(EmissionScores::new(
                wire.num_inputs,
                wire.max_outputs,
                scores,
            )?)?;
        }
        if let Some(path) = wire.truth_path {
            instance = instance.with_truth_path(AlignmentPath::new(path))?;
        }
        Ok(instance)
    }
}

impl From<LatticeInstance> for InstanceWire {
    fn from(instance: LatticeInstance) -> Self {
        InstanceWire {
            num_inputs: instance.model.num_inputs(),
            max_outputs: instance.model.max_outputs(),
            lambda: instance.model.lambda(),
            logits: instance.model.logits.clone(),
            emission: instance.emission.map(|e| e.scores),
            truth_path: instance.truth_path.map(|p| p.positions),
        }
    }
}
