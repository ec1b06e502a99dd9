//! Exact marginal likelihood over all complete alignments.
//!
//! [`forward_marginal`] runs the forward recursion in log space;
//! [`brute_force_marginal`] sums the same mass by explicit path enumeration
//! and exists to cross-check it. Both charge nothing at step 1 (the
//! alignment is pinned to input 1) and nothing for leaving the last input,
//! so they agree cell for cell with [`crate::lattice::path_log_prob`].

use crate::error::{Error, Result};
use crate::lattice::{enumerate_paths, path_log_prob, LatticeInstance};
use crate::numeric::{log_add_exp, log_sum_exp};

/// Log-space forward masses: `get(i, j)` is the log-probability of all path
/// prefixes that reach input `i` at output step `j`.
#[derive(Debug, Clone)]
pub struct ForwardTable {
    num_inputs: usize,
    max_outputs: usize,
    values: Vec<f64>,
}

impl ForwardTable {
    /// Fill the table for an instance. Output-major: step `j` is computed
    /// from step `j - 1` in one sweep.
    pub fn compute(instance: &LatticeInstance) -> Self {
        let model = instance.model();
        let num_inputs = model.num_inputs();
        let max_outputs = model.max_outputs();
        let emis = |i: usize, j: usize| instance.emission().map_or(0.0, |e| e.score(i, j));

        let mut values = vec![f64::NEG_INFINITY; num_inputs * max_outputs];
        let idx = |i: usize, j: usize| (i - 1) * max_outputs + (j - 1);

        values[idx(1, 1)] = emis(1, 1);
        for j in 2..=max_outputs {
            for i in 1..=num_inputs {
                let stay = values[idx(i, j - 1)] + model.log_emit(i, j);
                let advance = if i >= 2 {
                    values[idx(i - 1, j - 1)] + model.log_shift(i - 1, j)
                } else {
                    f64::NEG_INFINITY
                };
                let mass = log_add_exp(stay, advance);
                values[idx(i, j)] = if mass == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    mass + emis(i, j)
                };
            }
        }
        Self {
            num_inputs,
            max_outputs,
            values,
        }
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn max_outputs(&self) -> usize {
        self.max_outputs
    }

    /// Log mass at 1-based cell `(i, j)`. Panics out of range.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(
            (1..=self.num_inputs).contains(&i) && (1..=self.max_outputs).contains(&j),
            "cell ({i}, {j}) out of range"
        );
        self.values[(i - 1) * self.max_outputs + (j - 1)]
    }
}

/// Log-marginal likelihood of the instance, summed over every complete
/// alignment by the forward recursion.
///
/// An infeasible lattice (`I > J`) is a zero-probability event and returns
/// `-inf`; a NaN anywhere is reported as a numeric failure instead.
pub fn forward_marginal(instance: &LatticeInstance) -> Result<f64> {
    if instance.num_inputs() > instance.max_outputs() {
        return Ok(f64::NEG_INFINITY);
    }
    let table = ForwardTable::compute(instance);
    let result = table.get(instance.num_inputs(), instance.max_outputs());
    if result.is_nan() {
        return Err(Error::NumericFailure {
            context: "forward recursion",
        });
    }
    Ok(result)
}

/// Log-marginal likelihood by explicit enumeration: log-sum-exp of
/// [`path_log_prob`] over [`enumerate_paths`]. Subject to the enumeration
/// guard; the oracle counterpart of [`forward_marginal`].
pub fn brute_force_marginal(instance: &LatticeInstance) -> Result<f64> {
    let paths = enumerate_paths(instance.num_inputs(), instance.max_outputs())?;
    let scores = paths
        .iter()
        .map(|p| path_log_prob(p, instance.model(), instance.emission()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(log_sum_exp(&scores))
}

/// `-log p(y | x)`: the quantity a trainer of the transition table would
/// minimize.
pub fn negative_log_likelihood(instance: &LatticeInstance) -> Result<f64> {
    Ok(-forward_marginal(instance)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{AlignmentPath, TransitionLogits};

    fn instance(i: usize, j: usize, lambda: f64, logit: f64) -> LatticeInstance {
        LatticeInstance::new(TransitionLogits::new(i, j, lambda, vec![logit; i * j]).unwrap())
    }

    #[test]
    fn two_by_three_marginal_is_log_half() {
        let m = forward_marginal(&instance(2, 3, 1.0, 0.0)).unwrap();
        assert!((m - 0.5_f64.ln()).abs() < 1e-14);
        let b = brute_force_marginal(&instance(2, 3, 1.0, 0.0)).unwrap();
        assert!((b - 0.5_f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn saturated_single_input_marginal_is_near_zero() {
        let m = forward_marginal(&instance(1, 6, 1.0, 1e3)).unwrap();
        assert!(m.abs() < 1e-9, "got {m}");
    }

    #[test]
    fn unique_path_matches_its_score() {
        let inst = instance(3, 3, 1.0, 0.7);
        let b = brute_force_marginal(&inst).unwrap();
        let p = path_log_prob(&AlignmentPath::new(vec![1, 2, 3]), inst.model(), None).unwrap();
        assert!((b - p).abs() < 1e-14);
        let f = forward_marginal(&inst).unwrap();
        assert!((f - p).abs() < 1e-12);
    }

    #[test]
    fn infeasible_returns_neg_inf_not_error() {
        assert_eq!(
            forward_marginal(&instance(4, 3, 1.0, 0.0)).unwrap(),
            f64::NEG_INFINITY
        );
        assert_eq!(
            brute_force_marginal(&instance(4, 3, 1.0, 0.0)).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn nll_of_two_by_three_is_log_two() {
        let v = negative_log_likelihood(&instance(2, 3, 1.0, 0.0)).unwrap();
        assert!((v - 2.0_f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn forward_table_boundary_row() {
        let inst = instance(3, 4, 1.0, 0.3);
        let table = ForwardTable::compute(&inst);
        assert_eq!(table.get(1, 1), 0.0);
        assert_eq!(table.get(2, 1), f64::NEG_INFINITY);
        assert_eq!(table.get(3, 1), f64::NEG_INFINITY);
        // Unreachable upper-right corner cells stay empty too.
        assert_eq!(table.get(3, 2), f64::NEG_INFINITY);
    }

    #[test]
    fn extreme_logits_stay_finite() {
        for lambda in [1.0, 0.2, 0.05] {
            for logit in [-30.0, 30.0] {
                let m = forward_marginal(&instance(3, 6, lambda, logit)).unwrap();
                assert!(m.is_finite(), "lambda={lambda} logit={logit} gave {m}");
            }
        }
    }

    #[test]
    fn complete_mass_at_most_one() {
        let inst = instance(3, 7, 0.2, 0.9);
        let m = forward_marginal(&inst).unwrap();
        assert!(m <= 1e-12, "mass above 1: {m}");
    }
}
