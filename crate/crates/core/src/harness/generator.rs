//! Seeded synthetic lattice instances with model-consistent ground truth.

use serde::{Deserialize, Serialize};

use crate::distributions::NoiseSource;
use crate::error::{Error, Result};
use crate::lattice::{AlignmentPath, EmissionScores, LatticeInstance, TransitionLogits};
use crate::likelihood::ForwardTable;
use crate::numeric::sigmoid;

/// Recipe for one synthetic instance: logits are drawn uniformly from
/// `[-logit_scale, logit_scale]`, the truth path is sampled from the model's
/// own distribution over complete paths, and emission scores (when
/// `emission_sigma` is set) are Gaussian log-densities peaked along the
/// truth path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(rename = "I")]
    pub num_inputs: usize,
    #[serde(rename = "J")]
    pub max_outputs: usize,
    pub logit_scale: f64,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emission_sigma: Option<f64>,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_inputs == 0 {
            return Err(Error::invalid("I", "must be at least 1"));
        }
        if self.max_outputs == 0 {
            return Err(Error::invalid("J", "must be at least 1"));
        }
        if self.num_inputs > self.max_outputs {
            return Err(Error::Infeasible {
                num_inputs: self.num_inputs,
                max_outputs: self.max_outputs,
            });
        }
        if !self.logit_scale.is_finite() || self.logit_scale < 0.0 {
            return Err(Error::invalid(
                "logit_scale",
                format!("must be finite and >= 0, got {}", self.logit_scale),
            ));
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(Error::invalid(
                "lambda",
                format!("must be positive and finite, got {}", self.lambda),
            ));
        }
        if let Some(sigma) = self.emission_sigma {
            if !sigma.is_finite() || sigma <= 0.0 {
                return Err(Error::invalid(
                    "emission_sigma",
                    format!("must be positive and finite, got {sigma}"),
                ));
            }
        }
        Ok(())
    }
}

/// Sample a complete path from the model's conditional distribution over
/// complete alignments: forward pass, then backward draws of each
/// predecessor in proportion to its forward mass times the transition.
///
/// With all-zero logits every complete path carries equal mass, so the
/// sampled truth is uniform over the whole path set.
fn sample_complete_path(
    instance: &LatticeInstance,
    noise: &mut NoiseSource,
) -> Result<AlignmentPath> {
    let model = instance.model();
    let num_inputs = model.num_inputs();
    let max_outputs = model.max_outputs();
    if num_inputs > max_outputs {
        return Err(Error::Infeasible {
            num_inputs,
            max_outputs,
        });
    }
    let table = ForwardTable::compute(instance);
    let mut positions = vec![0usize; max_outputs];
    positions[max_outputs - 1] = num_inputs;
    let mut current = num_inputs;
    for j in (2..=max_outputs).rev() {
        let stay = table.get(current, j - 1) + model.log_emit(current, j);
        let advance = if current >= 2 {
            table.get(current - 1, j - 1) + model.log_shift(current - 1, j)
        } else {
            f64::NEG_INFINITY
        };
        let prev = if advance == f64::NEG_INFINITY {
            current
        } else if stay == f64::NEG_INFINITY {
            current - 1
        } else {
            let p_emit = sigmoid(stay - advance);
            if noise.uniform() < p_emit {
                current
            } else {
                current - 1
            }
        };
        positions[j - 2] = prev;
        current = prev;
    }
    debug_assert_eq!(positions[0], 1);
    Ok(AlignmentPath::new(positions))
}

fn emission_from_truth(
    truth: &AlignmentPath,
    num_inputs: usize,
    max_outputs: usize,
    sigma: f64,
) -> Result<EmissionScores> {
    let log_norm = -(sigma * (2.0 * std::f64::consts::PI).sqrt()).ln();
    let mut scores = Vec::with_capacity(num_inputs * max_outputs);
    for i in 1..=num_inputs {
        for j in 1..=max_outputs {
            let target = truth.positions()[j - 1] as f64;
            let dev = (i as f64 - target) / sigma;
            scores.push(log_norm - 0.5 * dev * dev);
        }
    }
    EmissionScores::new(num_inputs, max_outputs, scores)
}

/// Build one instance from the spec: logits, a model-consistent complete
/// truth path, and optional truth-peaked emission scores. Bit-deterministic
/// in the seed.
pub fn generate_instance(spec: &GeneratorSpec) -> Result<LatticeInstance> {
    spec.validate()?;
    let mut noise = NoiseSource::from_seed(spec.seed);
    let model =
        TransitionLogits::from_fn(spec.num_inputs, spec.max_outputs, spec.lambda, |_, _| {
            spec.logit_scale * (2.0 * noise.uniform() - 1.0)
        })?;
    let bare = LatticeInstance::new(model);
    let truth = sample_complete_path(&bare, &mut noise)?;
    let mut instance = bare;
    if let Some(sigma) = spec.emission_sigma {
        instance = instance.with_emission(emission_from_truth(
            &truth,
            spec.num_inputs,
            spec.max_outputs,
            sigma,
        )?)?;
    }
    instance.with_truth_path(truth)
}
