//! Shared fixtures for the benchmark targets.

use monoalign_core::{LatticeInstance, NoiseSource, TransitionLogits};

/// Transition-only instance with uniform random logits in `[-2, 2]`.
pub fn bench_instance(
    num_inputs: usize,
    max_outputs: usize,
    lambda: f64,
    seed: u64,
) -> LatticeInstance {
    let mut noise = NoiseSource::from_seed(seed);
    let model = TransitionLogits::from_fn(num_inputs, max_outputs, lambda, |_, _| {
        4.0 * noise.uniform() - 2.0
    })
    .expect("valid benchmark model");
    LatticeInstance::new(model)
}
