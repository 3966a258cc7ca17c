//! Seeded Gumbel-softmax sampling with a straight-through estimator.
//!
//! Each draw perturbs the logits with Gumbel noise `g = -ln(-ln(u))`,
//! divides by the temperature, and takes a numerically stable softmax. The
//! argmax of the perturbed logits is distributed as `softmax(logits)`
//! regardless of temperature, so the hard index is an unbiased categorical
//! sample while the relaxed vector stays differentiable.
//!
//! Randomness comes from a ChaCha8 stream cipher seeded through the standard
//! 64-bit seed expansion, so a given `(logits, temperature, seed)` triple
//! yields the same sample on every platform. Reimplementations in other
//! languages should reproduce the distribution, not the bits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Uniform draws are clamped to `[CLAMP, 1 - CLAMP]` before the double log,
/// so the noise is always finite.
pub const UNIFORM_CLAMP: f64 = 1e-12;

/// Errors for sampling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GumbelError {
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("logits must be nonempty")]
    EmptyLogits,
}

/// One sample: the relaxed softmax vector, the hard argmax index, and the
/// temperature that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GumbelSample {
    pub relaxed: Vec<f64>,
    pub hard_index: usize,
    pub temperature: f64,
}

/// The two halves of the straight-through estimator: the one-hot forward
/// value and the relaxed vector that stands in for it on the gradient path.
#[derive(Debug, Clone, PartialEq)]
pub struct StraightThrough {
    pub forward: Vec<f64>,
    pub surrogate: Vec<f64>,
}

/// Draws one Gumbel-softmax sample.
///
/// The relaxed vector always sums to 1 up to rounding; with a single logit it
/// is exactly `[1.0]`. Lower temperatures push the relaxed vector toward the
/// one-hot argmax without changing the argmax distribution.
pub fn gumbel_softmax(
    logits: &[f64],
    temperature: f64,
    rng_seed: u64,
) -> Result<GumbelSample, GumbelError> {
    if logits.is_empty() {
        return Err(GumbelError::EmptyLogits);
    }
    if temperature <= 0.0 || temperature.is_nan() {
        return Err(GumbelError::NonPositiveTemperature(temperature));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let perturbed: Vec<f64> = logits
        .iter()
        .map(|&logit| {
            let u: f64 = rng.gen::<f64>().clamp(UNIFORM_CLAMP, 1.0 - UNIFORM_CLAMP);
            let noise = -(-u.ln()).ln();
            (logit + noise) / temperature
        })
        .collect();

    let mut hard_index = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &x) in perturbed.iter().enumerate() {
        if x > best {
            best = x;
            hard_index = i;
        }
    }
    let sum: f64 = perturbed.iter().map(|&x| (x - best).exp()).sum();
    let relaxed = perturbed.iter().map(|&x| (x - best).exp() / sum).collect();

    Ok(GumbelSample {
        relaxed,
        hard_index,
        temperature,
    })
}

/// Splits a sample into its straight-through halves: a one-hot forward
/// vector at `hard_index` and the relaxed vector as gradient surrogate.
pub fn straight_through(sample: &GumbelSample) -> StraightThrough {
    let mut forward = vec![0.0; sample.relaxed.len()];
    forward[sample.hard_index] = 1.0;
    StraightThrough {
        forward,
        surrogate: sample.relaxed.clone(),
    }
}
