//! Deterministic input builders shared by the benchmarks, kept out of the
//! bench files so every benchmark measures the same workloads.

use mact_core::{encode_actions, generate_synthetic, ActionString, EmbeddingBatch};

/// Synthetic action strings with the given mean length.
pub fn bench_strings(seed: u64, n: usize, mean_len: usize) -> Vec<ActionString> {
    generate_synthetic(seed, n, mean_len)
        .episodes
        .iter()
        .map(|e| encode_actions(&e.trajectory))
        .collect()
}

/// One long action string built by concatenating synthetic trajectories.
pub fn long_string(seed: u64, at_least: usize) -> ActionString {
    let mut s = String::new();
    let mut chunk_seed = seed;
    while s.len() < at_least {
        for a in bench_strings(chunk_seed, 8, 24) {
            s.push_str(a.as_str());
        }
        chunk_seed += 1;
    }
    s.truncate(at_least);
    ActionString::new(s).expect("concatenation of valid strings is valid")
}

/// A contrastive batch with pseudo-random but fully deterministic entries.
pub fn bench_batch(states: usize, instructions: usize, dim: usize) -> EmbeddingBatch {
    // A tiny LCG keeps this crate free of RNG dependencies.
    let mut state = 0x2545F4914F6CDD1Du64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let vector = |next: &mut dyn FnMut() -> f64, d: usize| (0..d).map(|_| next()).collect();
    EmbeddingBatch {
        states: (0..states).map(|_| vector(&mut next, dim)).collect(),
        instructions: (0..instructions).map(|_| vector(&mut next, dim)).collect(),
        pos: (0..states).map(|t| t % instructions).collect(),
        temperature: 0.07,
    }
}
