//! Contrastive state-instruction alignment loss, sequence cross entropy, and
//! negative-set construction.
//!
//! The contrastive loss treats each state embedding as a query against a row
//! of candidate instruction embeddings: temperature-scaled inner products go
//! through a softmax and the loss is the negative log probability of the
//! state's positive instruction, summed over states. Both loss functions
//! return analytic gradients alongside the value; log-sum-exp terms subtract
//! the row maximum before exponentiating, so large similarities cannot
//! overflow.
//!
//! All arithmetic is `f64` and accumulation order is fixed (plain sequential
//! loops), so results are reproducible bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// Softmax temperature used when no explicit value is given.
pub const DEFAULT_TEMPERATURE: f64 = 0.07;
/// Embedding width used by demo tooling; every function accepts any width.
pub const DEFAULT_EMBED_DIM: usize = 768;

/// Errors for loss computation and negative-set construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlignError {
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("positive index {value} at state {state} is out of range for {n} instructions")]
    PositionOutOfRange { state: usize, value: usize, n: usize },
    #[error("batch has no candidate instructions")]
    EmptyInstructions,
    #[error("target {value} at step {step} is out of range for {k} classes")]
    TargetOutOfRange { step: usize, value: usize, k: usize },
    #[error("state {state}: no positive instruction (task {task}, position {position})")]
    MissingPositive {
        state: usize,
        task: usize,
        position: usize,
    },
}

/// A batch for the contrastive loss: `T` state embeddings, `N` candidate
/// instruction embeddings shared by every state, the positive index per
/// state, and the softmax temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingBatch {
    pub states: Vec<Vec<f64>>,
    pub instructions: Vec<Vec<f64>>,
    pub pos: Vec<usize>,
    pub temperature: f64,
}

impl EmbeddingBatch {
    /// Builds a batch and checks every structural invariant.
    pub fn new(
        states: Vec<Vec<f64>>,
        instructions: Vec<Vec<f64>>,
        pos: Vec<usize>,
        temperature: f64,
    ) -> Result<Self, AlignError> {
        let batch = EmbeddingBatch {
            states,
            instructions,
            pos,
            temperature,
        };
        batch.validate()?;
        Ok(batch)
    }

    /// Checks dimensions, temperature, and positive indices.
    pub fn validate(&self) -> Result<(), AlignError> {
        if self.temperature <= 0.0 || self.temperature.is_nan() {
            return Err(AlignError::NonPositiveTemperature(self.temperature));
        }
        if self.instructions.is_empty() {
            return Err(AlignError::EmptyInstructions);
        }
        let dim = self
            .states
            .first()
            .or_else(|| self.instructions.first())
            .map(Vec::len)
            .unwrap_or(0);
        for (i, v) in self.states.iter().enumerate() {
            if v.len() != dim {
                return Err(AlignError::DimensionMismatch {
                    context: format!("state {i} has dim {}, expected {dim}", v.len()),
                });
            }
        }
        for (i, v) in self.instructions.iter().enumerate() {
            if v.len() != dim {
                return Err(AlignError::DimensionMismatch {
                    context: format!("instruction {i} has dim {}, expected {dim}", v.len()),
                });
            }
        }
        if self.pos.len() != self.states.len() {
            return Err(AlignError::DimensionMismatch {
                context: format!(
                    "pos has length {}, expected one entry per state ({})",
                    self.pos.len(),
                    self.states.len()
                ),
            });
        }
        for (state, &value) in self.pos.iter().enumerate() {
            if value >= self.instructions.len() {
                return Err(AlignError::PositionOutOfRange {
                    state,
                    value,
                    n: self.instructions.len(),
                });
            }
        }
        Ok(())
    }
}

/// A loss value with analytic gradients, shaped like the inputs that
/// produced it.
///
/// For the contrastive loss `grad_states` is `T x D` and `grad_instructions`
/// is `N x D`. For [`sequence_cross_entropy`] the gradient over the logits
/// occupies `grad_states` (one row per step) and `grad_instructions` is
/// empty.
#[derive(Debug, Clone, PartialEq)]
pub struct LossWithGrad {
    pub value: f64,
    pub grad_states: Vec<Vec<f64>>,
    pub grad_instructions: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row-stable softmax pieces: given logits, returns (log-sum-exp, probs).
fn softmax_with_lse(logits: &[f64]) -> (f64, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|&x| (x - max).exp()).sum();
    let lse = max + sum.ln();
    let probs = logits.iter().map(|&x| (x - lse).exp()).collect();
    (lse, probs)
}

/// Contrastive alignment loss over a batch, with gradients for every state
/// and instruction embedding.
///
/// For each state `t` with similarity row `s_{t,n} = <state_t, instr_n> /
/// temperature`, the loss adds `logsumexp_n(s_{t,n}) - s_{t,pos(t)}`. With a
/// single candidate the softmax is exactly 1, so the loss and all gradients
/// are exactly zero.
pub fn contrastive_loss(batch: &EmbeddingBatch) -> Result<LossWithGrad, AlignError> {
    batch.validate()?;
    let t_count = batch.states.len();
    let n_count = batch.instructions.len();
    let dim = batch
        .states
        .first()
        .or_else(|| batch.instructions.first())
        .map(Vec::len)
        .unwrap_or(0);
    let inv_tau = 1.0 / batch.temperature;

    let mut value = 0.0;
    let mut grad_states = vec![vec![0.0; dim]; t_count];
    let mut grad_instructions = vec![vec![0.0; dim]; n_count];

    for (t, state) in batch.states.iter().enumerate() {
        let logits: Vec<f64> = batch
            .instructions
            .iter()
            .map(|instr| dot(state, instr) * inv_tau)
            .collect();
        let (lse, probs) = softmax_with_lse(&logits);
        let positive = batch.pos[t];
        value += lse - logits[positive];
        for (n, &p) in probs.iter().enumerate() {
            let coefficient = (p - if n == positive { 1.0 } else { 0.0 }) * inv_tau;
            if coefficient == 0.0 {
                continue;
            }
            let instr = &batch.instructions[n];
            for d in 0..dim {
                grad_states[t][d] += coefficient * instr[d];
                grad_instructions[n][d] += coefficient * state[d];
            }
        }
    }

    Ok(LossWithGrad {
        value,
        grad_states,
        grad_instructions,
    })
}

/// Mean token-level cross entropy over a sequence of logit rows.
///
/// `logits` is `S x K`, `targets` holds one class index per step. Returns the
/// mean of `-log softmax(logits_s)[target_s]` and the gradient over the
/// logits in `grad_states` (also `S x K`, already divided by `S`). An empty
/// sequence has loss 0 and no gradient rows.
pub fn sequence_cross_entropy(
    logits: &[Vec<f64>],
    targets: &[usize],
) -> Result<LossWithGrad, AlignError> {
    if logits.len() != targets.len() {
        return Err(AlignError::DimensionMismatch {
            context: format!(
                "{} logit rows but {} targets",
                logits.len(),
                targets.len()
            ),
        });
    }
    let steps = logits.len();
    if steps == 0 {
        return Ok(LossWithGrad {
            value: 0.0,
            grad_states: Vec::new(),
            grad_instructions: Vec::new(),
        });
    }
    let k = logits[0].len();
    for (step, row) in logits.iter().enumerate() {
        if row.len() != k {
            return Err(AlignError::DimensionMismatch {
                context: format!("logit row {step} has {} classes, expected {k}", row.len()),
            });
        }
    }
    for (step, &value) in targets.iter().enumerate() {
        if value >= k {
            return Err(AlignError::TargetOutOfRange { step, value, k });
        }
    }

    let scale = 1.0 / steps as f64;
    let mut value = 0.0;
    let mut grad = Vec::with_capacity(steps);
    for (row, &target) in logits.iter().zip(targets) {
        let (lse, probs) = softmax_with_lse(row);
        value += (lse - row[target]) * scale;
        let mut g: Vec<f64> = probs.iter().map(|&p| p * scale).collect();
        g[target] -= scale;
        grad.push(g);
    }

    Ok(LossWithGrad {
        value,
        grad_states: grad,
        grad_instructions: Vec::new(),
    })
}

/// Training stage for [`composed_loss`]. The composition is the same
/// unweighted sum in both stages; the stage names which task loss is being
/// added (meta-action prediction when pretraining, low-level action
/// prediction when fine-tuning).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Pretrain,
    Finetune,
}

/// Unweighted sum of the contrastive loss and the stage's task loss.
pub fn composed_loss(_stage: Stage, contrastive: &LossWithGrad, task: &LossWithGrad) -> f64 {
    contrastive.value + task.value
}

/// How one candidate instruction relates to the state it is a candidate for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    /// The state's own gold instruction.
    Positive,
    /// Another instruction from the same task.
    IntraTask,
    /// A sampled instruction from a different task.
    InterTask,
}

/// Candidate instructions for one state: global instruction ids, each tagged
/// with how it was chosen. The positive always sits at index 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateCandidates {
    pub candidates: Vec<(usize, CandidateKind)>,
}

/// Per-state candidate layout produced by [`build_negative_sets`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchLayout {
    pub per_state: Vec<StateCandidates>,
}

/// Builds the candidate layout for a batch of states.
///
/// `corpus_pos[t] = (task_id, position)` names state `t`'s task and the
/// position of its gold instruction within that task. `instruction_index`
/// maps each task to its instructions' global ids, in order. Every state gets
/// its positive first, then the task's other instructions in order, then
/// `inter_k` instructions sampled without replacement from all other tasks
/// (fewer when not enough exist). Sampling is driven by a seeded generator,
/// so the layout is a pure function of the arguments.
pub fn build_negative_sets(
    corpus_pos: &[(usize, usize)],
    instruction_index: &BTreeMap<usize, Vec<usize>>,
    inter_k: usize,
    seed: u64,
) -> Result<BatchLayout, AlignError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_state = Vec::with_capacity(corpus_pos.len());
    for (state, &(task, position)) in corpus_pos.iter().enumerate() {
        let own = instruction_index
            .get(&task)
            .ok_or(AlignError::MissingPositive {
                state,
                task,
                position,
            })?;
        let &positive = own.get(position).ok_or(AlignError::MissingPositive {
            state,
            task,
            position,
        })?;

        let mut candidates = vec![(positive, CandidateKind::Positive)];
        for (i, &instr) in own.iter().enumerate() {
            if i != position {
                candidates.push((instr, CandidateKind::IntraTask));
            }
        }
        if inter_k > 0 {
            // BTreeMap iteration is ordered, so the pool and therefore the
            // sample are deterministic for a given seed.
            let mut pool: Vec<usize> = instruction_index
                .iter()
                .filter(|(&other, _)| other != task)
                .flat_map(|(_, ids)| ids.iter().copied())
                .collect();
            let take = inter_k.min(pool.len());
            for i in 0..take {
                let j = rng.gen_range(i..pool.len());
                pool.swap(i, j);
                candidates.push((pool[i], CandidateKind::InterTask));
            }
        }
        per_state.push(StateCandidates { candidates });
    }
    Ok(BatchLayout { per_state })
}

/// Contrastive loss over a [`BatchLayout`]: each state scores only its own
/// candidate set.
///
/// `states` is `T x D`; `instructions` holds every instruction embedding,
/// indexed by global id. Gradients come back in the same global indexing.
pub fn layout_contrastive_loss(
    layout: &BatchLayout,
    states: &[Vec<f64>],
    instructions: &[Vec<f64>],
    temperature: f64,
) -> Result<LossWithGrad, AlignError> {
    if layout.per_state.len() != states.len() {
        return Err(AlignError::DimensionMismatch {
            context: format!(
                "layout covers {} states but {} embeddings given",
                layout.per_state.len(),
                states.len()
            ),
        });
    }
    let dim = states
        .first()
        .or_else(|| instructions.first())
        .map(Vec::len)
        .unwrap_or(0);
    let mut value = 0.0;
    let mut grad_states = vec![vec![0.0; dim]; states.len()];
    let mut grad_instructions = vec![vec![0.0; dim]; instructions.len()];

    for (t, state_candidates) in layout.per_state.iter().enumerate() {
        let ids: Vec<usize> = state_candidates
            .candidates
            .iter()
            .map(|&(id, _)| id)
            .collect();
        for &id in &ids {
            if id >= instructions.len() {
                return Err(AlignError::DimensionMismatch {
                    context: format!(
                        "candidate instruction id {id} out of range for {} embeddings",
                        instructions.len()
                    ),
                });
            }
        }
        let candidate_rows: Vec<Vec<f64>> =
            ids.iter().map(|&id| instructions[id].clone()).collect();
        let mini = EmbeddingBatch::new(
            vec![states[t].clone()],
            candidate_rows,
            vec![0],
            temperature,
        )?;
        let part = contrastive_loss(&mini)?;
        value += part.value;
        for (g, &p) in grad_states[t].iter_mut().zip(&part.grad_states[0]) {
            *g += p;
        }
        for (row, &id) in ids.iter().enumerate() {
            for (g, &p) in grad_instructions[id]
                .iter_mut()
                .zip(&part.grad_instructions[row])
            {
                *g += p;
            }
        }
    }

    Ok(LossWithGrad {
        value,
        grad_states,
        grad_instructions,
    })
}

/// Finite-difference verification of the analytic gradients.
///
/// Central differences with a configurable step; errors are reported as
/// `|analytic - numeric| / max(1, |analytic|, |numeric|)`, so tiny gradients
/// fall back to an absolute comparison instead of amplifying rounding noise.
pub mod gradcheck {
    use super::*;

    /// Default central-difference step.
    pub const DEFAULT_STEP: f64 = 1e-5;
    /// Largest acceptable relative error.
    pub const TOLERANCE: f64 = 1e-5;

    fn relative_error(analytic: f64, numeric: f64) -> f64 {
        (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
    }

    /// Worst relative error of the contrastive-loss gradients over every
    /// state and instruction coordinate.
    pub fn contrastive_fd_error(batch: &EmbeddingBatch, step: f64) -> Result<f64, AlignError> {
        let analytic = contrastive_loss(batch)?;
        let mut worst = 0.0f64;
        let mut probe = batch.clone();
        for t in 0..batch.states.len() {
            for d in 0..batch.states[t].len() {
                let original = batch.states[t][d];
                probe.states[t][d] = original + step;
                let plus = contrastive_loss(&probe)?.value;
                probe.states[t][d] = original - step;
                let minus = contrastive_loss(&probe)?.value;
                probe.states[t][d] = original;
                let numeric = (plus - minus) / (2.0 * step);
                worst = worst.max(relative_error(analytic.grad_states[t][d], numeric));
            }
        }
        for n in 0..batch.instructions.len() {
            for d in 0..batch.instructions[n].len() {
                let original = batch.instructions[n][d];
                probe.instructions[n][d] = original + step;
                let plus = contrastive_loss(&probe)?.value;
                probe.instructions[n][d] = original - step;
                let minus = contrastive_loss(&probe)?.value;
                probe.instructions[n][d] = original;
                let numeric = (plus - minus) / (2.0 * step);
                worst = worst.max(relative_error(analytic.grad_instructions[n][d], numeric));
            }
        }
        Ok(worst)
    }

    /// Worst relative error of the cross-entropy gradient over every logit.
    pub fn cross_entropy_fd_error(
        logits: &[Vec<f64>],
        targets: &[usize],
        step: f64,
    ) -> Result<f64, AlignError> {
        let analytic = sequence_cross_entropy(logits, targets)?;
        let mut worst = 0.0f64;
        let mut probe = logits.to_vec();
        for s in 0..logits.len() {
            for k in 0..logits[s].len() {
                let original = logits[s][k];
                probe[s][k] = original + step;
                let plus = sequence_cross_entropy(&probe, targets)?.value;
                probe[s][k] = original - step;
                let minus = sequence_cross_entropy(&probe, targets)?.value;
                probe[s][k] = original;
                let numeric = (plus - minus) / (2.0 * step);
                worst = worst.max(relative_error(analytic.grad_states[s][k], numeric));
            }
        }
        Ok(worst)
    }

    /// A random batch with moderate similarities, sized within the given
    /// caps. Temperatures are kept near 1 so softmax rows stay
    /// well-conditioned for differencing.
    pub fn random_batch(
        rng: &mut impl Rng,
        max_states: usize,
        max_instructions: usize,
        max_dim: usize,
    ) -> EmbeddingBatch {
        let t = rng.gen_range(1..=max_states);
        let n = rng.gen_range(1..=max_instructions);
        let d = rng.gen_range(1..=max_dim);
        let vector = |rng: &mut dyn rand::RngCore, d: usize| -> Vec<f64> {
            (0..d).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect()
        };
        let states = (0..t).map(|_| vector(rng, d)).collect();
        let instructions: Vec<Vec<f64>> = (0..n).map(|_| vector(rng, d)).collect();
        let pos = (0..t).map(|_| rng.gen_range(0..n)).collect();
        let temperature = rng.gen_range(0.5..1.5);
        EmbeddingBatch {
            states,
            instructions,
            pos,
            temperature,
        }
    }

    /// Worst relative errors over `cases` random batches of each loss.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct SuiteReport {
        pub contrastive: f64,
        pub cross_entropy: f64,
    }

    /// Runs `cases` random checks per loss with the given seed and returns
    /// the worst relative error seen for each.
    pub fn run_suite(cases: usize, seed: u64) -> SuiteReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut contrastive: f64 = 0.0;
        let mut cross_entropy: f64 = 0.0;
        for _ in 0..cases {
            let batch = random_batch(&mut rng, 8, 6, 16);
            contrastive = contrastive.max(
                contrastive_fd_error(&batch, DEFAULT_STEP)
                    .expect("random batches are structurally valid"),
            );

            let steps = rng.gen_range(1..=8);
            let classes = rng.gen_range(1..=10);
            let logits: Vec<Vec<f64>> = (0..steps)
                .map(|_| (0..classes).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect())
                .collect();
            let targets: Vec<usize> = (0..steps).map(|_| rng.gen_range(0..classes)).collect();
            cross_entropy = cross_entropy.max(
                cross_entropy_fd_error(&logits, &targets, DEFAULT_STEP)
                    .expect("random logits are structurally valid"),
            );
        }
        SuiteReport {
            contrastive,
            cross_entropy,
        }
    }
}
