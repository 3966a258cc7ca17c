//! Episode-level evaluation metrics: task success, goal-condition rate,
//! path-length weighting, path-fidelity scores, and retrieval recall.

use thiserror::Error;

/// A 2-D position in abstract grid units.
pub type Point = [f64; 2];

/// Euclidean length of a polyline; a single point has length 0.
pub fn polyline_length(path: &[Point]) -> f64 {
    path.windows(2)
        .map(|w| distance(&w[0], &w[1]))
        .sum()
}

fn distance(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Outcome record for one evaluated episode.
///
/// `goal_conditions` holds the terminal truth value of each goal condition.
/// Paths and lengths are optional because not every corpus carries them;
/// when both a path and its stored length are present they must agree.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub goal_conditions: Vec<bool>,
    pub pred_path: Option<Vec<Point>>,
    pub ref_path: Option<Vec<Point>>,
    pub pred_length: Option<f64>,
    pub ref_length: Option<f64>,
}

impl EpisodeResult {
    /// True when every goal condition holds.
    pub fn success(&self) -> bool {
        self.goal_conditions.iter().all(|&c| c)
    }

    /// Fraction of goal conditions met; `None` when there are none.
    pub fn condition_rate(&self) -> Option<f64> {
        if self.goal_conditions.is_empty() {
            None
        } else {
            let met = self.goal_conditions.iter().filter(|&&c| c).count();
            Some(met as f64 / self.goal_conditions.len() as f64)
        }
    }

    /// Predicted path length: the stored value, else derived from the path.
    pub fn pred_len(&self) -> Option<f64> {
        self.pred_length
            .or_else(|| self.pred_path.as_deref().map(polyline_length))
    }

    /// Reference path length: the stored value, else derived from the path.
    pub fn ref_len(&self) -> Option<f64> {
        self.ref_length
            .or_else(|| self.ref_path.as_deref().map(polyline_length))
    }
}

/// Path-fidelity scores: coverage, length score, and their product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fidelity {
    pub pc: f64,
    pub ls: f64,
    pub cls: f64,
}

/// Errors for metric computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("metric needs at least one episode")]
    EmptyCorpus,
    #[error("episode {episode} has no goal conditions")]
    EmptyConditions { episode: usize },
    #[error("both path lengths are zero")]
    DegenerateLengths,
    #[error("paths must be nonempty")]
    EmptyPath,
    #[error("distance threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),
    #[error("gold instruction {value} at state {state} is out of range for {q} instructions")]
    GoldOutOfRange { state: usize, value: usize, q: usize },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("k must be at least 1")]
    InvalidK,
}

/// Fraction of episodes in which every goal condition holds.
pub fn success_rate(corpus: &[EpisodeResult]) -> Result<f64, MetricsError> {
    if corpus.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let successes = corpus.iter().filter(|e| e.success()).count();
    Ok(successes as f64 / corpus.len() as f64)
}

/// Goal conditions met across the whole corpus, micro-averaged: total
/// conditions met divided by total conditions. Every episode must carry at
/// least one condition.
pub fn goal_condition_rate(corpus: &[EpisodeResult]) -> Result<f64, MetricsError> {
    if corpus.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let mut met = 0usize;
    let mut total = 0usize;
    for (episode, result) in corpus.iter().enumerate() {
        if result.goal_conditions.is_empty() {
            return Err(MetricsError::EmptyConditions { episode });
        }
        met += result.goal_conditions.iter().filter(|&&c| c).count();
        total += result.goal_conditions.len();
    }
    Ok(met as f64 / total as f64)
}

/// Path-length-weighted score: `score * L / max(L, L_pred)` for reference
/// length `L`. Never exceeds `score`; equals it only when the prediction is
/// no longer than the reference.
pub fn path_length_weighted(
    score: f64,
    ref_len: f64,
    pred_len: f64,
) -> Result<f64, MetricsError> {
    let longest = ref_len.max(pred_len);
    if longest <= 0.0 {
        return Err(MetricsError::DegenerateLengths);
    }
    Ok(score * ref_len / longest)
}

/// Path-fidelity scores of a predicted path against a reference path.
///
/// Coverage (`pc`) averages `exp(-d/d_th)` over reference points, where `d`
/// is the distance to the nearest predicted point. The length score (`ls`)
/// penalizes the gap between the predicted length and the coverage-expected
/// length `pc * len(ref)`; when both quantities are zero the paths are
/// degenerate points and the length score is defined as 1. `cls` is their
/// product. Both paths must be nonempty and `d_th` positive.
pub fn fidelity(
    pred: &[Point],
    reference: &[Point],
    d_th: f64,
) -> Result<Fidelity, MetricsError> {
    if pred.is_empty() || reference.is_empty() {
        return Err(MetricsError::EmptyPath);
    }
    if d_th <= 0.0 || d_th.is_nan() {
        return Err(MetricsError::NonPositiveThreshold(d_th));
    }
    let pc = reference
        .iter()
        .map(|r| {
            let nearest = pred
                .iter()
                .map(|p| distance(r, p))
                .fold(f64::INFINITY, f64::min);
            (-nearest / d_th).exp()
        })
        .sum::<f64>()
        / reference.len() as f64;
    let expected = pc * polyline_length(reference);
    let denominator = expected + (polyline_length(pred) - expected).abs();
    let ls = if denominator == 0.0 {
        1.0
    } else {
        expected / denominator
    };
    Ok(Fidelity { pc, ls, cls: pc * ls })
}

/// Fraction of states whose gold instruction ranks in the top `k` by inner
/// product. Equal similarities rank the lower instruction index first.
pub fn retrieval_recall(
    states: &[Vec<f64>],
    instructions: &[Vec<f64>],
    gold: &[usize],
    k: usize,
) -> Result<f64, MetricsError> {
    if k == 0 {
        return Err(MetricsError::InvalidK);
    }
    if states.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    if gold.len() != states.len() {
        return Err(MetricsError::DimensionMismatch {
            context: format!("{} gold labels for {} states", gold.len(), states.len()),
        });
    }
    let q = instructions.len();
    let dim = states[0].len();
    for (i, v) in states.iter().enumerate() {
        if v.len() != dim {
            return Err(MetricsError::DimensionMismatch {
                context: format!("state {i} has dim {}, expected {dim}", v.len()),
            });
        }
    }
    for (i, v) in instructions.iter().enumerate() {
        if v.len() != dim {
            return Err(MetricsError::DimensionMismatch {
                context: format!("instruction {i} has dim {}, expected {dim}", v.len()),
            });
        }
    }
    let mut hits = 0usize;
    for (state_idx, (state, &g)) in states.iter().zip(gold).enumerate() {
        if g >= q {
            return Err(MetricsError::GoldOutOfRange {
                state: state_idx,
                value: g,
                q,
            });
        }
        let gold_sim: f64 = state.iter().zip(&instructions[g]).map(|(a, b)| a * b).sum();
        // Number of instructions ranked strictly ahead of the gold one.
        let ahead = instructions
            .iter()
            .enumerate()
            .filter(|(j, instr)| {
                let sim: f64 = state.iter().zip(instr.iter()).map(|(a, b)| a * b).sum();
                sim > gold_sim || (sim == gold_sim && *j < g)
            })
            .count();
        if ahead < k {
            hits += 1;
        }
    }
    Ok(hits as f64 / states.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn episode(conditions: &[bool]) -> EpisodeResult {
        EpisodeResult {
            goal_conditions: conditions.to_vec(),
            pred_path: None,
            ref_path: None,
            pred_length: None,
            ref_length: None,
        }
    }

    #[test]
    fn one_failed_condition_fails_the_episode() {
        let corpus = [episode(&[true, true, true, false])];
        assert_eq!(success_rate(&corpus).unwrap(), 0.0);
        assert_eq!(goal_condition_rate(&corpus).unwrap(), 0.75);
    }

    #[test]
    fn all_conditions_met_is_a_success() {
        let corpus = [episode(&[true, true]), episode(&[true, false])];
        assert_eq!(success_rate(&corpus).unwrap(), 0.5);
        assert_eq!(goal_condition_rate(&corpus).unwrap(), 0.75);
    }

    #[test]
    fn goal_condition_rate_is_micro_averaged() {
        // 1/4 met in one episode, 1/1 in the other: micro 2/5, not 5/8.
        let corpus = [episode(&[true, false, false, false]), episode(&[true])];
        assert_eq!(goal_condition_rate(&corpus).unwrap(), 0.4);
    }

    #[test]
    fn success_implies_gc_at_least_as_large() {
        let corpus = [
            episode(&[true, true]),
            episode(&[false, true, true]),
            episode(&[true]),
        ];
        let sr = success_rate(&corpus).unwrap();
        let gc = goal_condition_rate(&corpus).unwrap();
        assert!(sr <= gc);
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert_eq!(success_rate(&[]), Err(MetricsError::EmptyCorpus));
        assert_eq!(goal_condition_rate(&[]), Err(MetricsError::EmptyCorpus));
        assert_eq!(
            goal_condition_rate(&[episode(&[])]),
            Err(MetricsError::EmptyConditions { episode: 0 })
        );
    }

    #[test]
    fn plw_halves_score_for_double_length_prediction() {
        assert_eq!(path_length_weighted(1.0, 10.0, 20.0).unwrap(), 0.5);
    }

    #[test]
    fn plw_keeps_score_for_shorter_prediction() {
        assert_eq!(path_length_weighted(0.8, 10.0, 5.0).unwrap(), 0.8);
        assert_eq!(path_length_weighted(0.8, 10.0, 10.0).unwrap(), 0.8);
    }

    #[test]
    fn plw_of_zero_score_is_zero() {
        assert_eq!(path_length_weighted(0.0, 3.0, 9.0).unwrap(), 0.0);
    }

    #[test]
    fn plw_rejects_two_zero_lengths() {
        assert_eq!(
            path_length_weighted(1.0, 0.0, 0.0),
            Err(MetricsError::DegenerateLengths)
        );
    }

    #[test]
    fn identical_paths_have_perfect_fidelity() {
        let path = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 1.0]];
        let f = fidelity(&path, &path, 1.0).unwrap();
        assert!((f.pc - 1.0).abs() < 1e-12);
        assert!((f.ls - 1.0).abs() < 1e-12);
        assert!((f.cls - 1.0).abs() < 1e-12);
    }

    #[test]
    fn double_traversal_halves_the_length_score() {
        let reference = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        // Out and back: same points, twice the length.
        let pred = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [1.0, 0.0], [0.0, 0.0]];
        let f = fidelity(&pred, &reference, 1.0).unwrap();
        assert!((f.pc - 1.0).abs() < 1e-12);
        assert!((f.ls - 0.5).abs() < 1e-12);
        assert!((f.cls - 0.5).abs() < 1e-12);
    }

    #[test]
    fn far_paths_score_near_zero_coverage() {
        let reference = vec![[0.0, 0.0], [1.0, 0.0]];
        let pred = vec![[100.0, 100.0], [101.0, 100.0]];
        let f = fidelity(&pred, &reference, 1.0).unwrap();
        assert!(f.pc < 1e-10);
    }

    #[test]
    fn fidelity_is_translation_invariant() {
        let reference = vec![[0.0, 0.0], [1.0, 1.0], [2.0, 0.5]];
        let pred = vec![[0.1, 0.0], [1.2, 0.9], [2.0, 0.4], [2.5, 0.5]];
        let base = fidelity(&pred, &reference, 1.0).unwrap();
        let shift = |p: &[Point]| -> Vec<Point> {
            p.iter().map(|q| [q[0] + 13.5, q[1] - 7.25]).collect()
        };
        let moved = fidelity(&shift(&pred), &shift(&reference), 1.0).unwrap();
        assert!((base.pc - moved.pc).abs() < 1e-9);
        assert!((base.ls - moved.ls).abs() < 1e-9);
        assert!((base.cls - moved.cls).abs() < 1e-9);
    }

    #[test]
    fn degenerate_identical_points_score_one() {
        let f = fidelity(&[[2.0, 2.0]], &[[2.0, 2.0]], 1.0).unwrap();
        assert_eq!(f.pc, 1.0);
        assert_eq!(f.ls, 1.0);
        assert_eq!(f.cls, 1.0);
    }

    #[test]
    fn fidelity_rejects_bad_inputs() {
        assert_eq!(
            fidelity(&[], &[[0.0, 0.0]], 1.0),
            Err(MetricsError::EmptyPath)
        );
        assert_eq!(
            fidelity(&[[0.0, 0.0]], &[[0.0, 0.0]], 0.0),
            Err(MetricsError::NonPositiveThreshold(0.0))
        );
    }

    #[test]
    fn recall_is_one_for_identity_retrieval() {
        let vectors = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let gold = [0, 1, 2];
        assert_eq!(retrieval_recall(&vectors, &vectors, &gold, 1).unwrap(), 1.0);
    }

    #[test]
    fn recall_at_full_depth_is_one() {
        let states = vec![vec![0.3, 0.4], vec![-0.1, 0.2]];
        let instructions = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let gold = [2, 0];
        assert_eq!(
            retrieval_recall(&states, &instructions, &gold, 3).unwrap(),
            1.0
        );
        assert_eq!(
            retrieval_recall(&states, &instructions, &gold, 10).unwrap(),
            1.0
        );
    }

    #[test]
    fn recall_is_monotone_in_k() {
        let states = vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.5, 0.5]];
        let instructions = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.7, 0.7], vec![-1.0, 0.0]];
        let gold = [2, 3, 0];
        let mut previous = 0.0;
        for k in 1..=4 {
            let r = retrieval_recall(&states, &instructions, &gold, k).unwrap();
            assert!(r >= previous, "recall dropped at k={k}");
            previous = r;
        }
    }

    #[test]
    fn ties_rank_the_lower_index_first() {
        // Both instructions score identically; the gold one is index 1, so
        // index 0 outranks it and recall@1 misses.
        let states = vec![vec![1.0, 0.0]];
        let instructions = vec![vec![0.5, 0.0], vec![0.5, 0.0]];
        assert_eq!(
            retrieval_recall(&states, &instructions, &[1], 1).unwrap(),
            0.0
        );
        assert_eq!(
            retrieval_recall(&states, &instructions, &[0], 1).unwrap(),
            1.0
        );
        assert_eq!(
            retrieval_recall(&states, &instructions, &[1], 2).unwrap(),
            1.0
        );
    }

    #[test]
    fn recall_rejects_bad_inputs() {
        let states = vec![vec![1.0]];
        let instructions = vec![vec![1.0]];
        assert_eq!(
            retrieval_recall(&states, &instructions, &[0], 0),
            Err(MetricsError::InvalidK)
        );
        assert_eq!(
            retrieval_recall(&[], &instructions, &[], 1),
            Err(MetricsError::EmptyCorpus)
        );
        assert!(matches!(
            retrieval_recall(&states, &instructions, &[1], 1),
            Err(MetricsError::GoldOutOfRange { .. })
        ));
        assert!(matches!(
            retrieval_recall(&states, &instructions, &[0, 0], 1),
            Err(MetricsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn polyline_length_sums_segment_distances() {
        assert_eq!(polyline_length(&[]), 0.0);
        assert_eq!(polyline_length(&[[3.0, 4.0]]), 0.0);
        assert_eq!(polyline_length(&[[0.0, 0.0], [3.0, 4.0]]), 5.0);
        assert_eq!(
            polyline_length(&[[0.0, 0.0], [1.0, 0.0], [1.0, 2.0]]),
            3.0
        );
    }
}
