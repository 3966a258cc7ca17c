//! JSON corpus format for annotated episodes, plus a seeded synthetic
//! trajectory generator for testing and benchmarks.
//!
//! A corpus file is a JSON object `{"version": "1", "episodes": [...]}`.
//! Each episode carries an id, the goal text, sub-goal instructions, the
//! executed action names, the per-step sub-goal assignment, and optional
//! poses, goal-condition outcomes, and predicted/reference paths with their
//! lengths. Unknown fields are rejected so that typos surface as errors
//! instead of silently vanishing.

use crate::metrics::{polyline_length, EpisodeResult, Point};
use crate::trajectory::{ActionTrajectory, LowLevelAction, TrajectoryError, INTERACTIONS};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The corpus format version this library reads and writes.
pub const FORMAT_VERSION: &str = "1";

/// Tolerance for agreement between a stored path length and the length
/// recomputed from the path's points.
pub const LENGTH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorpus {
    version: String,
    episodes: Vec<RawEpisode>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEpisode {
    id: String,
    goal: String,
    sub_goals: Vec<String>,
    actions: Vec<String>,
    subgoal_index: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    poses: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    goal_conditions: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pred_path: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ref_path: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pred_len: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ref_len: Option<f64>,
}

/// One corpus episode: an annotated trajectory plus optional evaluation
/// payload (predicted and reference paths and their lengths).
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub id: String,
    pub trajectory: ActionTrajectory,
    pub pred_path: Option<Vec<Point>>,
    pub ref_path: Option<Vec<Point>>,
    pub pred_len: Option<f64>,
    pub ref_len: Option<f64>,
}

impl Episode {
    /// Builds the evaluation record for this episode, or `None` when it has
    /// no goal-condition outcomes to evaluate.
    pub fn result(&self) -> Option<EpisodeResult> {
        let goal_conditions = self.trajectory.goal_conditions.clone()?;
        Some(EpisodeResult {
            goal_conditions,
            pred_path: self.pred_path.clone(),
            ref_path: self.ref_path.clone(),
            pred_length: self.pred_len,
            ref_length: self.ref_len,
        })
    }
}

/// A parsed, validated corpus.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub episodes: Vec<Episode>,
}

/// Errors raised while reading a corpus.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid corpus JSON")]
    Json(#[from] serde_json::Error),
    #[error("unsupported corpus version {found:?}, expected {expected:?}")]
    Version {
        found: String,
        expected: &'static str,
    },
    #[error("episode {index} ({id:?}): {reason}")]
    Schema {
        index: usize,
        id: String,
        reason: String,
    },
    #[error("episode {index} ({id:?})")]
    Invariant {
        index: usize,
        id: String,
        source: TrajectoryError,
    },
}

/// Parses and validates a corpus from its JSON text.
pub fn parse_corpus(json: &str) -> Result<Corpus, CorpusError> {
    let raw: RawCorpus = serde_json::from_str(json)?;
    if raw.version != FORMAT_VERSION {
        return Err(CorpusError::Version {
            found: raw.version,
            expected: FORMAT_VERSION,
        });
    }
    let mut episodes = Vec::with_capacity(raw.episodes.len());
    for (index, raw_episode) in raw.episodes.into_iter().enumerate() {
        episodes.push(typed_episode(index, raw_episode)?);
    }
    Ok(Corpus { episodes })
}

/// Serializes a corpus to pretty-printed JSON.
pub fn corpus_to_json(corpus: &Corpus) -> String {
    let raw = RawCorpus {
        version: FORMAT_VERSION.to_string(),
        episodes: corpus.episodes.iter().map(raw_episode).collect(),
    };
    serde_json::to_string_pretty(&raw).expect("corpus serialization cannot fail")
}

fn typed_episode(index: usize, raw: RawEpisode) -> Result<Episode, CorpusError> {
    let mut actions = Vec::with_capacity(raw.actions.len());
    for name in &raw.actions {
        match LowLevelAction::from_name(name) {
            Some(action) => actions.push(action),
            None => {
                return Err(CorpusError::Schema {
                    index,
                    id: raw.id,
                    reason: format!("unknown action name {name:?}"),
                })
            }
        }
    }
    let trajectory = ActionTrajectory {
        goal_text: raw.goal,
        sub_goals: raw.sub_goals,
        actions,
        subgoal_index: raw.subgoal_index,
        poses: raw.poses,
        goal_conditions: raw.goal_conditions,
    };
    if let Err(source) = trajectory.validate() {
        return Err(CorpusError::Invariant {
            index,
            id: raw.id,
            source,
        });
    }
    check_length(index, &raw.id, "pred", &raw.pred_path, raw.pred_len)?;
    check_length(index, &raw.id, "ref", &raw.ref_path, raw.ref_len)?;
    Ok(Episode {
        id: raw.id,
        trajectory,
        pred_path: raw.pred_path,
        ref_path: raw.ref_path,
        pred_len: raw.pred_len,
        ref_len: raw.ref_len,
    })
}

fn check_length(
    index: usize,
    id: &str,
    which: &str,
    path: &Option<Vec<Point>>,
    stored: Option<f64>,
) -> Result<(), CorpusError> {
    if let (Some(path), Some(stored)) = (path, stored) {
        let computed = polyline_length(path);
        if (computed - stored).abs() > LENGTH_TOLERANCE {
            return Err(CorpusError::Schema {
                index,
                id: id.to_string(),
                reason: format!(
                    "{which}_len {stored} disagrees with {which}_path length {computed}"
                ),
            });
        }
    }
    Ok(())
}

fn raw_episode(episode: &Episode) -> RawEpisode {
    let t = &episode.trajectory;
    RawEpisode {
        id: episode.id.clone(),
        goal: t.goal_text.clone(),
        sub_goals: t.sub_goals.clone(),
        actions: t.actions.iter().map(|a| a.name().to_string()).collect(),
        subgoal_index: t.subgoal_index.clone(),
        poses: t.poses.clone(),
        goal_conditions: t.goal_conditions.clone(),
        pred_path: episode.pred_path.clone(),
        ref_path: episode.ref_path.clone(),
        pred_len: episode.pred_len,
        ref_len: episode.ref_len,
    }
}

const HEADINGS: [[f64; 2]; 4] = [[0.0, 1.0], [1.0, 0.0], [0.0, -1.0], [-1.0, 0.0]];

/// Generates a deterministic synthetic corpus of `n` episodes whose action
/// counts are drawn uniformly from `[max(1, mean_len/2), mean_len + mean_len/2]`.
///
/// Episodes alternate navigation bursts with interaction clusters; each
/// cluster closes a sub-goal. Poses follow a unit-step heading walk on the
/// grid, the reference path is the pose sequence, and the predicted path is
/// a jittered copy, so every derived length is consistent by construction.
pub fn generate_synthetic(seed: u64, n: usize, mean_len: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = mean_len.max(1);
    let lo = (mean / 2).max(1);
    let hi = mean + mean / 2;
    let nav_letters = ['m', 'm', 'm', 'r', 'l', 'u', 'd'];
    let mut episodes = Vec::with_capacity(n);
    for e in 0..n {
        let target = rng.gen_range(lo..=hi);
        // One sub-goal per (navigation burst, interaction cluster) round.
        let mut actions: Vec<LowLevelAction> = Vec::with_capacity(target);
        let mut subgoal_index = Vec::with_capacity(target);
        let mut subgoal = 0usize;
        while actions.len() < target {
            let burst = rng.gen_range(2..=9usize);
            for _ in 0..burst {
                if actions.len() == target {
                    break;
                }
                let letter = nav_letters[rng.gen_range(0..nav_letters.len())];
                let action = match letter {
                    'm' => LowLevelAction::MoveAhead,
                    'r' => LowLevelAction::RotateRight,
                    'l' => LowLevelAction::RotateLeft,
                    'u' => LowLevelAction::LookUp,
                    _ => LowLevelAction::LookDown,
                };
                actions.push(action);
                subgoal_index.push(subgoal);
            }
            let cluster = rng.gen_range(1..=3usize);
            for _ in 0..cluster {
                if actions.len() == target {
                    break;
                }
                actions.push(INTERACTIONS[rng.gen_range(0..INTERACTIONS.len())]);
                subgoal_index.push(subgoal);
            }
            subgoal += 1;
        }
        let n_subgoals = subgoal_index.last().copied().unwrap_or(0) + 1;
        let sub_goals = (0..n_subgoals)
            .map(|j| format!("stage {} of task {e}", j + 1))
            .collect();

        let mut poses: Vec<Point> = Vec::with_capacity(actions.len() + 1);
        let mut pos = [0.0f64, 0.0];
        let mut heading = 0usize;
        poses.push(pos);
        for action in &actions {
            match action {
                LowLevelAction::MoveAhead => {
                    pos[0] += HEADINGS[heading][0];
                    pos[1] += HEADINGS[heading][1];
                }
                LowLevelAction::RotateRight => heading = (heading + 1) % 4,
                LowLevelAction::RotateLeft => heading = (heading + 3) % 4,
                _ => {}
            }
            poses.push(pos);
        }
        let ref_path = poses.clone();
        let pred_path: Vec<Point> = poses
            .iter()
            .map(|p| {
                [
                    p[0] + rng.gen_range(-0.1..0.1),
                    p[1] + rng.gen_range(-0.1..0.1),
                ]
            })
            .collect();
        let pred_len = polyline_length(&pred_path);
        let ref_len = polyline_length(&ref_path);

        let n_conditions = rng.gen_range(1..=4usize);
        let goal_conditions = (0..n_conditions).map(|_| rng.gen_bool(0.75)).collect();

        episodes.push(Episode {
            id: format!("ep-{e:04}"),
            trajectory: ActionTrajectory {
                goal_text: format!("complete task {e}"),
                sub_goals,
                actions,
                subgoal_index,
                poses: Some(poses),
                goal_conditions: Some(goal_conditions),
            },
            pred_path: Some(pred_path),
            ref_path: Some(ref_path),
            pred_len: Some(pred_len),
            ref_len: Some(ref_len),
        });
    }
    Corpus { episodes }
}
