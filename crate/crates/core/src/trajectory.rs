//! Low-level actions, their single-letter encoding, and trajectory records.
//!
//! A trajectory is the raw unit of input: the actions an agent executed, the
//! natural-language goal and sub-goals it was following, and optional pose and
//! goal-condition annotations. Every action maps to one letter of a fixed
//! six-letter alphabet; pattern matching and segmentation operate on the
//! resulting [`ActionString`].

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// The six letters actions encode to, in canonical order.
pub const ALPHABET: [char; 6] = ['m', 'r', 'l', 'u', 'd', 'i'];

/// Returns true if `c` is one of the six action letters.
pub fn is_action_letter(c: char) -> bool {
    matches!(c, 'm' | 'r' | 'l' | 'u' | 'd' | 'i')
}

/// One discrete action an agent can execute.
///
/// The five navigation actions each own a letter; the seven object
/// interactions share the letter `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LowLevelAction {
    MoveAhead,
    RotateRight,
    RotateLeft,
    LookUp,
    LookDown,
    PickupObject,
    PutObject,
    ToggleObjectOn,
    ToggleObjectOff,
    CloseObject,
    OpenObject,
    SliceObject,
}

use LowLevelAction::*;

/// All actions, in declaration order.
pub const ALL_ACTIONS: [LowLevelAction; 12] = [
    MoveAhead,
    RotateRight,
    RotateLeft,
    LookUp,
    LookDown,
    PickupObject,
    PutObject,
    ToggleObjectOn,
    ToggleObjectOff,
    CloseObject,
    OpenObject,
    SliceObject,
];

/// The seven object-interaction actions (everything that encodes to `i`).
pub const INTERACTIONS: [LowLevelAction; 7] = [
    PickupObject,
    PutObject,
    ToggleObjectOn,
    ToggleObjectOff,
    CloseObject,
    OpenObject,
    SliceObject,
];

impl LowLevelAction {
    /// The letter this action encodes to.
    pub fn letter(self) -> char {
        match self {
            MoveAhead => 'm',
            RotateRight => 'r',
            RotateLeft => 'l',
            LookUp => 'u',
            LookDown => 'd',
            PickupObject | PutObject | ToggleObjectOn | ToggleObjectOff | CloseObject
            | OpenObject | SliceObject => 'i',
        }
    }

    /// The exact, case-sensitive action name used in corpus files.
    pub fn name(self) -> &'static str {
        match self {
            MoveAhead => "MoveAhead",
            RotateRight => "RotateRight",
            RotateLeft => "RotateLeft",
            LookUp => "LookUp",
            LookDown => "LookDown",
            PickupObject => "PickupObject",
            PutObject => "PutObject",
            ToggleObjectOn => "ToggleObjectOn",
            ToggleObjectOff => "ToggleObjectOff",
            CloseObject => "CloseObject",
            OpenObject => "OpenObject",
            SliceObject => "SliceObject",
        }
    }

    /// Looks an action up by its exact name. Names are case-sensitive.
    pub fn from_name(name: &str) -> Option<Self> {
        ALL_ACTIONS.iter().copied().find(|a| a.name() == name)
    }

    /// Returns true if this action is an object interaction.
    pub fn is_interaction(self) -> bool {
        self.letter() == 'i'
    }
}

impl fmt::Display for LowLevelAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for LowLevelAction {
    type Err = TrajectoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_name(s).ok_or_else(|| TrajectoryError::UnknownActionName(s.to_string()))
    }
}

/// Returns the set of actions that encode to `letter`, in declaration order.
///
/// Navigation letters map to a single action; `i` maps to all seven
/// interactions, so decoding is lossy by design.
pub fn decode_letter(letter: char) -> Result<&'static [LowLevelAction], TrajectoryError> {
    match letter {
        'm' => Ok(&ALL_ACTIONS[0..1]),
        'r' => Ok(&ALL_ACTIONS[1..2]),
        'l' => Ok(&ALL_ACTIONS[2..3]),
        'u' => Ok(&ALL_ACTIONS[3..4]),
        'd' => Ok(&ALL_ACTIONS[4..5]),
        'i' => Ok(&INTERACTIONS),
        other => Err(TrajectoryError::UnknownLetter(other)),
    }
}

/// Errors for trajectory construction and validation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrajectoryError {
    #[error("unknown letter `{0}`; expected one of m, r, l, u, d, i")]
    UnknownLetter(char),
    #[error("unknown action name `{0}`")]
    UnknownActionName(String),
    #[error("`{letter}` at byte {index} is not an action letter")]
    InvalidActionString { letter: char, index: usize },
    #[error("subgoal_index has length {got}, expected {expected} (one entry per action)")]
    SubgoalIndexLength { expected: usize, got: usize },
    #[error("subgoal_index decreases at step {index}")]
    SubgoalIndexDecreasing { index: usize },
    #[error(
        "subgoal_index value {value} at step {index} is out of range for {n_subgoals} sub-goals"
    )]
    SubgoalIndexOutOfRange {
        index: usize,
        value: usize,
        n_subgoals: usize,
    },
    #[error("poses has length {got}, expected {expected} (one more than the action count)")]
    PosesLength { expected: usize, got: usize },
}

/// One annotated episode: goal text, sub-goals, executed actions, and the
/// per-step sub-goal assignment, plus optional poses and goal conditions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ActionTrajectory {
    /// Natural-language task goal.
    pub goal_text: String,
    /// Natural-language sub-goal instructions, in execution order.
    pub sub_goals: Vec<String>,
    /// Executed low-level actions, in execution order.
    pub actions: Vec<LowLevelAction>,
    /// For each step `t`, the index of the sub-goal it serves.
    /// Must be non-decreasing and every value must be a valid sub-goal index.
    pub subgoal_index: Vec<usize>,
    /// Optional agent positions, one per step plus the starting pose.
    pub poses: Option<Vec<[f64; 2]>>,
    /// Optional terminal goal-condition outcomes.
    pub goal_conditions: Option<Vec<bool>>,
}

impl ActionTrajectory {
    /// Number of actions.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    /// True if the trajectory has no actions.
    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Checks the structural invariants: `subgoal_index` is one-per-action,
    /// non-decreasing, and in range; `poses`, when present, has length T + 1.
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        let t = self.actions.len();
        if self.subgoal_index.len() != t {
            return Err(TrajectoryError::SubgoalIndexLength {
                expected: t,
                got: self.subgoal_index.len(),
            });
        }
        let n = self.sub_goals.len();
        let mut prev = 0usize;
        for (index, &value) in self.subgoal_index.iter().enumerate() {
            if value < prev {
                return Err(TrajectoryError::SubgoalIndexDecreasing { index });
            }
            if value >= n {
                return Err(TrajectoryError::SubgoalIndexOutOfRange {
                    index,
                    value,
                    n_subgoals: n,
                });
            }
            prev = value;
        }
        if let Some(poses) = &self.poses {
            if poses.len() != t + 1 {
                return Err(TrajectoryError::PosesLength {
                    expected: t + 1,
                    got: poses.len(),
                });
            }
        }
        Ok(())
    }
}

/// A validated string over the action alphabet.
///
/// This is the form trajectories take for pattern matching and segmentation:
/// one letter per action, preserving order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ActionString(String);

impl ActionString {
    /// Wraps `s`, rejecting any character outside the action alphabet.
    pub fn new(s: impl Into<String>) -> Result<Self, TrajectoryError> {
        let s = s.into();
        for (index, letter) in s.char_indices() {
            if !is_action_letter(letter) {
                return Err(TrajectoryError::InvalidActionString { letter, index });
            }
        }
        Ok(ActionString(s))
    }

    /// Encodes a sequence of actions, one letter each.
    pub fn from_actions(actions: &[LowLevelAction]) -> Self {
        ActionString(actions.iter().map(|a| a.letter()).collect())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for ActionString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for ActionString {
    type Err = TrajectoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionString::new(s)
    }
}

/// Encodes a trajectory's actions into an [`ActionString`].
///
/// The encoding is order-preserving and total: every action has exactly one
/// letter, so the output length always equals the action count.
pub fn encode_actions(trajectory: &ActionTrajectory) -> ActionString {
    ActionString::from_actions(&trajectory.actions)
}
