//! Meta-action parsing and evaluation for embodied-agent trajectories.
//!
//! An agent episode is a sequence of low-level actions (moves, rotations,
//! camera tilts, object interactions). This crate encodes such sequences as
//! strings over a six-letter alphabet, matches them against a grammar of
//! restricted regular expressions naming reusable meta-actions, and computes
//! the segmentation into the fewest meta-actions via dynamic programming over
//! an interval table of all pattern matches. Around that core it provides:
//!
//! - a restricted pattern engine ([`Pattern`]) with linear-time anchored
//!   matching and no backtracking;
//! - the default ten-entry meta-action grammar ([`default_grammar`]) and a
//!   loader for user-supplied grammars ([`load_grammar`]);
//! - brute-force reference implementations ([`build_table_bruteforce`],
//!   [`segment_bruteforce`]) used to cross-check the fast paths;
//! - contrastive state–instruction alignment loss and sequence cross-entropy
//!   with analytic gradients ([`contrastive_loss`],
//!   [`sequence_cross_entropy`]), plus finite-difference checking
//!   ([`gradcheck`]);
//! - seeded Gumbel-softmax sampling with a straight-through estimator
//!   ([`gumbel_softmax`]);
//! - evaluation metrics: success rate, goal-condition rate,
//!   path-length-weighted scores, path fidelity, and retrieval recall;
//! - a JSON corpus format and a deterministic synthetic-episode generator.
//!
//! All numerics are plain `f64` over `Vec`/slices; randomness is always
//! drawn from an explicitly seeded generator, so every result here is
//! reproducible from its inputs.

pub mod align;
pub mod corpus;
pub mod grammar;
pub mod gumbel;
pub mod interval;
pub mod metrics;
pub mod pattern;
pub mod segment;
pub mod trajectory;

pub use align::{
    build_negative_sets, composed_loss, contrastive_loss, gradcheck, layout_contrastive_loss,
    sequence_cross_entropy, AlignError, BatchLayout, CandidateKind, EmbeddingBatch, LossWithGrad,
    Stage, StateCandidates, DEFAULT_EMBED_DIM, DEFAULT_TEMPERATURE,
};
pub use corpus::{
    corpus_to_json, generate_synthetic, parse_corpus, Corpus, CorpusError, Episode,
    FORMAT_VERSION, LENGTH_TOLERANCE,
};
pub use grammar::{
    default_grammar, load_grammar, GrammarError, MetaAction, MetaActionGrammar,
    DEFAULT_META_ACTIONS,
};
pub use gumbel::{gumbel_softmax, straight_through, GumbelError, GumbelSample, StraightThrough};
pub use interval::{build_table, build_table_bruteforce, MatchIntervalTable, MetaSpan};
pub use metrics::{
    fidelity, goal_condition_rate, path_length_weighted, polyline_length, retrieval_recall,
    success_rate, EpisodeResult, Fidelity, MetricsError, Point,
};
pub use pattern::{Ast, Pattern, PatternError};
pub use segment::{
    corpus_stats, expand, segment, segment_bruteforce, CorpusStatsError, SegmentError,
    Segmentation, SegmentationStats,
};
pub use trajectory::{
    decode_letter, encode_actions, is_action_letter, ActionString, ActionTrajectory,
    LowLevelAction, TrajectoryError, ALL_ACTIONS, ALPHABET, INTERACTIONS,
};
