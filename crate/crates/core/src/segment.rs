//! Minimal segmentation of action strings into meta-action spans.
//!
//! [`segment`] finds a chain of interval-table entries that tiles the whole
//! string with as few segments as possible. Minimality is the only
//! optimization target; among equally small answers the result is made
//! deterministic by a fixed tie-break, so identical inputs always produce
//! identical output.
//!
//! Tie-break rule. Let `DP[e]` be the fewest segments covering `a[..e]`,
//! with `DP[0] = 0`. Ends are filled in ascending order; for each end the
//! candidate entries `(start, meta)` are visited in ascending start then
//! ascending meta order, and a candidate replaces the incumbent only when it
//! is strictly better. The effect: among minimal segmentations, the one whose
//! final segment starts earliest (reaches furthest back) wins, then the
//! lowest meta id, applied recursively to the remaining prefix.

use crate::grammar::MetaActionGrammar;
use crate::interval::{build_table, MetaSpan};
use crate::trajectory::{encode_actions, ActionString, ActionTrajectory};
use thiserror::Error;

/// A tiling of an action string by meta-action spans, in left-to-right order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    /// Chosen spans; they abut exactly and cover `[0, source_length)`.
    pub segments: Vec<MetaSpan>,
    /// Length of the action string this segmentation covers.
    pub source_length: usize,
}

impl Segmentation {
    /// Number of segments.
    pub fn count(&self) -> usize {
        self.segments.len()
    }
}

/// Errors raised by segmentation and expansion.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentError {
    /// No chain of table entries covers the string; `first_uncovered` is the
    /// smallest prefix length no chain can reach, which points at the letter
    /// the grammar cannot absorb.
    #[error("no covering segmentation: prefix of length {first_uncovered} is unreachable")]
    Incomplete { first_uncovered: usize },
    /// The segments do not tile the string they claim to cover.
    #[error("segments do not tile the action string: {reason}")]
    CoverageMismatch { reason: String },
}

/// Error from [`corpus_stats`]: which trajectory failed and why.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("trajectory {index}")]
pub struct CorpusStatsError {
    pub index: usize,
    #[source]
    pub source: SegmentError,
}

/// Segments `a` into the fewest meta-action spans, deterministically.
///
/// The empty string yields zero segments. When no covering chain exists the
/// error reports the smallest unreachable prefix length.
pub fn segment(grammar: &MetaActionGrammar, a: &ActionString) -> Result<Segmentation, SegmentError> {
    let n = a.len();
    if n == 0 {
        return Ok(Segmentation {
            segments: Vec::new(),
            source_length: 0,
        });
    }
    let table = build_table(grammar, a);
    let by_end = table.spans_by_end();

    const UNREACHED: usize = usize::MAX;
    let mut dp = vec![UNREACHED; n + 1];
    let mut back: Vec<Option<(usize, usize)>> = vec![None; n + 1];
    dp[0] = 0;
    for end in 1..=n {
        for &(start, meta) in &by_end[end] {
            if dp[start] == UNREACHED {
                continue;
            }
            let candidate = dp[start] + 1;
            if candidate < dp[end] {
                dp[end] = candidate;
                back[end] = Some((start, meta));
            }
        }
    }

    if dp[n] == UNREACHED {
        let first_uncovered = (1..=n)
            .find(|&e| dp[e] == UNREACHED)
            .expect("dp[n] unreached implies some prefix is unreached");
        return Err(SegmentError::Incomplete { first_uncovered });
    }

    let mut segments = Vec::with_capacity(dp[n]);
    let mut end = n;
    while end > 0 {
        let (start, meta) = back[end].expect("reached position has a backpointer");
        segments.push(MetaSpan::new(meta, start, end));
        end = start;
    }
    segments.reverse();
    Ok(Segmentation {
        segments,
        source_length: n,
    })
}

/// Reference segmenter: enumerates every covering segmentation and picks the
/// best one under the same ordering the incremental segmenter uses.
///
/// "Best" means fewest segments, then smallest `(start, meta)` sequence when
/// the segment lists are compared from the last segment backwards. The
/// enumeration is exponential in the worst case; it is intended for strings
/// of roughly a dozen letters, as an oracle for [`segment`].
pub fn segment_bruteforce(
    grammar: &MetaActionGrammar,
    a: &ActionString,
) -> Result<Segmentation, SegmentError> {
    let n = a.len();
    if n == 0 {
        return Ok(Segmentation {
            segments: Vec::new(),
            source_length: 0,
        });
    }

    // Candidate discovery goes through fresh anchored matches per substring,
    // not through the interval table, so the two segmenters share no code
    // path that could hide a common bug.
    let mut candidates: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n);
    for start in 0..n {
        let mut at: Vec<(usize, usize)> = Vec::new();
        for meta in grammar.metas() {
            for end in start + 1..=n {
                if meta.pattern.full_match(&a.as_str()[start..end]) {
                    at.push((meta.id, end));
                }
            }
        }
        candidates.push(at);
    }

    // Reachability first, so failures report the same index as the
    // incremental segmenter: the smallest prefix no chain can reach.
    let mut reachable = vec![false; n + 1];
    reachable[0] = true;
    for start in 0..n {
        if reachable[start] {
            for &(_, end) in &candidates[start] {
                reachable[end] = true;
            }
        }
    }
    if !reachable[n] {
        let first_uncovered = (1..=n)
            .find(|&e| !reachable[e])
            .expect("target unreached implies some prefix is unreached");
        return Err(SegmentError::Incomplete { first_uncovered });
    }

    fn explore(
        position: usize,
        n: usize,
        candidates: &[Vec<(usize, usize)>],
        path: &mut Vec<MetaSpan>,
        best: &mut Option<Vec<MetaSpan>>,
    ) {
        if position == n {
            let better = match best {
                None => true,
                Some(current) => compare_segmentations(path, current) == std::cmp::Ordering::Less,
            };
            if better {
                *best = Some(path.clone());
            }
            return;
        }
        for &(meta, end) in &candidates[position] {
            path.push(MetaSpan::new(meta, position, end));
            explore(end, n, candidates, path, best);
            path.pop();
        }
    }

    let mut best = None;
    explore(0, n, &candidates, &mut Vec::new(), &mut best);
    let segments = best.expect("reachability guaranteed a covering segmentation");
    Ok(Segmentation {
        segments,
        source_length: n,
    })
}

/// Orders complete segmentations: fewer segments first, then lexicographic
/// `(start, meta)` comparison walking from the final segment backwards.
fn compare_segmentations(a: &[MetaSpan], b: &[MetaSpan]) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    match a.len().cmp(&b.len()) {
        Ordering::Equal => {}
        other => return other,
    }
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        match (x.start, x.meta).cmp(&(y.start, y.meta)) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    Ordering::Equal
}

/// Rebuilds the action string a segmentation covers, verifying the tiling.
///
/// Returns exactly `a` when the segments abut from 0 to `a.len()`; any gap,
/// overlap, empty span, or length mismatch is a [`SegmentError::CoverageMismatch`].
pub fn expand(seg: &Segmentation, a: &ActionString) -> Result<ActionString, SegmentError> {
    let mismatch = |reason: String| SegmentError::CoverageMismatch { reason };
    if seg.source_length != a.len() {
        return Err(mismatch(format!(
            "segmentation covers length {}, string has length {}",
            seg.source_length,
            a.len()
        )));
    }
    let mut cursor = 0usize;
    let mut out = String::with_capacity(a.len());
    for span in &seg.segments {
        if span.start != cursor {
            return Err(mismatch(format!(
                "segment starts at {} but position {} is next",
                span.start, cursor
            )));
        }
        if span.end <= span.start || span.end > a.len() {
            return Err(mismatch(format!(
                "segment [{}, {}) is empty or out of bounds",
                span.start, span.end
            )));
        }
        out.push_str(&a.as_str()[span.start..span.end]);
        cursor = span.end;
    }
    if cursor != a.len() {
        return Err(mismatch(format!(
            "segments stop at {} but the string has length {}",
            cursor,
            a.len()
        )));
    }
    Ok(ActionString::new(out).expect("substrings of a valid action string are valid"))
}

/// Corpus-level segmentation statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationStats {
    pub n_trajectories: usize,
    /// Mean action-string length.
    pub mean_la_length: f64,
    /// Mean segment count per trajectory.
    pub mean_ma_length: f64,
    /// `mean_la_length / mean_ma_length`; 0 when undefined.
    pub compression_ratio: f64,
    /// Segment counts indexed by meta-action id.
    pub meta_histogram: Vec<usize>,
}

/// Segments every trajectory and aggregates the statistics.
///
/// Fails with the index of the first trajectory the grammar cannot cover.
/// An empty corpus yields all-zero statistics.
pub fn corpus_stats(
    grammar: &MetaActionGrammar,
    corpus: &[ActionTrajectory],
) -> Result<SegmentationStats, CorpusStatsError> {
    let mut histogram = vec![0usize; grammar.len()];
    let mut total_letters = 0usize;
    let mut total_segments = 0usize;
    for (index, trajectory) in corpus.iter().enumerate() {
        let letters = encode_actions(trajectory);
        let seg = segment(grammar, &letters)
            .map_err(|source| CorpusStatsError { index, source })?;
        total_letters += letters.len();
        total_segments += seg.count();
        for span in &seg.segments {
            histogram[span.meta] += 1;
        }
    }
    let n = corpus.len();
    let mean_la_length = if n == 0 { 0.0 } else { total_letters as f64 / n as f64 };
    let mean_ma_length = if n == 0 { 0.0 } else { total_segments as f64 / n as f64 };
    let compression_ratio = if mean_ma_length > 0.0 {
        mean_la_length / mean_ma_length
    } else {
        0.0
    };
    Ok(SegmentationStats {
        n_trajectories: n,
        mean_la_length,
        mean_ma_length,
        compression_ratio,
        meta_histogram: histogram,
    })
}
