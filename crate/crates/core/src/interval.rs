//! The match interval table: every (meta-action, substring) full match.
//!
//! For an action string `a`, the table holds a triple `(meta, start, end)`
//! exactly when the half-open slice `a[start..end]` is fully matched by that
//! meta-action's pattern. The table is the sole input the segmenter needs:
//! segmentation picks a minimal chain of entries that tiles the string.

use crate::grammar::MetaActionGrammar;
use crate::trajectory::ActionString;

/// One table entry or chosen segment: meta-action `meta` covers
/// `[start, end)`. Entries always satisfy `start < end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MetaSpan {
    pub meta: usize,
    pub start: usize,
    pub end: usize,
}

impl MetaSpan {
    pub fn new(meta: usize, start: usize, end: usize) -> Self {
        MetaSpan { meta, start, end }
    }

    /// Number of letters covered.
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// All full-match intervals of a grammar against one action string, stored
/// sparsely and sorted by `(start, end, meta)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchIntervalTable {
    entries: Vec<MetaSpan>,
    length: usize,
}

impl MatchIntervalTable {
    fn from_unsorted(mut entries: Vec<MetaSpan>, length: usize) -> Self {
        entries.sort_unstable_by_key(|s| (s.start, s.end, s.meta));
        entries.dedup();
        MatchIntervalTable { entries, length }
    }

    /// Entries sorted by `(start, end, meta)`.
    pub fn entries(&self) -> &[MetaSpan] {
        &self.entries
    }

    /// Length of the action string the table was built from.
    pub fn length(&self) -> usize {
        self.length
    }

    /// Number of entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, meta: usize, start: usize, end: usize) -> bool {
        self.entries
            .binary_search_by_key(&(start, end, meta), |s| (s.start, s.end, s.meta))
            .is_ok()
    }

    /// Entries grouped by end position: `result[e]` lists `(start, meta)` for
    /// every entry ending at `e`, ordered by start ascending then meta
    /// ascending. That ordering is what makes segmentation ties
    /// deterministic.
    pub(crate) fn spans_by_end(&self) -> Vec<Vec<(usize, usize)>> {
        let mut by_end: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.length + 1];
        for span in &self.entries {
            by_end[span.end].push((span.start, span.meta));
        }
        by_end
    }
}

/// Builds the table with one NFA pass per (pattern, start position).
///
/// Each pass walks the tail `a[start..]` once, recording every accepting
/// prefix length, and stops as soon as the pattern can no longer match. This
/// is equivalent to testing every substring separately but skips the dead
/// tails, which is what makes long forward runs affordable.
pub fn build_table(grammar: &MetaActionGrammar, a: &ActionString) -> MatchIntervalTable {
    let n = a.len();
    let mut entries = Vec::new();
    for meta in grammar.metas() {
        for start in 0..n {
            for len in meta.pattern.match_lengths(&a.as_str()[start..]) {
                if len > 0 {
                    entries.push(MetaSpan::new(meta.id, start, start + len));
                }
            }
        }
    }
    MatchIntervalTable::from_unsorted(entries, n)
}

/// Reference builder: tests every `(pattern, substring)` pair with a fresh
/// anchored match. Quadratic per pattern and deliberately naive; the fast
/// builder must agree with this one exactly.
pub fn build_table_bruteforce(grammar: &MetaActionGrammar, a: &ActionString) -> MatchIntervalTable {
    let n = a.len();
    let mut entries = Vec::new();
    for meta in grammar.metas() {
        for start in 0..n {
            for end in start + 1..=n {
                if meta.pattern.full_match(&a.as_str()[start..end]) {
                    entries.push(MetaSpan::new(meta.id, start, end));
                }
            }
        }
    }
    MatchIntervalTable::from_unsorted(entries, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{default_grammar, load_grammar};

    fn astr(s: &str) -> ActionString {
        ActionString::new(s).unwrap()
    }

    /// Id of a named meta-action in the default grammar.
    fn id(name: &str) -> usize {
        default_grammar()
            .metas()
            .iter()
            .find(|m| m.name == name)
            .unwrap()
            .id
    }

    #[test]
    fn forward_runs_produce_all_subranges() {
        let table = build_table(&default_grammar(), &astr("mmm"));
        let mf = id("Move Forward");
        for (start, end) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            assert!(table.contains(mf, start, end), "missing ({start},{end})");
        }
        // No other meta-action matches any substring of a pure forward run.
        assert_eq!(table.len(), 6);
    }

    #[test]
    fn double_left_turn_is_both_turns_and_turn_around() {
        let table = build_table(&default_grammar(), &astr("ll"));
        assert!(table.contains(id("Turn Around"), 0, 2));
        assert!(table.contains(id("Turn Left"), 0, 1));
        assert!(table.contains(id("Turn Left"), 1, 2));
    }

    #[test]
    fn single_pattern_grammar_single_match() {
        let g = load_grammar("Interaction\ti\n").unwrap();
        let table = build_table(&g, &astr("i"));
        assert_eq!(table.entries(), &[MetaSpan::new(0, 0, 1)]);
    }

    #[test]
    fn empty_string_produces_empty_table() {
        let table = build_table(&default_grammar(), &astr(""));
        assert!(table.is_empty());
        assert_eq!(table.length(), 0);
    }

    #[test]
    fn entries_are_sorted_canonically() {
        let table = build_table(&default_grammar(), &astr("lmrlm"));
        let mut sorted = table.entries().to_vec();
        sorted.sort_by_key(|s| (s.start, s.end, s.meta));
        assert_eq!(table.entries(), sorted.as_slice());
    }

    #[test]
    fn fast_builder_agrees_with_bruteforce_on_assorted_strings() {
        let g = default_grammar();
        for s in [
            "", "m", "lml", "llmrr", "rmmml", "lrlrlr", "udud", "immi", "llll", "rrmmmmrr",
            "mlmrmu",
        ] {
            let a = astr(s);
            assert_eq!(
                build_table(&g, &a),
                build_table_bruteforce(&g, &a),
                "disagreement on {s:?}"
            );
        }
    }

    #[test]
    fn every_entry_is_a_real_full_match_and_in_bounds() {
        let g = default_grammar();
        let a = astr("llmmrrlmridu");
        let table = build_table(&g, &a);
        for span in table.entries() {
            assert!(span.start < span.end && span.end <= a.len());
            assert!(g.metas()[span.meta]
                .pattern
                .full_match(&a.as_str()[span.start..span.end]));
        }
    }

    #[test]
    fn adding_a_pattern_only_adds_entries() {
        let base = load_grammar("M\tm{1,}\nL\tl\n").unwrap();
        let extended = load_grammar("M\tm{1,}\nL\tl\nPair\tlm\n").unwrap();
        let a = astr("lmlm");
        let small = build_table(&base, &a);
        let big = build_table(&extended, &a);
        for span in small.entries() {
            assert!(big.contains(span.meta, span.start, span.end));
        }
        assert!(big.len() > small.len());
    }
}
