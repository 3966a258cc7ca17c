//! Meta-action grammars: named patterns with stable priority order.
//!
//! A grammar is an ordered list of meta-actions, each a human-readable name
//! plus a pattern over the action alphabet. The list position is the
//! meta-action's id and also its priority: when a segmentation has several
//! optimal answers, lower ids win ties deterministically.

use crate::pattern::{Pattern, PatternError};
use crate::trajectory::ALPHABET;
use thiserror::Error;

/// The built-in meta-action set, in priority order.
///
/// `Step Right`/`Step Left` are a quarter turn, up to three steps, and the
/// counter-turn; `Step Back` is a half turn, any forward run, and another
/// half turn; `Turn Around` is two same-direction quarter turns with an
/// optional step between them.
pub const DEFAULT_META_ACTIONS: [(&str, &str); 10] = [
    ("Step Right", "rm{,3}l"),
    ("Step Left", "lm{,3}r"),
    ("Move Forward", "m{1,}"),
    ("Step Back", "(ll|rr)m+(ll|rr)"),
    ("Turn Left", "l{1}"),
    ("Turn Right", "r{1}"),
    ("Turn Around", "(lm?l)|(rm?r)"),
    ("Look Up", "u{1,}"),
    ("Look Down", "d{1,}"),
    ("Interaction", "i"),
];

/// One named pattern inside a grammar. `id` is its position in the grammar
/// and its tie-break priority.
#[derive(Debug, Clone)]
pub struct MetaAction {
    pub id: usize,
    pub name: String,
    pub pattern: Pattern,
}

/// An ordered, duplicate-free list of meta-actions.
#[derive(Debug, Clone)]
pub struct MetaActionGrammar {
    metas: Vec<MetaAction>,
}

/// Errors raised while building or loading a grammar.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("line {line}")]
    Pattern {
        line: usize,
        #[source]
        source: PatternError,
    },
    #[error("duplicate meta-action name `{name}`")]
    DuplicateName { name: String },
    #[error("grammar contains no meta-actions")]
    EmptyGrammar,
    #[error("line {line}: expected NAME<TAB>PATTERN")]
    MissingTab { line: usize },
    #[error("line {line}: empty meta-action name")]
    EmptyName { line: usize },
}

impl MetaActionGrammar {
    /// Builds a grammar from named patterns, assigning ids in list order.
    pub fn new(entries: Vec<(String, Pattern)>) -> Result<Self, GrammarError> {
        if entries.is_empty() {
            return Err(GrammarError::EmptyGrammar);
        }
        let mut metas = Vec::with_capacity(entries.len());
        for (id, (name, pattern)) in entries.into_iter().enumerate() {
            if metas.iter().any(|m: &MetaAction| m.name == name) {
                return Err(GrammarError::DuplicateName { name });
            }
            metas.push(MetaAction { id, name, pattern });
        }
        Ok(MetaActionGrammar { metas })
    }

    /// The meta-actions, indexed by id.
    pub fn metas(&self) -> &[MetaAction] {
        &self.metas
    }

    /// Number of meta-actions.
    pub fn len(&self) -> usize {
        self.metas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.metas.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&MetaAction> {
        self.metas.get(id)
    }

    /// The name for a meta-action id. Panics if the id is out of range, which
    /// can only happen when mixing ids across grammars.
    pub fn name(&self, id: usize) -> &str {
        &self.metas[id].name
    }

    /// True if every single action letter is fully matched by some pattern.
    ///
    /// A complete grammar can segment any action string, because each letter
    /// can always stand as its own segment.
    pub fn complete(&self) -> bool {
        ALPHABET.iter().all(|&letter| {
            let single = letter.to_string();
            self.metas.iter().any(|m| m.pattern.full_match(&single))
        })
    }
}

/// The built-in grammar from [`DEFAULT_META_ACTIONS`].
pub fn default_grammar() -> MetaActionGrammar {
    let entries = DEFAULT_META_ACTIONS
        .iter()
        .map(|(name, source)| {
            let pattern = Pattern::parse(source)
                .unwrap_or_else(|e| panic!("built-in pattern `{source}` must parse: {e}"));
            (name.to_string(), pattern)
        })
        .collect();
    MetaActionGrammar::new(entries).expect("built-in grammar is nonempty and duplicate-free")
}

/// Parses a grammar from text: one `NAME<TAB>PATTERN` entry per line.
///
/// Lines beginning with `#` and blank lines are ignored. Trailing whitespace
/// is stripped before parsing. Names may contain spaces but not tabs; file
/// order defines priority. Line numbers in errors are 1-based.
pub fn load_grammar(text: &str) -> Result<MetaActionGrammar, GrammarError> {
    let mut entries: Vec<(String, Pattern, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((name, pattern_src)) = line.split_once('\t') else {
            return Err(GrammarError::MissingTab { line: line_no });
        };
        if name.is_empty() {
            return Err(GrammarError::EmptyName { line: line_no });
        }
        if entries.iter().any(|(n, _, _)| n == name) {
            return Err(GrammarError::DuplicateName {
                name: name.to_string(),
            });
        }
        let pattern = Pattern::parse(pattern_src).map_err(|source| GrammarError::Pattern {
            line: line_no,
            source,
        })?;
        entries.push((name.to_string(), pattern, line_no));
    }
    MetaActionGrammar::new(entries.into_iter().map(|(n, p, _)| (n, p)).collect())
}
