//! A restricted regular-expression engine over the action alphabet.
//!
//! The supported syntax is deliberately small: literals over
//! `{m, r, l, u, d, i}`, concatenation, alternation `|`, grouping `(...)`,
//! and the quantifiers `?`, `+`, `{n}`, `{m,n}`, `{m,}`, and `{,n}`.
//! Anchors, character classes, wildcards, backreferences, and `*` are
//! rejected at parse time (`*` can always be written as `{0,}`).
//!
//! Matching is anchored at both ends: [`Pattern::full_match`] is true only if
//! the entire input is in the pattern's language. Patterns compile to a
//! Thompson NFA and are matched by subset simulation, so matching runs in
//! time linear in the input length regardless of the pattern, with no
//! backtracking and no input-dependent recursion.

use crate::trajectory::is_action_letter;
use thiserror::Error;

/// Largest repetition bound accepted in a quantifier.
pub const MAX_REPEAT: u32 = 1000;
/// Maximum group-nesting depth accepted by the parser.
const MAX_DEPTH: usize = 64;
/// Hard cap on compiled NFA size, so nested counted repetitions cannot
/// allocate unboundedly.
const MAX_NFA_STATES: usize = 100_000;

/// A syntax error, with the byte offset where parsing stopped.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("pattern syntax error at byte {offset}: {reason}")]
pub struct PatternError {
    pub offset: usize,
    pub reason: String,
}

/// Parsed pattern structure.
///
/// `Repeat { min, max: None }` is an unbounded repetition (`+` or `{m,}`);
/// every other quantifier normalizes to explicit bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ast {
    /// One action letter.
    Letter(u8),
    /// A sequence of sub-patterns; empty means the empty string.
    Concat(Vec<Ast>),
    /// A choice between two or more branches.
    Alt(Vec<Ast>),
    /// `inner` repeated between `min` and `max` times (`None` = unbounded).
    Repeat {
        inner: Box<Ast>,
        min: u32,
        max: Option<u32>,
    },
}

/// A compiled pattern: source text, parsed [`Ast`], and the NFA used for
/// matching.
#[derive(Debug, Clone)]
pub struct Pattern {
    source: String,
    ast: Ast,
    nfa: Nfa,
}

impl Pattern {
    /// Parses and compiles `source`.
    pub fn parse(source: &str) -> Result<Self, PatternError> {
        let mut parser = Parser {
            src: source.as_bytes(),
            pos: 0,
        };
        let ast = parser.parse_alternation(0)?;
        if parser.pos != parser.src.len() {
            // The only way parsing stops early is an unmatched `)`.
            return Err(parser.error("unmatched `)`"));
        }
        let nfa = Nfa::compile(&ast)?;
        Ok(Pattern {
            source: source.to_string(),
            ast,
            nfa,
        })
    }

    /// The pattern text this was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// The parsed structure.
    pub fn ast(&self) -> &Ast {
        &self.ast
    }

    /// True if the whole of `s` is in the pattern's language.
    ///
    /// Characters outside the action alphabet never match any literal, so a
    /// string containing them simply fails to match.
    pub fn full_match(&self, s: &str) -> bool {
        self.nfa.full_match(s.as_bytes())
    }

    /// All prefix lengths `L` of `tail` such that `tail[..L]` fully matches,
    /// in increasing order. Includes 0 when the pattern matches the empty
    /// string. Computed in one left-to-right simulation pass.
    pub fn match_lengths(&self, tail: &str) -> Vec<usize> {
        self.nfa.match_lengths(tail.as_bytes())
    }
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.source)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, reason: impl Into<String>) -> PatternError {
        PatternError {
            offset: self.pos,
            reason: reason.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn parse_alternation(&mut self, depth: usize) -> Result<Ast, PatternError> {
        if depth > MAX_DEPTH {
            return Err(self.error("groups nested too deeply"));
        }
        let mut branches = vec![self.parse_concat(depth)?];
        while self.peek() == Some(b'|') {
            self.pos += 1;
            branches.push(self.parse_concat(depth)?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().expect("one branch")
        } else {
            Ast::Alt(branches)
        })
    }

    fn parse_concat(&mut self, depth: usize) -> Result<Ast, PatternError> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if c == b'|' || c == b')' {
                break;
            }
            items.push(self.parse_repeat(depth)?);
        }
        Ok(if items.len() == 1 {
            items.pop().expect("one item")
        } else {
            Ast::Concat(items)
        })
    }

    fn parse_repeat(&mut self, depth: usize) -> Result<Ast, PatternError> {
        let atom = self.parse_atom(depth)?;
        let node = match self.peek() {
            Some(b'?') => {
                self.pos += 1;
                Ast::Repeat {
                    inner: Box::new(atom),
                    min: 0,
                    max: Some(1),
                }
            }
            Some(b'+') => {
                self.pos += 1;
                Ast::Repeat {
                    inner: Box::new(atom),
                    min: 1,
                    max: None,
                }
            }
            Some(b'{') => {
                let (min, max) = self.parse_bounds()?;
                Ast::Repeat {
                    inner: Box::new(atom),
                    min,
                    max,
                }
            }
            _ => return Ok(atom),
        };
        // A quantifier may not itself be quantified; use a group instead.
        match self.peek() {
            Some(b'?') | Some(b'+') | Some(b'{') => {
                Err(self.error("quantifier follows quantifier; group the inner repetition"))
            }
            Some(b'*') => Err(self.error("`*` is not supported; write `{0,}`")),
            _ => Ok(node),
        }
    }

    fn parse_atom(&mut self, depth: usize) -> Result<Ast, PatternError> {
        match self.peek() {
            None => Err(self.error("unexpected end of pattern")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.parse_alternation(depth + 1)?;
                if self.peek() == Some(b')') {
                    self.pos += 1;
                    Ok(inner)
                } else {
                    Err(self.error("unclosed `(`"))
                }
            }
            Some(b'*') => Err(self.error("`*` is not supported; write `{0,}`")),
            Some(b'?') | Some(b'+') | Some(b'{') => {
                Err(self.error("quantifier must follow a letter or group"))
            }
            Some(c) if is_action_letter(c as char) => {
                self.pos += 1;
                Ok(Ast::Letter(c))
            }
            Some(c) => Err(self.error(format!(
                "`{}` is not in the action alphabet (m, r, l, u, d, i)",
                c as char
            ))),
        }
    }

    /// Parses `{n}`, `{m,n}`, `{m,}`, or `{,n}`; the cursor sits on `{`.
    fn parse_bounds(&mut self) -> Result<(u32, Option<u32>), PatternError> {
        self.pos += 1;
        let lo = self.parse_number()?;
        match self.peek() {
            Some(b'}') => {
                self.pos += 1;
                match lo {
                    Some(n) => Ok((n, Some(n))),
                    None => Err(self.error("empty repetition bounds")),
                }
            }
            Some(b',') => {
                self.pos += 1;
                let hi = self.parse_number()?;
                if self.peek() == Some(b'}') {
                    self.pos += 1;
                } else {
                    return Err(self.error("expected `}` to close repetition bounds"));
                }
                match (lo, hi) {
                    (None, None) => Err(self.error("repetition bounds need at least one number")),
                    (Some(m), Some(n)) if m > n => {
                        Err(self.error("repetition minimum exceeds maximum"))
                    }
                    (m, n) => Ok((m.unwrap_or(0), n)),
                }
            }
            _ => Err(self.error("expected digit, `,`, or `}` in repetition bounds")),
        }
    }

    fn parse_number(&mut self) -> Result<Option<u32>, PatternError> {
        let start = self.pos;
        let mut value: u32 = 0;
        while let Some(c) = self.peek() {
            if !c.is_ascii_digit() {
                break;
            }
            value = value
                .saturating_mul(10)
                .saturating_add(u32::from(c - b'0'));
            if value > MAX_REPEAT {
                return Err(self.error(format!("repetition bound exceeds {MAX_REPEAT}")));
            }
            self.pos += 1;
        }
        Ok(if self.pos == start { None } else { Some(value) })
    }
}

/// Thompson NFA. Each state carries at most one consuming edge plus any
/// number of epsilon edges; `accept` has no outgoing edges.
#[derive(Debug, Clone)]
struct Nfa {
    consume: Vec<Option<(u8, usize)>>,
    eps: Vec<Vec<usize>>,
    start: usize,
    accept: usize,
}

impl Nfa {
    fn compile(ast: &Ast) -> Result<Nfa, PatternError> {
        let mut b = Builder {
            consume: Vec::new(),
            eps: Vec::new(),
        };
        let (start, accept) = b.fragment(ast)?;
        Ok(Nfa {
            consume: b.consume,
            eps: b.eps,
            start,
            accept,
        })
    }

    fn state_count(&self) -> usize {
        self.consume.len()
    }

    /// Epsilon closure of `set`, in place.
    fn close(&self, set: &mut BitSet, stack: &mut Vec<usize>) {
        stack.clear();
        stack.extend(set.iter());
        while let Some(s) = stack.pop() {
            for &t in &self.eps[s] {
                if set.insert(t) {
                    stack.push(t);
                }
            }
        }
    }

    fn full_match(&self, input: &[u8]) -> bool {
        let mut current = BitSet::new(self.state_count());
        let mut next = BitSet::new(self.state_count());
        let mut stack = Vec::new();
        current.insert(self.start);
        self.close(&mut current, &mut stack);
        for &byte in input {
            next.clear();
            for s in current.iter() {
                if let Some((c, t)) = self.consume[s] {
                    if c == byte {
                        next.insert(t);
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            self.close(&mut next, &mut stack);
            std::mem::swap(&mut current, &mut next);
        }
        current.contains(self.accept)
    }

    /// One simulation pass over `input`, recording every prefix length at
    /// which the accept state is reachable. Stops early once the state set
    /// dies, so scans over hostile tails cost only as far as the pattern can
    /// survive.
    fn match_lengths(&self, input: &[u8]) -> Vec<usize> {
        let mut lengths = Vec::new();
        let mut current = BitSet::new(self.state_count());
        let mut next = BitSet::new(self.state_count());
        let mut stack = Vec::new();
        current.insert(self.start);
        self.close(&mut current, &mut stack);
        if current.contains(self.accept) {
            lengths.push(0);
        }
        for (i, &byte) in input.iter().enumerate() {
            next.clear();
            for s in current.iter() {
                if let Some((c, t)) = self.consume[s] {
                    if c == byte {
                        next.insert(t);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            self.close(&mut next, &mut stack);
            if next.contains(self.accept) {
                lengths.push(i + 1);
            }
            std::mem::swap(&mut current, &mut next);
        }
        lengths
    }
}

struct Builder {
    consume: Vec<Option<(u8, usize)>>,
    eps: Vec<Vec<usize>>,
}

impl Builder {
    fn state(&mut self) -> usize {
        self.consume.push(None);
        self.eps.push(Vec::new());
        self.consume.len() - 1
    }

    fn eps(&mut self, from: usize, to: usize) {
        self.eps[from].push(to);
    }

    /// Builds the fragment for `ast`, returning its entry and exit states.
    fn fragment(&mut self, ast: &Ast) -> Result<(usize, usize), PatternError> {
        if self.consume.len() > MAX_NFA_STATES {
            return Err(PatternError {
                offset: 0,
                reason: format!("pattern compiles to more than {MAX_NFA_STATES} states"),
            });
        }
        match ast {
            Ast::Letter(c) => {
                let s = self.state();
                let t = self.state();
                self.consume[s] = Some((*c, t));
                Ok((s, t))
            }
            Ast::Concat(items) => {
                let entry = self.state();
                let mut exit = entry;
                for item in items {
                    let (i, o) = self.fragment(item)?;
                    self.eps(exit, i);
                    exit = o;
                }
                Ok((entry, exit))
            }
            Ast::Alt(branches) => {
                let entry = self.state();
                let exit = self.state();
                for branch in branches {
                    let (i, o) = self.fragment(branch)?;
                    self.eps(entry, i);
                    self.eps(o, exit);
                }
                Ok((entry, exit))
            }
            Ast::Repeat { inner, min, max } => {
                let entry = self.state();
                let mut exit = entry;
                for _ in 0..*min {
                    let (i, o) = self.fragment(inner)?;
                    self.eps(exit, i);
                    exit = o;
                }
                match max {
                    // Unbounded tail: a standard star loop.
                    None => {
                        let out = self.state();
                        let (i, o) = self.fragment(inner)?;
                        self.eps(exit, i);
                        self.eps(exit, out);
                        self.eps(o, i);
                        self.eps(o, out);
                        exit = out;
                    }
                    // Bounded tail: max - min optional copies.
                    Some(mx) => {
                        for _ in *min..*mx {
                            let out = self.state();
                            let (i, o) = self.fragment(inner)?;
                            self.eps(exit, i);
                            self.eps(exit, out);
                            self.eps(o, out);
                            exit = out;
                        }
                    }
                }
                Ok((entry, exit))
            }
        }
    }
}

/// Fixed-capacity bitset over NFA state ids.
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(capacity: usize) -> Self {
        BitSet {
            words: vec![0; capacity.div_ceil(64).max(1)],
        }
    }

    fn clear(&mut self) {
        self.words.fill(0);
    }

    /// Sets the bit; returns true if it was previously unset.
    fn insert(&mut self, bit: usize) -> bool {
        let (w, m) = (bit / 64, 1u64 << (bit % 64));
        let fresh = self.words[w] & m == 0;
        self.words[w] |= m;
        fresh
    }

    fn contains(&self, bit: usize) -> bool {
        self.words[bit / 64] & (1u64 << (bit % 64)) != 0
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }
}
