//! Cross-checks the pattern engine against two independent oracles:
//! hand-written membership predicates for each default meta-action pattern,
//! and a language enumerator that interprets the parsed syntax tree directly
//! (sharing no code with the NFA matcher).

use mact_core::pattern::{Ast, Pattern};
use mact_core::{default_grammar, ALPHABET, DEFAULT_META_ACTIONS};
use std::collections::HashSet;

/// Calls `f` with every string over the action alphabet of length <= max_len.
fn visit_all_strings(max_len: usize, f: &mut impl FnMut(&str)) {
    fn rec(buf: &mut String, remaining: usize, f: &mut impl FnMut(&str)) {
        f(buf);
        if remaining == 0 {
            return;
        }
        for &c in ALPHABET.iter() {
            buf.push(c);
            rec(buf, remaining - 1, f);
            buf.pop();
        }
    }
    rec(&mut String::new(), max_len, f);
}

/// Hand-written membership predicate for each default meta-action, spelled
/// out from the intended movement rather than from the pattern text.
fn default_oracle(name: &str, s: &str) -> bool {
    let b = s.as_bytes();
    let step = |first: u8, last: u8| {
        b.len() >= 2
            && b.len() <= 5
            && b[0] == first
            && b[b.len() - 1] == last
            && b[1..b.len() - 1].iter().all(|&c| c == b'm')
    };
    let run_of = |letter: u8| !b.is_empty() && b.iter().all(|&c| c == letter);
    match name {
        "Step Right" => step(b'r', b'l'),
        "Step Left" => step(b'l', b'r'),
        "Move Forward" => run_of(b'm'),
        "Step Back" => {
            // An about-face, at least one stride, and a second about-face.
            b.len() >= 5 && {
                let head = &b[..2];
                let tail = &b[b.len() - 2..];
                let about_face = |p: &[u8]| p == b"ll" || p == b"rr";
                about_face(head)
                    && about_face(tail)
                    && b[2..b.len() - 2].iter().all(|&c| c == b'm')
            }
        }
        "Turn Left" => s == "l",
        "Turn Right" => s == "r",
        "Turn Around" => matches!(s, "ll" | "lml" | "rr" | "rmr"),
        "Look Up" => run_of(b'u'),
        "Look Down" => run_of(b'd'),
        "Interaction" => s == "i",
        other => panic!("no oracle for {other}"),
    }
}

#[test]
fn default_patterns_agree_with_handwritten_oracles_up_to_length_6() {
    let grammar = default_grammar();
    for meta in grammar.metas() {
        let mut positives = 0usize;
        visit_all_strings(6, &mut |s| {
            let engine = meta.pattern.full_match(s);
            let oracle = default_oracle(&meta.name, s);
            assert_eq!(
                engine, oracle,
                "{} disagrees on {s:?}: engine {engine}, oracle {oracle}",
                meta.name
            );
            if engine {
                positives += 1;
            }
        });
        assert!(positives > 0, "{} matched nothing", meta.name);
    }
}

/// Concatenates every pair from `left` x `right`, dropping strings that
/// exceed `max_len`.
fn compose(left: &HashSet<String>, right: &HashSet<String>, max_len: usize) -> HashSet<String> {
    let mut out = HashSet::new();
    for a in left {
        for b in right {
            if a.len() + b.len() <= max_len {
                out.insert(format!("{a}{b}"));
            }
        }
    }
    out
}

/// Enumerates the pattern's language restricted to strings of length
/// <= max_len, by direct interpretation of the syntax tree.
fn language(ast: &Ast, max_len: usize) -> HashSet<String> {
    match ast {
        Ast::Letter(c) => {
            let mut set = HashSet::new();
            if max_len >= 1 {
                set.insert((*c as char).to_string());
            }
            set
        }
        Ast::Concat(parts) => {
            let mut acc: HashSet<String> = HashSet::new();
            acc.insert(String::new());
            for part in parts {
                acc = compose(&acc, &language(part, max_len), max_len);
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        Ast::Alt(branches) => branches
            .iter()
            .flat_map(|b| language(b, max_len))
            .collect(),
        Ast::Repeat { inner, min, max } => {
            let inner_lang = language(inner, max_len);
            let mut current: HashSet<String> = HashSet::new();
            current.insert(String::new());
            for _ in 0..*min {
                current = compose(&current, &inner_lang, max_len);
                if current.is_empty() {
                    break;
                }
            }
            let mut result = current.clone();
            // Beyond the minimum, `max_len` further factors always suffice:
            // every kept string has at most `max_len` non-empty factors.
            let extra = match max {
                Some(max) => (max - min) as usize,
                None => max_len,
            };
            for _ in 0..extra {
                if current.is_empty() {
                    break;
                }
                current = compose(&current, &inner_lang, max_len);
                result.extend(current.iter().cloned());
            }
            result
        }
    }
}

fn assert_engine_matches_enumeration(source: &str, max_len: usize) {
    let pattern = Pattern::parse(source).unwrap_or_else(|e| panic!("parse {source:?}: {e}"));
    let lang = language(pattern.ast(), max_len);
    let mut checked = 0usize;
    visit_all_strings(max_len, &mut |s| {
        let engine = pattern.full_match(s);
        let enumerated = lang.contains(s);
        assert_eq!(
            engine, enumerated,
            "{source:?} disagrees on {s:?}: engine {engine}, enumeration {enumerated}"
        );
        checked += 1;
    });
    assert!(checked > 1);
}

#[test]
fn default_patterns_agree_with_language_enumeration_up_to_length_6() {
    for (_, source) in DEFAULT_META_ACTIONS {
        assert_engine_matches_enumeration(source, 6);
    }
}

#[test]
fn assorted_patterns_agree_with_language_enumeration_up_to_length_5() {
    let sources = [
        "m{3}",
        "m{0,2}",
        "m{,2}",
        "m{2,}",
        "(ml|lm){2}",
        "((r|l)m){1,2}",
        "m?l+",
        "(i|u{2,}d)m{,2}",
        "((m|r)?l){2,}",
        "(m?){3}",
        "u{0,4}",
        "((ll|rr)m+){1,2}(ll|rr)",
        "(u(d|m)){2}",
        "i?i?i?",
        "(m|l)(m|l)(m|l)",
        "l(()|m)l",
    ];
    for source in sources {
        assert_engine_matches_enumeration(source, 5);
    }
}

#[test]
fn bounded_patterns_have_the_expected_finite_languages() {
    // With every quantifier bounded, enumerating at a generous length cap
    // yields the whole language; sizes below are counted by hand.
    let cases = [
        ("rm{,3}l", 4),              // r m^j l, j in 0..=3
        ("lm{,3}r", 4),              // l m^j r, j in 0..=3
        ("(lm?l)|(rm?r)", 4),        // ll, lml, rr, rmr
        ("l{1}", 1),
        ("i", 1),
        ("(ll|rr)m{1,2}(ll|rr)", 8), // 2 heads x 2 strides x 2 tails
        ("(m?){3}", 4),              // "", m, mm, mmm
    ];
    for (source, expected) in cases {
        let pattern = Pattern::parse(source).unwrap();
        let lang = language(pattern.ast(), 8);
        assert_eq!(
            lang.len(),
            expected,
            "{source:?} enumerated {:?}",
            {
                let mut v: Vec<_> = lang.iter().collect();
                v.sort();
                v
            }
        );
        for s in &lang {
            assert!(pattern.full_match(s), "{source:?} rejects its own member {s:?}");
        }
    }
}
