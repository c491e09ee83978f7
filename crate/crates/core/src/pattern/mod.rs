//! Regular-expression label patterns: parsing and NFA compilation.
//!
//! The supported dialect is deliberately small: literals, `.`, `[..]`,
//! concatenation, `|`, `*`, `+`, `?`, `{k}`, `{m,n}`, parentheses, and the
//! anchors `^` / `$`. Anchors are recorded as flags on the parsed pattern,
//! not as AST nodes; their semantics are applied later (suffix closure for
//! `^`, match-position filtering for `$`).
//!
//! Patterns range over the declared label [`Alphabet`](crate::Alphabet)
//! only; they never inspect the input sequence.

mod ast;
mod nfa;
mod parse;

pub use ast::{AstNode, PatternAst};
pub use nfa::{compile_to_nfa, Nfa};
pub use parse::parse_pattern;

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};

/// A parsed pattern file: the declared alphabet and the patterns in
/// declaration order.
#[derive(Debug, Clone)]
pub struct PatternFile {
    pub alphabet: Alphabet,
    pub patterns: Vec<PatternAst>,
}

/// Parses the pattern file format: UTF-8 text, one pattern per line.
///
/// Lines starting with `#` are comments and blank lines are ignored. The
/// first non-comment line must be `alphabet: <symbols>` declaring the label
/// set in order. An empty pattern list is allowed and yields a plain
/// linear-chain CRF downstream.
pub fn parse_pattern_file(text: &str) -> Result<PatternFile> {
    let mut alphabet: Option<Alphabet> = None;
    let mut patterns = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match &alphabet {
            None => {
                let decl = line.strip_prefix("alphabet:").ok_or_else(|| {
                    Error::Data(format!(
                        "line {}: expected 'alphabet: <symbols>' before any pattern",
                        lineno + 1
                    ))
                })?;
                alphabet = Some(Alphabet::new(decl.trim())?);
            }
            Some(a) => patterns.push(parse_pattern(line, a)?),
        }
    }
    let alphabet = alphabet
        .ok_or_else(|| Error::Data("pattern file has no alphabet declaration".into()))?;
    Ok(PatternFile { alphabet, patterns })
}

/// Generates a random, syntactically valid pattern string over `alphabet`
/// with nesting depth at most `depth`.
///
/// Randomized tests across the crate (and its integration suites) drive the
/// parser, the automata pipeline, and the product machine with the same
/// generator, so it lives here rather than in any one test module.
#[doc(hidden)]
pub fn random_pattern_text<R: rand::Rng>(
    rng: &mut R,
    alphabet: &Alphabet,
    depth: usize,
) -> String {
    fn atom<R: rand::Rng>(rng: &mut R, alphabet: &Alphabet) -> String {
        match rng.random_range(0..6) {
            0 => ".".to_string(),
            1 => {
                let mut members: Vec<char> = alphabet
                    .symbols()
                    .iter()
                    .copied()
                    .filter(|_| rng.random_bool(0.6))
                    .collect();
                if members.is_empty() {
                    members.push(alphabet.symbol(rng.random_range(0..alphabet.len())));
                }
                let body: String = members.into_iter().collect();
                format!("[{body}]")
            }
            _ => alphabet
                .symbol(rng.random_range(0..alphabet.len()))
                .to_string(),
        }
    }

    fn gen<R: rand::Rng>(rng: &mut R, alphabet: &Alphabet, depth: usize) -> String {
        if depth == 0 {
            return atom(rng, alphabet);
        }
        match rng.random_range(0..8) {
            0 | 1 => atom(rng, alphabet),
            2 => {
                let n = rng.random_range(2..=3);
                (0..n).map(|_| gen(rng, alphabet, depth - 1)).collect()
            }
            3 => format!(
                "({}|{})",
                gen(rng, alphabet, depth - 1),
                gen(rng, alphabet, depth - 1)
            ),
            4 => format!("({})*", gen(rng, alphabet, depth - 1)),
            5 => format!("({})+", gen(rng, alphabet, depth - 1)),
            6 => format!("({})?", gen(rng, alphabet, depth - 1)),
            _ => {
                let m = rng.random_range(0..=2);
                let n = m + rng.random_range(0..=2);
                if rng.random_bool(0.5) {
                    format!("({}){{{n}}}", gen(rng, alphabet, depth - 1))
                } else {
                    format!("({}){{{m},{n}}}", gen(rng, alphabet, depth - 1))
                }
            }
        }
    }

    gen(rng, alphabet, depth)
}
