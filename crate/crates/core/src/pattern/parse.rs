//! Recursive-descent parser for the pattern dialect.

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};

use super::ast::{AstNode, PatternAst};

const MAX_REPEAT: usize = 255;

/// Parses `text` into a [`PatternAst`] over `alphabet`.
///
/// Anchors are stripped from the core expression and recorded as flags.
/// Errors carry the 0-based character position in the original text.
pub fn parse_pattern(text: &str, alphabet: &Alphabet) -> Result<PatternAst> {
    if text.is_empty() {
        return Err(Error::PatternSyntax {
            position: 0,
            message: "empty pattern".into(),
        });
    }
    let chars: Vec<char> = text.chars().collect();
    let mut start = 0;
    let mut end = chars.len();
    let anchored_start = chars[0] == '^';
    if anchored_start {
        start = 1;
    }
    let anchored_end = end > start && chars[end - 1] == '$';
    if anchored_end {
        end -= 1;
    }

    let mut parser = Parser {
        chars: &chars,
        pos: start,
        end,
        alphabet,
    };
    let root = parser.alternation()?;
    if parser.pos != parser.end {
        return Err(parser.err("unexpected character"));
    }
    Ok(PatternAst::new(
        root,
        anchored_start,
        anchored_end,
        text.to_string(),
    ))
}

struct Parser<'a> {
    chars: &'a [char],
    pos: usize,
    end: usize,
    alphabet: &'a Alphabet,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> Error {
        Error::PatternSyntax {
            position: self.pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        (self.pos < self.end).then(|| self.chars[self.pos])
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn alternation(&mut self) -> Result<AstNode> {
        let mut branches = vec![self.concat()?];
        while self.peek() == Some('|') {
            self.bump();
            branches.push(self.concat()?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            AstNode::Alternation(branches)
        })
    }

    fn concat(&mut self) -> Result<AstNode> {
        let mut parts = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            parts.push(self.factor()?);
        }
        Ok(match parts.len() {
            0 => AstNode::Epsilon,
            1 => parts.pop().unwrap(),
            _ => AstNode::Concat(parts),
        })
    }

    fn factor(&mut self) -> Result<AstNode> {
        let mut node = self.atom()?;
        while let Some(c) = self.peek() {
            node = match c {
                '*' => {
                    self.bump();
                    AstNode::Star(Box::new(node))
                }
                '+' => {
                    self.bump();
                    AstNode::Plus(Box::new(node))
                }
                '?' => {
                    self.bump();
                    AstNode::Optional(Box::new(node))
                }
                '{' => {
                    self.bump();
                    let (min, max) = self.repeat_bounds()?;
                    AstNode::Repeat {
                        node: Box::new(node),
                        min,
                        max,
                    }
                }
                _ => break,
            };
        }
        Ok(node)
    }

    fn repeat_bounds(&mut self) -> Result<(usize, usize)> {
        let min = self.integer()?;
        let max = match self.peek() {
            Some(',') => {
                self.bump();
                self.integer()?
            }
            _ => min,
        };
        if self.peek() != Some('}') {
            return Err(self.err("expected '}' to close repeat"));
        }
        if min > max {
            return Err(self.err("repeat bounds must satisfy min <= max"));
        }
        self.bump();
        Ok((min, max))
    }

    fn integer(&mut self) -> Result<usize> {
        let mut digits = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if digits.is_empty() {
            return Err(self.err("expected a repeat count"));
        }
        let value: usize = digits
            .parse()
            .map_err(|_| self.err("repeat count out of range"))?;
        if value > MAX_REPEAT {
            return Err(self.err("repeat count out of range"));
        }
        Ok(value)
    }

    fn atom(&mut self) -> Result<AstNode> {
        let c = self.peek().ok_or_else(|| self.err("expected an atom"))?;
        match c {
            '(' => {
                self.bump();
                let node = self.alternation()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')' to close group"));
                }
                self.bump();
                Ok(node)
            }
            '[' => {
                self.bump();
                let mut members = Vec::new();
                loop {
                    match self.peek() {
                        None => return Err(self.err("expected ']' to close class")),
                        Some(']') => {
                            self.bump();
                            break;
                        }
                        Some(m) => {
                            self.check_symbol(m)?;
                            if !members.contains(&m) {
                                members.push(m);
                            }
                            self.bump();
                        }
                    }
                }
                if members.is_empty() {
                    return Err(self.err("empty character class"));
                }
                Ok(AstNode::Class(members))
            }
            '.' => {
                self.bump();
                Ok(AstNode::Wildcard)
            }
            '*' | '+' | '?' => Err(self.err("quantifier has nothing to repeat")),
            '{' => Err(self.err("repeat has nothing to repeat")),
            ')' | ']' | '}' => Err(self.err("unmatched closing bracket")),
            '^' => Err(self.err("'^' is only allowed at the start of the pattern")),
            '$' => Err(self.err("'$' is only allowed at the end of the pattern")),
            sym => {
                self.check_symbol(sym)?;
                self.bump();
                Ok(AstNode::Literal(sym))
            }
        }
    }

    fn check_symbol(&self, c: char) -> Result<()> {
        if self.alphabet.index_of(c).is_none() {
            return Err(Error::SymbolNotInAlphabet {
                symbol: c,
                position: self.pos,
            });
        }
        Ok(())
    }
}
