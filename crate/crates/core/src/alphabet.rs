//! The declared, ordered label alphabet.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Characters that cannot serve as labels: pattern metacharacters, the
/// comment marker of pattern files, and the feature-key separator.
const RESERVED: &str = ".[]()|*+?{}^$#";

/// An ordered set of distinct single-character labels.
///
/// Declaration order fixes the integer symbol ids `0..len()`; those ids are
/// used throughout the automata and the product machine, so two alphabets
/// with the same symbols in different orders are different alphabets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    /// Builds an alphabet from the symbols of `text`, in order.
    pub fn new(text: &str) -> Result<Self> {
        let symbols: Vec<char> = text.chars().collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet must be nonempty".into()));
        }
        for (i, &c) in symbols.iter().enumerate() {
            if c.is_whitespace() || c.is_control() {
                return Err(Error::InvalidAlphabet(format!(
                    "whitespace/control character at index {i} cannot be a label"
                )));
            }
            if RESERVED.contains(c) {
                return Err(Error::InvalidAlphabet(format!(
                    "reserved character '{c}' cannot be a label"
                )));
            }
            if symbols[..i].contains(&c) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol '{c}'")));
            }
        }
        Ok(Self { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty alphabets
    }

    /// The id of `c`, if it is a declared label.
    pub fn index_of(&self, c: char) -> Option<usize> {
        self.symbols.iter().position(|&s| s == c)
    }

    /// Like [`Alphabet::index_of`] but produces the crate error.
    pub fn require(&self, c: char) -> Result<usize> {
        self.index_of(c).ok_or(Error::UnknownSymbol(c))
    }

    /// The label with id `id`. Panics if out of range.
    pub fn symbol(&self, id: usize) -> char {
        self.symbols[id]
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    /// Maps a label string to symbol ids, failing on the first unknown char.
    pub fn encode(&self, s: &[char]) -> Result<Vec<usize>> {
        s.iter().map(|&c| self.require(c)).collect()
    }

    pub fn as_string(&self) -> String {
        self.symbols.iter().collect()
    }
}

impl TryFrom<String> for Alphabet {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Alphabet::new(&s)
    }
}

impl From<Alphabet> for String {
    fn from(a: Alphabet) -> String {
        a.as_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declaration_order_fixes_ids() {
        let a = Alphabet::new("AXB").unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a.index_of('A'), Some(0));
        assert_eq!(a.index_of('X'), Some(1));
        assert_eq!(a.index_of('B'), Some(2));
        assert_eq!(a.index_of('C'), None);
        assert_eq!(a.symbol(1), 'X');
    }

    #[test]
    fn rejects_empty_duplicates_and_reserved() {
        assert!(Alphabet::new("").is_err());
        assert!(Alphabet::new("AA").is_err());
        assert!(Alphabet::new("A*").is_err());
        assert!(Alphabet::new("A B").is_err());
        assert!(Alphabet::new("a#").is_err());
        assert!(Alphabet::new("_ABCDEF").is_ok());
    }

    #[test]
    fn encode_reports_unknown_symbol() {
        let a = Alphabet::new("AB").unwrap();
        let err = a.encode(&['A', 'C']).unwrap_err();
        assert!(matches!(err, Error::UnknownSymbol('C')));
    }
}
