//! Pattern syntax trees and the direct recursive matcher.

use crate::alphabet::Alphabet;

/// One node of a pattern expression tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AstNode {
    /// Matches the empty string. Produced by empty alternation branches and
    /// by anchor-only patterns such as `^$`.
    Epsilon,
    /// A single alphabet symbol.
    Literal(char),
    /// `.` — any single alphabet symbol.
    Wildcard,
    /// `[..]` — any single symbol from the listed set.
    Class(Vec<char>),
    Concat(Vec<AstNode>),
    Alternation(Vec<AstNode>),
    Star(Box<AstNode>),
    Plus(Box<AstNode>),
    Optional(Box<AstNode>),
    /// `{k}` or `{m,n}` with `min <= max`.
    Repeat {
        node: Box<AstNode>,
        min: usize,
        max: usize,
    },
}

impl AstNode {
    /// Rewrites bounded repeats into concatenation and nested optionals:
    /// `r{m,n}` becomes `r^m (r (r ...)?)?`. The NFA construction and the
    /// matcher both run on the expanded tree so repeats need no special
    /// handling anywhere else.
    pub fn expand_repeats(&self) -> AstNode {
        match self {
            AstNode::Epsilon | AstNode::Literal(_) | AstNode::Wildcard | AstNode::Class(_) => {
                self.clone()
            }
            AstNode::Concat(parts) => {
                AstNode::Concat(parts.iter().map(|p| p.expand_repeats()).collect())
            }
            AstNode::Alternation(parts) => {
                AstNode::Alternation(parts.iter().map(|p| p.expand_repeats()).collect())
            }
            AstNode::Star(inner) => AstNode::Star(Box::new(inner.expand_repeats())),
            AstNode::Plus(inner) => AstNode::Plus(Box::new(inner.expand_repeats())),
            AstNode::Optional(inner) => AstNode::Optional(Box::new(inner.expand_repeats())),
            AstNode::Repeat { node, min, max } => {
                let inner = node.expand_repeats();
                let mut tail = AstNode::Epsilon;
                for _ in *min..*max {
                    tail = AstNode::Optional(Box::new(AstNode::Concat(vec![
                        inner.clone(),
                        tail,
                    ])));
                }
                let mut parts = vec![inner; *min];
                parts.push(tail);
                AstNode::Concat(parts)
            }
        }
    }

    /// Whether the tree contains no `Repeat` node.
    fn is_expanded(&self) -> bool {
        match self {
            AstNode::Epsilon | AstNode::Literal(_) | AstNode::Wildcard | AstNode::Class(_) => true,
            AstNode::Concat(parts) | AstNode::Alternation(parts) => {
                parts.iter().all(|p| p.is_expanded())
            }
            AstNode::Star(i) | AstNode::Plus(i) | AstNode::Optional(i) => i.is_expanded(),
            AstNode::Repeat { .. } => false,
        }
    }
}

/// A parsed pattern: the expression tree plus its anchor flags and original
/// source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternAst {
    root: AstNode,
    anchored_start: bool,
    anchored_end: bool,
    source_text: String,
}

impl PatternAst {
    pub(crate) fn new(
        root: AstNode,
        anchored_start: bool,
        anchored_end: bool,
        source_text: String,
    ) -> Self {
        Self {
            root,
            anchored_start,
            anchored_end,
            source_text,
        }
    }

    pub fn root(&self) -> &AstNode {
        &self.root
    }

    /// True when the pattern was written with a leading `^`: matches must
    /// begin at position 1, so suffix closure is skipped.
    pub fn anchored_start(&self) -> bool {
        self.anchored_start
    }

    /// True when the pattern was written with a trailing `$`: the pattern
    /// may only fire at the final position.
    pub fn anchored_end(&self) -> bool {
        self.anchored_end
    }

    pub fn source_text(&self) -> &str {
        &self.source_text
    }

    /// Whether `s` is in the core language (anchors ignored), decided by
    /// direct recursion on the expression tree.
    ///
    /// This is the independent oracle the NFA/DFA pipeline is validated
    /// against; it shares no code with the automata constructions.
    pub fn matches(&self, s: &[char], alphabet: &Alphabet) -> bool {
        let expanded = self.root.expand_repeats();
        node_matches(&expanded, s, alphabet)
    }
}

fn node_matches(node: &AstNode, s: &[char], alphabet: &Alphabet) -> bool {
    debug_assert!(node.is_expanded());
    match node {
        AstNode::Epsilon => s.is_empty(),
        AstNode::Literal(c) => s.len() == 1 && s[0] == *c,
        AstNode::Wildcard => s.len() == 1 && alphabet.index_of(s[0]).is_some(),
        AstNode::Class(set) => s.len() == 1 && set.contains(&s[0]),
        AstNode::Concat(parts) => concat_matches(parts, s, alphabet),
        AstNode::Alternation(parts) => parts.iter().any(|p| node_matches(p, s, alphabet)),
        AstNode::Optional(inner) => s.is_empty() || node_matches(inner, s, alphabet),
        AstNode::Plus(inner) => {
            // inner followed by inner*
            (1..=s.len()).any(|k| {
                node_matches(inner, &s[..k], alphabet)
                    && star_matches(inner, &s[k..], alphabet)
            }) || (s.is_empty() && node_matches(inner, s, alphabet))
        }
        AstNode::Star(inner) => star_matches(inner, s, alphabet),
        AstNode::Repeat { .. } => unreachable!("repeats are expanded before matching"),
    }
}

fn star_matches(inner: &AstNode, s: &[char], alphabet: &Alphabet) -> bool {
    if s.is_empty() {
        return true;
    }
    // Only nonempty prefixes: an empty iteration of the body never consumes
    // anything, so skipping it is sound and guarantees termination.
    (1..=s.len()).any(|k| {
        node_matches(inner, &s[..k], alphabet) && star_matches(inner, &s[k..], alphabet)
    })
}

fn concat_matches(parts: &[AstNode], s: &[char], alphabet: &Alphabet) -> bool {
    match parts {
        [] => s.is_empty(),
        [first, rest @ ..] => (0..=s.len()).any(|k| {
            node_matches(first, &s[..k], alphabet) && concat_matches(rest, &s[k..], alphabet)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::parse_pattern;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn matcher_handles_the_worked_pattern() {
        let a = Alphabet::new("ABX").unwrap();
        let p = parse_pattern("AX*A", &a).unwrap();
        assert!(p.matches(&chars("AA"), &a));
        assert!(p.matches(&chars("AXA"), &a));
        assert!(p.matches(&chars("AXXXA"), &a));
        assert!(!p.matches(&chars("A"), &a));
        assert!(!p.matches(&chars("AXB"), &a));
        assert!(!p.matches(&chars(""), &a));
    }

    #[test]
    fn repeat_expansion_preserves_counts() {
        let a = Alphabet::new("A_").unwrap();
        let p = parse_pattern("A_{4}A", &a).unwrap();
        assert!(p.matches(&chars("A____A"), &a));
        assert!(!p.matches(&chars("A___A"), &a));
        assert!(!p.matches(&chars("A_____A"), &a));

        let q = parse_pattern("A{1,3}", &a).unwrap();
        assert!(!q.matches(&chars(""), &a));
        assert!(q.matches(&chars("A"), &a));
        assert!(q.matches(&chars("AAA"), &a));
        assert!(!q.matches(&chars("AAAA"), &a));
    }

    #[test]
    fn star_of_nullable_body_terminates() {
        let a = Alphabet::new("A").unwrap();
        let p = parse_pattern("(A?)*", &a).unwrap();
        assert!(p.matches(&chars(""), &a));
        assert!(p.matches(&chars("AAA"), &a));
    }
}
