//! Thompson construction of an NFA from a pattern tree.

use crate::alphabet::Alphabet;

use super::ast::{AstNode, PatternAst};

/// A nondeterministic finite automaton over symbol ids `0..alphabet_size`.
///
/// Epsilon transitions are represented with `None` symbols. Exactly one
/// initial state; any number of accepting states.
#[derive(Debug, Clone)]
pub struct Nfa {
    pub state_count: usize,
    pub alphabet_size: usize,
    /// `(from, symbol id or epsilon, to)`.
    pub transitions: Vec<(usize, Option<usize>, usize)>,
    pub initial: usize,
    pub accepting: Vec<usize>,
}

impl Nfa {
    /// Runs the epsilon-closure simulation and reports acceptance.
    pub fn accepts(&self, symbols: &[usize]) -> bool {
        let mut current = self.closure(vec![self.initial]);
        for &sym in symbols {
            let mut next = Vec::new();
            for &(from, label, to) in &self.transitions {
                if label == Some(sym) && current[from] && !next.contains(&to) {
                    next.push(to);
                }
            }
            current = self.closure(next);
        }
        self.accepting.iter().any(|&s| current[s])
    }

    fn closure(&self, seed: Vec<usize>) -> Vec<bool> {
        let mut in_set = vec![false; self.state_count];
        let mut stack = seed;
        for &s in &stack {
            in_set[s] = true;
        }
        while let Some(s) = stack.pop() {
            for &(from, label, to) in &self.transitions {
                if from == s && label.is_none() && !in_set[to] {
                    in_set[to] = true;
                    stack.push(to);
                }
            }
        }
        in_set
    }
}

/// Half-built automaton piece with one entry and one exit state.
struct Fragment {
    start: usize,
    accept: usize,
}

struct Builder {
    state_count: usize,
    transitions: Vec<(usize, Option<usize>, usize)>,
}

impl Builder {
    fn fresh(&mut self) -> usize {
        self.state_count += 1;
        self.state_count - 1
    }

    fn edge(&mut self, from: usize, label: Option<usize>, to: usize) {
        self.transitions.push((from, label, to));
    }

    fn build(&mut self, node: &AstNode, alphabet: &Alphabet) -> Fragment {
        match node {
            AstNode::Epsilon => {
                let start = self.fresh();
                let accept = self.fresh();
                self.edge(start, None, accept);
                Fragment { start, accept }
            }
            AstNode::Literal(c) => {
                let id = alphabet
                    .index_of(*c)
                    .expect("parser guarantees literals are in the alphabet");
                let start = self.fresh();
                let accept = self.fresh();
                self.edge(start, Some(id), accept);
                Fragment { start, accept }
            }
            AstNode::Wildcard => {
                let start = self.fresh();
                let accept = self.fresh();
                for id in 0..alphabet.len() {
                    self.edge(start, Some(id), accept);
                }
                Fragment { start, accept }
            }
            AstNode::Class(members) => {
                let start = self.fresh();
                let accept = self.fresh();
                for c in members {
                    let id = alphabet
                        .index_of(*c)
                        .expect("parser guarantees class members are in the alphabet");
                    self.edge(start, Some(id), accept);
                }
                Fragment { start, accept }
            }
            AstNode::Concat(parts) => {
                let frags: Vec<Fragment> =
                    parts.iter().map(|p| self.build(p, alphabet)).collect();
                match frags.len() {
                    0 => self.build(&AstNode::Epsilon, alphabet),
                    _ => {
                        for pair in frags.windows(2) {
                            self.edge(pair[0].accept, None, pair[1].start);
                        }
                        Fragment {
                            start: frags[0].start,
                            accept: frags[frags.len() - 1].accept,
                        }
                    }
                }
            }
            AstNode::Alternation(parts) => {
                let start = self.fresh();
                let accept = self.fresh();
                for part in parts {
                    let frag = self.build(part, alphabet);
                    self.edge(start, None, frag.start);
                    self.edge(frag.accept, None, accept);
                }
                Fragment { start, accept }
            }
            AstNode::Star(inner) => {
                let start = self.fresh();
                let accept = self.fresh();
                let frag = self.build(inner, alphabet);
                self.edge(start, None, frag.start);
                self.edge(start, None, accept);
                self.edge(frag.accept, None, frag.start);
                self.edge(frag.accept, None, accept);
                Fragment { start, accept }
            }
            AstNode::Plus(inner) => {
                let start = self.fresh();
                let accept = self.fresh();
                let frag = self.build(inner, alphabet);
                self.edge(start, None, frag.start);
                self.edge(frag.accept, None, frag.start);
                self.edge(frag.accept, None, accept);
                Fragment { start, accept }
            }
            AstNode::Optional(inner) => {
                let start = self.fresh();
                let accept = self.fresh();
                let frag = self.build(inner, alphabet);
                self.edge(start, None, frag.start);
                self.edge(start, None, accept);
                self.edge(frag.accept, None, accept);
                Fragment { start, accept }
            }
            AstNode::Repeat { .. } => {
                unreachable!("repeats are expanded before NFA construction")
            }
        }
    }
}

/// Compiles the pattern's core expression (anchors excluded) to an NFA
/// accepting exactly the core language. Bounded repeats are expanded by
/// tree duplication first, so the construction itself stays uniform.
pub fn compile_to_nfa(ast: &PatternAst, alphabet: &Alphabet) -> Nfa {
    let expanded = ast.root().expand_repeats();
    let mut builder = Builder {
        state_count: 0,
        transitions: Vec::new(),
    };
    let frag = builder.build(&expanded, alphabet);
    Nfa {
        state_count: builder.state_count,
        alphabet_size: alphabet.len(),
        transitions: builder.transitions,
        initial: frag.start,
        accepting: vec![frag.accept],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::parse_pattern;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn encode(a: &Alphabet, s: &str) -> Vec<usize> {
        s.chars().map(|c| a.index_of(c).unwrap()).collect()
    }

    #[test]
    fn literal_is_a_two_state_nfa() {
        let a = Alphabet::new("A").unwrap();
        let p = parse_pattern("A", &a).unwrap();
        let nfa = compile_to_nfa(&p, &a);
        assert_eq!(nfa.state_count, 2);
        assert!(nfa.accepts(&encode(&a, "A")));
        assert!(!nfa.accepts(&encode(&a, "")));
        assert!(!nfa.accepts(&encode(&a, "AA")));
    }

    #[test]
    fn star_matches_all_counts() {
        let a = Alphabet::new("XY").unwrap();
        let p = parse_pattern("X*", &a).unwrap();
        let nfa = compile_to_nfa(&p, &a);
        for n in 0..6 {
            assert!(nfa.accepts(&vec![0; n]));
        }
        assert!(!nfa.accepts(&encode(&a, "XYX")));
    }

    #[test]
    fn bounded_repeat_is_exact() {
        let a = Alphabet::new("A_").unwrap();
        let p = parse_pattern("A_{4}A", &a).unwrap();
        let nfa = compile_to_nfa(&p, &a);
        assert!(nfa.accepts(&encode(&a, "A____A")));
        assert!(!nfa.accepts(&encode(&a, "A___A")));
        assert!(!nfa.accepts(&encode(&a, "A_____A")));
        assert!(!nfa.accepts(&encode(&a, "______")));
    }

    // Round trip against the direct recursive matcher: 200 random patterns,
    // 100 random strings of length <= 8 each.
    #[test]
    fn nfa_agrees_with_ast_matcher_on_random_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..200 {
            let sigma = ["A", "AB", "ABX"][case % 3];
            let alphabet = Alphabet::new(sigma).unwrap();
            let text = crate::pattern::random_pattern_text(&mut rng, &alphabet, 4);
            let ast = parse_pattern(&text, &alphabet).unwrap();
            let nfa = compile_to_nfa(&ast, &alphabet);
            for _ in 0..100 {
                let len = rng.random_range(0..=8);
                let s: Vec<char> = (0..len)
                    .map(|_| alphabet.symbol(rng.random_range(0..alphabet.len())))
                    .collect();
                let ids: Vec<usize> = s.iter().map(|&c| alphabet.index_of(c).unwrap()).collect();
                assert_eq!(
                    nfa.accepts(&ids),
                    ast.matches(&s, &alphabet),
                    "pattern {text:?} disagrees on {s:?}"
                );
            }
        }
    }
}
