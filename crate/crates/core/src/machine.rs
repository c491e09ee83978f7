//! The state-labeled product automaton over a pattern set.
//!
//! Each pattern's suffix-closed DFA runs in lockstep inside one product
//! machine. A product state is a tuple of component states and carries the
//! set of patterns whose component is accepting there — the patterns that
//! match ending at the current position whenever that state is reached.
//! Because every component is complete, the product is complete too, and
//! each label sequence corresponds to exactly one arc path.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::automata::{self, Dfa};
use crate::error::{Error, Result};
use crate::pattern::{compile_to_nfa, parse_pattern, PatternAst};

/// Default cap on product states. Pattern sets past this are outside the
/// tractable range (the product is worst-case exponential in the number of
/// patterns).
pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// One compiled pattern: its AST, its suffix-closed component DFA, and the
/// end-anchor flag that restricts where it may fire.
#[derive(Debug, Clone)]
pub struct CompiledPattern {
    pub id: usize,
    pub ast: PatternAst,
    /// Suffix-closed (or, for start-anchored patterns, plain minimized)
    /// component automaton.
    pub dfa: Dfa,
    pub anchored_end: bool,
}

/// An ordered set of compiled patterns over a shared alphabet.
#[derive(Debug, Clone)]
pub struct PatternSet {
    alphabet: Alphabet,
    patterns: Vec<CompiledPattern>,
    warnings: Vec<String>,
}

impl PatternSet {
    /// Parses and compiles `texts` in order: parse, Thompson NFA,
    /// determinize, minimize, then suffix-close (skipped for
    /// start-anchored patterns, whose matches must begin at position 1).
    ///
    /// Patterns whose core language contains the empty string are accepted
    /// with a warning: they fire at every position from 1 on, which is
    /// rarely what anyone wants.
    pub fn compile(alphabet: &Alphabet, texts: &[&str]) -> Result<Self> {
        let mut patterns = Vec::new();
        let mut warnings = Vec::new();
        for (id, text) in texts.iter().enumerate() {
            let ast = parse_pattern(text, alphabet)?;
            let core = automata::minimize(&automata::determinize(
                &compile_to_nfa(&ast, alphabet),
                alphabet,
            ));
            if core.accepts_empty() {
                warnings.push(format!(
                    "pattern {id} ({text:?}) matches the empty string; it will fire at every position"
                ));
            }
            let dfa = automata::suffix_closure(&core, ast.anchored_start(), alphabet);
            patterns.push(CompiledPattern {
                id,
                anchored_end: ast.anchored_end(),
                ast,
                dfa,
            });
        }
        Ok(Self {
            alphabet: alphabet.clone(),
            patterns,
            warnings,
        })
    }

    /// Convenience wrapper over owned pattern strings.
    pub fn compile_strings(alphabet: &Alphabet, texts: &[String]) -> Result<Self> {
        let refs: Vec<&str> = texts.iter().map(|s| s.as_str()).collect();
        Self::compile(alphabet, &refs)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn patterns(&self) -> &[CompiledPattern] {
        &self.patterns
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn source_texts(&self) -> Vec<String> {
        self.patterns
            .iter()
            .map(|p| p.ast.source_text().to_string())
            .collect()
    }

    /// All 1-based positions where pattern `id` fires on `y`, honoring the
    /// pattern's end anchor.
    pub fn match_positions(&self, id: usize, y: &[usize]) -> Vec<usize> {
        let p = &self.patterns[id];
        automata::match_end_positions_ids(&p.dfa, p.anchored_end, y)
    }
}

/// One arc of the product machine: `source --symbol--> target`.
///
/// Arc ids are frozen as `source * |Σ| + symbol` (source state first, then
/// symbol id), which both enumerates arcs deterministically and makes
/// lookup trivial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub source: usize,
    pub symbol: usize,
    pub target: usize,
}

/// The deterministic, complete, state-labeled product automaton.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternMachine {
    alphabet: Alphabet,
    /// Component-state tuple for each product state (diagnostics only).
    tuples: Vec<Vec<usize>>,
    /// Sorted pattern ids accepting at each product state.
    labels: Vec<Vec<usize>>,
    /// Dense `state * |Σ| + symbol -> state` table.
    transition: Vec<usize>,
    /// Arcs in frozen (source, symbol) order; `arcs.len() == states * |Σ|`.
    arcs: Vec<Arc>,
    /// Per-pattern end-anchor flags, used to filter firing positions.
    end_anchored: Vec<bool>,
    initial: usize,
}

impl PatternMachine {
    /// Builds the product of the pattern set's component automata,
    /// restricted to states reachable from the initial tuple.
    ///
    /// An empty pattern set yields the trivial one-state machine whose arcs
    /// are the |Σ| self-loops: the plain linear-chain CRF.
    pub fn build(patterns: &PatternSet) -> Result<Self> {
        Self::build_capped(patterns, DEFAULT_STATE_CAP)
    }

    /// [`PatternMachine::build`] with an explicit product-state cap.
    pub fn build_capped(patterns: &PatternSet, state_cap: usize) -> Result<Self> {
        let alphabet = patterns.alphabet().clone();
        let sigma = alphabet.len();
        let components: Vec<&Dfa> = patterns.patterns().iter().map(|p| &p.dfa).collect();

        let start: Vec<usize> = components.iter().map(|d| d.initial()).collect();
        let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut tuples: Vec<Vec<usize>> = Vec::new();
        let mut transition: Vec<usize> = Vec::new();
        let mut queue = VecDeque::new();
        ids.insert(start.clone(), 0);
        tuples.push(start);
        queue.push_back(0usize);

        while let Some(q) = queue.pop_front() {
            let tuple = tuples[q].clone();
            for sym in 0..sigma {
                let next: Vec<usize> = tuple
                    .iter()
                    .zip(&components)
                    .map(|(&s, d)| d.next(s, sym))
                    .collect();
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        if tuples.len() >= state_cap {
                            return Err(Error::ProductCapExceeded { cap: state_cap });
                        }
                        let id = tuples.len();
                        ids.insert(next.clone(), id);
                        tuples.push(next);
                        queue.push_back(id);
                        id
                    }
                };
                debug_assert_eq!(transition.len(), q * sigma + sym);
                transition.push(id);
            }
        }

        let labels: Vec<Vec<usize>> = tuples
            .iter()
            .map(|tuple| {
                tuple
                    .iter()
                    .zip(&components)
                    .enumerate()
                    .filter(|(_, (&s, d))| d.is_accepting(s))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let arcs: Vec<Arc> = (0..tuples.len())
            .flat_map(|source| {
                let transition = &transition;
                (0..sigma).map(move |symbol| Arc {
                    source,
                    symbol,
                    target: transition[source * sigma + symbol],
                })
            })
            .collect();

        Ok(Self {
            alphabet,
            tuples,
            labels,
            transition,
            arcs,
            end_anchored: patterns.patterns().iter().map(|p| p.anchored_end).collect(),
            initial: 0,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.tuples.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> Arc {
        self.arcs[id]
    }

    /// The arc taken from `state` on `symbol`.
    pub fn arc_id(&self, state: usize, symbol: usize) -> usize {
        state * self.alphabet.len() + symbol
    }

    pub fn next(&self, state: usize, symbol: usize) -> usize {
        self.transition[state * self.alphabet.len() + symbol]
    }

    /// Pattern ids accepting at `state`.
    pub fn labels(&self, state: usize) -> &[usize] {
        &self.labels[state]
    }

    /// Component-state tuple of `state`.
    pub fn tuple(&self, state: usize) -> &[usize] {
        &self.tuples[state]
    }

    pub fn pattern_count(&self) -> usize {
        self.end_anchored.len()
    }

    pub fn is_end_anchored(&self, pattern: usize) -> bool {
        self.end_anchored[pattern]
    }

    /// Pattern ids of `state` that may fire at position `pos` of a
    /// length-`n` sequence: end-anchored ids are kept only at `pos == n`.
    pub fn firing_labels<'a>(
        &'a self,
        state: usize,
        pos: usize,
        n: usize,
    ) -> impl Iterator<Item = usize> + 'a {
        self.labels[state]
            .iter()
            .copied()
            .filter(move |&p| pos == n || !self.end_anchored[p])
    }

    /// The unique arc path for `y`: entry `i` is the arc taken at step
    /// `i + 1`.
    pub fn path_of(&self, y: &[char]) -> Result<Vec<usize>> {
        let ids = self.alphabet.encode(y)?;
        Ok(self.path_of_ids(&ids))
    }

    /// [`PatternMachine::path_of`] over pre-encoded symbol ids.
    pub fn path_of_ids(&self, y: &[usize]) -> Vec<usize> {
        let mut state = self.initial;
        let mut path = Vec::with_capacity(y.len());
        for &sym in y {
            path.push(self.arc_id(state, sym));
            state = self.next(state, sym);
        }
        path
    }

    /// For each position `i` (1-based), the set of pattern ids matching `y`
    /// ending at `i`, with end-anchored patterns filtered to the final
    /// position.
    pub fn fired_patterns(&self, y: &[char]) -> Result<Vec<Vec<usize>>> {
        let ids = self.alphabet.encode(y)?;
        Ok(self.fired_patterns_ids(&ids))
    }

    /// [`PatternMachine::fired_patterns`] over pre-encoded symbol ids.
    pub fn fired_patterns_ids(&self, y: &[usize]) -> Vec<Vec<usize>> {
        let n = y.len();
        self.path_of_ids(y)
            .iter()
            .enumerate()
            .map(|(idx, &arc)| {
                self.firing_labels(self.arcs[arc].target, idx + 1, n).collect()
            })
            .collect()
    }

    /// DOT rendering with each state annotated by its pattern-label set.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        out.push_str("digraph pattern_machine {\n\trankdir=LR;\n");
        out.push_str("\tstart [shape=none,label=\"\",height=0,width=0];\n");
        for q in 0..self.state_count() {
            let label_set = if self.labels[q].is_empty() {
                "∅".to_string()
            } else {
                let names: Vec<String> =
                    self.labels[q].iter().map(|p| format!("L{p}")).collect();
                format!("{{{}}}", names.join(","))
            };
            out.push_str(&format!(
                "\tq{q} [shape=circle,label=\"q{q}\\n{label_set}\"];\n"
            ));
        }
        out.push_str(&format!("\tstart -> q{};\n", self.initial));
        for q in 0..self.state_count() {
            let mut by_target: Vec<(usize, Vec<char>)> = Vec::new();
            for sym in 0..self.alphabet.len() {
                let r = self.next(q, sym);
                match by_target.iter_mut().find(|(t, _)| *t == r) {
                    Some((_, labels)) => labels.push(self.alphabet.symbol(sym)),
                    None => by_target.push((r, vec![self.alphabet.symbol(sym)])),
                }
            }
            for (r, labels) in by_target {
                let label: String = labels
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                out.push_str(&format!("\tq{q} -> q{r} [label=\"{label}\"];\n"));
            }
        }
        out.push_str("}\n");
        out
    }
}
