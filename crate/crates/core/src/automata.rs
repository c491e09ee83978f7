//! Deterministic automata: subset construction, Hopcroft minimization,
//! suffix closure, and the match-position oracle.
//!
//! Every [`Dfa`] in this crate is *complete*: the transition function is
//! total over the alphabet, with an explicit sink where needed. Totality is
//! what makes each label sequence correspond to exactly one path through
//! the product machine, so all constructions here preserve it.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::error::Result;
use crate::pattern::Nfa;

/// A deterministic, complete automaton over symbol ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dfa {
    state_count: usize,
    alphabet_size: usize,
    /// Dense `state * alphabet_size + symbol -> state` table.
    transition: Vec<usize>,
    initial: usize,
    accepting: Vec<bool>,
}

impl Dfa {
    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    /// Total transition lookup.
    pub fn next(&self, state: usize, symbol: usize) -> usize {
        self.transition[state * self.alphabet_size + symbol]
    }

    pub fn accepts(&self, symbols: &[usize]) -> bool {
        let mut state = self.initial;
        for &sym in symbols {
            state = self.next(state, sym);
        }
        self.accepting[state]
    }

    /// Whether the initial state is accepting, i.e. the empty string is in
    /// the language.
    pub fn accepts_empty(&self) -> bool {
        self.accepting[self.initial]
    }

    /// Graphviz DOT rendering for debugging: accepting states as double
    /// circles, parallel edges merged onto one labeled arrow.
    pub fn to_dot(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        out.push_str("digraph dfa {\n\trankdir=LR;\n");
        out.push_str("\tstart [shape=none,label=\"\",height=0,width=0];\n");
        for q in 0..self.state_count {
            let shape = if self.accepting[q] { ",peripheries=2" } else { "" };
            out.push_str(&format!("\tq{q} [shape=circle{shape}];\n"));
        }
        out.push_str(&format!("\tstart -> q{};\n", self.initial));
        for q in 0..self.state_count {
            let mut by_target: Vec<(usize, Vec<char>)> = Vec::new();
            for sym in 0..self.alphabet_size {
                let r = self.next(q, sym);
                match by_target.iter_mut().find(|(t, _)| *t == r) {
                    Some((_, labels)) => labels.push(alphabet.symbol(sym)),
                    None => by_target.push((r, vec![alphabet.symbol(sym)])),
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

/// Subset construction. The result is complete: the empty subset acts as
/// the sink, so no (state, symbol) lookup can ever fail.
pub fn determinize(nfa: &Nfa, alphabet: &Alphabet) -> Dfa {
    assert_eq!(nfa.alphabet_size, alphabet.len());
    let sigma = alphabet.len();

    // Adjacency for the closure walk.
    let mut eps: Vec<Vec<usize>> = vec![Vec::new(); nfa.state_count];
    let mut by_sym: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nfa.state_count];
    for &(from, label, to) in &nfa.transitions {
        match label {
            None => eps[from].push(to),
            Some(sym) => by_sym[from].push((sym, to)),
        }
    }

    let closure = |seed: BTreeSet<usize>| -> BTreeSet<usize> {
        let mut set = seed;
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for &t in &eps[s] {
                if set.insert(t) {
                    stack.push(t);
                }
            }
        }
        set
    };

    let start = closure(BTreeSet::from([nfa.initial]));
    let mut ids: HashMap<BTreeSet<usize>, usize> = HashMap::new();
    let mut subsets: Vec<BTreeSet<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    ids.insert(start.clone(), 0);
    subsets.push(start);
    queue.push_back(0);

    let mut transition: Vec<usize> = Vec::new();
    while let Some(q) = queue.pop_front() {
        let subset = subsets[q].clone();
        for sym in 0..sigma {
            let mut moved = BTreeSet::new();
            for &s in &subset {
                for &(label, to) in &by_sym[s] {
                    if label == sym {
                        moved.insert(to);
                    }
                }
            }
            let next = closure(moved);
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = subsets.len();
                    ids.insert(next.clone(), id);
                    subsets.push(next);
                    queue.push_back(id);
                    id
                }
            };
            debug_assert_eq!(transition.len(), q * sigma + sym);
            transition.push(id);
        }
    }

    let accepting = subsets
        .iter()
        .map(|subset| nfa.accepting.iter().any(|a| subset.contains(a)))
        .collect();
    Dfa {
        state_count: subsets.len(),
        alphabet_size: sigma,
        transition,
        initial: 0,
        accepting,
    }
}

/// Hopcroft partition refinement. Returns a language-equivalent complete
/// DFA with the minimum number of states, renumbered by breadth-first
/// discovery from the initial state so the output is canonical.
pub fn minimize(dfa: &Dfa) -> Dfa {
    let sigma = dfa.alphabet_size;

    // Work on the reachable part only; unreachable states would otherwise
    // survive refinement.
    let reachable = reachable_order(dfa);
    let mut old_to_new = vec![usize::MAX; dfa.state_count];
    for (new, &old) in reachable.iter().enumerate() {
        old_to_new[old] = new;
    }
    let n = reachable.len();
    let mut delta = vec![0usize; n * sigma];
    let mut accepting = vec![false; n];
    for (new, &old) in reachable.iter().enumerate() {
        accepting[new] = dfa.accepting[old];
        for sym in 0..sigma {
            delta[new * sigma + sym] = old_to_new[dfa.next(old, sym)];
        }
    }

    // Predecessor lists per symbol.
    let mut preds: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; sigma];
    for state in 0..n {
        for sym in 0..sigma {
            preds[sym][delta[state * sigma + sym]].push(state);
        }
    }

    // Initial partition: accepting vs. non-accepting.
    let mut block_of = vec![0usize; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let acc: Vec<usize> = (0..n).filter(|&s| accepting[s]).collect();
    let non: Vec<usize> = (0..n).filter(|&s| !accepting[s]).collect();
    for group in [non, acc] {
        if !group.is_empty() {
            let id = blocks.len();
            for &s in &group {
                block_of[s] = id;
            }
            blocks.push(group);
        }
    }

    // Worklist of (block, symbol) splitter pairs, with a membership flag at
    // flat index `block * sigma + sym`.
    let mut worklist: VecDeque<(usize, usize)> = VecDeque::new();
    let mut queued: Vec<bool> = vec![false; blocks.len() * sigma];
    for b in 0..blocks.len() {
        for sym in 0..sigma {
            worklist.push_back((b, sym));
            queued[b * sigma + sym] = true;
        }
    }

    let mut marked: Vec<Vec<usize>> = Vec::new();
    while let Some((b, sym)) = worklist.pop_front() {
        queued[b * sigma + sym] = false;
        // X = states with a `sym` transition into the current extent of b.
        let members = blocks[b].clone();
        let mut touched: Vec<usize> = Vec::new();
        marked.clear();
        marked.resize(blocks.len(), Vec::new());
        for &m in &members {
            for &p in &preds[sym][m] {
                let c = block_of[p];
                if marked[c].is_empty() {
                    touched.push(c);
                }
                marked[c].push(p);
            }
        }
        for c in touched {
            if marked[c].len() == blocks[c].len() {
                continue; // X contains all of c: no split
            }
            let split: Vec<usize> = std::mem::take(&mut marked[c]);
            let new_id = blocks.len();
            for &s in &split {
                block_of[s] = new_id;
            }
            let remain: Vec<usize> = blocks[c]
                .iter()
                .copied()
                .filter(|s| block_of[*s] == c)
                .collect();
            blocks[c] = remain;
            blocks.push(split);
            queued.resize(blocks.len() * sigma, false);
            for d in 0..sigma {
                if queued[c * sigma + d] {
                    // c is pending: both halves must be pending.
                    worklist.push_back((new_id, d));
                    queued[new_id * sigma + d] = true;
                } else {
                    let smaller = if blocks[c].len() <= blocks[new_id].len() {
                        c
                    } else {
                        new_id
                    };
                    worklist.push_back((smaller, d));
                    queued[smaller * sigma + d] = true;
                }
            }
        }
    }

    // Quotient automaton, renumbered by BFS from the initial block.
    let quotient_next = |block: usize, sym: usize| -> usize {
        let rep = blocks[block][0];
        block_of[delta[rep * sigma + sym]]
    };
    let init_block = block_of[old_to_new[dfa.initial]];
    let mut order: Vec<usize> = Vec::new();
    let mut seen = vec![false; blocks.len()];
    let mut queue = VecDeque::from([init_block]);
    seen[init_block] = true;
    while let Some(b) = queue.pop_front() {
        order.push(b);
        for sym in 0..sigma {
            let t = quotient_next(b, sym);
            if !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    let mut block_to_new = vec![usize::MAX; blocks.len()];
    for (new, &b) in order.iter().enumerate() {
        block_to_new[b] = new;
    }
    let mut transition = vec![0usize; order.len() * sigma];
    let mut min_accepting = vec![false; order.len()];
    for (new, &b) in order.iter().enumerate() {
        min_accepting[new] = accepting[blocks[b][0]];
        for sym in 0..sigma {
            transition[new * sigma + sym] = block_to_new[quotient_next(b, sym)];
        }
    }
    Dfa {
        state_count: order.len(),
        alphabet_size: sigma,
        transition,
        initial: 0,
        accepting: min_accepting,
    }
}

fn reachable_order(dfa: &Dfa) -> Vec<usize> {
    let mut order = Vec::new();
    let mut seen = vec![false; dfa.state_count];
    let mut queue = VecDeque::from([dfa.initial]);
    seen[dfa.initial] = true;
    while let Some(q) = queue.pop_front() {
        order.push(q);
        for sym in 0..dfa.alphabet_size {
            let t = dfa.next(q, sym);
            if !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    order
}

/// Closes `core` under arbitrary prefixes: the result accepts exactly the
/// strings with a suffix in the core language.
///
/// Start-anchored patterns must match from position 1, so they bypass the
/// closure and return the core unchanged.
pub fn suffix_closure(core: &Dfa, anchored_start: bool, alphabet: &Alphabet) -> Dfa {
    if anchored_start {
        return core.clone();
    }
    let sigma = alphabet.len();
    // NFA: a fresh initial state that loops on every symbol and
    // epsilon-steps into the core's initial state.
    let fresh = core.state_count;
    let mut transitions: Vec<(usize, Option<usize>, usize)> = Vec::new();
    for q in 0..core.state_count {
        for sym in 0..sigma {
            transitions.push((q, Some(sym), core.next(q, sym)));
        }
    }
    for sym in 0..sigma {
        transitions.push((fresh, Some(sym), fresh));
    }
    transitions.push((fresh, None, core.initial()));
    let nfa = Nfa {
        state_count: core.state_count + 1,
        alphabet_size: sigma,
        transitions,
        initial: fresh,
        accepting: (0..core.state_count)
            .filter(|&q| core.is_accepting(q))
            .collect(),
    };
    minimize(&determinize(&nfa, alphabet))
}

/// Runs `dfa` over `y` and returns every 1-based position `i` such that the
/// state reached after `y[..i]` is accepting — i.e. every position where a
/// match ends. Position 0 (before any symbol) never fires. When
/// `anchored_end` is set, only `i == y.len()` may fire.
pub fn match_end_positions(
    dfa: &Dfa,
    anchored_end: bool,
    y: &[char],
    alphabet: &Alphabet,
) -> Result<Vec<usize>> {
    let ids = alphabet.encode(y)?;
    Ok(match_end_positions_ids(dfa, anchored_end, &ids))
}

/// [`match_end_positions`] over pre-encoded symbol ids.
pub fn match_end_positions_ids(dfa: &Dfa, anchored_end: bool, y: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut state = dfa.initial();
    for (idx, &sym) in y.iter().enumerate() {
        state = dfa.next(state, sym);
        let pos = idx + 1;
        if dfa.is_accepting(state) && (!anchored_end || pos == y.len()) {
            out.push(pos);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{compile_to_nfa, parse_pattern, random_pattern_text};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dfa_for(pattern: &str, alphabet: &Alphabet) -> Dfa {
        let ast = parse_pattern(pattern, alphabet).unwrap();
        determinize(&compile_to_nfa(&ast, alphabet), alphabet)
    }

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    fn random_string(rng: &mut ChaCha8Rng, sigma: usize, max_len: usize) -> Vec<usize> {
        let len = rng.random_range(0..=max_len);
        (0..len).map(|_| rng.random_range(0..sigma)).collect()
    }

    /// Table-filling distinguishability: returns true when every pair of
    /// distinct states is separated by some string (length < state count).
    fn all_states_distinguishable(dfa: &Dfa) -> bool {
        let n = dfa.state_count();
        let mut distinct = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                if dfa.is_accepting(a) != dfa.is_accepting(b) {
                    distinct[a * n + b] = true;
                }
            }
        }
        loop {
            let mut changed = false;
            for a in 0..n {
                for b in 0..n {
                    if a != b && !distinct[a * n + b] {
                        for sym in 0..dfa.alphabet_size() {
                            let (ta, tb) = (dfa.next(a, sym), dfa.next(b, sym));
                            if distinct[ta * n + tb] {
                                distinct[a * n + b] = true;
                                changed = true;
                                break;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (0..n).all(|a| (0..n).all(|b| a == b || distinct[a * n + b]))
    }

    #[test]
    fn single_literal_determinizes_to_three_states() {
        // start, accept, and the sink forced by totality.
        let a = Alphabet::new("A_").unwrap();
        let dfa = minimize(&dfa_for("A", &a));
        assert_eq!(dfa.state_count(), 3);
        assert!(dfa.accepts(&[0]));
        assert!(!dfa.accepts(&[1]));
        assert!(!dfa.accepts(&[0, 0]));
    }

    #[test]
    fn exact_string_pattern_minimizes_to_chain_plus_sink() {
        // A____A has 7 live states (progress 0..=6) plus one sink.
        let a = Alphabet::new("A_").unwrap();
        let dfa = minimize(&dfa_for("A_{4}A", &a));
        assert_eq!(dfa.state_count(), 8);
        assert!(all_states_distinguishable(&dfa));
        assert!(dfa.accepts(&a.encode(&chars("A____A")).unwrap()));
        assert!(!dfa.accepts(&a.encode(&chars("A___A")).unwrap()));
    }

    #[test]
    fn minimize_is_idempotent_and_merges_bisimilar_states() {
        let a = Alphabet::new("AB").unwrap();
        // Two equivalent accepting states reached on A and on B.
        let nfa = Nfa {
            state_count: 3,
            alphabet_size: 2,
            transitions: vec![(0, Some(0), 1), (0, Some(1), 2)],
            initial: 0,
            accepting: vec![1, 2],
        };
        let dfa = determinize(&nfa, &a);
        let min = minimize(&dfa);
        assert_eq!(min.state_count(), dfa.state_count() - 1);
        let again = minimize(&min);
        assert_eq!(again.state_count(), min.state_count());
        assert_eq!(again, min);
    }

    #[test]
    fn determinization_preserves_language() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..60 {
            let sigma_text = ["AB", "ABX"][case % 2];
            let alphabet = Alphabet::new(sigma_text).unwrap();
            let text = random_pattern_text(&mut rng, &alphabet, 3);
            let ast = parse_pattern(&text, &alphabet).unwrap();
            let nfa = compile_to_nfa(&ast, &alphabet);
            let dfa = minimize(&determinize(&nfa, &alphabet));
            for _ in 0..200 {
                let s = random_string(&mut rng, alphabet.len(), 9);
                assert_eq!(
                    dfa.accepts(&s),
                    nfa.accepts(&s),
                    "pattern {text:?} disagrees on {s:?}"
                );
            }
        }
    }

    #[test]
    fn randomized_minimization_is_minimal_and_equivalent() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let sigma = rng.random_range(1..=3);
            let n = rng.random_range(1..=12);
            let transition: Vec<usize> =
                (0..n * sigma).map(|_| rng.random_range(0..n)).collect();
            let accepting: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
            let dfa = Dfa {
                state_count: n,
                alphabet_size: sigma,
                transition,
                initial: 0,
                accepting,
            };
            let min = minimize(&dfa);
            assert!(min.state_count() <= dfa.state_count());
            assert_eq!(minimize(&min).state_count(), min.state_count());
            assert!(all_states_distinguishable(&min));
            for _ in 0..200 {
                let s = random_string(&mut rng, sigma, 10);
                assert_eq!(min.accepts(&s), dfa.accepts(&s));
            }
        }
    }

    #[test]
    fn suffix_closure_of_single_literal() {
        // Strings ending in A: two states.
        let a = Alphabet::new("A_").unwrap();
        let closed = suffix_closure(&minimize(&dfa_for("A", &a)), false, &a);
        assert_eq!(closed.state_count(), 2);
        assert!(closed.accepts(&a.encode(&chars("__A")).unwrap()));
        assert!(!closed.accepts(&a.encode(&chars("A_")).unwrap()));
        assert!(!closed.accepts(&[]));
    }

    #[test]
    fn suffix_closure_of_worked_pattern_has_three_states() {
        let a = Alphabet::new("ABX").unwrap();
        let core = minimize(&dfa_for("AX*A", &a));
        let closed = suffix_closure(&core, false, &a);
        assert_eq!(closed.state_count(), 3);
    }

    #[test]
    fn anchored_suffix_closure_returns_core_unchanged() {
        let a = Alphabet::new("ABX").unwrap();
        let core = minimize(&dfa_for("AX*A", &a));
        let closed = suffix_closure(&core, true, &a);
        assert_eq!(closed, core);
    }

    #[test]
    fn suffix_closure_matches_all_substring_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for case in 0..40 {
            let sigma_text = ["AB", "ABX"][case % 2];
            let alphabet = Alphabet::new(sigma_text).unwrap();
            let text = random_pattern_text(&mut rng, &alphabet, 3);
            let ast = parse_pattern(&text, &alphabet).unwrap();
            let core = minimize(&determinize(&compile_to_nfa(&ast, &alphabet), &alphabet));
            let closed = suffix_closure(&core, false, &alphabet);
            for _ in 0..100 {
                let y = random_string(&mut rng, alphabet.len(), 8);
                let got = match_end_positions_ids(&closed, false, &y);
                // Brute force over every suffix of the length-i prefix. The
                // empty suffix (j == i) is included: when the core language
                // contains the empty string, the closed automaton accepts
                // every nonempty prefix.
                let expect: Vec<usize> = (1..=y.len())
                    .filter(|&i| (0..=i).any(|j| core.accepts(&y[j..i])))
                    .collect();
                assert_eq!(got, expect, "pattern {text:?} on {y:?}");
            }
        }
    }

    #[test]
    fn match_positions_on_the_worked_example() {
        let a = Alphabet::new("ABX").unwrap();
        let l1 = suffix_closure(&minimize(&dfa_for("AX*A", &a)), false, &a);
        let l2 = suffix_closure(&minimize(&dfa_for("BX*B", &a)), false, &a);
        let y = chars("BAXAA");
        assert_eq!(match_end_positions(&l1, false, &y, &a).unwrap(), vec![4, 5]);
        assert_eq!(
            match_end_positions(&l2, false, &y, &a).unwrap(),
            Vec::<usize>::new()
        );
    }

    #[test]
    fn end_anchored_match_fires_only_at_final_position() {
        let a = Alphabet::new("A_").unwrap();
        let ast = parse_pattern("^(_*A){3}_*$", &a).unwrap();
        let core = minimize(&determinize(&compile_to_nfa(&ast, &a), &a));
        let dfa = suffix_closure(&core, ast.anchored_start(), &a);
        let y = chars("__A_AA____");
        assert_eq!(
            match_end_positions(&dfa, ast.anchored_end(), &y, &a).unwrap(),
            vec![10]
        );
    }

    #[test]
    fn match_positions_rejects_foreign_symbols() {
        let a = Alphabet::new("AB").unwrap();
        let dfa = minimize(&dfa_for("A", &a));
        assert!(match_end_positions(&dfa, false, &chars("AC"), &a).is_err());
    }

    #[test]
    fn transition_table_is_total_after_every_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..30 {
            let alphabet = Alphabet::new("ABX").unwrap();
            let text = random_pattern_text(&mut rng, &alphabet, 3);
            let ast = parse_pattern(&text, &alphabet).unwrap();
            let stages = {
                let d = determinize(&compile_to_nfa(&ast, &alphabet), &alphabet);
                let m = minimize(&d);
                let s = suffix_closure(&m, ast.anchored_start(), &alphabet);
                [d, m, s]
            };
            for dfa in &stages {
                for q in 0..dfa.state_count() {
                    for sym in 0..dfa.alphabet_size() {
                        assert!(dfa.next(q, sym) < dfa.state_count());
                    }
                }
            }
        }
    }

    #[test]
    fn dot_export_marks_accepting_states() {
        let a = Alphabet::new("A_").unwrap();
        let dfa = minimize(&dfa_for("A", &a));
        let dot = dfa.to_dot(&a);
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("peripheries=2"));
        assert!(dot.contains("start -> q0"));
    }
}
