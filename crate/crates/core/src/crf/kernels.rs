//! Shared numeric kernels for the arc lattice.
//!
//! Both the map-based public operations and the indexed training path run
//! on these routines, so there is exactly one implementation of forward,
//! backward, Viterbi, and the posterior accumulations.
//!
//! Conventions: `values` is the `n x arc_count` table of per-position arc
//! log-potentials (row-major by position); `trans` is the dense
//! `sigma x sigma` transition table by symbol ids. The zero-probability
//! cases are structural, never arithmetic: position 1 only considers arcs
//! leaving the initial state, and later positions only combine arc pairs
//! whose endpoint states chain. Structurally unreachable alphas are
//! negative infinity, which log-sum-exp treats as absent.

use crate::machine::PatternMachine;

use super::math::LogSumAcc;

/// Incoming-arc index: arc ids grouped by target state, ascending.
pub(crate) struct Topology {
    pub incoming: Vec<Vec<usize>>,
}

impl Topology {
    pub fn new(machine: &PatternMachine) -> Self {
        let mut incoming = vec![Vec::new(); machine.state_count()];
        for (id, arc) in machine.arcs().iter().enumerate() {
            incoming[arc.target].push(id);
        }
        Self { incoming }
    }
}

/// Forward recursion; returns the full `n x arc_count` alpha table.
pub(crate) fn forward(
    machine: &PatternMachine,
    topo: &Topology,
    n: usize,
    values: &[f64],
    trans: &[f64],
) -> Vec<f64> {
    let ac = machine.arc_count();
    let sigma = machine.alphabet().len();
    let states = machine.state_count();
    let mut alpha = vec![f64::NEG_INFINITY; n * ac];

    for (id, arc) in machine.arcs().iter().enumerate() {
        if arc.source == machine.initial() {
            alpha[id] = values[id];
        }
    }
    let mut in_msg = vec![f64::NEG_INFINITY; states * sigma];
    for i in 1..n {
        let prev = &alpha[(i - 1) * ac..i * ac];
        for (s, arcs_in) in topo.incoming.iter().enumerate() {
            for b_sym in 0..sigma {
                let mut acc = LogSumAcc::new();
                for &a in arcs_in {
                    let a_sym = machine.arc(a).symbol;
                    acc.add(prev[a] + trans[a_sym * sigma + b_sym]);
                }
                in_msg[s * sigma + b_sym] = acc.value();
            }
        }
        for (id, arc) in machine.arcs().iter().enumerate() {
            alpha[i * ac + id] = values[i * ac + id] + in_msg[arc.source * sigma + arc.symbol];
        }
    }
    alpha
}

/// Backward recursion; returns the full `n x arc_count` beta table.
pub(crate) fn backward(
    machine: &PatternMachine,
    n: usize,
    values: &[f64],
    trans: &[f64],
) -> Vec<f64> {
    let ac = machine.arc_count();
    let sigma = machine.alphabet().len();
    let states = machine.state_count();
    let mut beta = vec![f64::NEG_INFINITY; n * ac];
    for id in 0..ac {
        beta[(n - 1) * ac + id] = 0.0;
    }
    let mut out_msg = vec![f64::NEG_INFINITY; states * sigma];
    for i in (1..n).rev() {
        // out_msg[t, a_sym]: continue from state t after emitting a_sym.
        for t in 0..states {
            for a_sym in 0..sigma {
                let mut acc = LogSumAcc::new();
                for b_sym in 0..sigma {
                    let b = machine.arc_id(t, b_sym);
                    acc.add(trans[a_sym * sigma + b_sym] + values[i * ac + b] + beta[i * ac + b]);
                }
                out_msg[t * sigma + a_sym] = acc.value();
            }
        }
        for (id, arc) in machine.arcs().iter().enumerate() {
            beta[(i - 1) * ac + id] = out_msg[arc.target * sigma + arc.symbol];
        }
    }
    beta
}

pub(crate) fn logz_from_alpha(alpha: &[f64], n: usize, ac: usize) -> f64 {
    let mut acc = LogSumAcc::new();
    for &v in &alpha[(n - 1) * ac..n * ac] {
        acc.add(v);
    }
    acc.value()
}

/// Max-product recursion with deterministic tie-breaking: at every
/// backpointer decision (and at the final argmax) the lowest arc id among
/// the maximizers wins. Returns the best arc path.
pub(crate) fn viterbi_path(
    machine: &PatternMachine,
    topo: &Topology,
    n: usize,
    values: &[f64],
    trans: &[f64],
) -> Vec<usize> {
    let ac = machine.arc_count();
    let sigma = machine.alphabet().len();
    let mut score = vec![f64::NEG_INFINITY; n * ac];
    let mut bp = vec![usize::MAX; n * ac];

    for (id, arc) in machine.arcs().iter().enumerate() {
        if arc.source == machine.initial() {
            score[id] = values[id];
        }
    }
    for i in 1..n {
        for (id, arc) in machine.arcs().iter().enumerate() {
            let mut best = f64::NEG_INFINITY;
            let mut best_arc = usize::MAX;
            // Ascending arc ids; strict improvement keeps the lowest id on ties.
            for &a in &topo.incoming[arc.source] {
                let v = score[(i - 1) * ac + a] + trans[machine.arc(a).symbol * sigma + arc.symbol];
                if v > best {
                    best = v;
                    best_arc = a;
                }
            }
            score[i * ac + id] = best + values[i * ac + id];
            bp[i * ac + id] = best_arc;
        }
    }

    let mut best = f64::NEG_INFINITY;
    let mut last = usize::MAX;
    for id in 0..ac {
        if score[(n - 1) * ac + id] > best {
            best = score[(n - 1) * ac + id];
            last = id;
        }
    }
    let mut path = vec![0usize; n];
    let mut cur = last;
    for i in (0..n).rev() {
        path[i] = cur;
        if i > 0 {
            cur = bp[i * ac + cur];
        }
    }
    path
}

/// Per-position arc posteriors `exp(alpha + beta - logZ)`.
pub(crate) fn arc_posteriors(
    n: usize,
    ac: usize,
    alpha: &[f64],
    beta: &[f64],
    log_z: f64,
) -> Vec<f64> {
    (0..n * ac)
        .map(|idx| {
            let s = alpha[idx] + beta[idx];
            if s == f64::NEG_INFINITY {
                0.0
            } else {
                (s - log_z).exp()
            }
        })
        .collect()
}

/// Expected adjacent-symbol-pair counts, summed over positions: the
/// `sigma x sigma` matrix of pairwise posteriors that the transition
/// gradient needs. Only chainable arc pairs contribute.
pub(crate) fn expected_transition_counts(
    machine: &PatternMachine,
    topo: &Topology,
    n: usize,
    values: &[f64],
    trans: &[f64],
    alpha: &[f64],
    beta: &[f64],
    log_z: f64,
) -> Vec<f64> {
    let ac = machine.arc_count();
    let sigma = machine.alphabet().len();
    let mut counts = vec![0.0; sigma * sigma];
    for i in 1..n {
        for (b, arc_b) in machine.arcs().iter().enumerate() {
            let tail = values[i * ac + b] + beta[i * ac + b];
            if tail == f64::NEG_INFINITY {
                continue;
            }
            for &a in &topo.incoming[arc_b.source] {
                let head = alpha[(i - 1) * ac + a];
                if head == f64::NEG_INFINITY {
                    continue;
                }
                let a_sym = machine.arc(a).symbol;
                let w = (head + trans[a_sym * sigma + arc_b.symbol] + tail - log_z).exp();
                counts[a_sym * sigma + arc_b.symbol] += w;
            }
        }
    }
    counts
}
