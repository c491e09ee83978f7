//! Exact inference and training on the arc lattice, plus the direct
//! brute-force scorer for the pattern-augmented distribution.
//!
//! The auxiliary CRF's label set is the arc set of the product machine.
//! [`build_lattice`] assembles per-position arc log-potentials (emission
//! plus the pattern potentials of the arc's target state); the pairwise
//! chain weight between consecutive arcs is the ordinary transition
//! potential of their symbols, applied only to chainable pairs. The
//! resulting path distribution equals the direct definition computed by
//! [`score_sequence`], which never touches the product machine and serves
//! as its independent oracle.

mod kernels;
pub mod math;
mod train;

pub use train::{train, TrainConfig, TrainResult};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::machine::{PatternMachine, PatternSet};
use crate::potentials::{Feature, FeatureConfig, ModelParams};

use kernels::Topology;

/// One supervised example: an input sequence and its label sequence of
/// equal, nonzero length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    x: Vec<char>,
    y: Vec<char>,
}

impl Example {
    pub fn new(x: Vec<char>, y: Vec<char>) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(Error::LengthMismatch {
                x_len: x.len(),
                y_len: y.len(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn from_strs(x: &str, y: &str) -> Result<Self> {
        Self::new(x.chars().collect(), y.chars().collect())
    }

    pub fn x(&self) -> &[char] {
        &self.x
    }

    pub fn y(&self) -> &[char] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty sequences
    }
}

/// Per-position arc log-potentials for one input sequence, together with
/// the transition table snapshot the recursions need.
///
/// Structural zeros are not stored: position 1 only ever consults arcs
/// leaving the initial state, and later positions only combine arc pairs
/// that chain through a shared state.
pub struct Lattice<'m> {
    machine: &'m PatternMachine,
    n: usize,
    /// `n x arc_count` log-potentials, row-major by position.
    values: Vec<f64>,
    /// Dense `sigma x sigma` transition log-potentials by symbol id.
    trans: Vec<f64>,
    topo: Topology,
}

/// Assembles the lattice for `x`: the live value of arc `q -a-> r` at
/// position `i` is the emission potential of `(x, a, i)` plus the pattern
/// potentials of every pattern labeling `r` that may fire at `i`
/// (end-anchored patterns only at `i == n`).
pub fn build_lattice<'m>(
    machine: &'m PatternMachine,
    params: &ModelParams,
    config: &FeatureConfig,
    x: &[char],
) -> Lattice<'m> {
    let n = x.len();
    assert!(n >= 1, "lattice requires a nonempty input");
    let sigma = machine.alphabet().len();
    let ac = machine.arc_count();
    let mut values = vec![0.0; n * ac];
    for i in 1..=n {
        for (id, arc) in machine.arcs().iter().enumerate() {
            let symbol = machine.alphabet().symbol(arc.symbol);
            let mut v = params.log_emission(config, x, symbol, i);
            for pattern in machine.firing_labels(arc.target, i, n) {
                v += params.log_pattern(config, x, pattern, i);
            }
            values[(i - 1) * ac + id] = v;
        }
    }
    let mut trans = vec![0.0; sigma * sigma];
    for a in 0..sigma {
        for b in 0..sigma {
            trans[a * sigma + b] = params.log_transition_ids(a, b);
        }
    }
    Lattice {
        machine,
        n,
        values,
        trans,
        topo: Topology::new(machine),
    }
}

impl<'m> Lattice<'m> {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires n >= 1
    }

    pub fn machine(&self) -> &'m PatternMachine {
        self.machine
    }

    /// The stored log-potential of `arc` at 1-based position `i`.
    pub fn value(&self, i: usize, arc: usize) -> f64 {
        self.values[(i - 1) * self.machine.arc_count() + arc]
    }

    /// Log partition function: stable log-sum-exp forward recursion over
    /// live arcs.
    pub fn log_partition(&self) -> f64 {
        let alpha = kernels::forward(self.machine, &self.topo, self.n, &self.values, &self.trans);
        kernels::logz_from_alpha(&alpha, self.n, self.machine.arc_count())
    }

    /// The log score of `y`'s unique arc path through this lattice: the sum
    /// of its per-position arc values plus the chain weights of its
    /// consecutive symbol pairs.
    pub fn path_score(&self, y: &[char]) -> Result<f64> {
        if y.len() != self.n {
            return Err(Error::LengthMismatch {
                x_len: self.n,
                y_len: y.len(),
            });
        }
        let ids = self.machine.alphabet().encode(y)?;
        let sigma = self.machine.alphabet().len();
        let path = self.machine.path_of_ids(&ids);
        let mut score = 0.0;
        for (idx, &arc) in path.iter().enumerate() {
            score += self.value(idx + 1, arc);
            if idx + 1 < path.len() {
                score += self.trans[ids[idx] * sigma + ids[idx + 1]];
            }
        }
        Ok(score)
    }

    /// Highest-scoring label sequence. Ties are broken deterministically:
    /// at every backpointer decision and at the final argmax the lowest
    /// arc id among the maximizers wins.
    pub fn viterbi(&self) -> Vec<char> {
        let path =
            kernels::viterbi_path(self.machine, &self.topo, self.n, &self.values, &self.trans);
        path.iter()
            .map(|&id| self.machine.alphabet().symbol(self.machine.arc(id).symbol))
            .collect()
    }

    /// Per-position arc posteriors, `n x arc_count` row-major. Each row
    /// sums to one; structurally dead arcs carry exactly zero mass.
    pub fn arc_posteriors(&self) -> Vec<f64> {
        let alpha = kernels::forward(self.machine, &self.topo, self.n, &self.values, &self.trans);
        let beta = kernels::backward(self.machine, self.n, &self.values, &self.trans);
        let log_z = kernels::logz_from_alpha(&alpha, self.n, self.machine.arc_count());
        kernels::arc_posteriors(self.n, self.machine.arc_count(), &alpha, &beta, log_z)
    }

    /// Expected feature counts under the lattice distribution: arc
    /// posteriors weighted into each live arc's active features, plus
    /// pairwise posteriors weighted into the transition features.
    pub fn expected_feature_counts(
        &self,
        config: &FeatureConfig,
        x: &[char],
    ) -> BTreeMap<Feature, f64> {
        let ac = self.machine.arc_count();
        let sigma = self.machine.alphabet().len();
        let alpha = kernels::forward(self.machine, &self.topo, self.n, &self.values, &self.trans);
        let beta = kernels::backward(self.machine, self.n, &self.values, &self.trans);
        let log_z = kernels::logz_from_alpha(&alpha, self.n, ac);
        let mu = kernels::arc_posteriors(self.n, ac, &alpha, &beta, log_z);

        let mut counts: BTreeMap<Feature, f64> = BTreeMap::new();
        for i in 1..=self.n {
            for (id, arc) in self.machine.arcs().iter().enumerate() {
                let w = mu[(i - 1) * ac + id];
                if w == 0.0 {
                    continue;
                }
                let symbol = self.machine.alphabet().symbol(arc.symbol);
                for f in config.emission_features(x, symbol, i) {
                    *counts.entry(f).or_insert(0.0) += w;
                }
                for pattern in self.machine.firing_labels(arc.target, i, self.n) {
                    for f in config.pattern_features(x, pattern, i) {
                        *counts.entry(f).or_insert(0.0) += w;
                    }
                }
            }
        }
        let pair = kernels::expected_transition_counts(
            self.machine,
            &self.topo,
            self.n,
            &self.values,
            &self.trans,
            &alpha,
            &beta,
            log_z,
        );
        for a in 0..sigma {
            for b in 0..sigma {
                let w = pair[a * sigma + b];
                if w != 0.0 {
                    let f = config.transition_feature(
                        self.machine.alphabet().symbol(a),
                        self.machine.alphabet().symbol(b),
                    );
                    *counts.entry(f).or_insert(0.0) += w;
                }
            }
        }
        counts
    }
}

/// Scores `(x, y)` directly from the defining distribution: emission and
/// transition sums over `y`, plus a pattern potential at every position
/// where each pattern's own suffix automaton reports a match end.
///
/// This deliberately bypasses the product machine; it is the independent
/// oracle for the lattice construction.
pub fn score_sequence(
    patterns: &PatternSet,
    params: &ModelParams,
    config: &FeatureConfig,
    x: &[char],
    y: &[char],
) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            x_len: x.len(),
            y_len: y.len(),
        });
    }
    let ids = patterns.alphabet().encode(y)?;
    let mut score = 0.0;
    for (idx, &label) in y.iter().enumerate() {
        score += params.log_emission(config, x, label, idx + 1);
    }
    for pair in y.windows(2) {
        score += params.log_transition(pair[0], pair[1]);
    }
    for p in 0..patterns.len() {
        for i in patterns.match_positions(p, &ids) {
            score += params.log_pattern(config, x, p, i);
        }
    }
    Ok(score)
}

/// Observed feature counts of one gold example, accumulated into `counts`
/// with weight `w`. Uses the per-pattern match oracle, not the machine.
fn accumulate_observed(
    patterns: &PatternSet,
    config: &FeatureConfig,
    x: &[char],
    y: &[char],
    y_ids: &[usize],
    w: f64,
    counts: &mut BTreeMap<Feature, f64>,
) {
    for (idx, &label) in y.iter().enumerate() {
        for f in config.emission_features(x, label, idx + 1) {
            *counts.entry(f).or_insert(0.0) += w;
        }
    }
    for pair in y.windows(2) {
        *counts
            .entry(config.transition_feature(pair[0], pair[1]))
            .or_insert(0.0) += w;
    }
    for p in 0..patterns.len() {
        for i in patterns.match_positions(p, y_ids) {
            for f in config.pattern_features(x, p, i) {
                *counts.entry(f).or_insert(0.0) += w;
            }
        }
    }
}

/// Negative log-likelihood of a batch and its gradient.
///
/// The returned objective is `sum_i (log Z_i - score_i)` plus the ridge
/// penalty `l2/2 * ||params||^2`; the gradient is expected minus observed
/// feature counts plus `l2 * params`, so the two are derivative-consistent
/// for any `l2` (pass zero for the unregularized likelihood).
pub fn nll_and_gradient(
    machine: &PatternMachine,
    patterns: &PatternSet,
    params: &ModelParams,
    config: &FeatureConfig,
    batch: &[Example],
    l2: f64,
) -> Result<(f64, BTreeMap<Feature, f64>)> {
    assert!(!batch.is_empty(), "batch must be nonempty");
    debug_assert_eq!(machine.pattern_count(), patterns.len());
    let mut nll = 0.0;
    let mut grad: BTreeMap<Feature, f64> = BTreeMap::new();
    for ex in batch {
        let lattice = build_lattice(machine, params, config, ex.x());
        let log_z = lattice.log_partition();
        let score = score_sequence(patterns, params, config, ex.x(), ex.y())?;
        nll += log_z - score;
        for (f, w) in lattice.expected_feature_counts(config, ex.x()) {
            *grad.entry(f).or_insert(0.0) += w;
        }
        let y_ids = patterns.alphabet().encode(ex.y())?;
        accumulate_observed(patterns, config, ex.x(), ex.y(), &y_ids, -1.0, &mut grad);
    }
    if l2 != 0.0 {
        nll += 0.5 * l2 * params.l2_norm_sq();
        for (f, v) in params.iter_all() {
            if v != 0.0 {
                *grad.entry(f).or_insert(0.0) += l2 * v;
            }
        }
    }
    Ok((nll, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use crate::crf::math::logsumexp;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    fn worked_example() -> (Alphabet, PatternSet, PatternMachine) {
        let a = Alphabet::new("ABX").unwrap();
        let set = PatternSet::compile(&a, &["AX*A", "BX*B"]).unwrap();
        let machine = PatternMachine::build(&set).unwrap();
        (a, set, machine)
    }

    /// All label sequences of length `n` over `sigma` symbols.
    fn enumerate_sequences(alphabet: &Alphabet, n: usize) -> Vec<Vec<char>> {
        let sigma = alphabet.len();
        let total = sigma.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                (0..n)
                    .map(|_| {
                        let c = alphabet.symbol(idx % sigma);
                        idx /= sigma;
                        c
                    })
                    .collect()
            })
            .collect()
    }

    fn random_params(
        rng: &mut ChaCha8Rng,
        alphabet: &Alphabet,
        config: &FeatureConfig,
        patterns: usize,
        x: &[char],
    ) -> ModelParams {
        let mut params = ModelParams::new(alphabet);
        for &a in alphabet.symbols() {
            for &b in alphabet.symbols() {
                params.set(
                    Feature::Transition { prev: a, next: b },
                    rng.random_range(-2.0..2.0),
                );
            }
        }
        for i in 1..=x.len() {
            for &label in alphabet.symbols() {
                for f in config.emission_features(x, label, i) {
                    if params.get(&f) == 0.0 {
                        params.set(f, rng.random_range(-2.0..2.0));
                    }
                }
            }
            for p in 0..patterns {
                for f in config.pattern_features(x, p, i) {
                    if params.get(&f) == 0.0 {
                        params.set(f, rng.random_range(-2.0..2.0));
                    }
                }
            }
        }
        params
    }

    #[test]
    fn zero_params_make_every_live_arc_zero() {
        let (a, _, machine) = worked_example();
        let params = ModelParams::new(&a);
        let config = FeatureConfig::default();
        let x = chars("00000");
        let lattice = build_lattice(&machine, &params, &config, &x);
        for i in 1..=5 {
            for arc in 0..machine.arc_count() {
                assert_eq!(lattice.value(i, arc), 0.0);
            }
        }
    }

    #[test]
    fn zero_params_partition_is_n_log_sigma() {
        let (a, _, machine) = worked_example();
        let params = ModelParams::new(&a);
        let config = FeatureConfig::default();
        for n in 1..=6 {
            let x: Vec<char> = vec!['0'; n];
            let lattice = build_lattice(&machine, &params, &config, &x);
            let expect = n as f64 * (a.len() as f64).ln();
            assert!((lattice.log_partition() - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn single_position_partition_is_logsumexp_of_initial_arcs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (a, set, machine) = worked_example();
        let config = FeatureConfig::default();
        let x = chars("0");
        let params = random_params(&mut rng, &a, &config, set.len(), &x);
        let lattice = build_lattice(&machine, &params, &config, &x);
        let vals: Vec<f64> = machine
            .arcs()
            .iter()
            .enumerate()
            .filter(|(_, arc)| arc.source == machine.initial())
            .map(|(id, _)| lattice.value(1, id))
            .collect();
        assert_eq!(vals.len(), a.len());
        assert!((lattice.log_partition() - logsumexp(&vals)).abs() < 1e-12);
    }

    #[test]
    fn bias_only_score_counts_firing_positions() {
        // With only bias(L1) = 1.0 set, BAXAA scores 2.0: L1 fires at
        // positions 4 and 5.
        let (a, set, _) = worked_example();
        let mut params = ModelParams::new(&a);
        params.set(Feature::PatternBias { pattern: 0 }, 1.0);
        let config = FeatureConfig::default();
        let x = chars("00000");
        let score = score_sequence(&set, &params, &config, &x, &chars("BAXAA")).unwrap();
        assert!((score - 2.0).abs() < 1e-12);
    }

    #[test]
    fn path_score_equals_direct_score_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let (a, set, machine) = worked_example();
        let config = FeatureConfig {
            max_position: 8,
            ..FeatureConfig::default()
        };
        for _ in 0..100 {
            let n = rng.random_range(1..=6);
            let x: Vec<char> = (0..n)
                .map(|_| char::from_digit(rng.random_range(0..3), 10).unwrap())
                .collect();
            let params = random_params(&mut rng, &a, &config, set.len(), &x);
            let lattice = build_lattice(&machine, &params, &config, &x);
            for _ in 0..5 {
                let y: Vec<char> = (0..n)
                    .map(|_| a.symbol(rng.random_range(0..a.len())))
                    .collect();
                let direct = score_sequence(&set, &params, &config, &x, &y).unwrap();
                let via_path = lattice.path_score(&y).unwrap();
                assert!(
                    (direct - via_path).abs() <= 1e-9,
                    "direct {direct} vs path {via_path} on {y:?}"
                );
            }
        }
    }

    #[test]
    fn partition_matches_enumeration_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let (a, set, machine) = worked_example();
        let config = FeatureConfig {
            max_position: 8,
            ..FeatureConfig::default()
        };
        for _ in 0..25 {
            let n = rng.random_range(1..=5);
            let x: Vec<char> = (0..n)
                .map(|_| char::from_digit(rng.random_range(0..3), 10).unwrap())
                .collect();
            let params = random_params(&mut rng, &a, &config, set.len(), &x);
            let lattice = build_lattice(&machine, &params, &config, &x);
            let scores: Vec<f64> = enumerate_sequences(&a, n)
                .iter()
                .map(|y| score_sequence(&set, &params, &config, &x, y).unwrap())
                .collect();
            let enum_log_z = logsumexp(&scores);
            assert!((lattice.log_partition() - enum_log_z).abs() <= 1e-9);

            // Normalization: probabilities sum to one.
            let log_z = lattice.log_partition();
            let total: f64 = scores.iter().map(|s| (s - log_z).exp()).sum();
            assert!((total - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn viterbi_matches_enumeration_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let (a, set, machine) = worked_example();
        let config = FeatureConfig {
            max_position: 8,
            ..FeatureConfig::default()
        };
        for _ in 0..25 {
            let n = rng.random_range(1..=5);
            let x: Vec<char> = (0..n)
                .map(|_| char::from_digit(rng.random_range(0..3), 10).unwrap())
                .collect();
            let params = random_params(&mut rng, &a, &config, set.len(), &x);
            let lattice = build_lattice(&machine, &params, &config, &x);
            let got = lattice.viterbi();
            let got_score = score_sequence(&set, &params, &config, &x, &got).unwrap();
            let best = enumerate_sequences(&a, n)
                .iter()
                .map(|y| score_sequence(&set, &params, &config, &x, y).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((got_score - best).abs() <= 1e-9);
        }
    }

    #[test]
    fn viterbi_tie_break_prefers_lower_arc_ids() {
        // All-zero params tie every sequence; the documented tie-break must
        // pick the reverse-lexicographically smallest arc path.
        let (a, _, machine) = worked_example();
        let params = ModelParams::new(&a);
        let config = FeatureConfig::default();
        for n in 1..=4 {
            let x: Vec<char> = vec!['0'; n];
            let lattice = build_lattice(&machine, &params, &config, &x);
            let got = lattice.viterbi();
            let expect = enumerate_sequences(&a, n)
                .into_iter()
                .map(|y| {
                    let mut path = machine.path_of(&y).unwrap();
                    path.reverse();
                    (path, y)
                })
                .min()
                .unwrap()
                .1;
            assert_eq!(got, expect, "n = {n}");
        }
    }

    #[test]
    fn viterbi_recovers_planted_labels() {
        // Emission features hugely favoring one label per (distinct) input
        // token force that sequence.
        let (a, _, machine) = worked_example();
        let config = FeatureConfig::default();
        let target = chars("BAXAA");
        let x = chars("12345");
        let mut params = ModelParams::new(&a);
        for (i, &label) in target.iter().enumerate() {
            params.set(
                Feature::Emission {
                    offset: 0,
                    token: x[i],
                    label,
                },
                25.0,
            );
        }
        let lattice = build_lattice(&machine, &params, &config, &x);
        assert_eq!(lattice.viterbi(), target);
    }

    #[test]
    fn posteriors_sum_to_one_and_respect_the_initial_mask() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let (a, set, machine) = worked_example();
        let config = FeatureConfig::default();
        let x = chars("0100");
        let params = random_params(&mut rng, &a, &config, set.len(), &x);
        let lattice = build_lattice(&machine, &params, &config, &x);
        let mu = lattice.arc_posteriors();
        let ac = machine.arc_count();
        for i in 0..4 {
            let row: f64 = mu[i * ac..(i + 1) * ac].iter().sum();
            assert!((row - 1.0).abs() <= 1e-10, "row {i} sums to {row}");
        }
        for (id, arc) in machine.arcs().iter().enumerate() {
            if arc.source != machine.initial() {
                assert_eq!(mu[id], 0.0, "dead arc {id} at position 1 has mass");
            }
        }
    }

    #[test]
    fn uniform_single_position_posteriors_split_evenly() {
        let a = Alphabet::new("AB").unwrap();
        let set = PatternSet::compile(&a, &[]).unwrap();
        let machine = PatternMachine::build(&set).unwrap();
        let params = ModelParams::new(&a);
        let config = FeatureConfig::default();
        let x = chars("0");
        let lattice = build_lattice(&machine, &params, &config, &x);
        let counts = lattice.expected_feature_counts(&config, &x);
        for &label in a.symbols() {
            let f = Feature::Emission {
                offset: 0,
                token: '0',
                label,
            };
            assert!((counts[&f] - 0.5).abs() <= 1e-12);
        }
    }

    #[test]
    fn expected_counts_match_enumeration_weighting() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let (a, set, machine) = worked_example();
        let config = FeatureConfig {
            max_position: 8,
            ..FeatureConfig::default()
        };
        for _ in 0..10 {
            let n = rng.random_range(1..=4);
            let x: Vec<char> = (0..n)
                .map(|_| char::from_digit(rng.random_range(0..2), 10).unwrap())
                .collect();
            let params = random_params(&mut rng, &a, &config, set.len(), &x);
            let lattice = build_lattice(&machine, &params, &config, &x);
            let got = lattice.expected_feature_counts(&config, &x);

            // Oracle: enumerate every y, weight its observed features by
            // its normalized probability.
            let log_z = lattice.log_partition();
            let mut expect: BTreeMap<Feature, f64> = BTreeMap::new();
            for y in enumerate_sequences(&a, n) {
                let w = (score_sequence(&set, &params, &config, &x, &y).unwrap() - log_z).exp();
                let y_ids = a.encode(&y).unwrap();
                accumulate_observed(&set, &config, &x, &y, &y_ids, w, &mut expect);
            }
            for (f, v) in &expect {
                let g = got.get(f).copied().unwrap_or(0.0);
                assert!((g - v).abs() <= 1e-8, "{f}: got {g}, expected {v}");
            }
            for (f, v) in &got {
                assert!(
                    expect.contains_key(f) || v.abs() <= 1e-8,
                    "{f} unexpectedly present with {v}"
                );
            }
        }
    }

    #[test]
    fn nll_of_zero_params_is_n_log_sigma() {
        let (a, set, machine) = worked_example();
        let params = ModelParams::new(&a);
        let config = FeatureConfig::default();
        let batch = [Example::from_strs("0000", "AXBA").unwrap()];
        let (nll, _) = nll_and_gradient(&machine, &set, &params, &config, &batch, 0.0).unwrap();
        assert!((nll - 4.0 * 3f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn duplicated_example_doubles_nll_and_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let (a, set, machine) = worked_example();
        let config = FeatureConfig {
            max_position: 4,
            ..FeatureConfig::default()
        };
        let x = chars("0102");
        let params = random_params(&mut rng, &a, &config, set.len(), &x);
        let one = [Example::from_strs("0102", "AXBA").unwrap()];
        let two = [
            Example::from_strs("0102", "AXBA").unwrap(),
            Example::from_strs("0102", "AXBA").unwrap(),
        ];
        let (n1, g1) = nll_and_gradient(&machine, &set, &params, &config, &one, 0.0).unwrap();
        let (n2, g2) = nll_and_gradient(&machine, &set, &params, &config, &two, 0.0).unwrap();
        assert_eq!(n2, n1 + n1);
        for (f, v) in &g1 {
            assert_eq!(g2[f], v + v, "{f}");
        }
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let (a, set, machine) = worked_example();
        let config = FeatureConfig {
            max_position: 5,
            ..FeatureConfig::default()
        };
        for trial in 0..5 {
            let n = rng.random_range(2..=5);
            let xs: Vec<Vec<char>> = (0..2)
                .map(|_| {
                    (0..n)
                        .map(|_| char::from_digit(rng.random_range(0..3), 10).unwrap())
                        .collect()
                })
                .collect();
            let mut params = random_params(&mut rng, &a, &config, set.len(), &xs[0]);
            for f in config.emission_features(&xs[1], a.symbol(0), 1) {
                if params.get(&f) == 0.0 {
                    params.set(f, rng.random_range(-2.0..2.0));
                }
            }
            let batch: Vec<Example> = xs
                .iter()
                .map(|x| {
                    let y: Vec<char> = (0..n)
                        .map(|_| a.symbol(rng.random_range(0..a.len())))
                        .collect();
                    Example::new(x.clone(), y).unwrap()
                })
                .collect();
            let l2 = if trial % 2 == 0 { 0.0 } else { 0.05 };
            let (_, grad) =
                nll_and_gradient(&machine, &set, &params, &config, &batch, l2).unwrap();
            let keys: Vec<Feature> = grad.keys().copied().collect();
            for f in keys.iter().take(20) {
                let step = 1e-4;
                let base = params.get(f);
                let mut plus = params.clone();
                plus.set(*f, base + step);
                let mut minus = params.clone();
                minus.set(*f, base - step);
                let (np, _) =
                    nll_and_gradient(&machine, &set, &plus, &config, &batch, l2).unwrap();
                let (nm, _) =
                    nll_and_gradient(&machine, &set, &minus, &config, &batch, l2).unwrap();
                let fd = (np - nm) / (2.0 * step);
                let g = grad[f];
                let denom = g.abs().max(fd.abs()).max(1e-6);
                assert!(
                    ((g - fd) / denom).abs() <= 1e-4,
                    "{f}: analytic {g} vs fd {fd}"
                );
            }
        }
    }

    #[test]
    fn score_sequence_rejects_length_mismatch() {
        let (a, set, _) = worked_example();
        let params = ModelParams::new(&a);
        let config = FeatureConfig::default();
        assert!(matches!(
            score_sequence(&set, &params, &config, &chars("00"), &chars("AXB")),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(Example::from_strs("00", "A").is_err());
        assert!(Example::from_strs("", "").is_err());
    }
}
