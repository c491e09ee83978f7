//! Regular-pattern conditional random fields for sequence labeling.
//!
//! A regular-pattern CRF is a linear-chain CRF augmented with a set of
//! user-specified regular-expression patterns over the *label* alphabet.
//! Each pattern contributes a learned potential wherever a match ends in the
//! label sequence, so the model can reward or punish long-distance label
//! structure that an ordinary first-order chain cannot see.
//!
//! Exact training and decoding stay tractable: the pattern set is compiled
//! into a single deterministic, complete, state-labeled product automaton,
//! and the arcs of that automaton form the label set of an auxiliary
//! linear-chain CRF whose path distribution equals the pattern-augmented
//! distribution over label sequences. Forward, backward, and Viterbi run on
//! the arc lattice as usual.
//!
//! Pipeline:
//!
//! 1. [`pattern`] parses pattern text over a declared [`Alphabet`] and
//!    compiles each pattern to an NFA.
//! 2. [`automata`] determinizes, minimizes, and suffix-closes the
//!    per-pattern automata, and provides the matching oracles.
//! 3. [`machine`] builds the pruned state-labeled product automaton and
//!    maps label sequences to arc paths.
//! 4. [`potentials`] defines the log-linear emission, transition, and
//!    pattern potentials with their feature templates.
//! 5. [`crf`] does exact inference (partition function, posteriors,
//!    Viterbi), gradients, and full-batch Adam training.
//! 6. [`synth`] generates the three synthetic benchmark tasks and computes
//!    their optimal-strategy accuracies exactly.

pub mod alphabet;
pub mod automata;
pub mod crf;
pub mod error;
pub mod machine;
pub mod model;
pub mod pattern;
pub mod potentials;
pub mod synth;

pub use alphabet::Alphabet;
pub use automata::Dfa;
pub use error::{Error, Result};
pub use machine::{PatternMachine, PatternSet};
pub use pattern::{Nfa, PatternAst};
pub use potentials::{Feature, FeatureConfig, ModelParams};
