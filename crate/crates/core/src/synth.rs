//! The three synthetic benchmark tasks: generation, optimal-strategy
//! accuracy, and exact-match scoring.
//!
//! Every example is a pure function of `(task, seed, index)`: a ChaCha8
//! generator is seeded with the task seed and switched to word stream
//! `index`, so generation is reproducible byte-for-byte and trivially
//! parallel. Train files take indices `0..train_size`; test files continue
//! at `train_size..train_size + test_size`, which keeps the two draws
//! disjoint by construction.
//!
//! All tasks are deliberately underspecified: even the best possible
//! strategy must guess among equally likely label sequences, and
//! [`optimal_accuracy`] computes that ceiling by exhaustive posterior
//! enumeration (exact rational arithmetic, no sampling).

use std::io::{BufRead, Write};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::crf::Example;
use crate::error::{Error, Result};

/// Which synthetic task to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// The first input token (a digit `k`) dictates exactly `k` `A` labels
    /// among the last nine positions.
    Cardinality,
    /// Two marked positions carry letters from pairs that must co-occur:
    /// A with B, C with D, E with F.
    Agreement,
    /// A 4x1 ship hides on a 5x5 grid (serialized row-major); the input
    /// marks one of its cells, the labels mark all four.
    Battleship,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Cardinality => "cardinality",
            Task::Agreement => "agreement",
            Task::Battleship => "battleship",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "cardinality" => Ok(Task::Cardinality),
            "agreement" => Ok(Task::Agreement),
            "battleship" => Ok(Task::Battleship),
            other => Err(Error::Data(format!("unknown task {other:?}"))),
        }
    }

    /// The label alphabet declaration for this task, in canonical order.
    pub fn label_alphabet(self) -> &'static str {
        match self {
            Task::Cardinality | Task::Battleship => "_A",
            Task::Agreement => "_ABCDEF",
        }
    }

    /// Fixed per-task default seed.
    pub fn default_seed(self) -> u64 {
        match self {
            Task::Cardinality => 1,
            Task::Agreement => 2,
            Task::Battleship => 3,
        }
    }

    /// The canonical pattern set for this task.
    pub fn pattern_texts(self) -> Vec<String> {
        match self {
            Task::Cardinality => (1..=9).map(|k| format!("^(_*A){{{k}}}_*$")).collect(),
            Task::Agreement => {
                let letters = ['A', 'B', 'C', 'D', 'E', 'F'];
                let mut out = Vec::new();
                for i in 0..letters.len() {
                    for j in i + 1..letters.len() {
                        let (a, b) = (letters[i], letters[j]);
                        out.push(format!("^_*({a}_*{b}|{b}_*{a})_*$"));
                    }
                }
                out
            }
            Task::Battleship => vec!["A____A".to_string()],
        }
    }

    /// Full pattern-file text: alphabet declaration plus one pattern per
    /// line.
    pub fn pattern_file_text(self) -> String {
        let mut out = format!("alphabet: {}\n", self.label_alphabet());
        for p in self.pattern_texts() {
            out.push_str(&p);
            out.push('\n');
        }
        out
    }

    /// Whether `(x, y)` could have been produced by this task's generator.
    pub fn is_valid_pair(self, x: &[char], y: &[char]) -> bool {
        match self {
            Task::Cardinality => {
                if x.len() != 10 || y.len() != 10 {
                    return false;
                }
                let k = match x[0].to_digit(10) {
                    Some(k @ 1..=9) => k as usize,
                    _ => return false,
                };
                x[1..].iter().all(|&c| c == '0')
                    && y[0] == '_'
                    && y[1..].iter().all(|&c| c == 'A' || c == '_')
                    && y[1..].iter().filter(|&&c| c == 'A').count() == k
            }
            Task::Agreement => {
                if x.len() != 10 || y.len() != 10 {
                    return false;
                }
                let ones: Vec<usize> = (0..10).filter(|&i| x[i] == '1').collect();
                if ones.len() != 2 || x.iter().any(|&c| c != '0' && c != '1') {
                    return false;
                }
                if (0..10).any(|i| (y[i] == '_') != (x[i] == '0')) {
                    return false;
                }
                let pair = [y[ones[0]], y[ones[1]]];
                matches!(
                    pair,
                    ['A', 'B'] | ['B', 'A'] | ['C', 'D'] | ['D', 'C'] | ['E', 'F'] | ['F', 'E']
                )
            }
            Task::Battleship => {
                if x.len() != 25 || y.len() != 25 {
                    return false;
                }
                let cells: Vec<usize> = (0..25).filter(|&i| y[i] == 'A').collect();
                if cells.len() != 4 || y.iter().any(|&c| c != 'A' && c != '_') {
                    return false;
                }
                let horizontal = cells[0] / 5 == cells[3] / 5
                    && cells.windows(2).all(|w| w[1] == w[0] + 1);
                let vertical = cells.windows(2).all(|w| w[1] == w[0] + 5);
                if !horizontal && !vertical {
                    return false;
                }
                let ones: Vec<usize> = (0..25).filter(|&i| x[i] == '1').collect();
                ones.len() == 1
                    && x.iter().all(|&c| c == '0' || c == '1')
                    && cells.contains(&ones[0])
            }
        }
    }
}

/// A full generation request.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task: Task,
    pub train_size: usize,
    pub test_size: usize,
    pub seed: u64,
}

impl TaskSpec {
    pub fn new(task: Task, train_size: usize, test_size: usize, seed: u64) -> Self {
        Self {
            task,
            train_size,
            test_size,
            seed,
        }
    }

    /// Defaults: 10k train, 2k test, the task's fixed seed.
    pub fn with_defaults(task: Task) -> Self {
        Self::new(task, 10_000, 2_000, task.default_seed())
    }
}

/// A generated dataset with its provenance header.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub task: Task,
    pub seed: u64,
    pub examples: Vec<Example>,
}

/// Unbiased bounded draw on top of the raw 64-bit stream (threshold
/// rejection, so the sampler is portable across generator versions).
fn uniform(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let limit = u64::MAX - u64::MAX % bound;
    loop {
        let v = rng.next_u64();
        if v < limit {
            return v % bound;
        }
    }
}

fn example_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Generates example `index` of the task's stream. Pure in
/// `(task, seed, index)`.
pub fn gen_example(task: Task, seed: u64, index: u64) -> Example {
    let mut rng = example_rng(seed, index);
    match task {
        Task::Cardinality => {
            let k = 1 + uniform(&mut rng, 9) as usize;
            let mut x = vec!['0'; 10];
            x[0] = char::from_digit(k as u32, 10).unwrap();
            // Partial Fisher-Yates over the nine tail positions.
            let mut slots: Vec<usize> = (1..10).collect();
            for i in 0..k {
                let j = i + uniform(&mut rng, (9 - i) as u64) as usize;
                slots.swap(i, j);
            }
            let mut y = vec!['_'; 10];
            for &s in &slots[..k] {
                y[s] = 'A';
            }
            Example::new(x, y).unwrap()
        }
        Task::Agreement => {
            let first = uniform(&mut rng, 10) as usize;
            let mut second = uniform(&mut rng, 9) as usize;
            if second >= first {
                second += 1;
            }
            let (lo, hi) = (first.min(second), first.max(second));
            let pair = match uniform(&mut rng, 3) {
                0 => ('A', 'B'),
                1 => ('C', 'D'),
                _ => ('E', 'F'),
            };
            let flipped = uniform(&mut rng, 2) == 1;
            let (at_lo, at_hi) = if flipped { (pair.1, pair.0) } else { pair };
            let mut x = vec!['0'; 10];
            let mut y = vec!['_'; 10];
            x[lo] = '1';
            x[hi] = '1';
            y[lo] = at_lo;
            y[hi] = at_hi;
            Example::new(x, y).unwrap()
        }
        Task::Battleship => {
            let placement = uniform(&mut rng, 20) as usize;
            let cells: Vec<usize> = if placement < 10 {
                let row = placement / 2;
                let start = placement % 2;
                (0..4).map(|i| row * 5 + start + i).collect()
            } else {
                let q = placement - 10;
                let col = q / 2;
                let start = q % 2;
                (0..4).map(|i| (start + i) * 5 + col).collect()
            };
            let hit = cells[uniform(&mut rng, 4) as usize];
            let mut x = vec!['0'; 25];
            let mut y = vec!['_'; 25];
            for &c in &cells {
                y[c] = 'A';
            }
            x[hit] = '1';
            Example::new(x, y).unwrap()
        }
    }
}

/// Generates the train and test splits of `spec` as two datasets drawing
/// disjoint index ranges of the same stream family.
pub fn generate(spec: &TaskSpec) -> (Dataset, Dataset) {
    let train = Dataset {
        task: spec.task,
        seed: spec.seed,
        examples: (0..spec.train_size as u64)
            .map(|i| gen_example(spec.task, spec.seed, i))
            .collect(),
    };
    let test = Dataset {
        task: spec.task,
        seed: spec.seed,
        examples: (spec.train_size as u64..(spec.train_size + spec.test_size) as u64)
            .map(|i| gen_example(spec.task, spec.seed, i))
            .collect(),
    };
    (train, test)
}

// ---------------------------------------------------------------------------
// Optimal-strategy accuracy, by exhaustive enumeration in exact rationals.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: u128,
    pub den: u128,
}

impl Rational {
    fn new(num: u128, den: u128) -> Self {
        let g = gcd(num.max(1), den);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    fn add(self, other: Rational) -> Rational {
        Rational::new(
            self.num * other.den + other.num * self.den,
            self.den * other.den,
        )
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Bayes-optimal exact-match probability, as an exact rational.
///
/// Enumerates the full generative process — every latent outcome and every
/// input — and for each input takes the single most probable label
/// sequence.
pub fn optimal_accuracy_rational(task: Task) -> Rational {
    match task {
        Task::Cardinality => {
            // x determines k; the posterior is uniform over the C(9, k)
            // placements, so the best guess wins one of them.
            let mut total = Rational::new(0, 1);
            for k in 1..=9u32 {
                let placements = (0u32..512).filter(|m| m.count_ones() == k).count() as u128;
                total = total.add(Rational::new(1, 9 * placements));
            }
            total
        }
        Task::Agreement => {
            // Given the marked positions, the six labelings are equally
            // likely; enumerate every (position pair, labeling) outcome.
            let mut total = Rational::new(0, 1);
            let position_pairs = 45u128;
            for _pair in 0..position_pairs {
                // max posterior over the 6 labelings is 1/6, weighted by
                // the pair probability 1/45.
                total = total.add(Rational::new(1, 6 * position_pairs));
            }
            total
        }
        Task::Battleship => {
            // Outcomes are (placement, hit) pairs, 80 of them, uniform.
            // Group by the observable hit cell; the best guess takes one
            // placement of those passing through it.
            let mut through: Vec<u32> = vec![0; 25];
            for placement in 0..20usize {
                let cells: Vec<usize> = if placement < 10 {
                    let row = placement / 2;
                    let start = placement % 2;
                    (0..4).map(|i| row * 5 + start + i).collect()
                } else {
                    let q = placement - 10;
                    (0..4).map(|i| (q % 2 + i) * 5 + q / 2).collect()
                };
                for c in cells {
                    through[c] += 1;
                }
            }
            let mut total = Rational::new(0, 1);
            for &n in &through {
                if n > 0 {
                    // P(hit = h) = n/80; optimal picks one of n placements.
                    total = total.add(Rational::new(1, 80));
                }
            }
            total
        }
    }
}

/// [`optimal_accuracy_rational`] as a float.
pub fn optimal_accuracy(task: Task) -> f64 {
    optimal_accuracy_rational(task).to_f64()
}

/// Fraction of predictions matching their gold sequence at every position.
/// No partial credit.
pub fn exact_match_accuracy(predictions: &[Vec<char>], golds: &[Vec<char>]) -> Result<f64> {
    if predictions.len() != golds.len() {
        return Err(Error::Data(format!(
            "prediction count {} does not match gold count {}",
            predictions.len(),
            golds.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Data("cannot score an empty prediction list".into()));
    }
    for (p, g) in predictions.iter().zip(golds) {
        if p.len() != g.len() {
            return Err(Error::LengthMismatch {
                x_len: p.len(),
                y_len: g.len(),
            });
        }
    }
    let hits = predictions
        .iter()
        .zip(golds)
        .filter(|(p, g)| p == g)
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

// ---------------------------------------------------------------------------
// JSONL files.

#[derive(Serialize, Deserialize)]
struct Header {
    task: String,
    seed: u64,
    size: usize,
}

#[derive(Serialize, Deserialize)]
struct Line {
    x: String,
    y: String,
}

/// Writes the header line followed by one `{"x": ..., "y": ...}` object
/// per example.
pub fn write_jsonl<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    let header = Header {
        task: dataset.task.name().to_string(),
        seed: dataset.seed,
        size: dataset.examples.len(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for ex in &dataset.examples {
        let line = Line {
            x: ex.x().iter().collect(),
            y: ex.y().iter().collect(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn dataset_to_bytes(dataset: &Dataset) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_jsonl(dataset, &mut buf)?;
    Ok(buf)
}

/// Reads a dataset written by [`write_jsonl`], validating the header and
/// per-example lengths.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut lines = reader.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::Data("dataset file is empty".into()))??;
    let header: Header = serde_json::from_str(&header_line)
        .map_err(|e| Error::Data(format!("bad dataset header: {e}")))?;
    let task = Task::from_name(&header.task)?;
    let mut examples = Vec::with_capacity(header.size);
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line = serde_json::from_str(&line)
            .map_err(|e| Error::Data(format!("line {}: {e}", lineno + 2)))?;
        let ex = Example::from_strs(&parsed.x, &parsed.y).map_err(|_| {
            Error::Data(format!(
                "line {}: x and y must have equal nonzero length",
                lineno + 2
            ))
        })?;
        examples.push(ex);
    }
    if examples.len() != header.size {
        return Err(Error::Data(format!(
            "header promises {} examples, file has {}",
            header.size,
            examples.len()
        )));
    }
    Ok(Dataset {
        task,
        seed: header.seed,
        examples,
    })
}

/// SHA-256 of raw bytes, lowercase hex. Used to stamp dataset identity
/// into metrics files.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
