use rpcrf::alphabet::Alphabet;
use rpcrf::crf::{build_lattice, train, TrainConfig};
use rpcrf::machine::{PatternMachine, PatternSet};
use rpcrf::potentials::FeatureConfig;
use rpcrf::synth::{generate, Task, TaskSpec};
use std::collections::BTreeMap;

fn classify(y: &[char]) -> String {
    let cells: Vec<usize> = (0..25).filter(|&i| y[i] == 'A').collect();
    if cells.is_empty() { return "empty".into(); }
    if cells.len() == 1 { return "single".into(); }
    let horiz = cells.windows(2).all(|w| w[1] == w[0] + 1) && cells[0] / 5 == cells[cells.len()-1] / 5;
    let vert = cells.windows(2).all(|w| w[1] == w[0] + 5);
    if horiz { return format!("h{}", cells.len()); }
    if vert { return format!("v{}", cells.len()); }
    format!("other{}", cells.len())
}

fn main() {
    let radius: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    let l2: f64 = std::env::args().nth(2).and_then(|a| a.parse().ok()).unwrap_or(1e-4);
    let spec = TaskSpec::with_defaults(Task::Battleship);
    let (train_set, test_set) = generate(&spec);
    let alphabet = Alphabet::new("_A").unwrap();
    let set = PatternSet::compile_strings(&alphabet, &Task::Battleship.pattern_texts()).unwrap();
    let machine = PatternMachine::build(&set).unwrap();
    let config = FeatureConfig { emission_window_radius: radius, ..FeatureConfig::default() };
    let tc = TrainConfig { max_epochs: 20000, l2, ..TrainConfig::default() };
    let result = train(&machine, &set, &config, &train_set.examples, &tc).unwrap();
    let mut census: BTreeMap<String, usize> = BTreeMap::new();
    let mut em_by_gold: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for ex in &test_set.examples {
        let pred = build_lattice(&machine, &result.params, &result.config, ex.x()).viterbi();
        *census.entry(classify(&pred)).or_insert(0) += 1;
        let gold_kind = classify(ex.y());
        let e = em_by_gold.entry(gold_kind).or_insert((0, 0));
        e.1 += 1;
        if pred == ex.y() { e.0 += 1; }
    }
    println!("radius {radius} l2 {l2}: conv {} epochs {}", result.converged, result.epochs);
    println!("prediction census: {census:?}");
    println!("EM by gold orientation: {em_by_gold:?}");
}
