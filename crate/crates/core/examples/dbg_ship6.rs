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
    let spec = TaskSpec::with_defaults(Task::Battleship);
    let (train_set, test_set) = generate(&spec);
    let alphabet = Alphabet::new("_A").unwrap();
    let set = PatternSet::compile_strings(&alphabet, &Task::Battleship.pattern_texts()).unwrap();
    let machine = PatternMachine::build(&set).unwrap();
    let bucket_sets: Vec<(&str, Vec<usize>)> = vec![
        ("[21]", vec![21]),
        ("[6,21]", vec![6, 21]),
        ("[16]", vec![16]),
        ("[11]", vec![11]),
        ("[11,21]", vec![11, 21]),
        ("[6,11,16,21]", vec![6, 11, 16, 21]),
    ];
    for radius in [1usize, 4] {
        for (name, buckets) in &bucket_sets {
            let config = FeatureConfig {
                emission_window_radius: radius,
                position_buckets: buckets.clone(),
                ..FeatureConfig::default()
            };
            let tc = TrainConfig { max_epochs: 8000, ..TrainConfig::default() };
            let result = train(&machine, &set, &config, &train_set.examples, &tc).unwrap();
            let mut census: BTreeMap<String, usize> = BTreeMap::new();
            let mut em = 0usize;
            for ex in &test_set.examples {
                let pred = build_lattice(&machine, &result.params, &result.config, ex.x()).viterbi();
                *census.entry(classify(&pred)).or_insert(0) += 1;
                if pred == ex.y() { em += 1; }
            }
            println!("r{radius} buckets {name:>14} | EM {:.4} conv {} | {census:?}",
                em as f64 / 2000.0, result.converged);
        }
    }
}
