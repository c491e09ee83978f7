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
    for radius in [1usize, 4] {
        for pat_r in [5usize, 6, 8] {
            let config = FeatureConfig {
                emission_window_radius: radius,
                pattern_window_radius: pat_r,
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
            println!("emission r{radius} patwin r{pat_r} | EM {:.4} conv {} | {census:?}",
                em as f64 / 2000.0, result.converged);
        }
    }
}
