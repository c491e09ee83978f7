use std::time::Instant;

use rpcrf::alphabet::Alphabet;
use rpcrf::crf::{build_lattice, train, TrainConfig};
use rpcrf::machine::{PatternMachine, PatternSet};
use rpcrf::potentials::FeatureConfig;
use rpcrf::synth::{exact_match_accuracy, generate, optimal_accuracy, Task, TaskSpec};

fn run(task: Task, patterns: bool, config: FeatureConfig, tc: &TrainConfig) {
    let t0 = Instant::now();
    let spec = TaskSpec::with_defaults(task);
    let (train_set, test_set) = generate(&spec);
    let alphabet = Alphabet::new(task.label_alphabet()).unwrap();
    let texts = if patterns { task.pattern_texts() } else { vec![] };
    let set = PatternSet::compile_strings(&alphabet, &texts).unwrap();
    let machine = PatternMachine::build(&set).unwrap();
    let result = train(&machine, &set, &config, &train_set.examples, tc).unwrap();
    let preds: Vec<Vec<char>> = test_set
        .examples
        .iter()
        .map(|ex| build_lattice(&machine, &result.params, &result.config, ex.x()).viterbi())
        .collect();
    let golds: Vec<Vec<char>> = test_set.examples.iter().map(|ex| ex.y().to_vec()).collect();
    let em = exact_match_accuracy(&preds, &golds).unwrap();
    let opt = optimal_accuracy(task);
    println!(
        "{} patterns={} | epochs={} conv={} final={:.3} | EM={:.4} ({:.2}% of opt) | total {:?}",
        task.name(), patterns as u8, result.epochs, result.converged, result.trace.last().unwrap(),
        em, 100.0 * em / opt, t0.elapsed()
    );
    if patterns && task == Task::Cardinality {
        let x: Vec<char> = "3000000000".chars().collect();
        let l3 = result.params.log_pattern(&result.config, &x, 2, 10);
        let l7 = result.params.log_pattern(&result.config, &x, 6, 10);
        println!("  anchor check: {:.3} (need > 2.0)", l3 - l7);
    }
    if patterns && task == Task::Battleship {
        let d = result.params.log_transition('A', 'A') - result.params.log_transition('A', '_');
        println!("  transition check: {:.3} (need > 1.0)", d);
    }
}

fn main() {
    let tc = TrainConfig { max_epochs: 6000, ..TrainConfig::default() };
    run(Task::Cardinality, true, FeatureConfig::default(), &tc);
    run(Task::Cardinality, false, FeatureConfig::default(), &tc);
    run(Task::Agreement, true, FeatureConfig::default(), &tc);
    run(Task::Agreement, false, FeatureConfig::default(), &tc);
    let ship = FeatureConfig {
        emission_window_radius: 4,
        pattern_window_radius: 5,
        ..FeatureConfig::default()
    };
    run(Task::Battleship, true, ship.clone(), &tc);
    run(Task::Battleship, false, ship, &tc);
}
