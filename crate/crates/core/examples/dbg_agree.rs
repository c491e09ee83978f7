use rpcrf::alphabet::Alphabet;
use rpcrf::crf::{build_lattice, train, TrainConfig};
use rpcrf::machine::{PatternMachine, PatternSet};
use rpcrf::potentials::FeatureConfig;
use rpcrf::synth::{exact_match_accuracy, generate, Task, TaskSpec};

fn main() {
    let spec = TaskSpec::with_defaults(Task::Agreement);
    let (train_set, test_set) = generate(&spec);
    let alphabet = Alphabet::new(Task::Agreement.label_alphabet()).unwrap();
    let set = PatternSet::compile_strings(&alphabet, &Task::Agreement.pattern_texts()).unwrap();
    let machine = PatternMachine::build(&set).unwrap();
    let golds: Vec<Vec<char>> = test_set.examples.iter().map(|ex| ex.y().to_vec()).collect();
    let configs: Vec<(String, FeatureConfig)> = vec![
        ("r0".into(), FeatureConfig { emission_window_radius: 0, ..FeatureConfig::default() }),
        ("r1".into(), FeatureConfig::default()),
        ("r2".into(), FeatureConfig { emission_window_radius: 2, ..FeatureConfig::default() }),
        ("r1-coarse".into(), FeatureConfig { position_buckets: vec![1], ..FeatureConfig::default() }),
        ("r0-coarse".into(), FeatureConfig { emission_window_radius: 0, position_buckets: vec![1], ..FeatureConfig::default() }),
    ];
    for (name, config) in configs {
        let tc = TrainConfig { max_epochs: 3000, ..TrainConfig::default() };
        let result = train(&machine, &set, &config, &train_set.examples, &tc).unwrap();
        let preds: Vec<Vec<char>> = test_set.examples.iter()
            .map(|ex| build_lattice(&machine, &result.params, &result.config, ex.x()).viterbi())
            .collect();
        let em = exact_match_accuracy(&preds, &golds).unwrap();
        // validity: every prediction labels exactly the marked cells with a valid pair
        let valid = test_set.examples.iter().zip(&preds)
            .filter(|(ex, p)| Task::Agreement.is_valid_pair(ex.x(), p))
            .count();
        println!("{name:>10}: EM {:.4} valid_preds {}/2000 conv={}", em, valid, result.converged);
    }
}
