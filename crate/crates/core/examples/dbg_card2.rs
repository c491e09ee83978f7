use rpcrf::alphabet::Alphabet;
use rpcrf::crf::{build_lattice, train, TrainConfig};
use rpcrf::machine::{PatternMachine, PatternSet};
use rpcrf::potentials::FeatureConfig;
use rpcrf::synth::{exact_match_accuracy, generate, Task, TaskSpec};

fn main() {
    let spec = TaskSpec::with_defaults(Task::Cardinality);
    let (train_set, test_set) = generate(&spec);
    let alphabet = Alphabet::new("_A").unwrap();
    let set = PatternSet::compile_strings(&alphabet, &Task::Cardinality.pattern_texts()).unwrap();
    let machine = PatternMachine::build(&set).unwrap();
    let golds: Vec<Vec<char>> = test_set.examples.iter().map(|ex| ex.y().to_vec()).collect();
    let configs: Vec<(String, FeatureConfig)> = vec![
        ("r0".into(), FeatureConfig { emission_window_radius: 0, ..FeatureConfig::default() }),
        ("r1".into(), FeatureConfig::default()),
        ("r2".into(), FeatureConfig { emission_window_radius: 2, ..FeatureConfig::default() }),
        ("r3".into(), FeatureConfig { emission_window_radius: 3, ..FeatureConfig::default() }),
        ("r4".into(), FeatureConfig { emission_window_radius: 4, ..FeatureConfig::default() }),
        ("r1-coarse".into(), FeatureConfig { position_buckets: vec![1], ..FeatureConfig::default() }),
        ("r0-coarse".into(), FeatureConfig { emission_window_radius: 0, position_buckets: vec![1], ..FeatureConfig::default() }),
        ("r1-pw1".into(), FeatureConfig { pattern_window_radius: 1, ..FeatureConfig::default() }),
        ("r2-coarse".into(), FeatureConfig { emission_window_radius: 2, position_buckets: vec![1], ..FeatureConfig::default() }),
        ("r1-anchor12".into(), FeatureConfig { global_anchor_positions: vec![1, 2], ..FeatureConfig::default() }),
    ];
    for (name, config) in configs {
        let tc = TrainConfig { max_epochs: 4000, ..TrainConfig::default() };
        let result = train(&machine, &set, &config, &train_set.examples, &tc).unwrap();
        let preds: Vec<Vec<char>> = test_set.examples.iter()
            .map(|ex| build_lattice(&machine, &result.params, &result.config, ex.x()).viterbi())
            .collect();
        let em = exact_match_accuracy(&preds, &golds).unwrap();
        // count correctness per digit
        let mut counts_ok = true;
        for k in 1..=9usize {
            let mut x = vec!['0'; 10];
            x[0] = char::from_digit(k as u32, 10).unwrap();
            let pred = build_lattice(&machine, &result.params, &result.config, &x).viterbi();
            if pred.iter().filter(|&&c| c == 'A').count() != k || pred[0] != '_' { counts_ok = false; }
        }
        println!("{name:>14}: EM {:.4} ({:.2}% of opt) counts_ok={} conv={}",
            em, 100.0 * em / 0.14638534, counts_ok, result.converged);
    }
}
