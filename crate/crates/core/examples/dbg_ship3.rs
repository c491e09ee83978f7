use rpcrf::alphabet::Alphabet;
use rpcrf::crf::{build_lattice, train, TrainConfig};
use rpcrf::machine::{PatternMachine, PatternSet};
use rpcrf::potentials::{Feature, FeatureConfig};
use rpcrf::synth::{exact_match_accuracy, generate, Task, TaskSpec};

fn main() {
    let radius: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let epochs: usize = std::env::args().nth(2).and_then(|a| a.parse().ok()).unwrap_or(20000);
    let spec = TaskSpec::with_defaults(Task::Battleship);
    let (train_set, test_set) = generate(&spec);
    let alphabet = Alphabet::new("_A").unwrap();
    let set = PatternSet::compile_strings(&alphabet, &Task::Battleship.pattern_texts()).unwrap();
    let machine = PatternMachine::build(&set).unwrap();
    let config = FeatureConfig { emission_window_radius: radius, ..FeatureConfig::default() };
    let tc = TrainConfig { max_epochs: epochs, ..TrainConfig::default() };
    let t0 = std::time::Instant::now();
    let result = train(&machine, &set, &config, &train_set.examples, &tc).unwrap();
    println!("radius {radius}: epochs {} conv {} final {:.3} time {:?}", result.epochs, result.converged, result.trace.last().unwrap(), t0.elapsed());
    let preds: Vec<Vec<char>> = test_set.examples.iter()
        .map(|ex| build_lattice(&machine, &result.params, &result.config, ex.x()).viterbi())
        .collect();
    let golds: Vec<Vec<char>> = test_set.examples.iter().map(|ex| ex.y().to_vec()).collect();
    println!("EM = {:.4}", exact_match_accuracy(&preds, &golds).unwrap());
    println!("bias = {:.3}", result.params.get(&Feature::PatternBias { pattern: 0 }));
    for r in 2..=5 {
        // vertical firing end positions for column 1: position 5*(r-1)+1
        let bucket = result.config.bucket_of(5 * (r - 1) + 1);
        println!("bucket weight row {r} col1 (pos {}) = {:.3}", 5 * (r - 1) + 1,
            result.params.get(&Feature::PatternBucket { pattern: 0, bucket }));
    }
    for (name, v) in [
        ("t(_,A)+t(A,_)", result.params.log_transition('_', 'A') + result.params.log_transition('A', '_')),
        ("t(A,A)", result.params.log_transition('A', 'A')),
    ] { println!("{name} = {v:.3}"); }
}
