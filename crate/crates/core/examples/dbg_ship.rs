use rpcrf::alphabet::Alphabet;
use rpcrf::crf::{build_lattice, train, TrainConfig};
use rpcrf::machine::{PatternMachine, PatternSet};
use rpcrf::potentials::FeatureConfig;
use rpcrf::synth::{generate, Task, TaskSpec};

fn grid(s: &[char]) -> String {
    s.chunks(5).map(|r| r.iter().collect::<String>()).collect::<Vec<_>>().join(" / ")
}

fn main() {
    let radius: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let epochs: usize = std::env::args().nth(2).and_then(|a| a.parse().ok()).unwrap_or(500);
    let l2: f64 = std::env::args().nth(3).and_then(|a| a.parse().ok()).unwrap_or(1e-4);
    let spec = TaskSpec::with_defaults(Task::Battleship);
    let (train_set, test_set) = generate(&spec);
    let alphabet = Alphabet::new("_A").unwrap();
    let set = PatternSet::compile_strings(&alphabet, &Task::Battleship.pattern_texts()).unwrap();
    let machine = PatternMachine::build(&set).unwrap();
    let config = FeatureConfig { emission_window_radius: radius, ..FeatureConfig::default() };
    let tc = TrainConfig { max_epochs: epochs, l2, ..TrainConfig::default() };
    let result = train(&machine, &set, &config, &train_set.examples, &tc).unwrap();
    println!("epochs {} conv {} final {:.2}", result.epochs, result.converged, result.trace.last().unwrap());
    let mut em = 0usize;
    for (i, ex) in test_set.examples.iter().enumerate() {
        let pred = build_lattice(&machine, &result.params, &result.config, ex.x()).viterbi();
        if pred == ex.y() { em += 1; }
        if i < 6 {
            println!("x    {}", grid(ex.x()));
            println!("gold {}", grid(ex.y()));
            println!("pred {}", grid(&pred));
            println!("--");
        }
    }
    println!("EM = {:.4}", em as f64 / test_set.examples.len() as f64);
    for (name, v) in [
        ("t(_,_)", result.params.log_transition('_', '_')),
        ("t(_,A)", result.params.log_transition('_', 'A')),
        ("t(A,_)", result.params.log_transition('A', '_')),
        ("t(A,A)", result.params.log_transition('A', 'A')),
    ] { println!("{name} = {v:.3}"); }
}
