use rpcrf::alphabet::Alphabet;
use rpcrf::crf::{build_lattice, score_sequence, train, TrainConfig};
use rpcrf::machine::{PatternMachine, PatternSet};
use rpcrf::potentials::FeatureConfig;
use rpcrf::synth::{generate, Task, TaskSpec};

fn main() {
    let spec = TaskSpec::with_defaults(Task::Battleship);
    let (train_set, test_set) = generate(&spec);
    let alphabet = Alphabet::new("_A").unwrap();
    let set = PatternSet::compile_strings(&alphabet, &Task::Battleship.pattern_texts()).unwrap();
    let machine = PatternMachine::build(&set).unwrap();
    let config = FeatureConfig { emission_window_radius: 1, ..FeatureConfig::default() };
    let tc = TrainConfig { max_epochs: 1500, ..TrainConfig::default() };
    let result = train(&machine, &set, &config, &train_set.examples, &tc).unwrap();
    let ex = &test_set.examples[1]; // hit at row 4 col 1 (grid), gold horizontal
    let x = ex.x();
    let lattice = build_lattice(&machine, &result.params, &result.config, x);
    let pred = lattice.viterbi();
    let candidates: Vec<(&str, Vec<char>)> = vec![
        ("gold", ex.y().to_vec()),
        ("pred", pred.clone()),
        ("col-of-hit(5)", {
            let hit = x.iter().position(|&c| c == '1').unwrap();
            let col = hit % 5;
            (0..25).map(|i| if i % 5 == col { 'A' } else { '_' }).collect()
        }),
        ("row-of-hit(5)", {
            let hit = x.iter().position(|&c| c == '1').unwrap();
            let row = hit / 5;
            (0..25).map(|i| if i / 5 == row { 'A' } else { '_' }).collect()
        }),
        ("all-A", vec!['A'; 25]),
        ("vert4-through-hit", {
            let hit = x.iter().position(|&c| c == '1').unwrap();
            let col = hit % 5;
            let start = if hit / 5 <= 3 { 0 } else { 1 };
            (0..25).map(|i| if i % 5 == col && (start..start + 4).contains(&(i / 5)) { 'A' } else { '_' }).collect()
        }),
    ];
    for (name, y) in &candidates {
        let direct = score_sequence(&set, &result.params, &result.config, x, y).unwrap();
        let path = lattice.path_score(y).unwrap();
        println!("{name:>18}: direct {direct:>10.3} path {path:>10.3}");
    }
    println!("logZ = {:.3}", lattice.log_partition());
}
