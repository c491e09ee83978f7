use rpcrf::alphabet::Alphabet;
use rpcrf::crf::{build_lattice, score_sequence, train, TrainConfig};
use rpcrf::machine::{PatternMachine, PatternSet};
use rpcrf::potentials::FeatureConfig;
use rpcrf::synth::{generate, Task, TaskSpec};

fn main() {
    let spec = TaskSpec::with_defaults(Task::Battleship);
    let (train_set, _) = generate(&spec);
    let alphabet = Alphabet::new("_A").unwrap();
    let set = PatternSet::compile_strings(&alphabet, &Task::Battleship.pattern_texts()).unwrap();
    let machine = PatternMachine::build(&set).unwrap();
    let config = FeatureConfig { emission_window_radius: 4, ..FeatureConfig::default() };
    let tc = TrainConfig { max_epochs: 8000, ..TrainConfig::default() };
    let result = train(&machine, &set, &config, &train_set.examples, &tc).unwrap();

    // Interior hit: row 2 col 2 (0-based), sequence position 12 (1-based 13).
    for hit in [12usize, 0, 7] {
        let mut x = vec!['0'; 25];
        x[hit] = '1';
        let lattice = build_lattice(&machine, &result.params, &result.config, &x);
        let pred = lattice.viterbi();
        let (row, col) = (hit / 5, hit % 5);
        let mut cands: Vec<(String, Vec<char>)> = vec![
            ("viterbi".into(), pred.clone()),
            ("single".into(), { let mut y = vec!['_'; 25]; y[hit] = 'A'; y }),
        ];
        for start in col.saturating_sub(3)..=col.min(1) {
            let cells: Vec<usize> = (0..4).map(|i| row * 5 + start + i).collect();
            if cells.contains(&hit) && start + 3 < 5 {
                let mut y = vec!['_'; 25];
                for &c in &cells { y[c] = 'A'; }
                cands.push((format!("h4@{start}"), y));
            }
        }
        for start in row.saturating_sub(3)..=row.min(1) {
            let cells: Vec<usize> = (0..4).map(|i| (start + i) * 5 + col).collect();
            if cells.contains(&hit) && start + 3 < 5 {
                let mut y = vec!['_'; 25];
                for &c in &cells { y[c] = 'A'; }
                cands.push((format!("v4@{start}"), y));
            }
        }
        println!("hit at r{row} c{col}:");
        for (name, y) in &cands {
            let s = score_sequence(&set, &result.params, &result.config, &x, y).unwrap();
            println!("  {name:>10}: {s:9.3}");
        }
    }
}
