use rpcrf::alphabet::Alphabet;
use rpcrf::crf::{build_lattice, score_sequence, train, TrainConfig};
use rpcrf::machine::{PatternMachine, PatternSet};
use rpcrf::potentials::FeatureConfig;
use rpcrf::synth::{generate, Task, TaskSpec};

fn main() {
    let radius: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    let spec = TaskSpec::with_defaults(Task::Battleship);
    let (train_set, _) = generate(&spec);
    let alphabet = Alphabet::new("_A").unwrap();
    let set = PatternSet::compile_strings(&alphabet, &Task::Battleship.pattern_texts()).unwrap();
    let machine = PatternMachine::build(&set).unwrap();
    let config = FeatureConfig { emission_window_radius: radius, ..FeatureConfig::default() };
    let tc = TrainConfig { max_epochs: 8000, ..TrainConfig::default() };
    let result = train(&machine, &set, &config, &train_set.examples, &tc).unwrap();

    // All 25 hits: what wins, and gap between best-valid and viterbi.
    let mut wins = 0.0;
    for hit in 0..25usize {
        let mut x = vec!['0'; 25];
        x[hit] = '1';
        let lattice = build_lattice(&machine, &result.params, &result.config, &x);
        let pred = lattice.viterbi();
        let pred_score = score_sequence(&set, &result.params, &result.config, &x, &pred).unwrap();
        let (row, col) = (hit / 5, hit % 5);
        let mut best_valid = f64::NEG_INFINITY;
        let mut n_h = 0;
        let mut valid_is_pred = false;
        for start in 0..2usize {
            if (start..start + 4).contains(&col) {
                let cells: Vec<usize> = (0..4).map(|i| row * 5 + start + i).collect();
                let mut y = vec!['_'; 25];
                for &c in &cells { y[c] = 'A'; }
                n_h += 1;
                let s = score_sequence(&set, &result.params, &result.config, &x, &y).unwrap();
                if s > best_valid { best_valid = s; }
                if y == pred { valid_is_pred = true; }
            }
            if (start..start + 4).contains(&row) {
                let cells: Vec<usize> = (0..4).map(|i| (start + i) * 5 + col).collect();
                let mut y = vec!['_'; 25];
                for &c in &cells { y[c] = 'A'; }
                n_h += 1;
                let s = score_sequence(&set, &result.params, &result.config, &x, &y).unwrap();
                if s > best_valid { best_valid = s; }
                if y == pred { valid_is_pred = true; }
            }
        }
        if valid_is_pred { wins += (n_h as f64).recip(); }
        println!("hit r{row}c{col} n={n_h}: pred_valid={} gap(best_valid - pred) = {:+.3}",
            valid_is_pred as u8, best_valid - pred_score);
    }
    println!("implied EM over hit prior = {:.4}", wins * 25.0 / 80.0 / 25.0 * 4.0);
    // implied EM = sum over h of P(h) * [pred valid] * 1/n(h); P(h) = n/80
    let mut em = 0.0;
    for hit in 0..25usize {
        let mut x = vec!['0'; 25];
        x[hit] = '1';
        let lattice = build_lattice(&machine, &result.params, &result.config, &x);
        let pred = lattice.viterbi();
        let (row, col) = (hit / 5, hit % 5);
        let mut n_h = 0;
        let mut valid_is_pred = false;
        for start in 0..2usize {
            if (start..start + 4).contains(&col) {
                let cells: Vec<usize> = (0..4).map(|i| row * 5 + start + i).collect();
                let y: Vec<char> = (0..25).map(|i| if cells.contains(&i) { 'A' } else { '_' }).collect();
                n_h += 1;
                if y == pred { valid_is_pred = true; }
            }
            if (start..start + 4).contains(&row) {
                let cells: Vec<usize> = (0..4).map(|i| (start + i) * 5 + col).collect();
                let y: Vec<char> = (0..25).map(|i| if cells.contains(&i) { 'A' } else { '_' }).collect();
                n_h += 1;
                if y == pred { valid_is_pred = true; }
            }
        }
        if valid_is_pred { em += 1.0 / 80.0; }
    }
    println!("exact implied EM = {:.4}", em);
}
