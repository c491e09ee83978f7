use rpcrf::alphabet::Alphabet;
use rpcrf::crf::{build_lattice, train, TrainConfig};
use rpcrf::machine::{PatternMachine, PatternSet};
use rpcrf::potentials::FeatureConfig;
use rpcrf::synth::{generate, Task, TaskSpec};

fn main() {
    let spec = TaskSpec::with_defaults(Task::Cardinality);
    let (train_set, test_set) = generate(&spec);
    let alphabet = Alphabet::new("_A").unwrap();
    let set = PatternSet::compile_strings(&alphabet, &Task::Cardinality.pattern_texts()).unwrap();
    let machine = PatternMachine::build(&set).unwrap();
    let config = FeatureConfig::default();
    let tc = TrainConfig { max_epochs: 6000, ..TrainConfig::default() };
    let result = train(&machine, &set, &config, &train_set.examples, &tc).unwrap();
    println!("conv {} epochs {}", result.converged, result.epochs);
    fn binom(n: u64, k: u64) -> u64 { (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1)) }
    let mut per_k: Vec<(usize, usize, usize)> = vec![(0, 0, 0); 10]; // (n, matches, pred_count)
    for k in 1..=9usize {
        let mut x = vec!['0'; 10];
        x[0] = char::from_digit(k as u32, 10).unwrap();
        let pred = build_lattice(&machine, &result.params, &result.config, &x).viterbi();
        let count = pred.iter().filter(|&&c| c == 'A').count();
        per_k[k].2 = count;
        println!("k={k}: pred {} (count {count}, expected match rate {:.4})",
            pred.iter().collect::<String>(), 1.0 / binom(9, k as u64) as f64);
    }
    for ex in &test_set.examples {
        let k = ex.x()[0].to_digit(10).unwrap() as usize;
        let pred = build_lattice(&machine, &result.params, &result.config, ex.x()).viterbi();
        per_k[k].0 += 1;
        if pred == ex.y() { per_k[k].1 += 1; }
    }
    let mut total = 0usize;
    let mut expected = 0.0;
    for k in 1..=9 {
        let (n, m, c) = per_k[k];
        let p = 1.0 / binom(9, k as u64) as f64;
        expected += n as f64 * p * (c == k) as u8 as f64;
        total += m;
        println!("k={k}: n={n:4} matches={m:3} (E[matches if count right]={:.1}) pred_count={c}", n as f64 * p);
    }
    println!("EM = {:.4}, E[EM | counts as predicted] = {:.4}", total as f64 / 2000.0, expected / 2000.0);
}
