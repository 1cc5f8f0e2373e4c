//! Trains a multitask network on every task of a synthetic collection,
//! round-trips it through a checkpoint and scores a few compounds.
//!
//! `cargo run --release --example train_multitask`

use mtscreen::data::{synth_collection, SynthConfig};
use mtscreen::experiments::{fold_table, net_seed, score_rows, training_rows, TrainSpec};
use mtscreen::net::{load_checkpoint, save_checkpoint, train, MultitaskNetwork, TrainingSet};

fn main() {
    let c = synth_collection(&SynthConfig { n_tasks: 5, n_compounds: 1500, held_in: 5, ..Default::default() }).unwrap();
    let tasks: Vec<usize> = (0..c.datasets.len()).collect();
    let folds = fold_table(&c, 5, 1).unwrap();
    // train on folds 1..5 of every task, keep fold 0 for scoring
    let set = TrainingSet::from_selection(&c, &training_rows(&folds, &tasks, Some(0)));
    let spec = TrainSpec::default();
    let config = spec.config(c.nbits().unwrap(), tasks.len(), set.len(), net_seed(1, Some(0)));
    println!("{} examples, {} steps, hidden {:?}", set.len(), config.n_steps, config.hidden_sizes);
    let mut net = MultitaskNetwork::init(config).unwrap();
    let report = train(&mut net, &set).unwrap();
    for p in report.curve.iter().step_by(2) {
        println!("step {:>5}  loss {:.4}", p.step, p.loss);
    }

    let path = std::env::temp_dir().join("mtscreen-example.mtnn");
    save_checkpoint(&net, &path).unwrap();
    let restored = load_checkpoint(&path).unwrap();
    assert_eq!(restored, net);

    for &d in &tasks {
        let (auc, enrichment) = score_rows(&restored, d, &c, d, &folds[d].test_indices(0)).unwrap();
        println!("{}: held-out fold AUC {auc:.3}, enrichment at 1% {:.1}", c.datasets[d].id, enrichment[1]);
    }
}
