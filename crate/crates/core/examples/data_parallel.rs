//! Synchronous data-parallel training: four replicas each take a shard of
//! the minibatch and their gradients are combined before one update. The
//! result matches single-worker training on the full batch.
//!
//! `cargo run --release --example data_parallel`

use mtscreen::data::{synth_collection, SynthConfig};
use mtscreen::experiments::{fold_table, training_rows, TrainSpec};
use mtscreen::net::{train, MultitaskNetwork, NetworkConfig, TrainingSet};

fn main() {
    let c = synth_collection(&SynthConfig { n_tasks: 3, n_compounds: 800, held_in: 3, ..Default::default() }).unwrap();
    let folds = fold_table(&c, 5, 0).unwrap();
    let set = TrainingSet::from_selection(&c, &training_rows(&folds, &[0, 1, 2], None));
    let base = NetworkConfig { n_steps: 100, ..TrainSpec::default().config(c.nbits().unwrap(), 3, set.len(), 11) };

    let mut single = MultitaskNetwork::init(base.clone()).unwrap();
    let mut replicas = MultitaskNetwork::init(NetworkConfig { workers: 4, ..base }).unwrap();
    train(&mut single, &set).unwrap();
    train(&mut replicas, &set).unwrap();

    let max_rel = single
        .layers()
        .iter()
        .zip(replicas.layers())
        .flat_map(|(a, b)| a.weights.iter().zip(&b.weights))
        .chain(single.heads().iter().zip(replicas.heads()))
        .map(|(a, b)| (a - b).abs() / a.abs().max(1e-12))
        .fold(0.0, f64::max);
    println!("{} parameters, max relative difference after 100 steps: {max_rel:.2e}", single.parameter_count());
}
