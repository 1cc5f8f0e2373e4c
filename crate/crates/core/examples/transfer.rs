//! Transplants the hidden layers of a trained multitask network onto
//! held-out tasks and fine-tunes, against fresh single-task training.
//! Held-out tasks 10 and 11 share motifs with the source tasks; 12 and 13
//! do not.
//!
//! `cargo run --release --example transfer`

use mtscreen::data::{synth_collection, Sharing, SynthConfig};
use mtscreen::experiments::{
    fold_table, net_seed, run_transfer, train_on, training_rows, Checkpoint, TrainSpec, TransferSpec, DELTA_AUC,
    UNTUNED_AUC,
};

fn main() {
    let seed = 1;
    let mut sharing = vec![0.8; 12];
    sharing.extend([0.0, 0.0]);
    let cfg = SynthConfig {
        n_tasks: 14,
        n_compounds: 1500,
        sharing: Sharing::PerTask(sharing),
        held_in: 10,
        held_out: 4,
        seed,
        ..Default::default()
    };
    let c = synth_collection(&cfg).unwrap();
    let spec = TrainSpec::default();
    let folds = fold_table(&c, 5, seed).unwrap();
    let source: Vec<usize> = (0..10).collect();
    let network = train_on(&c, &training_rows(&folds, &source, Some(0)), &spec, net_seed(seed, Some(0))).unwrap();
    let checkpoint = Checkpoint { run: 0, rung: 10, tasks: c.held_in.clone(), network };

    let result = run_transfer(&TransferSpec { seed, ..Default::default() }, &c, &[checkpoint]).unwrap();
    let untuned = result.cell_values(UNTUNED_AUC);
    for row in result.cell_values(DELTA_AUC) {
        let before: Vec<f64> = untuned.iter().filter(|u| u.dataset == row.dataset).map(|u| u.value).collect();
        println!(
            "{}: ΔAUC vs fresh {:+.4} (untuned head mean AUC {:.3})",
            row.dataset,
            row.value,
            before.iter().sum::<f64>() / before.len() as f64
        );
    }
}
