//! Growth-curve study: held-in AUC as unrelated tasks are added to the
//! multitask training collection.
//!
//! `cargo run --release --example growth_curve`

use mtscreen::data::{synth_collection, SynthConfig};
use mtscreen::experiments::{run_growth_curve, GrowthCurveSpec, Rung, MEAN_DELTA_AUC};

fn main() {
    let c = synth_collection(&SynthConfig { n_tasks: 12, n_compounds: 1000, held_in: 4, ..Default::default() }).unwrap();
    let spec = GrowthCurveSpec {
        ladder: vec![Rung::Tasks(4), Rung::Tasks(8), Rung::All],
        n_runs: 2,
        folds: 3,
        ..Default::default()
    };
    let outcome = run_growth_curve(&spec, &c).unwrap();
    for (rung, _, delta) in outcome.result.cross_run_means(MEAN_DELTA_AUC) {
        println!("{rung:>3} tasks: mean ΔAUC over single-task {delta:+.4}");
    }
    println!("slope per doubling: {}", outcome.result.summary["rung_slope"]);
    println!("{} checkpoints kept for transfer", outcome.checkpoints.len());
    outcome.result.validate().unwrap();
}
