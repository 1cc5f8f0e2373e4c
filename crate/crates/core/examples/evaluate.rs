//! Cross-validates a multitask network against seed-paired single-task
//! networks and runs a sign test on the per-dataset AUCs.
//!
//! `cargo run --release --example evaluate`

use mtscreen::data::{synth_collection, SynthConfig};
use mtscreen::experiments::{cv_multitask, cv_single_task, fold_table, TrainSpec};
use mtscreen::stats::{sign_test_wilson, PairedSample, Z_95};

fn main() {
    let seed = 3;
    let c = synth_collection(&SynthConfig { n_tasks: 8, n_compounds: 1500, held_in: 8, seed, ..Default::default() }).unwrap();
    let folds = fold_table(&c, 5, seed).unwrap();
    let all: Vec<usize> = (0..c.datasets.len()).collect();
    let spec = TrainSpec::default();
    let (mt, _) = cv_multitask(&c, &folds, &all, &all, &spec, seed, "pmtnn").unwrap();
    let st = cv_single_task(&c, &folds, &all, &spec, seed, "pstnn").unwrap();

    for (m, s) in mt.datasets.iter().zip(&st.datasets) {
        println!("{:<10} multitask {:.3}  single-task {:.3}", m.dataset, m.kfold_auc, s.kfold_auc);
    }
    for r in [&mt, &st] {
        let all = r.group_summaries().pop().unwrap();
        println!("{}: mean {:.3}, median {:.3}", r.model, all.mean, all.median);
    }
    let paired = PairedSample::new(
        c.ids(),
        mt.datasets.iter().map(|d| d.kfold_auc).collect(),
        st.datasets.iter().map(|d| d.kfold_auc).collect(),
    )
    .unwrap();
    let sign = sign_test_wilson(&paired, Z_95).unwrap();
    println!(
        "multitask better on {} of {} datasets, Wilson 95% CI [{:.3}, {:.3}]",
        sign.wins,
        sign.wins + sign.losses,
        sign.ci.0,
        sign.ci.1
    );
}
