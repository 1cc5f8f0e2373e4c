//! Relates each dataset's active occurrence rate to its multitask gain,
//! then compares duplicated against unique targets.
//!
//! `cargo run --release --example aor_analysis`

use mtscreen::data::{synth_collection, Sharing, SynthConfig};
use mtscreen::experiments::{cv_multitask, cv_single_task, fold_table, run_aor_analysis, run_class_and_duplicate_analysis, TrainSpec};

fn main() {
    let seed = 2;
    let cfg = SynthConfig {
        n_tasks: 12,
        n_compounds: 1200,
        sharing: Sharing::Graded { min: 0.0, max: 0.8 },
        duplicate_tasks: 3,
        seed,
        ..Default::default()
    };
    let c = synth_collection(&cfg).unwrap();
    let folds = fold_table(&c, 5, seed).unwrap();
    let all: Vec<usize> = (0..c.datasets.len()).collect();
    let spec = TrainSpec::default();
    let (mt, _) = cv_multitask(&c, &folds, &all, &all, &spec, seed, "pmtnn").unwrap();
    let st = cv_single_task(&c, &folds, &all, &spec, seed, "pstnn").unwrap();

    let aor = run_aor_analysis(&mt, &st, &c, &[]).unwrap();
    print!("{}", aor.to_csv());
    println!("r² = {:.3}, slope = {:.3}", aor.regression.r2, aor.regression.slope);

    let classes = run_class_and_duplicate_analysis(&mt, &st, &c, &[]).unwrap();
    for row in &classes.classes {
        println!("{:<15} n={:<2} mean Δ log-odds {:+.3}  notch [{:.3}, {:.3}]", row.class, row.members.len(), row.mean, row.notch.lower(), row.notch.upper());
    }
    if let Some(t) = &classes.duplicate_vs_unique {
        println!("duplicate > unique: t = {:.3}, one-sided p = {:.4}", t.statistic.unwrap(), t.p.unwrap());
    }
    for notice in &classes.notices {
        println!("note: {notice}");
    }
}
