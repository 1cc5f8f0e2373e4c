//! Grid over added tasks and added training examples, compared with a
//! multitask network trained on the held-in tasks alone.
//!
//! `cargo run --release --example tasks_vs_data`

use mtscreen::data::{synth_collection, SynthConfig};
use mtscreen::experiments::{run_tasks_vs_data, TasksVsDataSpec, INFEASIBLE, MEAN_DELTA_AUC};

fn main() {
    let c = synth_collection(&SynthConfig { n_tasks: 8, n_compounds: 800, held_in: 4, ..Default::default() }).unwrap();
    let spec = TasksVsDataSpec {
        task_ladder: vec![4, 6, 8],
        budgets: vec![0, 400, 1600, 5000],
        n_runs: 1,
        folds: 3,
        ..Default::default()
    };
    let outcome = run_tasks_vs_data(&spec, &c).unwrap();
    println!("tasks  budget  mean ΔAUC");
    for (rung, budget, delta) in outcome.result.cross_run_means(MEAN_DELTA_AUC) {
        println!("{rung:>5} {:>7} {delta:>+10.4}", budget.unwrap());
    }
    let infeasible = outcome.result.cell_values(INFEASIBLE).len();
    println!("{infeasible} infeasible cells (budget exceeds the added tasks' records)");
}
