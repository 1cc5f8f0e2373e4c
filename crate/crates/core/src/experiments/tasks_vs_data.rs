use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cv_multitask, cv_multitask_augmented, fold_table, TrainSpec};
use super::growth::{addable, held_in_of};
use super::study::{spec_hash, StudyResult};
use super::ExperimentError;
use crate::data::{sample_nested, Collection};
use crate::metrics::EvalReport;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TasksVsDataSpec {
    /// Evaluated tasks; empty means the collection's held-in list.
    pub held_in: Vec<String>,
    /// Total task counts, held-in tasks included.
    pub task_ladder: Vec<usize>,
    /// Additional training examples drawn from the added tasks.
    pub budgets: Vec<usize>,
    pub n_runs: usize,
    pub folds: usize,
    pub train: TrainSpec,
    pub seed: u64,
}

impl Default for TasksVsDataSpec {
    fn default() -> Self {
        TasksVsDataSpec {
            held_in: Vec::new(),
            task_ladder: vec![10, 15, 20, 30, 50, 82],
            // thousandfold smaller than the original corpus budgets
            budgets: vec![1600, 3300, 6500, 13000, 23000],
            n_runs: 10,
            folds: 5,
            train: TrainSpec::default(),
            seed: seed::DEFAULT_SEED,
        }
    }
}

/// Splits `budget` over `m` tasks as evenly as possible.
pub fn split_budget(budget: usize, m: usize) -> Vec<usize> {
    (0..m).map(|i| budget / m + usize::from(i < budget % m)).collect()
}

/// Samples of the added tasks for every budget, nested across budgets.
/// `None` marks budgets that cannot be realized.
fn budget_samples(
    c: &Collection,
    added: &[usize],
    budgets: &[usize],
    seed: u64,
) -> Result<Vec<Option<Vec<(usize, Vec<usize>)>>>, ExperimentError> {
    let shares: Vec<Vec<usize>> = budgets.iter().map(|&b| split_budget(b, added.len())).collect();
    let feasible: Vec<bool> = shares
        .iter()
        .map(|s| !added.is_empty() && s.iter().zip(added).all(|(&n, &d)| n <= c.datasets[d].records.len()))
        .collect();
    let mut per_task: Vec<Vec<Vec<usize>>> = Vec::with_capacity(added.len());
    for (j, &d) in added.iter().enumerate() {
        let mut sizes: Vec<usize> = (0..budgets.len()).filter(|&b| feasible[b]).map(|b| shares[b][j]).filter(|&n| n > 0).collect();
        sizes.dedup();
        let samples = sample_nested(&c.datasets[d], &sizes, seed)?;
        per_task.push(
            (0..budgets.len())
                .map(|b| match sizes.iter().position(|&n| feasible[b] && n == shares[b][j]) {
                    Some(i) => samples[i].clone(),
                    None => Vec::new(),
                })
                .collect(),
        );
    }
    Ok((0..budgets.len())
        .map(|b| {
            (feasible[b] || budgets[b] == 0).then(|| {
                added.iter().zip(&per_task).filter(|(_, s)| !s[b].is_empty()).map(|(&d, s)| (d, s[b].clone())).collect()
            })
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct TasksVsDataOutcome {
    pub result: StudyResult,
    /// Multitask network trained on the held-in tasks only.
    pub baseline: EvalReport,
}

/// Grid over (task count, additional-data budget). Each cell trains on the
/// held-in training folds plus a nested, stratified sample of the added
/// tasks, and is compared with the held-in-only multitask network.
pub fn run_tasks_vs_data(spec: &TasksVsDataSpec, c: &Collection) -> Result<TasksVsDataOutcome, ExperimentError> {
    if spec.budgets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::Invalid(format!("budgets must increase: {:?}", spec.budgets)));
    }
    if spec.task_ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::Invalid(format!("task ladder must increase: {:?}", spec.task_ladder)));
    }
    let held = held_in_of(&spec.held_in, c)?;
    let candidates = addable(c, &held);
    let available = held.len() + candidates.len();
    let mut result = StudyResult::new("tasks_vs_data", spec_hash(spec), spec.seed);
    let mut rungs = Vec::new();
    for &n in &spec.task_ladder {
        if n < held.len() {
            return Err(ExperimentError::Invalid(format!("rung {n} is below the {} held-in tasks", held.len())));
        }
        if n > available {
            result.notes.push(format!("rung {n} dropped: only {available} tasks available"));
        } else {
            rungs.push(n);
        }
    }

    let folds = fold_table(c, spec.folds, spec.seed)?;
    let (baseline, _) = cv_multitask(c, &folds, &held, &held, &spec.train, spec.seed, "held_in_mtnn")?;

    struct Cell {
        run: usize,
        rung: usize,
        budget: usize,
        extra: Option<Vec<(usize, Vec<usize>)>>,
    }
    let mut cells = Vec::new();
    for run in 0..spec.n_runs {
        let mut order = candidates.clone();
        order.shuffle(&mut seed::rng_for(spec.seed, "tasks_vs_data/order", run as u64));
        for &n in &rungs {
            let added = &order[..n - held.len()];
            let samples = budget_samples(c, added, &spec.budgets, seed::derive(spec.seed, "tasks_vs_data/sample", run as u64))?;
            for (&budget, extra) in spec.budgets.iter().zip(samples) {
                cells.push(Cell { run, rung: n, budget, extra });
            }
        }
    }
    let reports: Vec<Option<EvalReport>> = cells
        .par_iter()
        .map(|cell| match &cell.extra {
            None => Ok(None),
            Some(extra) => {
                let (r, _) = cv_multitask_augmented(c, &folds, &held, extra, &held, &spec.train, spec.seed, "mtnn")?;
                Ok(Some(r))
            }
        })
        .collect::<Result<_, ExperimentError>>()?;
    for (cell, report) in cells.iter().zip(&reports) {
        match report {
            Some(r) => {
                for ev in &r.datasets {
                    let base = baseline.get(&ev.dataset).expect("same datasets").kfold_auc;
                    result.push_cell(cell.run, cell.rung, Some(cell.budget), &ev.dataset, &ev.fold_auc, ev.kfold_auc, base);
                }
            }
            None => {
                for &d in &held {
                    result.push_infeasible(cell.run, cell.rung, Some(cell.budget), &c.datasets[d].id);
                }
            }
        }
    }
    result.finalize();
    Ok(TasksVsDataOutcome { result, baseline })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synth_collection, SynthConfig};

    #[test]
    fn budget_split() {
        assert_eq!(split_budget(10, 3), vec![4, 3, 3]);
        assert_eq!(split_budget(2, 3), vec![1, 1, 0]);
        assert_eq!(split_budget(7, 1), vec![7]);
    }

    #[test]
    fn samples_are_nested_and_marked() {
        let c = synth_collection(&SynthConfig { n_tasks: 4, n_compounds: 300, held_in: 2, ..Default::default() }).unwrap();
        let s = budget_samples(&c, &[2, 3], &[0, 100, 300, 1000], 5).unwrap();
        assert_eq!(s[0].as_ref().unwrap().len(), 0);
        let (b1, b2) = (s[1].as_ref().unwrap(), s[2].as_ref().unwrap());
        for (x, y) in b1.iter().zip(b2) {
            assert_eq!(x.0, y.0);
            assert!(x.1.iter().all(|r| y.1.contains(r)));
        }
        assert_eq!(b2.iter().map(|(_, r)| r.len()).sum::<usize>(), 300);
        // 500 per task exceeds the 300 records
        assert!(s[3].is_none());
        // nothing to add
        let none = budget_samples(&c, &[], &[0, 100], 5).unwrap();
        assert!(none[0].is_some() && none[1].is_none());
    }
}
