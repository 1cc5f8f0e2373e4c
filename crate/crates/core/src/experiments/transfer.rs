use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cv_single_task, fold_table, net_seed, score_rows, training_rows, TrainSpec};
use super::growth::Checkpoint;
use super::study::{spec_hash, StudyResult};
use super::{dataset_indices, ExperimentError};
use crate::data::Collection;
use crate::metrics::kfold_average_auc;
use crate::net::{train, TrainingSet};
use crate::seed;

/// AUC of a transplanted network before any fine-tuning (untrained head).
pub const UNTUNED_AUC: &str = "untuned_auc";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransferSpec {
    /// Target tasks; empty means the collection's held-out list.
    pub held_out: Vec<String>,
    pub folds: usize,
    pub train: TrainSpec,
    pub seed: u64,
}

impl Default for TransferSpec {
    fn default() -> Self {
        TransferSpec { held_out: Vec::new(), folds: 5, train: TrainSpec::default(), seed: seed::DEFAULT_SEED }
    }
}

/// For every checkpoint and held-out task, fine-tunes the checkpoint's
/// hidden layers with a fresh head on each training fold and compares the
/// K-fold AUC with a fresh single-task network using the same seeds.
pub fn run_transfer(spec: &TransferSpec, c: &Collection, checkpoints: &[Checkpoint]) -> Result<StudyResult, ExperimentError> {
    let ids = if spec.held_out.is_empty() { &c.held_out } else { &spec.held_out };
    if ids.is_empty() {
        return Err(ExperimentError::Invalid("no held-out tasks".into()));
    }
    let targets = dataset_indices(c, ids)?;
    for cp in checkpoints {
        if let Some(t) = ids.iter().find(|t| cp.tasks.contains(t)) {
            return Err(ExperimentError::Invalid(format!(
                "held-out task {t} was used to train checkpoint (run {}, rung {})",
                cp.run, cp.rung
            )));
        }
    }
    let nbits = c.nbits().ok_or_else(|| ExperimentError::Invalid("collection has no records".into()))?;
    let folds = fold_table(c, spec.folds, spec.seed)?;
    let baseline = cv_single_task(c, &folds, &targets, &spec.train, spec.seed, "fresh")?;

    let cells: Vec<(usize, usize, usize)> = (0..checkpoints.len())
        .flat_map(|i| targets.iter().flat_map(move |&d| (0..spec.folds).map(move |f| (i, d, f))))
        .collect();
    let scored: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|&(i, d, f)| {
            let selection = training_rows(&folds, &[d], Some(f));
            let set = TrainingSet::from_selection(c, &selection);
            let config = spec.train.config(nbits, 1, set.len(), net_seed(spec.seed, Some(f)));
            let mut net = checkpoints[i].network.transplant(config)?;
            let test = folds[d].test_indices(f);
            let untuned = score_rows(&net, 0, c, d, &test)?.0;
            train(&mut net, &set)?;
            Ok((untuned, score_rows(&net, 0, c, d, &test)?.0))
        })
        .collect::<Result<_, ExperimentError>>()?;

    let mut result = StudyResult::new("transfer", spec_hash(spec), spec.seed);
    for (chunk, cp) in scored.chunks(targets.len() * spec.folds).zip(checkpoints) {
        for (per_fold, &d) in chunk.chunks(spec.folds).zip(&targets) {
            let id = &c.datasets[d].id;
            let aucs: Vec<f64> = per_fold.iter().map(|s| s.1).collect();
            let kfold = kfold_average_auc(&aucs, spec.folds)?;
            let base = baseline.get(id).expect("same datasets").kfold_auc;
            result.push_cell(cp.run, cp.rung, None, id, &aucs, kfold, base);
            for (f, s) in per_fold.iter().enumerate() {
                result.push_value(cp.run, cp.rung, id, Some(f), UNTUNED_AUC, s.0);
            }
        }
    }
    result.finalize();
    Ok(result)
}
