use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::data::{stratified_kfold, Collection, FoldAssignment};
use crate::metrics::{roc_auc, roc_enrichment, EvalReport, ScoredSet, ENRICHMENT_FPRS};
use crate::net::{scaled_steps, train, MultitaskNetwork, NetworkConfig, TrainingSet};
use crate::seed;

/// Network template plus the step rule `epochs · ⌈pool / batch⌉ + floor`.
/// `input_dim`, `n_tasks`, `n_steps` and `seed` of the template are filled
/// in per training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSpec {
    pub network: NetworkConfig,
    pub epochs: f64,
    pub floor: u64,
}

impl Default for TrainSpec {
    fn default() -> Self {
        TrainSpec {
            network: NetworkConfig {
                hidden_sizes: vec![64, 32],
                learning_rate: 0.03,
                init_std: 0.1,
                ..NetworkConfig::default()
            },
            epochs: 10.0,
            floor: 200,
        }
    }
}

impl TrainSpec {
    /// Full-scale settings: pyramidal (2000, 100), learning rate 0.0003,
    /// and 500 epochs plus a constant 3M steps.
    pub fn full() -> Self {
        TrainSpec { network: NetworkConfig::default(), epochs: 500.0, floor: 3_000_000 }
    }

    pub fn config(&self, input_dim: usize, n_tasks: usize, pool: usize, seed: u64) -> NetworkConfig {
        NetworkConfig {
            input_dim,
            n_tasks,
            n_steps: scaled_steps(pool, self.network.batch_size, self.epochs, self.floor),
            seed,
            ..self.network.clone()
        }
    }
}

/// Stratified fold assignments for every dataset of the collection.
pub fn fold_table(c: &Collection, k: usize, seed: u64) -> Result<Vec<FoldAssignment>, ExperimentError> {
    Ok(c.datasets.iter().map(|d| stratified_kfold(d, k, seed)).collect::<Result<_, _>>()?)
}

/// Seed of the network trained on fold `fold` (or on everything when
/// `None`). Depends only on the study seed and the fold, so a one-task
/// "multitask" run and a single-task run on the same dataset coincide.
pub fn net_seed(seed: u64, fold: Option<usize>) -> u64 {
    seed::derive(seed, "net", fold.map_or(u64::MAX, |f| f as u64))
}

/// Records of each task used for training: the rows outside `fold`, or all
/// rows when `fold` is `None`.
pub fn training_rows(folds: &[FoldAssignment], tasks: &[usize], fold: Option<usize>) -> Vec<(usize, Vec<usize>)> {
    tasks
        .iter()
        .map(|&d| match fold {
            Some(f) => (d, folds[d].train_indices(f)),
            None => (d, (0..folds[d].fold_of.len()).collect()),
        })
        .collect()
}

/// Trains one network on `selection` (task `t` = `selection[t]`).
pub fn train_on(
    c: &Collection,
    selection: &[(usize, Vec<usize>)],
    spec: &TrainSpec,
    seed: u64,
) -> Result<MultitaskNetwork, ExperimentError> {
    let set = TrainingSet::from_selection(c, selection);
    let nbits = c.nbits().ok_or_else(|| ExperimentError::Invalid("collection has no records".into()))?;
    let mut net = MultitaskNetwork::init(spec.config(nbits, selection.len(), set.len(), seed))?;
    train(&mut net, &set)?;
    Ok(net)
}

/// AUC and enrichment row of head `task` on the given rows of dataset `d`.
pub fn score_rows(
    net: &MultitaskNetwork,
    task: usize,
    c: &Collection,
    d: usize,
    rows: &[usize],
) -> Result<(f64, Vec<f64>), ExperimentError> {
    let ds = &c.datasets[d];
    let bits: Vec<Vec<u32>> =
        rows.iter().map(|&r| ds.records[r].fingerprint.ones().map(|i| i as u32).collect()).collect();
    let scores = net.predict(&bits, task)?;
    let labels = rows.iter().map(|&r| ds.records[r].label).collect();
    let set = ScoredSet::new(scores, labels)?;
    let enrichment = ENRICHMENT_FPRS.iter().map(|&f| roc_enrichment(&set, f)).collect::<Result<_, _>>()?;
    Ok((roc_auc(&set), enrichment))
}

fn fold_results_to_report(
    c: &Collection,
    model: &str,
    k: usize,
    seed: u64,
    eval: &[usize],
    per_fold: Vec<Vec<(f64, Vec<f64>)>>,
) -> Result<EvalReport, ExperimentError> {
    let mut report = EvalReport::new(model, k, seed);
    for (j, &d) in eval.iter().enumerate() {
        let aucs = per_fold.iter().map(|f| f[j].0).collect();
        let enr: Vec<Vec<f64>> = per_fold.iter().map(|f| f[j].1.clone()).collect();
        report.push(c.datasets[d].id.clone(), c.datasets[d].group, aucs, &enr)?;
    }
    Ok(report)
}

/// K-fold evaluation of multitask networks trained on `tasks`, reporting
/// the datasets in `eval` (each must be one of `tasks`). Returns the report
/// and the network of every fold.
pub fn cv_multitask(
    c: &Collection,
    folds: &[FoldAssignment],
    tasks: &[usize],
    eval: &[usize],
    spec: &TrainSpec,
    seed: u64,
    model: &str,
) -> Result<(EvalReport, Vec<MultitaskNetwork>), ExperimentError> {
    cv_multitask_augmented(c, folds, tasks, &[], eval, spec, seed, model)
}

/// Like [`cv_multitask`], with `extra` (dataset, rows) selections added to
/// every fold's training set as further tasks. Extra rows are never
/// evaluated.
#[allow(clippy::too_many_arguments)]
pub fn cv_multitask_augmented(
    c: &Collection,
    folds: &[FoldAssignment],
    tasks: &[usize],
    extra: &[(usize, Vec<usize>)],
    eval: &[usize],
    spec: &TrainSpec,
    seed: u64,
    model: &str,
) -> Result<(EvalReport, Vec<MultitaskNetwork>), ExperimentError> {
    let k = folds.first().map_or(0, |f| f.k);
    let heads: Vec<usize> = eval
        .iter()
        .map(|d| {
            tasks.iter().position(|t| t == d).ok_or_else(|| {
                ExperimentError::Invalid(format!("{} is evaluated but not trained", c.datasets[*d].id))
            })
        })
        .collect::<Result<_, _>>()?;
    let results: Vec<(MultitaskNetwork, Vec<(f64, Vec<f64>)>)> = (0..k)
        .into_par_iter()
        .map(|f| {
            let mut selection = training_rows(folds, tasks, Some(f));
            selection.extend(extra.iter().cloned());
            let net = train_on(c, &selection, spec, net_seed(seed, Some(f)))?;
            let rows = eval
                .iter()
                .zip(&heads)
                .map(|(&d, &h)| score_rows(&net, h, c, d, &folds[d].test_indices(f)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((net, rows))
        })
        .collect::<Result<_, ExperimentError>>()?;
    let (nets, per_fold): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok((fold_results_to_report(c, model, k, seed, eval, per_fold)?, nets))
}

/// K-fold evaluation of one single-task network per (dataset, fold).
pub fn cv_single_task(
    c: &Collection,
    folds: &[FoldAssignment],
    eval: &[usize],
    spec: &TrainSpec,
    seed: u64,
    model: &str,
) -> Result<EvalReport, ExperimentError> {
    let k = folds.first().map_or(0, |f| f.k);
    let cells: Vec<(usize, usize)> = eval.iter().flat_map(|&d| (0..k).map(move |f| (d, f))).collect();
    let scored: Vec<(f64, Vec<f64>)> = cells
        .par_iter()
        .map(|&(d, f)| {
            let net = train_on(c, &training_rows(folds, &[d], Some(f)), spec, net_seed(seed, Some(f)))?;
            score_rows(&net, 0, c, d, &folds[d].test_indices(f))
        })
        .collect::<Result<_, ExperimentError>>()?;
    let per_fold: Vec<Vec<(f64, Vec<f64>)>> =
        (0..k).map(|f| (0..eval.len()).map(|j| scored[j * k + f].clone()).collect()).collect();
    fold_results_to_report(c, model, k, seed, eval, per_fold)
}
