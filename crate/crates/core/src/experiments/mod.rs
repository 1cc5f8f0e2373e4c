//! Seeded study protocols built from cross-validated multitask and
//! single-task training.

mod analysis;
mod cv;
mod growth;
mod study;
mod tasks_vs_data;
mod transfer;

pub use analysis::{
    compare_reports, merge_small_classes, run_aor_analysis, run_class_and_duplicate_analysis, AorAnalysis, AorRow,
    ClassDuplicateAnalysis, ClassRow, Comparison, MIN_CLASS_SIZE, MISCELLANEOUS,
};
pub use cv::{
    cv_multitask, cv_multitask_augmented, cv_single_task, fold_table, net_seed, score_rows, train_on, training_rows,
    TrainSpec,
};
pub use growth::{resolve_ladder, rung_slope, run_growth_curve, Checkpoint, GrowthCurveOutcome, GrowthCurveSpec, Rung};
pub use study::{
    spec_hash, StudyResult, StudyRow, ALL_DATASETS, AUC, BASELINE_AUC, DELTA_AUC, DELTA_LOG_ODDS, INFEASIBLE,
    KFOLD_AUC, MEAN_DELTA_AUC, MEAN_DELTA_LOG_ODDS,
};
pub use tasks_vs_data::{run_tasks_vs_data, split_budget, TasksVsDataOutcome, TasksVsDataSpec};
pub use transfer::{run_transfer, TransferSpec, UNTUNED_AUC};

use thiserror::Error;

use crate::data::{Collection, DataError};
use crate::metrics::MetricsError;
use crate::net::NetError;
use crate::stats::StatsError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("invalid study: {0}")]
    Invalid(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: std::path::PathBuf, message: String },
}

/// Positions of the given dataset ids in the collection.
pub(crate) fn dataset_indices(c: &Collection, ids: &[String]) -> Result<Vec<usize>, ExperimentError> {
    ids.iter()
        .map(|id| c.index_of(id).ok_or_else(|| DataError::UnknownDataset(id.clone()).into()))
        .collect()
}
