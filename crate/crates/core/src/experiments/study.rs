use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentError;
use crate::metrics::delta_log_odds;

pub const AUC: &str = "auc";
pub const KFOLD_AUC: &str = "kfold_auc";
pub const BASELINE_AUC: &str = "baseline_kfold_auc";
pub const DELTA_AUC: &str = "delta_auc";
pub const DELTA_LOG_ODDS: &str = "delta_log_odds";
pub const MEAN_DELTA_AUC: &str = "mean_delta_auc";
pub const MEAN_DELTA_LOG_ODDS: &str = "mean_delta_log_odds";
pub const INFEASIBLE: &str = "infeasible";

/// Dataset column of aggregate rows.
pub const ALL_DATASETS: &str = "*";

/// Hex SHA-256 of the JSON serialization of a study spec.
pub fn spec_hash<T: Serialize>(spec: &T) -> String {
    let json = serde_json::to_vec(spec).expect("specs serialize");
    hex::encode(Sha256::digest(json))
}

/// One long-format value. `run: None` marks cross-run aggregates and
/// `fold: None` marks values that are not per fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub run: Option<usize>,
    /// Number of tasks in the training collection.
    pub rung: usize,
    /// Additional training examples, for budgeted studies.
    pub budget: Option<usize>,
    pub dataset: String,
    pub fold: Option<usize>,
    pub metric: String,
    /// NaN (JSON `null`) for infeasible cells.
    #[serde(with = "nan_as_null")]
    pub value: f64,
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

type CellKey = (Option<usize>, usize, Option<usize>);

/// Result table of a study plus its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub study: String,
    pub spec_hash: String,
    pub seed: u64,
    pub rows: Vec<StudyRow>,
    /// Study-specific summary values (slopes, tests).
    pub summary: BTreeMap<String, serde_json::Value>,
    pub notes: Vec<String>,
}

impl StudyResult {
    pub fn new(study: &str, spec_hash: String, seed: u64) -> Self {
        StudyResult { study: study.into(), spec_hash, seed, rows: Vec::new(), summary: BTreeMap::new(), notes: Vec::new() }
    }

    fn row(&mut self, cell: CellKey, dataset: &str, fold: Option<usize>, metric: &str, value: f64) {
        let (run, rung, budget) = cell;
        self.rows.push(StudyRow { run, rung, budget, dataset: dataset.into(), fold, metric: metric.into(), value });
    }

    /// Records one evaluated dataset of a (run, rung, budget) cell together
    /// with its matched baseline and the derived deltas.
    pub fn push_cell(
        &mut self,
        run: usize,
        rung: usize,
        budget: Option<usize>,
        dataset: &str,
        fold_auc: &[f64],
        kfold_auc: f64,
        baseline: f64,
    ) {
        let cell = (Some(run), rung, budget);
        for (f, &a) in fold_auc.iter().enumerate() {
            self.row(cell, dataset, Some(f), AUC, a);
        }
        self.row(cell, dataset, None, KFOLD_AUC, kfold_auc);
        self.row(cell, dataset, None, BASELINE_AUC, baseline);
        self.row(cell, dataset, None, DELTA_AUC, kfold_auc - baseline);
        self.row(cell, dataset, None, DELTA_LOG_ODDS, delta_log_odds(kfold_auc, baseline));
    }

    /// Marks a cell that could not be realized.
    pub fn push_infeasible(&mut self, run: usize, rung: usize, budget: Option<usize>, dataset: &str) {
        self.row((Some(run), rung, budget), dataset, None, INFEASIBLE, f64::NAN);
    }

    pub fn push_value(&mut self, run: usize, rung: usize, dataset: &str, fold: Option<usize>, metric: &str, value: f64) {
        self.row((Some(run), rung, None), dataset, fold, metric, value);
    }

    fn cell_rows(&self) -> impl Iterator<Item = &StudyRow> {
        self.rows.iter().filter(|r| r.run.is_some() && r.dataset != ALL_DATASETS)
    }

    fn aggregates(&self) -> Vec<StudyRow> {
        let mut per_run: BTreeMap<(CellKey, &str), Vec<f64>> = BTreeMap::new();
        for r in self.cell_rows() {
            let target = match r.metric.as_str() {
                DELTA_AUC => MEAN_DELTA_AUC,
                DELTA_LOG_ODDS => MEAN_DELTA_LOG_ODDS,
                _ => continue,
            };
            per_run.entry(((r.run, r.rung, r.budget), target)).or_default().push(r.value);
        }
        let mut out = Vec::new();
        let mut cross: BTreeMap<((usize, Option<usize>), &str), Vec<f64>> = BTreeMap::new();
        for (((run, rung, budget), metric), values) in per_run {
            let m = values.iter().sum::<f64>() / values.len() as f64;
            out.push(StudyRow { run, rung, budget, dataset: ALL_DATASETS.into(), fold: None, metric: metric.into(), value: m });
            cross.entry(((rung, budget), metric)).or_default().push(m);
        }
        for (((rung, budget), metric), values) in cross {
            let m = values.iter().sum::<f64>() / values.len() as f64;
            out.push(StudyRow { run: None, rung, budget, dataset: ALL_DATASETS.into(), fold: None, metric: metric.into(), value: m });
        }
        out
    }

    /// Appends per-run means over datasets and cross-run means of those.
    pub fn finalize(&mut self) {
        self.rows.retain(|r| r.run.is_some() && r.dataset != ALL_DATASETS);
        let agg = self.aggregates();
        self.rows.extend(agg);
    }

    /// Checks that every delta equals model minus baseline and that the
    /// aggregate rows recompute exactly from the cell rows.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let mut cells: BTreeMap<(CellKey, &str), BTreeMap<&str, f64>> = BTreeMap::new();
        for r in self.cell_rows().filter(|r| r.fold.is_none()) {
            cells.entry(((r.run, r.rung, r.budget), &r.dataset)).or_default().insert(&r.metric, r.value);
        }
        for ((cell, dataset), m) in &cells {
            if m.contains_key(INFEASIBLE) {
                continue;
            }
            if let (Some(&k), Some(&b)) = (m.get(KFOLD_AUC), m.get(BASELINE_AUC)) {
                let ok = m.get(DELTA_AUC) == Some(&(k - b)) && m.get(DELTA_LOG_ODDS) == Some(&delta_log_odds(k, b));
                if !ok {
                    return Err(ExperimentError::Invalid(format!("deltas of {dataset} in {cell:?} do not recompute")));
                }
            }
        }
        let stored: Vec<&StudyRow> = self.rows.iter().filter(|r| r.run.is_none() || r.dataset == ALL_DATASETS).collect();
        let fresh = self.aggregates();
        if stored.len() != fresh.len() || stored.iter().zip(&fresh).any(|(a, b)| *a != b) {
            return Err(ExperimentError::Invalid("aggregate rows do not recompute from cell rows".into()));
        }
        Ok(())
    }

    /// Cross-run means of `metric` (an aggregate metric) per (rung, budget).
    pub fn cross_run_means(&self, metric: &str) -> Vec<(usize, Option<usize>, f64)> {
        self.rows.iter().filter(|r| r.run.is_none() && r.metric == metric).map(|r| (r.rung, r.budget, r.value)).collect()
    }

    /// Per-run means of `metric` (an aggregate metric) per (run, rung, budget).
    pub fn run_means(&self, metric: &str) -> Vec<(usize, usize, Option<usize>, f64)> {
        self.rows
            .iter()
            .filter(|r| r.dataset == ALL_DATASETS && r.metric == metric)
            .filter_map(|r| r.run.map(|run| (run, r.rung, r.budget, r.value)))
            .collect()
    }

    /// Values of a cell metric for every (run, rung, budget, dataset).
    pub fn cell_values(&self, metric: &str) -> Vec<&StudyRow> {
        self.cell_rows().filter(|r| r.metric == metric).collect()
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<usize>| v.map_or_else(|| ALL_DATASETS.to_string(), |x| x.to_string());
        let mut out = String::from("study,run,rung,budget,dataset,fold,metric,value\n");
        for r in &self.rows {
            let budget = r.budget.map_or_else(String::new, |b| b.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.study,
                opt(r.run),
                r.rung,
                budget,
                r.dataset,
                r.fold.map_or_else(String::new, |f| f.to_string()),
                r.metric,
                r.value
            );
        }
        out
    }

    /// Writes `<stem>.csv` (long format) and `<stem>.json` (everything,
    /// including the summary) into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(), ExperimentError> {
        let io = |path: &Path, e: std::io::Error| ExperimentError::Io { path: path.to_path_buf(), message: e.to_string() };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let csv = dir.join(format!("{stem}.csv"));
        std::fs::write(&csv, self.to_csv()).map_err(|e| io(&csv, e))?;
        let json = dir.join(format!("{stem}.json"));
        let text = serde_json::to_string_pretty(self).expect("study results serialize");
        std::fs::write(&json, text).map_err(|e| io(&json, e))?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self, ExperimentError> {
        let io = |m: String| ExperimentError::Io { path: path.to_path_buf(), message: m };
        let text = std::fs::read_to_string(path).map_err(|e| io(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| io(e.to_string()))
    }
}
