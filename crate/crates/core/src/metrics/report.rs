use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{kfold_average_auc, mean_median, MetricsError, ENRICHMENT_FPRS};
use crate::data::Group;

/// Cross-validated results of one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEval {
    pub dataset: String,
    pub group: Group,
    pub fold_auc: Vec<f64>,
    pub kfold_auc: f64,
    /// `(fpr, enrichment averaged over folds)` on [`ENRICHMENT_FPRS`].
    pub enrichment: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    /// Group name, or `ALL` for the whole report.
    pub group: String,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
}

/// Per-dataset, per-fold evaluation of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub k: usize,
    pub seed: u64,
    pub datasets: Vec<DatasetEval>,
}

impl EvalReport {
    pub fn new(model: impl Into<String>, k: usize, seed: u64) -> Self {
        EvalReport { model: model.into(), k, seed, datasets: Vec::new() }
    }

    /// Adds a dataset from its per-fold AUCs and per-fold enrichment rows
    /// (one value per grid FPR).
    pub fn push(
        &mut self,
        dataset: impl Into<String>,
        group: Group,
        fold_auc: Vec<f64>,
        fold_enrichment: &[Vec<f64>],
    ) -> Result<(), MetricsError> {
        let kfold_auc = kfold_average_auc(&fold_auc, self.k)?;
        if fold_enrichment.len() != self.k {
            return Err(MetricsError::MissingFold { expected: self.k, got: fold_enrichment.len() });
        }
        let enrichment = ENRICHMENT_FPRS
            .iter()
            .enumerate()
            .map(|(j, &fpr)| (fpr, fold_enrichment.iter().map(|row| row[j]).sum::<f64>() / self.k as f64))
            .collect();
        self.datasets.push(DatasetEval { dataset: dataset.into(), group, fold_auc, kfold_auc, enrichment });
        Ok(())
    }

    pub fn get(&self, dataset: &str) -> Option<&DatasetEval> {
        self.datasets.iter().find(|d| d.dataset == dataset)
    }

    /// Mean and median K-fold-average AUC, optionally within one group.
    pub fn mean_median_auc(&self, group: Option<Group>) -> Result<(f64, f64), MetricsError> {
        let v: Vec<f64> =
            self.datasets.iter().filter(|d| group.is_none_or(|g| d.group == g)).map(|d| d.kfold_auc).collect();
        mean_median(&v)
    }

    /// One summary per group present, then `ALL`.
    pub fn group_summaries(&self) -> Vec<GroupSummary> {
        let mut by_group: BTreeMap<Group, Vec<f64>> = BTreeMap::new();
        for d in &self.datasets {
            by_group.entry(d.group).or_default().push(d.kfold_auc);
        }
        let mut out: Vec<GroupSummary> = by_group
            .into_iter()
            .map(|(g, v)| {
                let (mean, median) = mean_median(&v).expect("non-empty group");
                GroupSummary { group: g.name().to_string(), n: v.len(), mean, median }
            })
            .collect();
        if let Ok((mean, median)) = self.mean_median_auc(None) {
            out.push(GroupSummary { group: "ALL".into(), n: self.datasets.len(), mean, median });
        }
        out
    }

    /// Checks AUC ranges and that stored averages recompute from folds.
    pub fn validate(&self) -> Result<(), MetricsError> {
        for d in &self.datasets {
            let avg = kfold_average_auc(&d.fold_auc, self.k)?;
            if d.fold_auc.iter().any(|a| !(0.0..=1.0).contains(a)) || (avg - d.kfold_auc).abs() > 1e-12 {
                return Err(MetricsError::Io {
                    path: Default::default(),
                    message: format!("inconsistent AUC values for {}", d.dataset),
                });
            }
        }
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<(), MetricsError> {
        let s = serde_json::to_string_pretty(self).expect("report serializes");
        std::fs::write(path, s).map_err(|e| io_err(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self, MetricsError> {
        let s = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let r: EvalReport = serde_json::from_str(&s).map_err(|e| io_err(path, e))?;
        r.validate().map_err(|e| io_err(path, e))?;
        Ok(r)
    }

    /// Flat rows `dataset,group,fold,metric,value`. Aggregates leave
    /// `fold` empty; group summaries use `*` as the dataset.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["dataset", "group", "fold", "metric", "value"]).unwrap();
        for d in &self.datasets {
            let g = d.group.name();
            for (f, a) in d.fold_auc.iter().enumerate() {
                w.write_record([&d.dataset, g, &f.to_string(), "auc", &a.to_string()]).unwrap();
            }
            w.write_record([&d.dataset, g, "", "kfold_auc", &d.kfold_auc.to_string()]).unwrap();
            for (fpr, e) in &d.enrichment {
                w.write_record([&d.dataset, g, "", &format!("enrichment@{fpr}"), &e.to_string()]).unwrap();
            }
        }
        for s in self.group_summaries() {
            w.write_record(["*", &s.group, "", "mean_kfold_auc", &s.mean.to_string()]).unwrap();
            w.write_record(["*", &s.group, "", "median_kfold_auc", &s.median.to_string()]).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), MetricsError> {
        std::fs::write(path, self.to_csv()).map_err(|e| io_err(path, e))
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> MetricsError {
    MetricsError::Io { path: path.to_path_buf(), message: e.to_string() }
}
