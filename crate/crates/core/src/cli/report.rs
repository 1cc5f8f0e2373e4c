use std::fmt::Write as _;

use serde::Serialize;

use super::CliError;
use crate::data::Group;
use crate::metrics::{mean_median, EvalReport, ENRICHMENT_FPRS};
use crate::stats::{sign_test_wilson, PairedSample, SignTest, Z_95};

/// Median K-fold-average AUC of one model per column, with its sign test
/// against the baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelRow {
    pub model: String,
    pub medians: Vec<Option<f64>>,
    /// Fraction of paired datasets where this model beats the baseline.
    pub sign: Option<SignTest>,
    pub paired: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnrichmentRow {
    pub model: String,
    pub fpr: f64,
    pub medians: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportTables {
    /// Group names in order, then `ALL`.
    pub columns: Vec<String>,
    pub baseline: Option<String>,
    pub auc: Vec<ModelRow>,
    pub enrichment: Vec<EnrichmentRow>,
    pub excluded: Vec<Group>,
}

fn column_medians(r: &EvalReport, columns: &[String], exclude: &[Group], value: impl Fn(usize) -> f64) -> Vec<Option<f64>> {
    columns
        .iter()
        .map(|col| {
            let v: Vec<f64> = r
                .datasets
                .iter()
                .enumerate()
                .filter(|(_, d)| !exclude.contains(&d.group) && (col == "ALL" || d.group.name() == col))
                .map(|(i, _)| value(i))
                .collect();
            mean_median(&v).ok().map(|m| m.1)
        })
        .collect()
}

fn sign_against(r: &EvalReport, base: &EvalReport, exclude: &[Group]) -> (Option<SignTest>, usize) {
    let pairs: Vec<(String, f64, f64)> = r
        .datasets
        .iter()
        .filter(|d| !exclude.contains(&d.group))
        .filter_map(|d| base.get(&d.dataset).map(|b| (d.dataset.clone(), d.kfold_auc, b.kfold_auc)))
        .collect();
    let n = pairs.len();
    let (keys, (a, b)): (Vec<_>, (Vec<_>, Vec<_>)) = pairs.into_iter().map(|(k, a, b)| (k, (a, b))).unzip();
    let sign = PairedSample::new(keys, a, b).ok().and_then(|p| sign_test_wilson(&p, Z_95).ok());
    (sign, n)
}

/// Model × group medians, the enrichment grid, and a sign test of every
/// model against `baseline`. The baseline, if given, is the last row.
pub fn build_report(reports: &[EvalReport], baseline: Option<&EvalReport>, exclude: &[Group]) -> Result<ReportTables, CliError> {
    let all: Vec<&EvalReport> = reports.iter().chain(baseline).collect();
    if all.is_empty() {
        return Err(CliError::Usage("report needs at least one evaluation report".into()));
    }
    let mut groups: Vec<Group> =
        all.iter().flat_map(|r| r.datasets.iter().map(|d| d.group)).filter(|g| !exclude.contains(g)).collect();
    groups.sort();
    groups.dedup();
    if groups.is_empty() {
        return Err(CliError::Usage("no datasets left after group exclusion".into()));
    }
    let columns: Vec<String> = groups.iter().map(|g| g.name().to_string()).chain(["ALL".to_string()]).collect();

    let mut auc = Vec::new();
    let mut enrichment = Vec::new();
    for (i, r) in all.iter().enumerate() {
        let is_baseline = baseline.is_some() && i + 1 == all.len();
        let (sign, paired) = match baseline {
            Some(b) if !is_baseline => sign_against(r, b, exclude),
            _ => (None, 0),
        };
        auc.push(ModelRow {
            model: r.model.clone(),
            medians: column_medians(r, &columns, exclude, |d| r.datasets[d].kfold_auc),
            sign,
            paired,
        });
        for (j, &fpr) in ENRICHMENT_FPRS.iter().enumerate() {
            enrichment.push(EnrichmentRow {
                model: r.model.clone(),
                fpr,
                medians: column_medians(r, &columns, exclude, |d| r.datasets[d].enrichment[j].1),
            });
        }
    }
    Ok(ReportTables { columns, baseline: baseline.map(|b| b.model.clone()), auc, enrichment, excluded: exclude.to_vec() })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

impl ReportTables {
    /// Plain-text rendering with three decimals.
    pub fn render(&self) -> String {
        let w = self.auc.iter().map(|r| r.model.len()).max().unwrap_or(0).max(5);
        let mut out = String::new();
        if !self.excluded.is_empty() {
            let names: Vec<&str> = self.excluded.iter().map(|g| g.name()).collect();
            writeln!(out, "excluded groups: {}", names.join(", ")).unwrap();
        }
        writeln!(out, "Median K-fold-average AUC").unwrap();
        write!(out, "{:<w$}", "model").unwrap();
        for c in &self.columns {
            write!(out, " {c:>7}").unwrap();
        }
        if let Some(b) = &self.baseline {
            write!(out, "  superior to {b} (95% Wilson CI)").unwrap();
        }
        out.push('\n');
        for row in &self.auc {
            write!(out, "{:<w$}", row.model).unwrap();
            for m in &row.medians {
                write!(out, " {:>7}", cell(*m)).unwrap();
            }
            if self.baseline.is_some() {
                match (&row.sign, row.paired) {
                    (Some(s), _) => write!(
                        out,
                        "  {:.3} [{:.3}, {:.3}] n={}",
                        s.fraction,
                        s.ci.0,
                        s.ci.1,
                        s.wins + s.losses
                    )
                    .unwrap(),
                    (None, 0) if Some(&row.model) == self.baseline.as_ref() => out.push_str("  reference"),
                    (None, n) => write!(out, "  - n={n}").unwrap(),
                }
            }
            out.push('\n');
        }
        writeln!(out, "\nMedian ROC enrichment").unwrap();
        write!(out, "{:<w$} {:>5}", "model", "fpr").unwrap();
        for c in &self.columns {
            write!(out, " {c:>7}").unwrap();
        }
        out.push('\n');
        for row in &self.enrichment {
            write!(out, "{:<w$} {:>4}%", row.model, row.fpr * 100.0).unwrap();
            for m in &row.medians {
                write!(out, " {:>7}", cell(*m)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}
