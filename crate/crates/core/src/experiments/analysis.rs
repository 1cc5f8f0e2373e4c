use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::data::{active_occurrence_rate, Collection, Group};
use crate::metrics::{delta_log_odds, EvalReport};
use crate::stats::{
    notch_interval, ols, sign_test_wilson, welch_t_test, Notch, PairedSample, Regression, Sides, TestRecord, Z_95,
};

/// Target classes with fewer members are pooled.
pub const MIN_CLASS_SIZE: usize = 5;
pub const MISCELLANEOUS: &str = "miscellaneous";

/// Per-dataset comparison of a multitask and a single-task report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub dataset: String,
    pub group: Group,
    pub multitask_auc: f64,
    pub single_task_auc: f64,
    pub delta_log_odds: f64,
}

/// Pairs the two reports dataset by dataset, skipping `exclude` groups.
pub fn compare_reports(mt: &EvalReport, st: &EvalReport, exclude: &[Group]) -> Result<Vec<Comparison>, ExperimentError> {
    if mt.datasets.len() != st.datasets.len() {
        return Err(ExperimentError::Invalid(format!(
            "reports cover {} and {} datasets",
            mt.datasets.len(),
            st.datasets.len()
        )));
    }
    mt.datasets
        .iter()
        .filter(|m| !exclude.contains(&m.group))
        .map(|m| {
            let s = st
                .get(&m.dataset)
                .ok_or_else(|| ExperimentError::Invalid(format!("{} missing from {}", m.dataset, st.model)))?;
            Ok(Comparison {
                dataset: m.dataset.clone(),
                group: m.group,
                multitask_auc: m.kfold_auc,
                single_task_auc: s.kfold_auc,
                delta_log_odds: delta_log_odds(m.kfold_auc, s.kfold_auc),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AorRow {
    pub dataset: String,
    pub group: Group,
    pub aor: f64,
    pub aor_std: f64,
    pub delta_log_odds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AorAnalysis {
    pub rows: Vec<AorRow>,
    /// OLS of Δ log-odds on AOR.
    pub regression: Regression,
    pub excluded: Vec<Group>,
}

impl AorAnalysis {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,group,aor,aor_std,delta_log_odds\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.dataset, r.group.name(), r.aor, r.aor_std, r.delta_log_odds));
        }
        out
    }
}

/// Active occurrence rate against the multitask improvement in log-odds
/// AUC. Excluded groups are dropped from the rows and from the AOR counts.
pub fn run_aor_analysis(
    mt: &EvalReport,
    st: &EvalReport,
    c: &Collection,
    exclude: &[Group],
) -> Result<AorAnalysis, ExperimentError> {
    let rows: Vec<AorRow> = compare_reports(mt, st, exclude)?
        .into_iter()
        .map(|cmp| {
            let aor = active_occurrence_rate(c, &cmp.dataset, exclude)?;
            Ok(AorRow { dataset: cmp.dataset, group: cmp.group, aor: aor.mean, aor_std: aor.std, delta_log_odds: cmp.delta_log_odds })
        })
        .collect::<Result<_, ExperimentError>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.aor).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.delta_log_odds).collect();
    let regression = ols(&x, &y)?;
    Ok(AorAnalysis { rows, regression, excluded: exclude.to_vec() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class: String,
    pub members: Vec<String>,
    pub mean: f64,
    pub notch: Notch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDuplicateAnalysis {
    pub classes: Vec<ClassRow>,
    pub duplicate: Vec<Comparison>,
    pub unique: Vec<Comparison>,
    /// One-sided Welch test of duplicate Δ log-odds above unique Δ.
    pub duplicate_vs_unique: Option<TestRecord>,
    /// Sign test of single-task over multitask within each subset.
    pub sign_duplicate: Option<TestRecord>,
    pub sign_unique: Option<TestRecord>,
    pub notices: Vec<String>,
}

/// Groups class names, pooling classes with fewer than
/// [`MIN_CLASS_SIZE`] members into [`MISCELLANEOUS`].
pub fn merge_small_classes(classes: &[(String, String)]) -> BTreeMap<String, Vec<String>> {
    let mut by_class: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (dataset, class) in classes {
        by_class.entry(class.clone()).or_default().push(dataset.clone());
    }
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (class, members) in by_class {
        let key = if members.len() < MIN_CLASS_SIZE { MISCELLANEOUS.to_string() } else { class };
        out.entry(key).or_default().extend(members);
    }
    out
}

fn sign_record(subset: &[Comparison]) -> Option<TestRecord> {
    // "wins" count datasets where single-task is better
    let paired = PairedSample::new(
        subset.iter().map(|s| s.dataset.clone()).collect(),
        subset.iter().map(|s| s.single_task_auc).collect(),
        subset.iter().map(|s| s.multitask_auc).collect(),
    )
    .ok()?;
    sign_test_wilson(&paired, Z_95).ok().map(|t| TestRecord::sign(&t))
}

/// Δ log-odds AUC per target class, and duplicated against unique targets.
pub fn run_class_and_duplicate_analysis(
    mt: &EvalReport,
    st: &EvalReport,
    c: &Collection,
    exclude: &[Group],
) -> Result<ClassDuplicateAnalysis, ExperimentError> {
    let comparisons = compare_reports(mt, st, exclude)?;
    let mut meta = Vec::with_capacity(comparisons.len());
    for cmp in &comparisons {
        let d = c.dataset(&cmp.dataset)?;
        if d.target_class.is_empty() {
            return Err(ExperimentError::Invalid(format!("{} has no target class", d.id)));
        }
        meta.push((cmp.dataset.clone(), d.target_class.clone(), d.duplicate_target));
    }
    let delta_of: BTreeMap<&str, f64> = comparisons.iter().map(|c| (c.dataset.as_str(), c.delta_log_odds)).collect();
    let pairs: Vec<(String, String)> = meta.iter().map(|(d, cl, _)| (d.clone(), cl.clone())).collect();
    let classes = merge_small_classes(&pairs)
        .into_iter()
        .map(|(class, members)| {
            let values: Vec<f64> = members.iter().map(|m| delta_of[m.as_str()]).collect();
            let notch = notch_interval(&values)?;
            Ok(ClassRow { class, mean: values.iter().sum::<f64>() / values.len() as f64, members, notch })
        })
        .collect::<Result<_, ExperimentError>>()?;

    let (mut duplicate, mut unique) = (Vec::new(), Vec::new());
    for (cmp, m) in comparisons.into_iter().zip(&meta) {
        if m.2 {
            duplicate.push(cmp);
        } else {
            unique.push(cmp);
        }
    }
    let mut notices = Vec::new();
    let dv: Vec<f64> = duplicate.iter().map(|d| d.delta_log_odds).collect();
    let uv: Vec<f64> = unique.iter().map(|d| d.delta_log_odds).collect();
    let duplicate_vs_unique = if duplicate.is_empty() {
        notices.push("no duplicated targets: duplicate-vs-unique test skipped".to_string());
        None
    } else {
        match welch_t_test(&dv, &uv, Sides::One) {
            Ok(t) => Some(TestRecord::t_test("welch_t_duplicate_gt_unique", &t, dv.len() + uv.len())),
            Err(e) => {
                notices.push(format!("duplicate-vs-unique test skipped: {e}"));
                None
            }
        }
    };
    Ok(ClassDuplicateAnalysis {
        classes,
        sign_duplicate: sign_record(&duplicate),
        sign_unique: sign_record(&unique),
        duplicate,
        unique,
        duplicate_vs_unique,
        notices,
    })
}
