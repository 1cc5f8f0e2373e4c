use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::cv::{cv_multitask, cv_single_task, fold_table, TrainSpec};
use super::study::{spec_hash, StudyResult, MEAN_DELTA_AUC};
use super::{dataset_indices, ExperimentError};
use crate::data::Collection;
use crate::metrics::EvalReport;
use crate::net::MultitaskNetwork;
use crate::seed;
use crate::stats::{ols, Regression};

/// Size of a training collection: a task count, or every available task.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rung {
    Tasks(usize),
    All,
}

impl Serialize for Rung {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Rung::Tasks(n) => s.serialize_u64(*n as u64),
            Rung::All => s.serialize_str("all"),
        }
    }
}

impl<'de> Deserialize<'de> for Rung {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Ok(Rung::Tasks(n)),
            Raw::Word(w) if w == "all" => Ok(Rung::All),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("rung must be a count or \"all\", got {w:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GrowthCurveSpec {
    /// Evaluated tasks, present at every rung. Empty means the
    /// collection's held-in list.
    pub held_in: Vec<String>,
    pub ladder: Vec<Rung>,
    pub n_runs: usize,
    pub folds: usize,
    pub train: TrainSpec,
    pub seed: u64,
}

impl Default for GrowthCurveSpec {
    fn default() -> Self {
        GrowthCurveSpec {
            held_in: Vec::new(),
            ladder: vec![Rung::Tasks(10), Rung::Tasks(20), Rung::Tasks(40), Rung::Tasks(80), Rung::Tasks(160), Rung::All],
            n_runs: 10,
            folds: 5,
            train: TrainSpec::default(),
            seed: seed::DEFAULT_SEED,
        }
    }
}

/// Fold-0 network of one (run, rung) cell, kept as a transfer source.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub run: usize,
    pub rung: usize,
    /// Ids of the tasks the network was trained on.
    pub tasks: Vec<String>,
    pub network: MultitaskNetwork,
}

#[derive(Debug, Clone)]
pub struct GrowthCurveOutcome {
    pub result: StudyResult,
    pub baseline: EvalReport,
    pub checkpoints: Vec<Checkpoint>,
}

/// Turns a ladder into increasing task counts for `held` evaluated tasks
/// and `available` tasks overall. Counts above `available` are dropped.
pub fn resolve_ladder(ladder: &[Rung], held: usize, available: usize) -> Result<(Vec<usize>, Vec<String>), ExperimentError> {
    let mut notes = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for (i, r) in ladder.iter().enumerate() {
        let n = match *r {
            Rung::All if i + 1 != ladder.len() => {
                return Err(ExperimentError::Invalid("\"all\" must be the last rung".into()))
            }
            Rung::All => available,
            Rung::Tasks(n) if n > available => {
                notes.push(format!("rung {n} dropped: only {available} tasks available"));
                continue;
            }
            Rung::Tasks(n) => n,
        };
        if let Some(&prev) = counts.last() {
            if n < prev || (n == prev && *r != Rung::All) {
                return Err(ExperimentError::Invalid(format!("ladder must increase: {ladder:?}")));
            }
            if n == prev {
                continue;
            }
        }
        counts.push(n);
    }
    match counts.first() {
        Some(&first) if first == held => Ok((counts, notes)),
        Some(&first) => Err(ExperimentError::Invalid(format!("first rung {first} must equal the {held} held-in tasks"))),
        None => Err(ExperimentError::Invalid("empty ladder".into())),
    }
}

/// Held-in ids of a spec, falling back to the collection's list.
pub(crate) fn held_in_of(spec_ids: &[String], c: &Collection) -> Result<Vec<usize>, ExperimentError> {
    let ids = if spec_ids.is_empty() { &c.held_in } else { spec_ids };
    if ids.is_empty() {
        return Err(ExperimentError::Invalid("no held-in tasks".into()));
    }
    dataset_indices(c, ids)
}

/// Tasks that may be added to the held-in set: everything except the
/// held-in and held-out tasks.
pub(crate) fn addable(c: &Collection, held_in: &[usize]) -> Vec<usize> {
    (0..c.datasets.len()).filter(|i| !held_in.contains(i) && !c.held_out.contains(&c.datasets[*i].id)).collect()
}

/// Growth-curve study: multitask networks on cumulative random supersets
/// of the held-in tasks, compared with seed-paired single-task networks on
/// each held-in task.
pub fn run_growth_curve(spec: &GrowthCurveSpec, c: &Collection) -> Result<GrowthCurveOutcome, ExperimentError> {
    if spec.n_runs == 0 {
        return Err(ExperimentError::Invalid("n_runs must be positive".into()));
    }
    let held = held_in_of(&spec.held_in, c)?;
    let candidates = addable(c, &held);
    let (rungs, notes) = resolve_ladder(&spec.ladder, held.len(), held.len() + candidates.len())?;
    let folds = fold_table(c, spec.folds, spec.seed)?;
    let baseline = cv_single_task(c, &folds, &held, &spec.train, spec.seed, "pstnn")?;

    let orders: Vec<Vec<usize>> = (0..spec.n_runs)
        .map(|run| {
            let mut order = candidates.clone();
            order.shuffle(&mut seed::rng_for(spec.seed, "growth/order", run as u64));
            order
        })
        .collect();
    let task_set = |run: usize, n: usize| -> Vec<usize> {
        held.iter().copied().chain(orders[run][..n - held.len()].iter().copied()).collect()
    };
    // the held-in-only rung is the same network in every run
    let cells: Vec<(usize, usize)> =
        (0..spec.n_runs).flat_map(|run| rungs.iter().map(move |&n| (run, n))).filter(|&(run, n)| run == 0 || n > held.len()).collect();
    let trained: Vec<(EvalReport, MultitaskNetwork)> = cells
        .par_iter()
        .map(|&(run, n)| {
            let (report, mut nets) = cv_multitask(c, &folds, &task_set(run, n), &held, &spec.train, spec.seed, "pmtnn")?;
            Ok((report, nets.swap_remove(0)))
        })
        .collect::<Result<_, ExperimentError>>()?;

    let mut result = StudyResult::new("growth_curve", spec_hash(spec), spec.seed);
    result.notes = notes;
    let mut checkpoints = Vec::new();
    for run in 0..spec.n_runs {
        for &n in &rungs {
            let i = cells.iter().position(|&cell| cell == (if n == held.len() { 0 } else { run }, n)).expect("cell trained");
            let (report, net) = &trained[i];
            for ev in &report.datasets {
                let base = baseline.get(&ev.dataset).expect("same datasets").kfold_auc;
                result.push_cell(run, n, None, &ev.dataset, &ev.fold_auc, ev.kfold_auc, base);
            }
            let tasks = task_set(run, n).iter().map(|&d| c.datasets[d].id.clone()).collect();
            checkpoints.push(Checkpoint { run, rung: n, tasks, network: net.clone() });
        }
    }
    result.finalize();
    if let Ok(reg) = rung_slope(&result) {
        let (lo, hi) = reg.slope_ci(0.95);
        result.summary.insert(
            "rung_slope".into(),
            serde_json::json!({ "slope": reg.slope, "ci95": [lo, hi], "r2": reg.r2, "n": reg.n, "x": "log2(tasks)" }),
        );
    }
    Ok(GrowthCurveOutcome { result, baseline, checkpoints })
}

/// OLS of per-run mean ΔAUC on log2 of the rung's task count.
pub fn rung_slope(result: &StudyResult) -> Result<Regression, ExperimentError> {
    let means = result.run_means(MEAN_DELTA_AUC);
    let x: Vec<f64> = means.iter().map(|m| (m.1 as f64).log2()).collect();
    let y: Vec<f64> = means.iter().map(|m| m.3).collect();
    Ok(ols(&x, &y)?)
}
