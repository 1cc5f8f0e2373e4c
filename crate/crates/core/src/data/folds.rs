use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};
use crate::seed;

/// Fold index of every record of one dataset, in record order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub dataset_id: String,
    pub k: usize,
    pub fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.fold_of.iter().enumerate().filter(|(_, &f)| f == fold).map(|(i, _)| i).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.fold_of.iter().enumerate().filter(|(_, &f)| f != fold).map(|(i, _)| i).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified K-fold split.
///
/// Actives and inactives are shuffled independently and dealt round-robin
/// over the folds; the inactives continue from the fold after the last
/// active so fold sizes stay within one record of each other. Different
/// datasets get independent shuffles for the same seed.
pub fn stratified_kfold(d: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment, DataError> {
    if k < 2 {
        return Err(DataError::Folds(format!("K must be at least 2, got {k}")));
    }
    if k > d.records.len() {
        return Err(DataError::Folds(format!(
            "K = {k} exceeds the {} records of {}",
            d.records.len(),
            d.id
        )));
    }
    let mut rng = seed::rng_for(seed, &format!("kfold/{}", d.id), k as u64);
    let mut actives: Vec<usize> = (0..d.records.len()).filter(|&i| d.records[i].label).collect();
    let mut inactives: Vec<usize> = (0..d.records.len()).filter(|&i| !d.records[i].label).collect();
    if actives.len() < k {
        log::warn!("dataset {} has {} actives for {k} folds", d.id, actives.len());
    }
    actives.shuffle(&mut rng);
    inactives.shuffle(&mut rng);

    let mut fold_of = vec![0; d.records.len()];
    for (j, &i) in actives.iter().enumerate() {
        fold_of[i] = j % k;
    }
    let offset = actives.len() % k;
    for (j, &i) in inactives.iter().enumerate() {
        fold_of[i] = (offset + j) % k;
    }
    Ok(FoldAssignment { dataset_id: d.id.clone(), k, fold_of })
}
