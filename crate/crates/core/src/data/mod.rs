//! Labeled datasets, collections of datasets, fold assignment and the
//! dataset-similarity quantities used by the analyses.

mod folds;
mod manifest;
mod sampling;
mod similarity;
mod synth;

pub use folds::{stratified_kfold, FoldAssignment};
pub use manifest::{
    load_collection, write_collection, DatasetEntry, DatasetFormat, FailureReport, GroupFailures,
    LoadedCollection, Manifest,
};
pub use sampling::sample_nested;
pub use similarity::{active_occurrence_rate, intersection_matrix, AorSummary};
pub use synth::{synth_collection, Sharing, SynthConfig};

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chem::Fingerprint;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Csv { path: PathBuf, line: u64, message: String },
    #[error("invalid manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("dataset {dataset}: duplicate compound id {compound}")]
    DuplicateCompound { dataset: String, compound: String },
    #[error("unknown dataset {0}")]
    UnknownDataset(String),
    #[error("dataset {0} has no actives")]
    NoActives(String),
    #[error("invalid fold request: {0}")]
    Folds(String),
    #[error("invalid sampling request: {0}")]
    Sampling(String),
    #[error("infeasible synthetic collection: {0}")]
    Infeasible(String),
    #[error("invalid collection: {0}")]
    Invalid(String),
}

/// Dataset groups of the screening collection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Group {
    Pcba,
    Muv,
    Dude,
    Tox21,
    Synth,
}

impl Group {
    pub fn name(self) -> &'static str {
        match self {
            Group::Pcba => "PCBA",
            Group::Muv => "MUV",
            Group::Dude => "DUDE",
            Group::Tox21 => "TOX21",
            Group::Synth => "SYNTH",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "").as_str() {
            "PCBA" => Ok(Group::Pcba),
            "MUV" => Ok(Group::Muv),
            "DUDE" => Ok(Group::Dude),
            "TOX21" | "TOX" => Ok(Group::Tox21),
            "SYNTH" => Ok(Group::Synth),
            _ => Err(DataError::Invalid(format!("unknown dataset group {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub compound_id: String,
    pub fingerprint: Fingerprint,
    pub label: bool,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub id: String,
    pub group: Group,
    pub target_class: String,
    pub target: String,
    pub records: Vec<Record>,
    pub duplicate_target: bool,
}

impl Dataset {
    pub fn n_actives(&self) -> usize {
        self.records.iter().filter(|r| r.label).count()
    }

    pub fn n_inactives(&self) -> usize {
        self.records.len() - self.n_actives()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.records.iter().map(|r| r.label).collect()
    }

    /// Checks that the dataset can be used for training: unique compound
    /// ids, positive weights, and both classes present.
    pub fn validate_for_training(&self) -> Result<(), DataError> {
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert(r.compound_id.as_str()) {
                return Err(DataError::DuplicateCompound {
                    dataset: self.id.clone(),
                    compound: r.compound_id.clone(),
                });
            }
            if !(r.weight > 0.0 && r.weight.is_finite()) {
                return Err(DataError::Invalid(format!(
                    "dataset {}: record {} has non-positive weight",
                    self.id, r.compound_id
                )));
            }
        }
        if self.n_actives() == 0 {
            return Err(DataError::NoActives(self.id.clone()));
        }
        if self.n_inactives() == 0 {
            return Err(DataError::Invalid(format!("dataset {} has no inactives", self.id)));
        }
        Ok(())
    }
}

/// How compounds are matched across datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// Datasets share one compound-id namespace.
    #[default]
    CompoundId,
    /// Namespaces differ; compounds are matched on fingerprint bytes.
    Fingerprint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Collection {
    pub datasets: Vec<Dataset>,
    pub held_in: Vec<String>,
    pub held_out: Vec<String>,
    pub identity: Identity,
}

impl Collection {
    pub fn new(datasets: Vec<Dataset>) -> Self {
        Collection { datasets, held_in: Vec::new(), held_out: Vec::new(), identity: Identity::CompoundId }
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.datasets.iter().position(|d| d.id == id)
    }

    pub fn dataset(&self, id: &str) -> Result<&Dataset, DataError> {
        self.datasets
            .iter()
            .find(|d| d.id == id)
            .ok_or_else(|| DataError::UnknownDataset(id.to_string()))
    }

    pub fn ids(&self) -> Vec<String> {
        self.datasets.iter().map(|d| d.id.clone()).collect()
    }

    pub fn nbits(&self) -> Option<usize> {
        self.datasets.iter().flat_map(|d| d.records.first()).map(|r| r.fingerprint.nbits()).next()
    }

    /// Key identifying a compound across datasets.
    pub fn compound_key(&self, record: &Record) -> String {
        match self.identity {
            Identity::CompoundId => record.compound_id.clone(),
            Identity::Fingerprint => record.fingerprint.to_hex(),
        }
    }

    /// Checks id uniqueness, the held-in/held-out contract and fingerprint
    /// length consistency.
    pub fn validate(&self) -> Result<(), DataError> {
        let mut ids = HashSet::new();
        for d in &self.datasets {
            if !ids.insert(d.id.as_str()) {
                return Err(DataError::Invalid(format!("duplicate dataset id {}", d.id)));
            }
        }
        for id in self.held_in.iter().chain(&self.held_out) {
            if !ids.contains(id.as_str()) {
                return Err(DataError::UnknownDataset(id.clone()));
            }
        }
        if let Some(id) = self.held_in.iter().find(|id| self.held_out.contains(id)) {
            return Err(DataError::Invalid(format!("{id} is both held-in and held-out")));
        }
        let mut nbits = None;
        for r in self.datasets.iter().flat_map(|d| &d.records) {
            match nbits {
                None => nbits = Some(r.fingerprint.nbits()),
                Some(n) if n != r.fingerprint.nbits() => {
                    return Err(DataError::Invalid("fingerprint lengths differ across records".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// A copy without the datasets of the given groups.
    pub fn excluding_groups(&self, groups: &[Group]) -> Collection {
        let keep = |id: &String| {
            self.datasets.iter().any(|d| &d.id == id && !groups.contains(&d.group))
        };
        Collection {
            datasets: self.datasets.iter().filter(|d| !groups.contains(&d.group)).cloned().collect(),
            held_in: self.held_in.iter().filter(|id| keep(id)).cloned().collect(),
            held_out: self.held_out.iter().filter(|id| keep(id)).cloned().collect(),
            identity: self.identity,
        }
    }
}
