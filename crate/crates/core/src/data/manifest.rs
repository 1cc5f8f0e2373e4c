//! Manifest-driven loading of dataset collections.
//!
//! A manifest is a JSON document:
//!
//! ```json
//! {
//!   "identity": "compound_id",
//!   "radius": 2,
//!   "nbits": 1024,
//!   "held_in": ["pcba-aid899"],
//!   "held_out": [],
//!   "datasets": [
//!     {"id": "pcba-aid899", "group": "PCBA", "target_class": "other enzyme",
//!      "target": "CYP2C19", "path": "pcba-aid899.csv", "duplicate_target": false}
//!   ]
//! }
//! ```
//!
//! Dataset paths are relative to the manifest. SMILES datasets have the
//! header `compound_id,smiles,label`; pre-featurized datasets
//! (`"format": "fingerprint"`) use `compound_id,fingerprint,label` with a
//! hex-encoded fingerprint. Labels are `0`/`1`; the words `active`,
//! `inactive` and `inconclusive` are also accepted, and inconclusive counts
//! as inactive.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Collection, DataError, Dataset, Group, Identity, Record};
use crate::chem::{ecfp, parse_smiles, Fingerprint, DEFAULT_NBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    #[default]
    Smiles,
    Fingerprint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub id: String,
    pub group: Group,
    #[serde(default)]
    pub target_class: String,
    #[serde(default)]
    pub target: String,
    pub path: PathBuf,
    #[serde(default)]
    pub duplicate_target: bool,
    #[serde(default)]
    pub format: DatasetFormat,
}

fn default_radius() -> u32 {
    2
}

fn default_nbits() -> usize {
    DEFAULT_NBITS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub identity: Identity,
    #[serde(default = "default_radius")]
    pub radius: u32,
    #[serde(default = "default_nbits")]
    pub nbits: usize,
    #[serde(default)]
    pub held_in: Vec<String>,
    #[serde(default)]
    pub held_out: Vec<String>,
    pub datasets: Vec<DatasetEntry>,
}

/// Featurization tallies for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetFailures {
    pub dataset: String,
    pub group: Group,
    pub original: usize,
    pub featurized: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupFailures {
    pub group: Group,
    pub original: usize,
    pub featurized: usize,
    /// Percentage of rows that failed featurization.
    pub failure_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FailureReport {
    pub datasets: Vec<DatasetFailures>,
}

impl FailureReport {
    pub fn by_group(&self) -> Vec<GroupFailures> {
        let mut acc: BTreeMap<Group, (usize, usize)> = BTreeMap::new();
        for d in &self.datasets {
            let e = acc.entry(d.group).or_default();
            e.0 += d.original;
            e.1 += d.featurized;
        }
        acc.into_iter()
            .map(|(group, (original, featurized))| GroupFailures {
                group,
                original,
                featurized,
                failure_rate: if original == 0 {
                    0.0
                } else {
                    100.0 * (original - featurized) as f64 / original as f64
                },
            })
            .collect()
    }

    pub fn total(&self) -> (usize, usize) {
        self.datasets.iter().fold((0, 0), |(o, f), d| (o + d.original, f + d.featurized))
    }
}

#[derive(Debug, Clone)]
pub struct LoadedCollection {
    pub collection: Collection,
    pub failures: FailureReport,
}

pub(crate) fn parse_label(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "1" | "active" => Some(true),
        "0" | "inactive" | "inconclusive" => Some(false),
        _ => None,
    }
}

/// Loads and featurizes every dataset named by the manifest. Rows whose
/// SMILES fail to parse are logged and excluded; malformed rows are errors.
pub fn load_collection(manifest_path: &Path) -> Result<LoadedCollection, DataError> {
    let text = fs::read_to_string(manifest_path)
        .map_err(|source| DataError::Io { path: manifest_path.to_path_buf(), source })?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| DataError::Manifest {
        path: manifest_path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    if Fingerprint::new(manifest.nbits).is_err() {
        return Err(DataError::Manifest {
            path: manifest_path.to_path_buf(),
            message: format!("nbits {} is not a power of two", manifest.nbits),
        });
    }

    let loaded: Vec<Result<(Dataset, DatasetFailures), DataError>> = {
        use rayon::prelude::*;
        manifest.datasets.par_iter().map(|entry| load_dataset(base, entry, &manifest)).collect()
    };
    let mut datasets = Vec::new();
    let mut failures = FailureReport::default();
    for item in loaded {
        let (d, f) = item?;
        datasets.push(d);
        failures.datasets.push(f);
    }
    let collection = Collection {
        datasets,
        held_in: manifest.held_in.clone(),
        held_out: manifest.held_out.clone(),
        identity: manifest.identity,
    };
    collection.validate().map_err(|e| DataError::Manifest {
        path: manifest_path.to_path_buf(),
        message: e.to_string(),
    })?;
    for g in failures.by_group() {
        log::info!(
            "{}: featurized {}/{} ({:.2}% failed)",
            g.group,
            g.featurized,
            g.original,
            g.failure_rate
        );
    }
    Ok(LoadedCollection { collection, failures })
}

fn load_dataset(
    base: &Path,
    entry: &DatasetEntry,
    manifest: &Manifest,
) -> Result<(Dataset, DatasetFailures), DataError> {
    let path = base.join(&entry.path);
    let file = fs::File::open(&path).map_err(|source| DataError::Io { path: path.clone(), source })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let csv_err = |line: u64, message: String| DataError::Csv { path: path.clone(), line, message };

    let headers = reader.headers().map_err(|e| csv_err(1, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let feature_col = match entry.format {
        DatasetFormat::Smiles => "smiles",
        DatasetFormat::Fingerprint => "fingerprint",
    };
    let (Some(id_col), Some(feat_col), Some(label_col)) = (col("compound_id"), col(feature_col), col("label"))
    else {
        return Err(csv_err(1, format!("header must contain compound_id,{feature_col},label")));
    };

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut original = 0;
    for row in reader.records() {
        let row = row.map_err(|e| csv_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = row.position().map_or(0, |p| p.line());
        original += 1;
        let field = |i: usize| row.get(i).ok_or_else(|| csv_err(line, format!("missing column {i}")));
        let compound_id = field(id_col)?.trim().to_string();
        if compound_id.is_empty() {
            return Err(csv_err(line, "empty compound_id".into()));
        }
        if !seen.insert(compound_id.clone()) {
            return Err(DataError::DuplicateCompound { dataset: entry.id.clone(), compound: compound_id });
        }
        let raw_label = field(label_col)?;
        let label = parse_label(raw_label).ok_or_else(|| csv_err(line, format!("bad label {raw_label:?}")))?;
        let raw = field(feat_col)?.trim();
        let fingerprint = match entry.format {
            DatasetFormat::Smiles => match parse_smiles(raw).and_then(|m| ecfp(&m, manifest.radius, manifest.nbits)) {
                Ok(fp) => fp,
                Err(e) => {
                    log::debug!("{}: {compound_id}: featurization failed: {e}", entry.id);
                    continue;
                }
            },
            DatasetFormat::Fingerprint => {
                Fingerprint::from_hex(manifest.nbits, raw).map_err(|e| csv_err(line, e.to_string()))?
            }
        };
        records.push(Record { compound_id, fingerprint, label, weight: 1.0 });
    }
    let featurized = records.len();
    let dataset = Dataset {
        id: entry.id.clone(),
        group: entry.group,
        target_class: entry.target_class.clone(),
        target: entry.target.clone(),
        records,
        duplicate_target: entry.duplicate_target,
    };
    let failures = DatasetFailures { dataset: entry.id.clone(), group: entry.group, original, featurized };
    Ok((dataset, failures))
}

/// Writes a collection as a manifest plus one fingerprint CSV per dataset.
pub fn write_collection(collection: &Collection, dir: &Path) -> Result<PathBuf, DataError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| DataError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let nbits = collection.nbits().unwrap_or(DEFAULT_NBITS);
    let mut entries = Vec::new();
    for d in &collection.datasets {
        let file = format!("{}.csv", d.id);
        let path = dir.join(&file);
        let mut w = csv::Writer::from_path(&path).map_err(|e| DataError::Csv {
            path: path.clone(),
            line: 0,
            message: e.to_string(),
        })?;
        let werr = |e: csv::Error| DataError::Csv { path: path.clone(), line: 0, message: e.to_string() };
        w.write_record(["compound_id", "fingerprint", "label"]).map_err(werr)?;
        for r in &d.records {
            w.write_record([r.compound_id.as_str(), &r.fingerprint.to_hex(), if r.label { "1" } else { "0" }])
                .map_err(werr)?;
        }
        w.flush().map_err(io(&path))?;
        entries.push(DatasetEntry {
            id: d.id.clone(),
            group: d.group,
            target_class: d.target_class.clone(),
            target: d.target.clone(),
            path: PathBuf::from(file),
            duplicate_target: d.duplicate_target,
            format: DatasetFormat::Fingerprint,
        });
    }
    let manifest = Manifest {
        identity: collection.identity,
        radius: 2,
        nbits,
        held_in: collection.held_in.clone(),
        held_out: collection.held_out.clone(),
        datasets: entries,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(io(&path))?;
    Ok(path)
}
