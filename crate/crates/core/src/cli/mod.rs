//! Command-line workflows behind the `mtscreen` binary.
//!
//! Every flag can also be set through an environment variable named
//! `MTSCREEN_<FLAG>` (for example `MTSCREEN_THREADS=1`). A `--config` JSON
//! file overrides fields of the subcommand's spec; `--seed` and `--folds`
//! override the file. The effective settings are printed to stderr before
//! any work starts.

mod report;

pub use report::{build_report, EnrichmentRow, ModelRow, ReportTables};

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::chem::{featurize_batch, DEFAULT_NBITS};
use crate::data::{load_collection, synth_collection, write_collection, Collection, DataError, Group, SynthConfig};
use crate::experiments::{
    cv_multitask, cv_single_task, fold_table, net_seed, run_aor_analysis, run_class_and_duplicate_analysis,
    run_growth_curve, run_tasks_vs_data, run_transfer, training_rows, Checkpoint, ExperimentError, GrowthCurveSpec,
    TasksVsDataSpec, TrainSpec, TransferSpec,
};
use crate::metrics::{EvalReport, MetricsError};
use crate::net::{load_checkpoint, save_checkpoint, train, write_learning_curve, MultitaskNetwork, NetError, TrainingSet};
use crate::seed::DEFAULT_SEED;
use crate::stats::StatsError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 1 usage, 2 data, 3 numeric failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 1,
            CliError::Data(_) | CliError::Io { .. } => 2,
            CliError::Net(e) => net_code(e),
            CliError::Metrics(e) => metrics_code(e),
            CliError::Stats(_) => 3,
            CliError::Experiment(e) => match e {
                ExperimentError::Invalid(_) => 1,
                ExperimentError::Data(_) | ExperimentError::Io { .. } => 2,
                ExperimentError::Net(e) => net_code(e),
                ExperimentError::Metrics(e) => metrics_code(e),
                ExperimentError::Stats(_) => 3,
            },
        }
    }
}

fn net_code(e: &NetError) -> u8 {
    match e {
        NetError::Config(_) | NetError::Shape(_) => 1,
        NetError::NonFinite(_) | NetError::DeadTopLayer { .. } => 3,
        _ => 2,
    }
}

fn metrics_code(e: &MetricsError) -> u8 {
    match e {
        MetricsError::NonFinite => 3,
        _ => 2,
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

#[derive(Debug, Parser)]
#[command(name = "mtscreen", version, about = "Multitask neural networks for virtual screening")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Full-scale network and step budget: (2000, 100), lr 0.0003, 500
    /// epochs plus 3M steps.
    Full,
    /// Small network and short schedule for synthetic collections.
    Desk,
}

impl Preset {
    pub fn train_spec(self) -> TrainSpec {
        match self {
            Preset::Full => TrainSpec::full(),
            Preset::Desk => TrainSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Collection manifest (JSON).
    #[arg(long, global = true, env = "MTSCREEN_MANIFEST")]
    pub manifest: Option<PathBuf>,
    /// JSON overrides for the subcommand's spec.
    #[arg(long, global = true, env = "MTSCREEN_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output directory (output file for `featurize`).
    #[arg(long, global = true, env = "MTSCREEN_OUT")]
    pub out: Option<PathBuf>,
    /// Master seed [default: 20150206].
    #[arg(long, global = true, env = "MTSCREEN_SEED")]
    pub seed: Option<u64>,
    /// Worker threads for every internal pool; 1 is the determinism
    /// reference.
    #[arg(long, global = true, env = "MTSCREEN_THREADS")]
    pub threads: Option<usize>,
    /// Cross-validation folds [default: 5].
    #[arg(long, global = true, env = "MTSCREEN_FOLDS")]
    pub folds: Option<usize>,
    /// Dataset groups to leave out, comma separated (e.g. DUDE).
    #[arg(long, global = true, env = "MTSCREEN_EXCLUDE_GROUP", value_delimiter = ',')]
    pub exclude_group: Vec<Group>,
    /// Training defaults that `--config` builds on.
    #[arg(long, global = true, env = "MTSCREEN_PRESET", value_enum, default_value = "full")]
    pub preset: Preset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Multitask,
    SingleTask,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Featurize `compound_id,smiles[,label]` rows into hex fingerprints.
    Featurize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        radius: u32,
        #[arg(long, default_value_t = DEFAULT_NBITS)]
        nbits: usize,
    },
    /// Generate a synthetic collection (manifest plus fingerprint CSVs).
    Synth,
    /// Write stratified fold assignments.
    Split,
    /// Train one multitask network on every dataset.
    Train,
    /// Cross-validate a multitask or single-task model.
    Evaluate {
        #[arg(long, value_enum, default_value = "multitask")]
        model: ModelKind,
        /// Model label in the report [default: pmtnn / pstnn].
        #[arg(long)]
        name: Option<String>,
    },
    /// Held-in AUC as the number of training tasks grows.
    GrowthCurve,
    /// Grid over added tasks and added training examples.
    TasksVsData,
    /// Fine-tune growth-curve checkpoints on held-out tasks.
    Transfer {
        /// Directory holding `index.json` from `growth-curve`.
        #[arg(long)]
        checkpoints: PathBuf,
        /// Only checkpoints of this run.
        #[arg(long)]
        run: Option<usize>,
        /// Only checkpoints of this rung.
        #[arg(long)]
        rung: Option<usize>,
    },
    /// Active occurrence rate, target class and duplicate-target analyses.
    Aor {
        #[arg(long)]
        multitask: PathBuf,
        #[arg(long)]
        single_task: PathBuf,
    },
    /// Median AUC and enrichment tables from evaluation reports.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Reference model for the sign-test column.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Featurize { .. } => "featurize",
            Command::Synth => "synth",
            Command::Split => "split",
            Command::Train => "train",
            Command::Evaluate { .. } => "evaluate",
            Command::GrowthCurve => "growth-curve",
            Command::TasksVsData => "tasks-vs-data",
            Command::Transfer { .. } => "transfer",
            Command::Aor { .. } => "aor",
            Command::Report { .. } => "report",
        }
    }
}

/// Entry in `checkpoints/index.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointEntry {
    pub run: usize,
    pub rung: usize,
    pub tasks: Vec<String>,
    pub file: PathBuf,
}

/// Overlays `overlay` onto `base`, recursing into objects.
fn merge_json(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge_json(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl Cli {
    /// Runs the subcommand inside a pool of `--threads` workers.
    pub fn run(&self) -> Result<(), CliError> {
        match self.global.threads {
            Some(0) => Err(CliError::Usage("--threads must be positive".into())),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?
                .install(|| self.execute()),
            None => self.execute(),
        }
    }

    fn seed(&self) -> u64 {
        self.global.seed.unwrap_or(DEFAULT_SEED)
    }

    fn folds(&self) -> usize {
        self.global.folds.unwrap_or(5)
    }

    fn out_dir(&self) -> Result<&Path, CliError> {
        let dir = self.global.out.as_deref().ok_or_else(|| CliError::Usage(format!("{} needs --out", self.command.name())))?;
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(dir)
    }

    fn collection(&self) -> Result<Collection, CliError> {
        let path = self.global.manifest.as_deref().ok_or_else(|| CliError::Usage(format!("{} needs --manifest", self.command.name())))?;
        let loaded = load_collection(path)?;
        let (original, featurized) = loaded.failures.total();
        if featurized < original {
            log::warn!("{} of {original} rows failed featurization", original - featurized);
        }
        Ok(loaded.collection.excluding_groups(&self.global.exclude_group))
    }

    /// `base` with the `--config` file laid over it.
    fn spec<T: Serialize + DeserializeOwned>(&self, base: T) -> Result<T, CliError> {
        let Some(path) = &self.global.config else { return Ok(base) };
        let config_err = |message: String| CliError::Config { path: path.clone(), message };
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let overlay: Value = serde_json::from_str(&text).map_err(|e| config_err(e.to_string()))?;
        let mut value = serde_json::to_value(base).expect("spec serializes");
        merge_json(&mut value, overlay);
        serde_json::from_value(value).map_err(|e| config_err(e.to_string()))
    }

    fn announce(&self, spec: &impl Serialize) {
        let g = &self.global;
        let effective = serde_json::json!({
            "command": self.command.name(),
            "seed": self.seed(),
            "threads": g.threads.unwrap_or_else(rayon::current_num_threads),
            "folds": self.folds(),
            "preset": g.preset,
            "exclude_group": g.exclude_group,
            "spec": spec,
        });
        eprintln!("effective config: {effective}");
    }

    fn train_spec(&self) -> Result<TrainSpec, CliError> {
        let spec = self.spec(self.global.preset.train_spec())?;
        spec.network.validate()?;
        Ok(spec)
    }

    fn execute(&self) -> Result<(), CliError> {
        match &self.command {
            Command::Featurize { input, radius, nbits } => self.featurize(input, *radius, *nbits),
            Command::Synth => self.synth(),
            Command::Split => self.split(),
            Command::Train => self.train(),
            Command::Evaluate { model, name } => self.evaluate(*model, name.as_deref()),
            Command::GrowthCurve => self.growth_curve(),
            Command::TasksVsData => self.tasks_vs_data(),
            Command::Transfer { checkpoints, run, rung } => self.transfer(checkpoints, *run, *rung),
            Command::Aor { multitask, single_task } => self.aor(multitask, single_task),
            Command::Report { reports, baseline } => self.report(reports, baseline.as_deref()),
        }
    }

    fn featurize(&self, input: &Path, radius: u32, nbits: usize) -> Result<(), CliError> {
        self.announce(&serde_json::json!({ "radius": radius, "nbits": nbits }));
        let out = self.global.out.as_deref().ok_or_else(|| CliError::Usage("featurize needs --out".into()))?;
        let csv_err = |path: &Path, e: csv::Error| DataError::Csv {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        };
        let mut reader = csv::Reader::from_path(input).map_err(|e| csv_err(input, e))?;
        let header = reader.headers().map_err(|e| csv_err(input, e))?.clone();
        let col = |name: &str| header.iter().position(|h| h.trim() == name);
        let (Some(id_col), Some(smiles_col)) = (col("compound_id"), col("smiles")) else {
            return Err(DataError::Csv { path: input.to_path_buf(), line: 1, message: "header needs compound_id,smiles".into() }.into());
        };
        let label_col = col("label");
        let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>().map_err(|e| csv_err(input, e))?;
        let (fps, summary) = featurize_batch(rows.iter().map(|r| r.get(smiles_col).unwrap_or("")), radius, nbits);

        let mut writer = csv::Writer::from_path(out).map_err(|e| csv_err(out, e))?;
        let mut head = vec!["compound_id", "fingerprint"];
        head.extend(label_col.map(|_| "label"));
        writer.write_record(&head).map_err(|e| csv_err(out, e))?;
        for (row, fp) in rows.iter().zip(fps) {
            let id = row.get(id_col).unwrap_or("");
            match fp {
                Ok(fp) => {
                    let hex = fp.to_hex();
                    let mut rec = vec![id, hex.as_str()];
                    rec.extend(label_col.map(|c| row.get(c).unwrap_or("")));
                    writer.write_record(&rec).map_err(|e| csv_err(out, e))?;
                }
                Err(e) => log::warn!("{id}: {e}"),
            }
        }
        writer.flush().map_err(io_err(out))?;
        println!(
            "featurized {} of {} rows; failure rate {:.2}%",
            summary.parsed,
            summary.total,
            100.0 * summary.failure_rate()
        );
        Ok(())
    }

    fn synth(&self) -> Result<(), CliError> {
        let mut cfg = self.spec(SynthConfig::default())?;
        if let Some(s) = self.global.seed {
            cfg.seed = s;
        }
        self.announce(&cfg);
        let c = synth_collection(&cfg)?;
        let manifest = write_collection(&c, self.out_dir()?)?;
        println!("{}", manifest.display());
        Ok(())
    }

    fn split(&self) -> Result<(), CliError> {
        self.announce(&Value::Null);
        let c = self.collection()?;
        let folds = fold_table(&c, self.folds(), self.seed())?;
        let path = self.out_dir()?.join("folds.csv");
        let mut out = String::from("dataset,compound_id,fold\n");
        for (d, f) in c.datasets.iter().zip(&folds) {
            for (r, fold) in d.records.iter().zip(&f.fold_of) {
                out.push_str(&format!("{},{},{fold}\n", d.id, r.compound_id));
            }
        }
        write_file(&path, out)
    }

    fn train(&self) -> Result<(), CliError> {
        let spec = self.train_spec()?;
        self.announce(&spec);
        let c = self.collection()?;
        let dir = self.out_dir()?;
        let nbits = c.nbits().ok_or_else(|| DataError::Invalid("collection has no records".into()))?;
        let tasks: Vec<usize> = (0..c.datasets.len()).collect();
        let folds = fold_table(&c, self.folds(), self.seed())?;
        let set = TrainingSet::from_selection(&c, &training_rows(&folds, &tasks, None));
        let mut net = MultitaskNetwork::init(spec.config(nbits, tasks.len(), set.len(), net_seed(self.seed(), None)))?;
        let report = train(&mut net, &set)?;
        save_checkpoint(&net, &dir.join("model.mtnn"))?;
        write_learning_curve(&report, &dir.join("learning_curve.csv"))?;
        write_file(
            &dir.join("config.json"),
            to_json(&serde_json::json!({ "seed": self.seed(), "tasks": c.ids(), "train": spec, "network": net.config() })),
        )
    }

    fn evaluate(&self, model: ModelKind, name: Option<&str>) -> Result<(), CliError> {
        let spec = self.train_spec()?;
        self.announce(&spec);
        let c = self.collection()?;
        let dir = self.out_dir()?;
        let folds = fold_table(&c, self.folds(), self.seed())?;
        let all: Vec<usize> = (0..c.datasets.len()).collect();
        let report = match model {
            ModelKind::Multitask => cv_multitask(&c, &folds, &all, &all, &spec, self.seed(), name.unwrap_or("pmtnn"))?.0,
            ModelKind::SingleTask => cv_single_task(&c, &folds, &all, &spec, self.seed(), name.unwrap_or("pstnn"))?,
        };
        report.write_json(&dir.join(format!("{}.json", report.model)))?;
        report.write_csv(&dir.join(format!("{}.csv", report.model)))?;
        Ok(())
    }

    fn growth_curve(&self) -> Result<(), CliError> {
        let mut spec = self.spec(GrowthCurveSpec { train: self.global.preset.train_spec(), ..Default::default() })?;
        spec.seed = self.seed();
        spec.folds = self.global.folds.unwrap_or(spec.folds);
        self.announce(&spec);
        let c = self.collection()?;
        let dir = self.out_dir()?;
        let outcome = run_growth_curve(&spec, &c)?;
        outcome.result.write(dir, "growth_curve")?;
        outcome.baseline.write_json(&dir.join("baseline.json"))?;
        let cp_dir = dir.join("checkpoints");
        fs::create_dir_all(&cp_dir).map_err(io_err(&cp_dir))?;
        let mut index = Vec::with_capacity(outcome.checkpoints.len());
        for cp in &outcome.checkpoints {
            let file = PathBuf::from(format!("run{}_rung{}.mtnn", cp.run, cp.rung));
            save_checkpoint(&cp.network, &cp_dir.join(&file))?;
            index.push(CheckpointEntry { run: cp.run, rung: cp.rung, tasks: cp.tasks.clone(), file });
        }
        write_file(&cp_dir.join("index.json"), to_json(&index))
    }

    fn tasks_vs_data(&self) -> Result<(), CliError> {
        let mut spec = self.spec(TasksVsDataSpec { train: self.global.preset.train_spec(), ..Default::default() })?;
        spec.seed = self.seed();
        spec.folds = self.global.folds.unwrap_or(spec.folds);
        self.announce(&spec);
        let c = self.collection()?;
        let dir = self.out_dir()?;
        let outcome = run_tasks_vs_data(&spec, &c)?;
        outcome.result.write(dir, "tasks_vs_data")?;
        outcome.baseline.write_json(&dir.join("baseline.json"))?;
        Ok(())
    }

    fn transfer(&self, checkpoints: &Path, run: Option<usize>, rung: Option<usize>) -> Result<(), CliError> {
        let mut spec = self.spec(TransferSpec { train: self.global.preset.train_spec(), ..Default::default() })?;
        spec.seed = self.seed();
        spec.folds = self.global.folds.unwrap_or(spec.folds);
        self.announce(&spec);
        let c = self.collection()?;
        let dir = self.out_dir()?;
        let index_path = checkpoints.join("index.json");
        let text = fs::read_to_string(&index_path).map_err(io_err(&index_path))?;
        let index: Vec<CheckpointEntry> = serde_json::from_str(&text)
            .map_err(|e| DataError::Invalid(format!("{}: {e}", index_path.display())))?;
        let sources = index
            .into_iter()
            .filter(|e| run.is_none_or(|r| e.run == r) && rung.is_none_or(|n| e.rung == n))
            .map(|e| {
                let network = load_checkpoint(&checkpoints.join(&e.file))?;
                Ok(Checkpoint { run: e.run, rung: e.rung, tasks: e.tasks, network })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        if sources.is_empty() {
            return Err(CliError::Usage("no checkpoints match the --run/--rung filters".into()));
        }
        run_transfer(&spec, &c, &sources)?.write(dir, "transfer")?;
        Ok(())
    }

    fn aor(&self, multitask: &Path, single_task: &Path) -> Result<(), CliError> {
        self.announce(&serde_json::json!({ "multitask": multitask, "single_task": single_task }));
        let path = self.global.manifest.as_deref().ok_or_else(|| CliError::Usage("aor needs --manifest".into()))?;
        let c = load_collection(path)?.collection;
        let dir = self.out_dir()?;
        let mt = EvalReport::read_json(multitask)?;
        let st = EvalReport::read_json(single_task)?;
        let exclude = &self.global.exclude_group;
        let aor = run_aor_analysis(&mt, &st, &c, exclude)?;
        write_file(&dir.join("aor.csv"), aor.to_csv())?;
        write_file(&dir.join("aor.json"), to_json(&aor))?;
        match run_class_and_duplicate_analysis(&mt, &st, &c, exclude) {
            Ok(classes) => write_file(&dir.join("classes.json"), to_json(&classes)),
            Err(ExperimentError::Invalid(msg)) => {
                log::warn!("class analysis skipped: {msg}");
                Ok(())
            }
            Err(e) => Err(e.into()),
        }
    }

    fn report(&self, reports: &[PathBuf], baseline: Option<&Path>) -> Result<(), CliError> {
        self.announce(&serde_json::json!({ "reports": reports, "baseline": baseline }));
        let loaded = reports.iter().map(|p| EvalReport::read_json(p)).collect::<Result<Vec<_>, _>>()?;
        let base = baseline.map(EvalReport::read_json).transpose()?;
        let tables = build_report(&loaded, base.as_ref(), &self.global.exclude_group)?;
        let text = tables.render();
        print!("{text}");
        if self.global.out.is_some() {
            let dir = self.out_dir()?;
            write_file(&dir.join("report.txt"), &text)?;
            write_file(&dir.join("report.json"), to_json(&tables))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_overlay_is_deep() {
        let mut base = serde_json::json!({ "a": 1, "b": { "c": 2, "d": 3 } });
        merge_json(&mut base, serde_json::json!({ "b": { "d": 4 }, "e": 5 }));
        assert_eq!(base, serde_json::json!({ "a": 1, "b": { "c": 2, "d": 4 }, "e": 5 }));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Data(DataError::UnknownDataset("x".into())).exit_code(), 2);
        assert_eq!(CliError::Net(NetError::DeadTopLayer { step: 3 }).exit_code(), 3);
        assert_eq!(CliError::Experiment(ExperimentError::Net(NetError::NonFinite("loss"))).exit_code(), 3);
        assert_eq!(CliError::Experiment(ExperimentError::Invalid("x".into())).exit_code(), 1);
        assert_eq!(CliError::Stats(StatsError::ZeroVariance).exit_code(), 3);
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "mtscreen", "evaluate", "--model", "single-task", "--threads", "1", "--exclude-group", "dude,muv", "--preset", "desk",
        ])
        .unwrap();
        assert_eq!(cli.global.exclude_group, vec![Group::Dude, Group::Muv]);
        assert_eq!(cli.global.threads, Some(1));
        assert!(matches!(cli.command, Command::Evaluate { model: ModelKind::SingleTask, .. }));
        assert!(Cli::try_parse_from(["mtscreen", "bogus"]).is_err());
    }
}
