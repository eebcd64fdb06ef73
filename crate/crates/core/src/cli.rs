//! The `cursor-abandon` command line.
//!
//! Every command that writes a file also writes `<file>.manifest.json`
//! recording the arguments, resolved configuration, seeds and SHA-256
//! digests of the inputs.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::balance::{
    augment_training_set, balance_training, random_resample, BalanceKind, BalanceStrategy,
    ResampleKind, Sample,
};
use crate::checkpoint::Checkpoint;
use crate::error::{Error, Result};
use crate::eval::grid::{grid_cells, render_csv, render_markdown, run_cells, GridReport};
use crate::eval::{stratified_kfold, EvalSettings, ExperimentConfig, ModelKind};
use crate::features::{csv_header, csv_row, extract_features, LabeledFeatures};
use crate::forest::{train_forest, ForestConfig};
use crate::rnn::{init_model, train, ModelConfig};
use crate::seeds::{derive_seed, rng_for};
use crate::seqdata::{
    class_counts, parse_dataset, serialize_dataset, to_representation, Coords, Label, MouseSequence,
};
use crate::synth::{generate_dataset, GeneratorParams};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "cursor-abandon",
    version,
    about = "Good vs. bad query abandonment from mouse cursor sessions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a JSONL dataset and print a class summary.
    Ingest {
        /// Input file; reads stdin when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Write the ten interaction features of every session as CSV.
    Featurize {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Balance a dataset in session space and write it back as JSONL.
    Augment {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        strategy: BalanceKind,
        #[arg(long)]
        seed: u64,
        /// Sessions per class for augmentation strategies.
        #[arg(long, default_value_t = 128)]
        target: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a synthetic dataset.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 77)]
        n_good: usize,
        #[arg(long, default_value_t = 30)]
        n_bad: usize,
    },
    /// Train one model on a whole dataset and save a checkpoint.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        model: TrainModel,
        #[arg(long, value_enum, default_value_t = CoordsArg::Standardized)]
        coords: CoordsArg,
        /// Leave out the time-offset channel.
        #[arg(long)]
        no_time: bool,
        #[arg(long, default_value = "distortion_or_trimming")]
        strategy: BalanceKind,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Score sessions with a saved checkpoint.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Nested cross-validation of one cell, or of every cell with `all`.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        /// `constant_bad`, `rf:<strategy>`, `bilstm:<raw|standardized>:<time|notime>:<strategy>` or `all`.
        #[arg(long)]
        config: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output prefix for .md, .csv and .json reports.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// The full experiment grid. Without `--data` it runs on the synthetic
    /// dataset generated from `--seed`.
    Grid {
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Comma-separated subset of cells.
        #[arg(long, value_delimiter = ',')]
        cells: Vec<String>,
        /// Class sizes of the generated dataset.
        #[arg(long, default_value_t = 77)]
        n_good: usize,
        #[arg(long, default_value_t = 30)]
        n_bad: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrainModel {
    Bilstm,
    Rf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoordsArg {
    Raw,
    Standardized,
}

/// Overrides of the default model, training and fold settings.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct Tuning {
    #[arg(long)]
    pub units: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub outer_folds: Option<usize>,
    #[arg(long)]
    pub inner_folds: Option<usize>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub target_per_class: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

impl Tuning {
    pub fn apply(&self, mut s: EvalSettings) -> EvalSettings {
        if let Some(v) = self.units {
            s.model.units = v;
        }
        if let Some(v) = self.layers {
            s.model.num_layers = v;
        }
        if let Some(v) = self.dropout {
            s.model.dropout_rate = v;
        }
        if let Some(v) = self.max_epochs {
            s.train.max_epochs = v;
        }
        if let Some(v) = self.patience {
            s.train.patience = v;
        }
        if let Some(v) = self.lr {
            s.train.learning_rate = v;
        }
        if let Some(v) = self.batch_size {
            s.train.batch_size = v;
        }
        if let Some(v) = self.outer_folds {
            s.outer_folds = v;
        }
        if let Some(v) = self.inner_folds {
            s.inner_folds = v;
        }
        if let Some(v) = self.trees {
            s.forest.n_trees = v;
        }
        if let Some(v) = self.target_per_class {
            s.target_per_class = v;
        }
        if let Some(v) = self.threshold {
            s.threshold = v;
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written beside every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<InputDigest>,
    pub artifacts: Vec<String>,
}

impl RunManifest {
    fn new(command: &[String], config: serde_json::Value) -> Self {
        RunManifest {
            tool: "cursor-abandon".into(),
            version: VERSION.into(),
            command: command.to_vec(),
            config,
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    fn seed(mut self, name: &str, value: u64) -> Self {
        self.seeds.insert(name.into(), value);
        self
    }

    fn input(mut self, path: &Path, bytes: &[u8]) -> Self {
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
        self
    }

    /// Writes the artifacts and, next to the first one, this manifest.
    fn write(mut self, artifacts: &[(PathBuf, String)]) -> Result<PathBuf> {
        self.artifacts = artifacts
            .iter()
            .map(|(p, _)| p.display().to_string())
            .collect();
        for (path, content) in artifacts {
            std::fs::write(path, content)?;
        }
        let path = manifest_path(&artifacts[0].0);
        let text = serde_json::to_string_pretty(&self)?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `<artifact>.manifest.json`, or `<prefix>.manifest.json` for report sets.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_stem().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(".");
    name.push(ext);
    prefix.with_file_name(name)
}

/// Why a command failed.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments; exit 2.
    Usage(String),
    /// Invalid input or a failed computation; exit 1.
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.into())
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status.
pub fn main_with_args(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let args = argv.get(1..).unwrap_or_default().to_vec();
    match dispatch(cli.command, &args) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn read_input(path: &Path) -> Result<(Vec<u8>, Vec<MouseSequence>)> {
    let bytes = std::fs::read(path)?;
    let data = load(&bytes)?;
    Ok((bytes, data))
}

fn load(bytes: &[u8]) -> Result<Vec<MouseSequence>> {
    let text = String::from_utf8_lossy(bytes);
    let ds = parse_dataset(&text)?;
    for r in &ds.rejects {
        eprintln!("skipped {r}");
    }
    Ok(ds.sequences)
}

fn emit(out: &Option<PathBuf>, manifest: RunManifest, content: String) -> Result<()> {
    match out {
        Some(path) => {
            manifest.write(&[(path.clone(), content)])?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn summary(data: &[MouseSequence]) -> String {
    let (bad, good) = class_counts(data);
    format!("{} sequences, {bad} bad / {good} good", data.len())
}

fn to_json(v: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(v).expect("config serializes")
}

fn dispatch(command: Command, argv: &[String]) -> std::result::Result<(), Failure> {
    match command {
        Command::Ingest { data } => {
            let bytes = match &data {
                Some(p) => std::fs::read(p)?,
                None => {
                    let mut buf = Vec::new();
                    std::io::stdin().read_to_end(&mut buf)?;
                    buf
                }
            };
            let data = load(&bytes)?;
            println!("{}", summary(&data));
        }
        Command::Featurize { data: path, out } => {
            let (bytes, data) = read_input(&path)?;
            let mut csv = csv_header() + "\n";
            for s in &data {
                csv.push_str(&csv_row(s, &extract_features(s)));
                csv.push('\n');
            }
            let m = RunManifest::new(argv, serde_json::json!({})).input(&path, &bytes);
            emit(&out, m, csv)?;
        }
        Command::Augment {
            data: path,
            strategy,
            seed,
            target,
            out,
        } => {
            let (bytes, data) = read_input(&path)?;
            let strat = BalanceStrategy {
                target_per_class: target,
                ..BalanceStrategy::new(strategy)
            };
            let items = augment_sessions(&data, &strat, seed)?;
            eprintln!("{}", summary(&items));
            let m = RunManifest::new(argv, to_json(&strat))
                .seed("seed", seed)
                .input(&path, &bytes);
            emit(&out, m, serialize_dataset(&items))?;
        }
        Command::Generate {
            seed,
            out,
            n_good,
            n_bad,
        } => {
            let params = GeneratorParams {
                n_good,
                n_bad,
                rng_seed: seed,
                ..GeneratorParams::default()
            };
            let data = generate_dataset(&params)?;
            let m = RunManifest::new(argv, to_json(&params)).seed("seed", seed);
            emit(&out, m, serialize_dataset(&data))?;
        }
        Command::Train {
            data: path,
            model,
            coords,
            no_time,
            strategy,
            seed,
            out,
            tuning,
        } => {
            let (bytes, data) = read_input(&path)?;
            let cfg = match model {
                TrainModel::Rf => ExperimentConfig::rf(strategy),
                TrainModel::Bilstm => {
                    let c = match coords {
                        CoordsArg::Raw => Coords::Raw,
                        CoordsArg::Standardized => Coords::Standardized,
                    };
                    ExperimentConfig::bilstm(c, !no_time, strategy)
                }
            };
            let settings = tuning.apply(EvalSettings::default());
            let ck = train_checkpoint(&data, &cfg, &settings, seed)?;
            let m = RunManifest::new(
                argv,
                serde_json::json!({ "cell": cfg.to_string(), "settings": settings }),
            )
            .seed("seed", seed)
            .input(&path, &bytes);
            m.write(&[(out.clone(), ck.to_json())])?;
            eprintln!(
                "trained {cfg} on {}; wrote {}",
                summary(&data),
                out.display()
            );
        }
        Command::Predict {
            model,
            data: path,
            out,
            threshold,
        } => {
            let ck_text = std::fs::read(&model)?;
            let ck = Checkpoint::from_json(&String::from_utf8_lossy(&ck_text))?;
            let predictor = ck.into_predictor()?;
            let (bytes, data) = read_input(&path)?;
            let mut csv = String::from("session_id,prob_good,predicted,label\n");
            for s in &data {
                let p = predictor.predict(s)?;
                let pred = if p >= threshold {
                    Label::Good
                } else {
                    Label::Bad
                };
                csv.push_str(&format!("{},{p:.6},{pred},{}\n", s.session_id, s.label()));
            }
            let m = RunManifest::new(argv, serde_json::json!({ "threshold": threshold }))
                .input(&model, &ck_text)
                .input(&path, &bytes);
            emit(&out, m, csv)?;
        }
        Command::Evaluate {
            data: path,
            config,
            seed,
            out,
            tuning,
        } => {
            let cells = if config == "all" {
                grid_cells()
            } else {
                vec![config
                    .parse::<ExperimentConfig>()
                    .map_err(|e| Failure::Usage(e.to_string()))?]
            };
            let (bytes, data) = read_input(&path)?;
            let settings = tuning.apply(EvalSettings::default());
            let report = in_pool(1, || run_cells(&data, &cells, &settings, seed))?;
            let m = RunManifest::new(argv, to_json(&settings))
                .seed("seed", seed)
                .input(&path, &bytes);
            write_report(&out, m, &report)?;
        }
        Command::Grid {
            data,
            seed,
            jobs,
            cells,
            n_good,
            n_bad,
            out,
            tuning,
        } => {
            if jobs == 0 {
                return Err(Failure::Usage("--jobs must be at least 1".into()));
            }
            let cells = if cells.is_empty() {
                grid_cells()
            } else {
                cells
                    .iter()
                    .map(|c| c.parse::<ExperimentConfig>())
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Failure::Usage(e.to_string()))?
            };
            let settings = tuning.apply(EvalSettings::default());
            let mut m = RunManifest::new(argv, to_json(&settings)).seed("seed", seed);
            let dataset = match &data {
                Some(path) => {
                    let (bytes, d) = read_input(path)?;
                    m = m.input(path, &bytes);
                    d
                }
                None => {
                    let params = GeneratorParams {
                        n_good,
                        n_bad,
                        rng_seed: seed,
                        ..GeneratorParams::default()
                    };
                    m = m.seed("generator", seed);
                    generate_dataset(&params)?
                }
            };
            let report = in_pool(jobs, || run_cells(&dataset, &cells, &settings, seed))?;
            write_report(&out, m, &report)?;
        }
    }
    Ok(())
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(f)
}

fn write_report(out: &Option<PathBuf>, m: RunManifest, report: &GridReport) -> Result<()> {
    let md = render_markdown(&report.rows);
    match out {
        None => {
            print!("{md}");
            Ok(())
        }
        Some(prefix) => {
            let json = serde_json::to_string_pretty(report)? + "\n";
            let files = [
                (with_ext(prefix, "md"), md.clone()),
                (with_ext(prefix, "csv"), render_csv(&report.rows)),
                (with_ext(prefix, "json"), json),
            ];
            m.write(&files)?;
            print!("{md}");
            Ok(())
        }
    }
}

/// Session-space balancing for the `augment` command. Interpolating
/// strategies only exist on fixed-size representations, so they are
/// refused here.
pub fn augment_sessions(
    data: &[MouseSequence],
    strategy: &BalanceStrategy,
    seed: u64,
) -> Result<Vec<MouseSequence>> {
    let mut rng = rng_for(seed, &[]);
    match strategy.kind {
        k if k.is_augmentation() => Ok(augment_training_set(data, strategy, &mut rng)?.items),
        BalanceKind::RandomOversample => {
            Ok(random_resample(data, ResampleKind::Over, &mut rng)?.items)
        }
        BalanceKind::RandomUndersample => {
            Ok(random_resample(data, ResampleKind::Under, &mut rng)?.items)
        }
        BalanceKind::None | BalanceKind::ClassWeighted => Ok(data.to_vec()),
        k => Err(Error::InvalidArgument(format!(
            "{k} interpolates fixed-size matrices and cannot emit sessions; \
             it is applied inside `train` and `evaluate`"
        ))),
    }
}

/// Trains one model of `cfg` on all of `data`. The recurrent model holds
/// out one stratified fifth as its early-stopping validation set.
pub fn train_checkpoint(
    data: &[MouseSequence],
    cfg: &ExperimentConfig,
    settings: &EvalSettings,
    seed: u64,
) -> Result<Checkpoint> {
    let strategy = BalanceStrategy {
        k_neighbors: settings.k_neighbors,
        target_per_class: settings.target_per_class,
        ..BalanceStrategy::new(cfg.balance)
    };
    let mut balance_rng = rng_for(seed, &[0]);
    match cfg.model {
        ModelKind::ConstantBad => Err(Error::InvalidArgument(
            "constant_bad has nothing to train".into(),
        )),
        ModelKind::Rf => {
            let balanced = balance_training(
                data,
                &strategy,
                |s| Ok(LabeledFeatures::from_sequence(s)),
                &mut balance_rng,
            )?;
            let x: Vec<_> = balanced.items.iter().map(|i| i.features).collect();
            let y: Vec<_> = balanced.items.iter().map(|i| i.label()).collect();
            let forest = train_forest(
                &x,
                &y,
                &ForestConfig {
                    rng_seed: derive_seed(seed, &[1]),
                    ..settings.forest.clone()
                },
            )?;
            Ok(Checkpoint::rf(cfg.to_string(), forest))
        }
        ModelKind::Bilstm => {
            let labels: Vec<Label> = data.iter().map(|s| s.label()).collect();
            let folds = stratified_kfold(&labels, settings.inner_folds, &mut rng_for(seed, &[4]))?;
            let val_idx = &folds[0];
            let train_seqs: Vec<MouseSequence> = (0..data.len())
                .filter(|i| !val_idx.contains(i))
                .map(|i| data[i].clone())
                .collect();
            let scheme = cfg.scheme();
            let balanced = balance_training(
                &train_seqs,
                &strategy,
                |s| to_representation(s, &scheme),
                &mut balance_rng,
            )?;
            let val = val_idx
                .iter()
                .map(|&i| to_representation(&data[i], &scheme))
                .collect::<Result<Vec<_>>>()?;
            let model_cfg = ModelConfig {
                input_dim: scheme.dim(),
                max_len: scheme.max_len,
                rng_seed: derive_seed(seed, &[2]),
                ..settings.model.clone()
            };
            let model = init_model(&model_cfg, &mut rng_for(model_cfg.rng_seed, &[]))?;
            let train_cfg = crate::rnn::TrainConfig {
                seed: derive_seed(seed, &[3]),
                threshold: settings.threshold,
                ..settings.train.clone()
            };
            let (model, _) = train(
                model,
                &balanced.items,
                &val,
                &balanced.class_weights,
                &train_cfg,
            )?;
            Ok(Checkpoint::bilstm(cfg.to_string(), scheme, &model))
        }
    }
}
