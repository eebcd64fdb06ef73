//! Nested stratified cross-validation.
//!
//! The outer loop splits the dataset into 10 stratified folds, each used once
//! as the test set. The remaining 90% is split into 5 stratified inner folds;
//! every inner fold serves once as the validation set for a model trained on
//! the other four. Balancing only ever sees the inner training portion.
//!
//! Every test item is scored by the 5 models of its outer fold. The headline
//! metrics threshold the mean of those 5 scores at 0.5, and the Wilson
//! intervals use the number of individual scoring events (5 per item).

pub mod grid;
pub mod metrics;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::balance::{balance_training, BalanceKind, BalanceStrategy, Sample};
use crate::error::{Error, Result};
use crate::features::LabeledFeatures;
use crate::forest::{forest_predict, train_forest, ForestConfig};
use crate::rnn::{init_model, predict_batch, train, ModelConfig, TrainConfig};
use crate::seeds::{derive_seed, rng_for, Rng};
use crate::seqdata::{to_representation, Coords, Label, MouseSequence, RepresentationScheme};
use metrics::{roc_auc, weighted_metrics, wilson_interval, PrfReport, Z95};

/// Splits indices into `k` folds, dealing each class's shuffled members
/// round-robin. The deal continues across classes, so fold sizes differ by
/// at most one overall as well as per class. A class that is absent is
/// skipped; a present class needs at least `k` members.
pub fn stratified_kfold(labels: &[Label], k: usize, rng: &mut Rng) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for label in Label::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        if !members.is_empty() && members.len() < k {
            return Err(Error::Stratification {
                label: label.name(),
                count: members.len(),
                k,
            });
        }
        members.shuffle(rng);
        for m in members {
            folds[next].push(m);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Outer and inner fold assignments, as dataset indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub outer: Vec<Vec<usize>>,
    /// `inner[o][i]`: validation indices of inner fold `i` within outer fold `o`'s training part.
    pub inner: Vec<Vec<Vec<usize>>>,
    pub rng_seed: u64,
}

const FOLD_STREAM: u64 = 0xF01D;

impl FoldPlan {
    pub fn new(labels: &[Label], outer_k: usize, inner_k: usize, seed: u64) -> Result<Self> {
        let outer = stratified_kfold(labels, outer_k, &mut rng_for(seed, &[FOLD_STREAM]))?;
        let mut inner = Vec::with_capacity(outer_k);
        for (o, test) in outer.iter().enumerate() {
            let rest = complement(labels.len(), test);
            let rest_labels: Vec<Label> = rest.iter().map(|&i| labels[i]).collect();
            let folds = stratified_kfold(
                &rest_labels,
                inner_k,
                &mut rng_for(seed, &[FOLD_STREAM, o as u64]),
            )?;
            inner.push(
                folds
                    .into_iter()
                    .map(|f| f.into_iter().map(|j| rest[j]).collect())
                    .collect(),
            );
        }
        Ok(FoldPlan {
            outer,
            inner,
            rng_seed: seed,
        })
    }

    /// (train, validation, test) indices of one inner split.
    pub fn split(&self, outer: usize, inner: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let test = self.outer[outer].clone();
        let val = self.inner[outer][inner].clone();
        let mut train: Vec<usize> = self.inner[outer]
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != inner)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        train.sort_unstable();
        (train, val, test)
    }
}

fn complement(n: usize, taken: &[usize]) -> Vec<usize> {
    let set: HashSet<usize> = taken.iter().copied().collect();
    (0..n).filter(|i| !set.contains(i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Bilstm,
    Rf,
    ConstantBad,
}

/// One cell of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub coords: Coords,
    pub time: bool,
    pub balance: BalanceKind,
}

impl ExperimentConfig {
    pub fn bilstm(coords: Coords, time: bool, balance: BalanceKind) -> Self {
        ExperimentConfig {
            model: ModelKind::Bilstm,
            coords,
            time,
            balance,
        }
    }

    pub fn rf(balance: BalanceKind) -> Self {
        ExperimentConfig {
            model: ModelKind::Rf,
            coords: Coords::Raw,
            time: false,
            balance,
        }
    }

    pub fn constant_bad() -> Self {
        ExperimentConfig {
            model: ModelKind::ConstantBad,
            coords: Coords::Raw,
            time: false,
            balance: BalanceKind::None,
        }
    }

    /// The 36 recurrent-model cells: coords × time × 9 strategies.
    pub fn grid() -> Vec<ExperimentConfig> {
        let mut out = Vec::with_capacity(36);
        for coords in [Coords::Raw, Coords::Standardized] {
            for time in [true, false] {
                for balance in BalanceKind::GRID {
                    out.push(ExperimentConfig::bilstm(coords, time, balance));
                }
            }
        }
        out
    }

    pub fn scheme(&self) -> RepresentationScheme {
        RepresentationScheme::coords_time(self.coords, self.time)
    }

    fn stream_id(&self) -> u64 {
        // FNV-1a over the cell name: stable across runs and platforms.
        self.to_string()
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
                (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
            })
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.model {
            ModelKind::ConstantBad => f.write_str("constant_bad"),
            ModelKind::Rf => write!(f, "rf:{}", self.balance),
            ModelKind::Bilstm => {
                let coords = match self.coords {
                    Coords::Raw => "raw",
                    Coords::Standardized => "standardized",
                };
                let time = if self.time { "time" } else { "notime" };
                write!(f, "bilstm:{coords}:{time}:{}", self.balance)
            }
        }
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown experiment config {s:?}"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["constant_bad"] => Ok(ExperimentConfig::constant_bad()),
            ["rf"] => Ok(ExperimentConfig::rf(BalanceKind::Adasyn)),
            ["rf", b] => Ok(ExperimentConfig::rf(b.parse()?)),
            ["bilstm", c, t, b] => {
                let coords = match *c {
                    "raw" => Coords::Raw,
                    "standardized" | "std" => Coords::Standardized,
                    _ => return Err(bad()),
                };
                let time = match *t {
                    "time" => true,
                    "notime" => false,
                    _ => return Err(bad()),
                };
                Ok(ExperimentConfig::bilstm(coords, time, b.parse()?))
            }
            _ => Err(bad()),
        }
    }
}

/// Everything besides the cell that shapes an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub outer_folds: usize,
    pub inner_folds: usize,
    /// `input_dim` is filled in per cell.
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub forest: ForestConfig,
    pub k_neighbors: usize,
    pub target_per_class: usize,
    pub threshold: f64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            outer_folds: 10,
            inner_folds: 5,
            model: ModelConfig::new(1),
            train: TrainConfig::default(),
            forest: ForestConfig::default(),
            k_neighbors: 5,
            target_per_class: 128,
            threshold: 0.5,
        }
    }
}

impl EvalSettings {
    fn strategy(&self, kind: BalanceKind) -> BalanceStrategy {
        BalanceStrategy {
            k_neighbors: self.k_neighbors,
            target_per_class: self.target_per_class,
            ..BalanceStrategy::new(kind)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intervals {
    pub precision: (f64, f64),
    pub recall: (f64, f64),
    pub f1: (f64, f64),
    pub roc_auc: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub prf: PrfReport,
    pub roc_auc: f64,
    /// Trials behind the Wilson intervals.
    pub n_events: usize,
    pub intervals: Intervals,
}

impl MetricsReport {
    pub fn new(scores: &[f64], truth: &[Label], threshold: f64, n_events: usize) -> Result<Self> {
        let pred: Vec<Label> = scores
            .iter()
            .map(|&s| {
                if s >= threshold {
                    Label::Good
                } else {
                    Label::Bad
                }
            })
            .collect();
        let prf = weighted_metrics(&pred, truth);
        let auc = roc_auc(scores, truth)?;
        let w = prf.weighted;
        let ci = |p: f64| wilson_interval(p, n_events, Z95);
        Ok(MetricsReport {
            intervals: Intervals {
                precision: ci(w.precision)?,
                recall: ci(w.recall)?,
                f1: ci(w.f1)?,
                roc_auc: ci(auc)?,
            },
            prf,
            roc_auc: auc,
            n_events,
        })
    }
}

/// Result of one (outer, inner) training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub outer: usize,
    pub inner: usize,
    pub n_train: usize,
    pub n_synthetic: usize,
    pub best_epoch: Option<usize>,
    pub epochs_run: Option<usize>,
    /// Outer-test indices and their scores, aligned.
    pub test: Vec<usize>,
    pub scores: Vec<f64>,
    /// Training items whose `source_id` lies outside the inner training split.
    pub leaked: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub outer: usize,
    pub weighted_f1: f64,
    pub roc_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    pub f1_mean: f64,
    pub f1_std: f64,
    pub auc_mean: f64,
    pub auc_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ExperimentConfig,
    pub name: String,
    pub seed: u64,
    pub metrics: MetricsReport,
    /// Mean score per dataset index.
    pub pooled_scores: Vec<f64>,
    pub per_fold: Vec<FoldMetrics>,
    pub dispersion: Dispersion,
    pub n_models: usize,
    pub jobs: Vec<JobRecord>,
}

impl EvalReport {
    pub fn total_leaked(&self) -> usize {
        self.jobs.iter().map(|j| j.leaked).sum()
    }
}

fn count_leaks<T: Sample>(items: &[T], allowed: &HashSet<&str>) -> usize {
    items
        .iter()
        .filter(|it| !allowed.contains(it.source_id()))
        .count()
}

fn run_job(
    data: &[MouseSequence],
    cfg: &ExperimentConfig,
    settings: &EvalSettings,
    plan: &FoldPlan,
    seed: u64,
    outer: usize,
    inner: usize,
) -> Result<JobRecord> {
    let (train_idx, val_idx, test_idx) = plan.split(outer, inner);
    let job_seed = derive_seed(seed, &[cfg.stream_id(), outer as u64, inner as u64]);
    let pick = |idx: &[usize]| idx.iter().map(|&i| data[i].clone()).collect::<Vec<_>>();
    let train_seqs = pick(&train_idx);
    let allowed: HashSet<&str> = train_seqs.iter().map(|s| s.session_id.as_str()).collect();
    let strategy = settings.strategy(cfg.balance);
    let mut balance_rng = rng_for(job_seed, &[0]);

    let mut record = JobRecord {
        outer,
        inner,
        n_train: train_seqs.len(),
        n_synthetic: 0,
        best_epoch: None,
        epochs_run: None,
        test: test_idx.clone(),
        scores: Vec::new(),
        leaked: 0,
    };
    match cfg.model {
        ModelKind::ConstantBad => {
            record.scores = vec![0.0; test_idx.len()];
        }
        ModelKind::Rf => {
            let balanced = balance_training(
                &train_seqs,
                &strategy,
                |s| Ok(LabeledFeatures::from_sequence(s)),
                &mut balance_rng,
            )?;
            record.leaked = count_leaks(&balanced.items, &allowed);
            record.n_train = balanced.items.len();
            record.n_synthetic = balanced.synthetic.len();
            let x: Vec<_> = balanced.items.iter().map(|i| i.features).collect();
            let y: Vec<_> = balanced.items.iter().map(|i| i.label).collect();
            let forest_cfg = ForestConfig {
                rng_seed: derive_seed(job_seed, &[1]),
                ..settings.forest.clone()
            };
            let forest = train_forest(&x, &y, &forest_cfg)?;
            record.scores = test_idx
                .iter()
                .map(|&i| {
                    forest_predict(&forest, &LabeledFeatures::from_sequence(&data[i]).features)
                })
                .collect();
        }
        ModelKind::Bilstm => {
            let scheme = cfg.scheme();
            let represent = |s: &MouseSequence| to_representation(s, &scheme);
            let balanced = balance_training(&train_seqs, &strategy, represent, &mut balance_rng)?;
            record.leaked = count_leaks(&balanced.items, &allowed);
            record.n_train = balanced.items.len();
            record.n_synthetic = balanced.synthetic.len();
            let val = val_idx
                .iter()
                .map(|&i| to_representation(&data[i], &scheme))
                .collect::<Result<Vec<_>>>()?;
            let test = test_idx
                .iter()
                .map(|&i| to_representation(&data[i], &scheme))
                .collect::<Result<Vec<_>>>()?;
            let model_cfg = ModelConfig {
                input_dim: scheme.dim(),
                max_len: scheme.max_len,
                rng_seed: derive_seed(job_seed, &[2]),
                ..settings.model.clone()
            };
            let model = init_model(&model_cfg, &mut rng_for(model_cfg.rng_seed, &[]))?;
            let train_cfg = TrainConfig {
                seed: derive_seed(job_seed, &[3]),
                threshold: settings.threshold,
                ..settings.train.clone()
            };
            let (model, history) = train(
                model,
                &balanced.items,
                &val,
                &balanced.class_weights,
                &train_cfg,
            )?;
            record.best_epoch = Some(history.best_epoch);
            record.epochs_run = Some(history.epochs.len());
            record.scores = predict_batch(&model, &test)?;
        }
    }
    Ok(record)
}

/// All (outer, inner) jobs of one cell, in deterministic order.
pub fn cell_jobs(settings: &EvalSettings) -> Vec<(usize, usize)> {
    (0..settings.outer_folds)
        .flat_map(|o| (0..settings.inner_folds).map(move |i| (o, i)))
        .collect()
}

fn std_dev(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
    (mean, var.sqrt())
}

/// Pools job results into a report. `jobs` must cover every (outer, inner) pair.
pub fn assemble_report(
    data: &[MouseSequence],
    cfg: &ExperimentConfig,
    settings: &EvalSettings,
    seed: u64,
    mut jobs: Vec<JobRecord>,
) -> Result<EvalReport> {
    jobs.sort_by_key(|j| (j.outer, j.inner));
    let truth: Vec<Label> = data.iter().map(|s| s.label()).collect();
    let mut sums = vec![0.0; data.len()];
    let mut counts = vec![0usize; data.len()];
    for j in &jobs {
        for (&i, &s) in j.test.iter().zip(&j.scores) {
            sums[i] += s;
            counts[i] += 1;
        }
    }
    if counts.contains(&0) {
        return Err(Error::InvalidArgument(
            "some items were never scored".into(),
        ));
    }
    let pooled: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let n_events: usize = counts.iter().sum();
    let metrics = MetricsReport::new(&pooled, &truth, settings.threshold, n_events)?;

    let mut per_fold = Vec::new();
    for o in 0..settings.outer_folds {
        let Some(first) = jobs.iter().find(|j| j.outer == o) else {
            continue;
        };
        let idx = &first.test;
        let scores: Vec<f64> = idx.iter().map(|&i| pooled[i]).collect();
        let t: Vec<Label> = idx.iter().map(|&i| truth[i]).collect();
        let pred: Vec<Label> = scores
            .iter()
            .map(|&s| {
                if s >= settings.threshold {
                    Label::Good
                } else {
                    Label::Bad
                }
            })
            .collect();
        per_fold.push(FoldMetrics {
            outer: o,
            weighted_f1: weighted_metrics(&pred, &t).weighted.f1,
            roc_auc: roc_auc(&scores, &t).ok(),
        });
    }
    let (f1_mean, f1_std) = std_dev(&per_fold.iter().map(|f| f.weighted_f1).collect::<Vec<_>>());
    let aucs: Vec<f64> = per_fold.iter().filter_map(|f| f.roc_auc).collect();
    let (auc_mean, auc_std) = std_dev(&aucs);
    Ok(EvalReport {
        config: *cfg,
        name: cfg.to_string(),
        seed,
        metrics,
        pooled_scores: pooled,
        per_fold,
        dispersion: Dispersion {
            f1_mean,
            f1_std,
            auc_mean,
            auc_std,
        },
        n_models: jobs.len(),
        jobs,
    })
}

/// Runs one cell under nested cross-validation. Jobs run on the current
/// rayon pool; results do not depend on its size.
pub fn nested_cv(
    data: &[MouseSequence],
    cfg: &ExperimentConfig,
    settings: &EvalSettings,
    seed: u64,
) -> Result<EvalReport> {
    let labels: Vec<Label> = data.iter().map(|s| s.label()).collect();
    let plan = FoldPlan::new(&labels, settings.outer_folds, settings.inner_folds, seed)?;
    let jobs = cell_jobs(settings)
        .into_par_iter()
        .map(|(o, i)| run_job(data, cfg, settings, &plan, seed, o, i))
        .collect::<Result<Vec<_>>>()?;
    assemble_report(data, cfg, settings, seed, jobs)
}

/// Like [`nested_cv`] for several cells at once, flattening all cells' jobs
/// into one work queue.
pub fn nested_cv_many(
    data: &[MouseSequence],
    cells: &[ExperimentConfig],
    settings: &EvalSettings,
    seed: u64,
) -> Result<Vec<EvalReport>> {
    let labels: Vec<Label> = data.iter().map(|s| s.label()).collect();
    let plan = FoldPlan::new(&labels, settings.outer_folds, settings.inner_folds, seed)?;
    let work: Vec<(usize, usize, usize)> = (0..cells.len())
        .flat_map(|c| cell_jobs(settings).into_iter().map(move |(o, i)| (c, o, i)))
        .collect();
    let done = work
        .into_par_iter()
        .map(|(c, o, i)| run_job(data, &cells[c], settings, &plan, seed, o, i).map(|r| (c, r)))
        .collect::<Result<Vec<_>>>()?;
    let mut per_cell: Vec<Vec<JobRecord>> = vec![Vec::new(); cells.len()];
    for (c, r) in done {
        per_cell[c].push(r);
    }
    cells
        .iter()
        .zip(per_cell)
        .map(|(cfg, jobs)| assemble_report(data, cfg, settings, seed, jobs))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(bad: usize, good: usize) -> Vec<Label> {
        let mut v = vec![Label::Bad; bad];
        v.extend(vec![Label::Good; good]);
        v
    }

    #[test]
    fn folds_of_the_30_77_split() {
        let l = labels(30, 77);
        let folds = stratified_kfold(&l, 10, &mut rng_for(0, &[])).unwrap();
        for f in &folds {
            let bad = f.iter().filter(|&&i| l[i] == Label::Bad).count();
            assert_eq!(bad, 3);
            assert!((7..=8).contains(&(f.len() - bad)));
        }
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..107).collect::<Vec<_>>());
    }

    #[test]
    fn ten_items_ten_singletons() {
        let l = labels(5, 5);
        // per class 5 < 10 cannot be stratified
        assert!(matches!(
            stratified_kfold(&l, 10, &mut rng_for(0, &[])),
            Err(Error::Stratification { .. })
        ));
        let l = labels(10, 10);
        let folds = stratified_kfold(&l, 10, &mut rng_for(0, &[])).unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
        let l = labels(0, 10);
        let folds = stratified_kfold(&l, 10, &mut rng_for(0, &[])).unwrap();
        assert!(folds.iter().all(|f| f.len() == 1));
    }

    #[test]
    fn plan_splits_are_disjoint() {
        let l = labels(30, 77);
        let plan = FoldPlan::new(&l, 10, 5, 3).unwrap();
        for o in 0..10 {
            for i in 0..5 {
                let (tr, va, te) = plan.split(o, i);
                assert_eq!(tr.len() + va.len() + te.len(), 107);
                let s: HashSet<usize> = tr.iter().chain(&va).chain(&te).copied().collect();
                assert_eq!(s.len(), 107);
            }
        }
    }

    #[test]
    fn config_names_round_trip() {
        let mut all = ExperimentConfig::grid();
        assert_eq!(all.len(), 36);
        all.push(ExperimentConfig::constant_bad());
        all.push(ExperimentConfig::rf(BalanceKind::Adasyn));
        for c in all {
            assert_eq!(c.to_string().parse::<ExperimentConfig>().unwrap(), c);
        }
        assert!("bilstm:raw:maybe:smote"
            .parse::<ExperimentConfig>()
            .is_err());
    }
}
