//! Class balancing for the training partition: class weights, random
//! under/oversampling, SMOTE, ADASYN, and pixel-space augmentation
//! (coordinate distortion and leading-event trimming).
//!
//! Everything here works on training items only. Synthetic items keep the
//! session id of the original they were derived from in `source_id`, which
//! the evaluation harness uses to check that nothing leaks across splits.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::LabeledFeatures;
use crate::seeds::Rng;
use crate::seqdata::{Label, MouseSequence, Provenance, RepresentedSequence};

/// A training item that can be counted, copied and traced back to its origin.
pub trait Sample: Clone {
    fn label(&self) -> Label;
    fn source_id(&self) -> &str;
    fn provenance(&self) -> Provenance;
    /// A copy tagged as derived from `self`. `serial` disambiguates copies.
    fn derived(&self, provenance: Provenance, serial: usize) -> Self;
}

/// Items living in a fixed-shape vector space, as SMOTE and ADASYN need.
pub trait Interpolate: Sample {
    /// Flattened coordinates used for neighbor search (padding zeroed).
    fn point(&self) -> Vec<f64>;
    /// `self + lambda * (other - self)`, keeping `self`'s label and mask.
    fn interpolate(&self, other: &Self, lambda: f64, serial: usize) -> Self;
}

impl Sample for MouseSequence {
    fn label(&self) -> Label {
        MouseSequence::label(self)
    }
    fn source_id(&self) -> &str {
        self.origin_id()
    }
    fn provenance(&self) -> Provenance {
        self.provenance
    }
    fn derived(&self, provenance: Provenance, serial: usize) -> Self {
        let mut out = self.clone();
        let origin = self.origin_id().to_string();
        let tag = match provenance {
            Provenance::Augmented => "aug",
            _ => "dup",
        };
        out.session_id = format!("{origin}#{tag}{serial}");
        out.source_id = Some(origin);
        out.provenance = provenance;
        out
    }
}

impl Sample for RepresentedSequence {
    fn label(&self) -> Label {
        self.label
    }
    fn source_id(&self) -> &str {
        &self.source_id
    }
    fn provenance(&self) -> Provenance {
        self.provenance
    }
    fn derived(&self, provenance: Provenance, _serial: usize) -> Self {
        let mut out = self.clone();
        out.provenance = provenance;
        out
    }
}

impl Interpolate for RepresentedSequence {
    fn point(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        for (t, m) in self.mask.iter().enumerate() {
            if !m {
                v[t * self.dim..(t + 1) * self.dim].fill(0.0);
            }
        }
        v
    }

    fn interpolate(&self, other: &Self, lambda: f64, _serial: usize) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + lambda * (b - a))
            .collect();
        RepresentedSequence {
            values,
            dim: self.dim,
            mask: self.mask.clone(),
            label: self.label,
            source_id: self.source_id.clone(),
            provenance: Provenance::Resampled,
        }
    }
}

impl Sample for LabeledFeatures {
    fn label(&self) -> Label {
        self.label
    }
    fn source_id(&self) -> &str {
        &self.source_id
    }
    fn provenance(&self) -> Provenance {
        self.provenance
    }
    fn derived(&self, provenance: Provenance, _serial: usize) -> Self {
        let mut out = self.clone();
        out.provenance = provenance;
        out
    }
}

impl Interpolate for LabeledFeatures {
    fn point(&self) -> Vec<f64> {
        self.features.0.to_vec()
    }

    fn interpolate(&self, other: &Self, lambda: f64, _serial: usize) -> Self {
        let mut out = self.clone();
        for (a, b) in out.features.0.iter_mut().zip(other.features.0.iter()) {
            *a += lambda * (b - *a);
        }
        out.provenance = Provenance::Resampled;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceKind {
    None,
    ClassWeighted,
    RandomUndersample,
    RandomOversample,
    Smote,
    Adasyn,
    DistortionOnly,
    TrimmingOnly,
    DistortionThenTrimming,
    DistortionOrTrimming,
}

impl BalanceKind {
    /// The nine strategies of the experiment grid, in table order.
    pub const GRID: [BalanceKind; 9] = [
        BalanceKind::ClassWeighted,
        BalanceKind::RandomUndersample,
        BalanceKind::RandomOversample,
        BalanceKind::Smote,
        BalanceKind::Adasyn,
        BalanceKind::DistortionOnly,
        BalanceKind::TrimmingOnly,
        BalanceKind::DistortionThenTrimming,
        BalanceKind::DistortionOrTrimming,
    ];

    pub const ALL: [BalanceKind; 10] = [
        BalanceKind::None,
        BalanceKind::ClassWeighted,
        BalanceKind::RandomUndersample,
        BalanceKind::RandomOversample,
        BalanceKind::Smote,
        BalanceKind::Adasyn,
        BalanceKind::DistortionOnly,
        BalanceKind::TrimmingOnly,
        BalanceKind::DistortionThenTrimming,
        BalanceKind::DistortionOrTrimming,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BalanceKind::None => "none",
            BalanceKind::ClassWeighted => "class_weighted",
            BalanceKind::RandomUndersample => "random_undersample",
            BalanceKind::RandomOversample => "random_oversample",
            BalanceKind::Smote => "smote",
            BalanceKind::Adasyn => "adasyn",
            BalanceKind::DistortionOnly => "distortion_only",
            BalanceKind::TrimmingOnly => "trimming_only",
            BalanceKind::DistortionThenTrimming => "distortion_then_trimming",
            BalanceKind::DistortionOrTrimming => "distortion_or_trimming",
        }
    }

    pub fn is_augmentation(self) -> bool {
        matches!(
            self,
            BalanceKind::DistortionOnly
                | BalanceKind::TrimmingOnly
                | BalanceKind::DistortionThenTrimming
                | BalanceKind::DistortionOrTrimming
        )
    }
}

impl fmt::Display for BalanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BalanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match norm.as_str() {
            "weighted" => "class_weighted",
            "undersample" | "undersampling" => "random_undersample",
            "oversample" | "oversampling" => "random_oversample",
            other => other,
        };
        BalanceKind::ALL
            .into_iter()
            .find(|k| k.name() == alias)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown balance strategy {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceStrategy {
    pub kind: BalanceKind,
    pub k_neighbors: usize,
    pub target_per_class: usize,
    pub max_distortion_px: f64,
    pub max_trim_steps: usize,
}

impl BalanceStrategy {
    pub fn new(kind: BalanceKind) -> Self {
        BalanceStrategy {
            kind,
            k_neighbors: 5,
            target_per_class: 128,
            max_distortion_px: 2.0,
            max_trim_steps: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub bad: f64,
    pub good: f64,
}

impl ClassWeights {
    pub const UNIT: ClassWeights = ClassWeights {
        bad: 1.0,
        good: 1.0,
    };

    pub fn get(&self, label: Label) -> f64 {
        match label {
            Label::Bad => self.bad,
            Label::Good => self.good,
        }
    }
}

/// Ties a synthetic item to the training items it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRecord {
    /// Position in [`BalancedTrainingSet::items`].
    pub item: usize,
    /// Position of the seed item in the input training set.
    pub source: usize,
    /// Interpolation partner (SMOTE/ADASYN only).
    pub neighbor: Option<usize>,
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancedTrainingSet<T> {
    pub items: Vec<T>,
    pub class_weights: ClassWeights,
    pub synthetic: Vec<SyntheticRecord>,
}

impl<T: Sample> BalancedTrainingSet<T> {
    fn unchanged(items: Vec<T>, class_weights: ClassWeights) -> Self {
        BalancedTrainingSet {
            items,
            class_weights,
            synthetic: Vec::new(),
        }
    }

    /// (bad, good) item counts.
    pub fn class_counts(&self) -> (usize, usize) {
        label_counts(self.items.iter().map(|i| i.label()))
    }

    /// Per class: (originals, synthetic).
    pub fn provenance_counts(&self) -> BTreeMap<Label, (usize, usize)> {
        let mut out = BTreeMap::new();
        for it in &self.items {
            let e = out.entry(it.label()).or_insert((0, 0));
            if it.provenance().is_original() {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
        out
    }
}

fn label_counts(labels: impl Iterator<Item = Label>) -> (usize, usize) {
    labels.fold((0, 0), |(b, g), l| match l {
        Label::Bad => (b + 1, g),
        Label::Good => (b, g + 1),
    })
}

fn minority_majority(counts: (usize, usize)) -> Result<(Label, Label)> {
    let (bad, good) = counts;
    if bad == 0 || good == 0 {
        return Err(Error::DegenerateClass(format!(
            "need both classes, got {bad} bad / {good} good"
        )));
    }
    Ok(if bad <= good {
        (Label::Bad, Label::Good)
    } else {
        (Label::Good, Label::Bad)
    })
}

/// Inverse-frequency weights `N / (2 N_c)`.
pub fn compute_class_weights(labels: &[Label]) -> Result<ClassWeights> {
    let (bad, good) = label_counts(labels.iter().copied());
    minority_majority((bad, good))?;
    let n = labels.len() as f64;
    Ok(ClassWeights {
        bad: n / (2.0 * bad as f64),
        good: n / (2.0 * good as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleKind {
    Under,
    Over,
}

pub fn random_resample<T: Sample>(
    train: &[T],
    kind: ResampleKind,
    rng: &mut Rng,
) -> Result<BalancedTrainingSet<T>> {
    let counts = label_counts(train.iter().map(|t| t.label()));
    let (minority, majority) = minority_majority(counts)?;
    let min_idx: Vec<usize> = (0..train.len())
        .filter(|&i| train[i].label() == minority)
        .collect();
    let maj_idx: Vec<usize> = (0..train.len())
        .filter(|&i| train[i].label() == majority)
        .collect();
    if min_idx.len() == maj_idx.len() {
        return Ok(BalancedTrainingSet::unchanged(
            train.to_vec(),
            ClassWeights::UNIT,
        ));
    }
    match kind {
        ResampleKind::Under => {
            let mut keep: Vec<usize> = index::sample(rng, maj_idx.len(), min_idx.len())
                .into_iter()
                .map(|j| maj_idx[j])
                .chain(min_idx.iter().copied())
                .collect();
            keep.sort_unstable();
            let items = keep.into_iter().map(|i| train[i].clone()).collect();
            Ok(BalancedTrainingSet::unchanged(items, ClassWeights::UNIT))
        }
        ResampleKind::Over => {
            let mut out = BalancedTrainingSet::unchanged(train.to_vec(), ClassWeights::UNIT);
            for serial in 0..maj_idx.len() - min_idx.len() {
                let src = min_idx[rng.random_range(0..min_idx.len())];
                out.synthetic.push(SyntheticRecord {
                    item: out.items.len(),
                    source: src,
                    neighbor: None,
                    lambda: None,
                });
                out.items
                    .push(train[src].derived(Provenance::Resampled, serial));
            }
            Ok(out)
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices (into `candidates`) of the `k` nearest points to `points[query]`,
/// excluding the query itself. Ties break on lower index.
fn nearest(points: &[Vec<f64>], query: usize, candidates: &[usize], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = candidates
        .iter()
        .filter(|&&c| c != query)
        .map(|&c| (sq_dist(&points[query], &points[c]), c))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, c)| c).collect()
}

struct MinorityView {
    minority: Label,
    min_idx: Vec<usize>,
    gap: usize,
    points: Vec<Vec<f64>>,
}

fn minority_view<T: Interpolate>(train: &[T], k: usize) -> Result<Option<MinorityView>> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "k_neighbors must be at least 1".into(),
        ));
    }
    let counts = label_counts(train.iter().map(|t| t.label()));
    let (minority, majority) = minority_majority(counts)?;
    let min_idx: Vec<usize> = (0..train.len())
        .filter(|&i| train[i].label() == minority)
        .collect();
    let n_maj = train.iter().filter(|t| t.label() == majority).count();
    if min_idx.len() == n_maj {
        return Ok(None);
    }
    if min_idx.len() <= k {
        return Err(Error::InsufficientNeighbors {
            minority: min_idx.len(),
            k,
        });
    }
    Ok(Some(MinorityView {
        minority,
        gap: n_maj - min_idx.len(),
        min_idx,
        points: train.iter().map(|t| t.point()).collect(),
    }))
}

fn push_interpolated<T: Interpolate>(
    out: &mut BalancedTrainingSet<T>,
    train: &[T],
    a: usize,
    b: usize,
    rng: &mut Rng,
) {
    let lambda: f64 = rng.random();
    let serial = out.synthetic.len();
    out.synthetic.push(SyntheticRecord {
        item: out.items.len(),
        source: a,
        neighbor: Some(b),
        lambda: Some(lambda),
    });
    out.items
        .push(train[a].interpolate(&train[b], lambda, serial));
}

/// Grows the minority class to the majority size by interpolating between a
/// random minority item and one of its `k` nearest minority neighbors.
pub fn smote<T: Interpolate>(
    train: &[T],
    k: usize,
    rng: &mut Rng,
) -> Result<BalancedTrainingSet<T>> {
    let mut out = BalancedTrainingSet::unchanged(train.to_vec(), ClassWeights::UNIT);
    let Some(view) = minority_view(train, k)? else {
        return Ok(out);
    };
    let neighbors: Vec<Vec<usize>> = view
        .min_idx
        .iter()
        .map(|&i| nearest(&view.points, i, &view.min_idx, k))
        .collect();
    for _ in 0..view.gap {
        let j = rng.random_range(0..view.min_idx.len());
        let b = neighbors[j][rng.random_range(0..neighbors[j].len())];
        push_interpolated(&mut out, train, view.min_idx[j], b, rng);
    }
    Ok(out)
}

/// Splits `total` proportionally to `weights` with largest-remainder
/// rounding, so the parts always sum to `total`. Ties go to lower indices.
pub fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || !(sum > 0.0) {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut parts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = parts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        parts[i] += 1;
    }
    parts
}

/// ADASYN: like SMOTE, but the number of synthetic items seeded by each
/// minority item is proportional to the share of majority items among its
/// `k` nearest neighbors in the whole training set. Falls back to SMOTE when
/// no minority item borders the majority class.
pub fn adasyn<T: Interpolate>(
    train: &[T],
    k: usize,
    rng: &mut Rng,
) -> Result<BalancedTrainingSet<T>> {
    let Some(view) = minority_view(train, k)? else {
        return Ok(BalancedTrainingSet::unchanged(
            train.to_vec(),
            ClassWeights::UNIT,
        ));
    };
    let all: Vec<usize> = (0..train.len()).collect();
    let ratios: Vec<f64> = view
        .min_idx
        .iter()
        .map(|&i| {
            let nn = nearest(&view.points, i, &all, k);
            let maj = nn
                .iter()
                .filter(|&&c| train[c].label() != view.minority)
                .count();
            maj as f64 / k as f64
        })
        .collect();
    if ratios.iter().all(|r| *r == 0.0) {
        return smote(train, k, rng);
    }
    let per_item = largest_remainder(view.gap, &ratios);
    let mut out = BalancedTrainingSet::unchanged(train.to_vec(), ClassWeights::UNIT);
    for (j, &g) in per_item.iter().enumerate() {
        let a = view.min_idx[j];
        let nn = nearest(&view.points, a, &view.min_idx, k);
        for _ in 0..g {
            let b = nn[rng.random_range(0..nn.len())];
            push_interpolated(&mut out, train, a, b, rng);
        }
    }
    Ok(out)
}

fn mark_augmented(seq: &mut MouseSequence) {
    if seq.source_id.is_none() {
        seq.source_id = Some(seq.session_id.clone());
    }
    seq.provenance = Provenance::Augmented;
}

/// Shifts every move position by an independent uniform draw in
/// `[-max_px, max_px]` per axis, clamped to the screen.
pub fn distort(seq: &MouseSequence, rng: &mut Rng, max_px: f64) -> MouseSequence {
    let mut out = seq.clone();
    mark_augmented(&mut out);
    if !(max_px > 0.0) {
        return out;
    }
    let (w, h) = (seq.screen.width, seq.screen.height);
    for e in out.events.iter_mut().filter(|e| e.is_move()) {
        let dx = rng.random_range(-max_px..=max_px);
        let dy = rng.random_range(-max_px..=max_px);
        // an original already past the edge may stay where it was
        e.x = (e.x + dx).clamp(e.x.min(0.0), e.x.max(w));
        e.y = (e.y + dy).clamp(e.y.min(0.0), e.y.max(h));
    }
    out
}

/// Drops the first `n` move events (and anything recorded before the first
/// kept move), never leaving fewer than two moves.
pub fn trim_by(seq: &MouseSequence, n: usize) -> MouseSequence {
    let moves = seq.move_count();
    let n = n.min(moves.saturating_sub(2));
    let mut out = seq.clone();
    mark_augmented(&mut out);
    if n == 0 {
        return out;
    }
    let cut = seq
        .events
        .iter()
        .enumerate()
        .filter(|(_, e)| e.is_move())
        .nth(n)
        .map(|(i, _)| i)
        .expect("n < move count");
    out.events.drain(..cut);
    out
}

/// [`trim_by`] with `n ~ Uniform{0, ..., max_steps}`.
pub fn trim(seq: &MouseSequence, rng: &mut Rng, max_steps: usize) -> MouseSequence {
    let n = rng.random_range(0..=max_steps);
    trim_by(seq, n)
}

fn augment_one(seq: &MouseSequence, strategy: &BalanceStrategy, rng: &mut Rng) -> MouseSequence {
    let px = strategy.max_distortion_px;
    let steps = strategy.max_trim_steps;
    match strategy.kind {
        BalanceKind::DistortionOnly => distort(seq, rng, px),
        BalanceKind::TrimmingOnly => trim(seq, rng, steps),
        BalanceKind::DistortionThenTrimming => trim(&distort(seq, rng, px), rng, steps),
        BalanceKind::DistortionOrTrimming => {
            if rng.random_bool(0.5) {
                distort(seq, rng, px)
            } else {
                trim(seq, rng, steps)
            }
        }
        other => unreachable!("{other} is not an augmentation strategy"),
    }
}

/// Augments both classes up to `target_per_class` (or the larger class size
/// when that is bigger) and then drops random augmented majority items until
/// the classes are level. Originals are never removed.
pub fn augment_training_set(
    train: &[MouseSequence],
    strategy: &BalanceStrategy,
    rng: &mut Rng,
) -> Result<BalancedTrainingSet<MouseSequence>> {
    if !strategy.kind.is_augmentation() {
        return Err(Error::InvalidArgument(format!(
            "{} is not an augmentation strategy",
            strategy.kind
        )));
    }
    let counts = label_counts(train.iter().map(|t| t.label()));
    minority_majority(counts)?;
    let target = strategy.target_per_class.max(counts.0).max(counts.1);

    let mut items: Vec<MouseSequence> = train.to_vec();
    let mut records = Vec::new();
    for label in Label::ALL {
        let pool: Vec<usize> = (0..train.len())
            .filter(|&i| train[i].label() == label)
            .collect();
        for _ in pool.len()..target {
            let src = pool[rng.random_range(0..pool.len())];
            let mut aug = augment_one(&train[src], strategy, rng);
            let serial = records.len();
            aug.session_id = format!("{}#aug{serial}", train[src].origin_id());
            records.push(SyntheticRecord {
                item: items.len(),
                source: src,
                neighbor: None,
                lambda: None,
            });
            items.push(aug);
        }
    }

    // Level the classes by removing augmented items from the larger one.
    let (bad, good) = label_counts(items.iter().map(|s| s.label()));
    if bad != good {
        let larger = if bad > good { Label::Bad } else { Label::Good };
        let removable: Vec<usize> = records
            .iter()
            .map(|r| r.item)
            .filter(|&i| items[i].label() == larger)
            .collect();
        let excess = bad.abs_diff(good);
        let mut drop: Vec<usize> = index::sample(rng, removable.len(), excess)
            .into_iter()
            .map(|j| removable[j])
            .collect();
        drop.sort_unstable();
        let mut keep_items = Vec::with_capacity(items.len() - excess);
        let mut keep_records = Vec::with_capacity(records.len() - excess);
        let mut rec_iter = records.into_iter().peekable();
        for (i, it) in items.into_iter().enumerate() {
            let rec = match rec_iter.peek() {
                Some(r) if r.item == i => rec_iter.next(),
                _ => None,
            };
            if drop.binary_search(&i).is_ok() {
                continue;
            }
            if let Some(mut r) = rec {
                r.item = keep_items.len();
                keep_records.push(r);
            }
            keep_items.push(it);
        }
        items = keep_items;
        records = keep_records;
    }

    Ok(BalancedTrainingSet {
        items,
        class_weights: ClassWeights::UNIT,
        synthetic: records,
    })
}

/// Applies a strategy to raw training sessions and returns items in the
/// model's input space. Augmentation runs on pixel-space sessions before
/// `represent`; interpolating strategies run after it.
pub fn balance_training<T, F>(
    train: &[MouseSequence],
    strategy: &BalanceStrategy,
    represent: F,
    rng: &mut Rng,
) -> Result<BalancedTrainingSet<T>>
where
    T: Interpolate,
    F: Fn(&MouseSequence) -> Result<T>,
{
    if strategy.kind.is_augmentation() {
        let aug = augment_training_set(train, strategy, rng)?;
        let items = aug
            .items
            .iter()
            .map(&represent)
            .collect::<Result<Vec<_>>>()?;
        return Ok(BalancedTrainingSet {
            items,
            class_weights: aug.class_weights,
            synthetic: aug.synthetic,
        });
    }
    let base = train.iter().map(&represent).collect::<Result<Vec<T>>>()?;
    match strategy.kind {
        BalanceKind::None => Ok(BalancedTrainingSet::unchanged(base, ClassWeights::UNIT)),
        BalanceKind::ClassWeighted => {
            let labels: Vec<Label> = base.iter().map(|b| b.label()).collect();
            let w = compute_class_weights(&labels)?;
            Ok(BalancedTrainingSet::unchanged(base, w))
        }
        BalanceKind::RandomUndersample => random_resample(&base, ResampleKind::Under, rng),
        BalanceKind::RandomOversample => random_resample(&base, ResampleKind::Over, rng),
        BalanceKind::Smote => smote(&base, strategy.k_neighbors, rng),
        BalanceKind::Adasyn => adasyn(&base, strategy.k_neighbors, rng),
        _ => unreachable!("augmentation handled above"),
    }
}
