//! Random-forest baseline: CART trees with Gini splits on bootstrap samples.

use rand::seq::index;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::seeds::{rng_for, Rng};
use crate::seqdata::Label;

const N_FEATURES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: usize,
    pub bootstrap: bool,
    pub rng_seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            // ceil(sqrt(10))
            features_per_split: 4,
            bootstrap: true,
            rng_seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=N_FEATURES).contains(&self.features_per_split) {
            return Err(Error::Config(format!(
                "features_per_split {} not in 1..={N_FEATURES}",
                self.features_per_split
            )));
        }
        if self.n_trees == 0 || self.min_samples_leaf == 0 {
            return Err(Error::Config(
                "n_trees and min_samples_leaf must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        /// Training counts reaching the leaf, `[bad, good]`.
        counts: [usize; 2],
        prob_good: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        gini_decrease: f64,
    },
}

/// Nodes in a flat arena; node 0 is the root. `x[feature] <= threshold`
/// goes left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { prob_good, .. } => return *prob_good,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    at = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &DecisionTree, at: usize) -> usize {
            match &t.nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, *left).max(walk(t, *right)),
            }
        }
        walk(self, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub config: ForestConfig,
    pub trees: Vec<DecisionTree>,
}

pub fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = counts[1] as f64 / n;
    2.0 * p * (1.0 - p)
}

fn counts_of(idx: &[usize], labels: &[Label]) -> [usize; 2] {
    let mut c = [0, 0];
    for &i in idx {
        c[labels[i].index()] += 1;
    }
    c
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

/// Best midpoint split on one feature, honoring the minimum leaf size.
fn best_split_on(
    feature: usize,
    idx: &[usize],
    x: &[FeatureVector],
    labels: &[Label],
    min_leaf: usize,
) -> Option<Candidate> {
    let mut sorted: Vec<(f64, Label)> = idx.iter().map(|&i| (x[i].0[feature], labels[i])).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let total = {
        let mut c = [0, 0];
        for (_, l) in &sorted {
            c[l.index()] += 1;
        }
        c
    };
    let parent = gini(total);
    let mut left = [0usize; 2];
    let mut best: Option<Candidate> = None;
    for k in 0..n - 1 {
        left[sorted[k].1.index()] += 1;
        if sorted[k].0 == sorted[k + 1].0 {
            continue;
        }
        let nl = k + 1;
        let nr = n - nl;
        if nl < min_leaf || nr < min_leaf {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let decrease =
            parent - (nl as f64 / n as f64) * gini(left) - (nr as f64 / n as f64) * gini(right);
        if best.is_none_or(|b| decrease > b.decrease) {
            best = Some(Candidate {
                feature,
                threshold: 0.5 * (sorted[k].0 + sorted[k + 1].0),
                decrease,
            });
        }
    }
    best
}

fn choose_split(
    idx: &[usize],
    x: &[FeatureVector],
    labels: &[Label],
    cfg: &ForestConfig,
    rng: &mut Rng,
) -> Option<Candidate> {
    let mut features: Vec<usize> = index::sample(rng, N_FEATURES, N_FEATURES).into_vec();
    let (first, rest) = features.split_at_mut(cfg.features_per_split);
    first.sort_unstable();
    let scan = |fs: &[usize]| {
        fs.iter()
            .filter_map(|&f| best_split_on(f, idx, x, labels, cfg.min_samples_leaf))
            .fold(None, |acc: Option<Candidate>, c| match acc {
                Some(a) if a.decrease >= c.decrease => Some(a),
                _ => Some(c),
            })
    };
    // Keep drawing features when the sampled ones are all constant here.
    scan(first).or_else(|| {
        rest.sort_unstable();
        rest.iter()
            .find_map(|&f| best_split_on(f, idx, x, labels, cfg.min_samples_leaf))
    })
}

fn grow(
    tree: &mut DecisionTree,
    idx: Vec<usize>,
    depth: usize,
    x: &[FeatureVector],
    labels: &[Label],
    cfg: &ForestConfig,
    rng: &mut Rng,
) -> usize {
    let counts = counts_of(&idx, labels);
    let at = tree.nodes.len();
    let leaf = Node::Leaf {
        counts,
        prob_good: counts[1] as f64 / (counts[0] + counts[1]) as f64,
    };
    tree.nodes.push(leaf.clone());
    let pure = counts[0] == 0 || counts[1] == 0;
    let depth_capped = cfg.max_depth.is_some_and(|d| depth >= d);
    if pure || depth_capped || idx.len() < 2 * cfg.min_samples_leaf {
        return at;
    }
    let Some(split) = choose_split(&idx, x, labels, cfg, rng) else {
        return at;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| x[i].0[split.feature] <= split.threshold);
    let left = grow(tree, l, depth + 1, x, labels, cfg, rng);
    let right = grow(tree, r, depth + 1, x, labels, cfg, rng);
    tree.nodes[at] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
        gini_decrease: split.decrease,
    };
    at
}

pub fn train_tree(
    x: &[FeatureVector],
    labels: &[Label],
    cfg: &ForestConfig,
    rng: &mut Rng,
) -> DecisionTree {
    let n = x.len();
    let idx: Vec<usize> = if cfg.bootstrap {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let mut tree = DecisionTree { nodes: Vec::new() };
    grow(&mut tree, idx, 0, x, labels, cfg, rng);
    tree
}

/// Grows `n_trees` trees in parallel; tree `i` draws from stream `(seed, i)`.
pub fn train_forest(
    x: &[FeatureVector],
    labels: &[Label],
    cfg: &ForestConfig,
) -> Result<RandomForest> {
    cfg.validate()?;
    if x.len() != labels.len() {
        return Err(Error::InvalidArgument(
            "feature and label counts differ".into(),
        ));
    }
    let bad = labels.iter().filter(|l| **l == Label::Bad).count();
    if x.len() < 2 || bad == 0 || bad == labels.len() {
        return Err(Error::DegenerateClass(format!(
            "forest needs both classes, got {} bad / {} good",
            bad,
            labels.len() - bad
        )));
    }
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|i| train_tree(x, labels, cfg, &mut rng_for(cfg.rng_seed, &[i as u64])))
        .collect();
    Ok(RandomForest {
        config: cfg.clone(),
        trees,
    })
}

/// Mean of the trees' leaf probabilities for the good class.
pub fn forest_predict(forest: &RandomForest, v: &FeatureVector) -> f64 {
    let sum: f64 = forest.trees.iter().map(|t| t.predict(&v.0)).sum();
    sum / forest.trees.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(x0: f64) -> FeatureVector {
        let mut v = [0.0; 10];
        v[0] = x0;
        FeatureVector(v)
    }

    fn single_tree_cfg() -> ForestConfig {
        ForestConfig {
            n_trees: 1,
            bootstrap: false,
            features_per_split: 10,
            ..ForestConfig::default()
        }
    }

    #[test]
    fn separable_pair_splits_at_midpoint() {
        let x = [fv(0.0), fv(10.0)];
        let y = [Label::Bad, Label::Good];
        let f = train_forest(&x, &y, &single_tree_cfg()).unwrap();
        match &f.trees[0].nodes[0] {
            Node::Split {
                feature, threshold, ..
            } => assert_eq!((*feature, *threshold), (0, 5.0)),
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(forest_predict(&f, &fv(0.0)), 0.0);
        assert_eq!(forest_predict(&f, &fv(10.0)), 1.0);
        assert!(forest_predict(&f, &fv(10.0)) > 0.5);
    }

    #[test]
    fn pure_input_is_one_leaf() {
        let x = [fv(0.0), fv(3.0), fv(4.0)];
        let y = [Label::Good; 3];
        let mut rng = rng_for(0, &[]);
        let t = train_tree(&x, &y, &single_tree_cfg(), &mut rng);
        assert_eq!(t.nodes.len(), 1);
        assert!(matches!(t.nodes[0], Node::Leaf { prob_good, .. } if prob_good == 1.0));
        assert!(train_forest(&x, &y, &single_tree_cfg()).is_err());
    }

    #[test]
    fn votes_are_averaged() {
        let leaf = |p: f64| DecisionTree {
            nodes: vec![Node::Leaf {
                counts: [0, 0],
                prob_good: p,
            }],
        };
        let mut f = RandomForest {
            config: ForestConfig::default(),
            trees: vec![leaf(1.0), leaf(1.0)],
        };
        assert_eq!(forest_predict(&f, &fv(0.0)), 1.0);
        f.trees = vec![leaf(1.0), leaf(0.0)];
        assert_eq!(forest_predict(&f, &fv(0.0)), 0.5);
        f.trees.reverse();
        assert_eq!(forest_predict(&f, &fv(0.0)), 0.5);
    }

    #[test]
    fn same_seed_same_forest() {
        let x: Vec<FeatureVector> = (0..40).map(|i| fv((i * 7 % 13) as f64)).collect();
        let y: Vec<Label> = (0..40)
            .map(|i| if i % 3 == 0 { Label::Good } else { Label::Bad })
            .collect();
        let cfg = ForestConfig {
            n_trees: 8,
            rng_seed: 4,
            ..ForestConfig::default()
        };
        assert_eq!(
            train_forest(&x, &y, &cfg).unwrap(),
            train_forest(&x, &y, &cfg).unwrap()
        );
    }

    #[test]
    fn max_depth_is_respected() {
        let x: Vec<FeatureVector> = (0..30).map(|i| fv(i as f64)).collect();
        let y: Vec<Label> = (0..30)
            .map(|i| if i % 2 == 0 { Label::Good } else { Label::Bad })
            .collect();
        let cfg = ForestConfig {
            max_depth: Some(2),
            ..single_tree_cfg()
        };
        let f = train_forest(&x, &y, &cfg).unwrap();
        assert!(f.trees[0].depth() <= 2);
    }
}
