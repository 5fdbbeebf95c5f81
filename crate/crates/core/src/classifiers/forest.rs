//! Random forest of Gini CART trees with bootstrap resampling and
//! per-split feature subsampling, tuned by student-grouped grid search.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::evaluation::roc::auc_from_scores;
use crate::features::{FeatureVector, LabeledExample, FEATURE_DIM};
use crate::seed;

use super::check_both_classes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MaxDepth {
    Limited(usize),
    Unlimited,
}

impl MaxDepth {
    fn allows(self, depth: usize) -> bool {
        match self {
            MaxDepth::Limited(d) => depth < d,
            MaxDepth::Unlimited => true,
        }
    }
}

impl fmt::Display for MaxDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxDepth::Limited(d) => write!(f, "{d}"),
            MaxDepth::Unlimited => f.write_str("unlimited"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridPoint {
    pub n_trees: usize,
    pub max_depth: MaxDepth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfGrid {
    pub tree_counts: Vec<usize>,
    pub max_depths: Vec<MaxDepth>,
}

impl Default for RfGrid {
    fn default() -> Self {
        Self {
            tree_counts: vec![50, 100, 200],
            max_depths: vec![
                MaxDepth::Limited(2),
                MaxDepth::Limited(4),
                MaxDepth::Limited(8),
                MaxDepth::Unlimited,
            ],
        }
    }
}

impl RfGrid {
    /// Grid points in preference order: fewer trees first, then shallower.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut points: Vec<GridPoint> = self
            .tree_counts
            .iter()
            .flat_map(|&n_trees| {
                self.max_depths
                    .iter()
                    .map(move |&max_depth| GridPoint { n_trees, max_depth })
            })
            .collect();
        points.sort();
        points.dedup();
        points
    }
}

/// Features tried per split: `ceil(sqrt(d))`.
pub fn features_per_split(dim: usize) -> usize {
    (dim as f64).sqrt().ceil() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        positive_fraction: f64,
        n_samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Nodes are stored in an arena; index 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
    /// Training indices drawn for this tree.
    pub bootstrap: Vec<usize>,
}

impl DecisionTree {
    /// Positive fraction of the leaf `x` falls into.
    pub fn predict_fraction(&self, x: &FeatureVector) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf {
                    positive_fraction, ..
                } => return *positive_fraction,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x.0[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn votes_positive(&self, x: &FeatureVector) -> bool {
        self.predict_fraction(x) > 0.5
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. }))
    }
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a, R> {
    x: &'a [FeatureVector],
    y: &'a [bool],
    max_depth: MaxDepth,
    n_candidates: usize,
    rng: &'a mut R,
    nodes: Vec<Node>,
}

impl<R: Rng> TreeBuilder<'_, R> {
    fn leaf(&mut self, idx: &[usize]) -> usize {
        let pos = idx.iter().filter(|&&i| self.y[i]).count();
        self.nodes.push(Node::Leaf {
            positive_fraction: pos as f64 / idx.len() as f64,
            n_samples: idx.len(),
        });
        self.nodes.len() - 1
    }

    /// Lowest weighted child Gini over the sampled features. Earlier
    /// candidates and lower thresholds win ties.
    fn best_split(&mut self, idx: &[usize]) -> Option<(usize, f64)> {
        let candidates = rand::seq::index::sample(self.rng, FEATURE_DIM, self.n_candidates).into_vec();
        let n = idx.len();
        let total_pos = idx.iter().filter(|&&i| self.y[i]).count();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut pairs: Vec<(f64, bool)> = Vec::with_capacity(n);
        for feature in candidates {
            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (self.x[i].0[feature], self.y[i])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for k in 0..n - 1 {
                if pairs[k].1 {
                    left_pos += 1;
                }
                let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
                if lo == hi {
                    continue;
                }
                let n_left = k + 1;
                let n_right = n - n_left;
                let impurity = (n_left as f64 * gini(left_pos, n_left)
                    + n_right as f64 * gini(total_pos - left_pos, n_right))
                    / n as f64;
                if best.is_none_or(|(b, _, _)| impurity < b) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some((impurity, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: &[usize], depth: usize) -> usize {
        let pos = idx.iter().filter(|&&i| self.y[i]).count();
        if pos == 0 || pos == idx.len() || idx.len() < 2 || !self.max_depth.allows(depth) {
            return self.leaf(idx);
        }
        let Some((feature, threshold)) = self.best_split(idx) else {
            return self.leaf(idx);
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.x[i].0[feature] <= threshold);
        let at = self.nodes.len();
        self.nodes.push(Node::Split {
            feature,
            threshold,
            left: 0,
            right: 0,
        });
        let left = self.grow(&left_idx, depth + 1);
        let right = self.grow(&right_idx, depth + 1);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }
}

/// Grows one tree on an explicit sample of training indices.
pub fn build_tree<R: Rng>(
    x: &[FeatureVector],
    y: &[bool],
    sample: Vec<usize>,
    max_depth: MaxDepth,
    rng: &mut R,
) -> DecisionTree {
    let mut builder = TreeBuilder {
        x,
        y,
        max_depth,
        n_candidates: features_per_split(FEATURE_DIM),
        rng,
        nodes: Vec::new(),
    };
    builder.grow(&sample, 0);
    DecisionTree {
        nodes: builder.nodes,
        bootstrap: sample,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<DecisionTree>,
    pub grid_point: GridPoint,
}

impl Forest {
    /// Fraction of trees voting positive.
    pub fn score(&self, x: &FeatureVector) -> f64 {
        let votes = self.trees.iter().filter(|t| t.votes_positive(x)).count();
        votes as f64 / self.trees.len() as f64
    }

    fn accuracy(&self, x: &[FeatureVector], y: &[bool]) -> f64 {
        let hits = x.iter().zip(y).filter(|(xi, &yi)| (self.score(xi) > 0.5) == yi).count();
        hits as f64 / x.len() as f64
    }
}

/// Trains `grid_point.n_trees` trees, each on its own bootstrap sample of
/// size `n` drawn from a seed derived from `(seed, tree index)`.
pub fn rf_train(x: &[FeatureVector], y: &[bool], grid_point: GridPoint, seed: u64) -> Result<Forest> {
    assert_eq!(x.len(), y.len());
    check_both_classes(y.iter().copied())?;
    let n = x.len();
    let trees = (0..grid_point.n_trees)
        .map(|t| {
            let mut rng = seed::rng(seed::derive(seed, &[t as u64]));
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            build_tree(x, y, sample, grid_point.max_depth, &mut rng)
        })
        .collect();
    Ok(Forest { trees, grid_point })
}

/// Outcome of the inner model selection.
#[derive(Debug, Clone, PartialEq)]
pub struct GridScore {
    pub point: GridPoint,
    /// Mean AUC over inner folds with both classes, or training accuracy
    /// when no inner fold qualifies.
    pub score: f64,
    pub by_accuracy: bool,
}

/// Student-grouped inner cross-validation over `grid`, then a refit of the
/// winner on all of `train`.
pub fn grid_search_rf(
    train: &[LabeledExample],
    grid: &RfGrid,
    inner_folds: usize,
    seed: u64,
) -> Result<(GridPoint, Forest)> {
    grid_search_rf_scored(train, grid, inner_folds, seed).map(|(best, forest, _)| (best, forest))
}

pub fn grid_search_rf_scored(
    train: &[LabeledExample],
    grid: &RfGrid,
    inner_folds: usize,
    seed: u64,
) -> Result<(GridPoint, Forest, Vec<GridScore>)> {
    check_both_classes(train.iter().map(|e| e.label))?;
    if inner_folds < 2 {
        return Err(Error::InvalidArgument(format!("inner_folds must be >= 2, got {inner_folds}")));
    }
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty random forest grid".into()));
    }

    let x: Vec<FeatureVector> = train.iter().map(|e| e.features).collect();
    let y: Vec<bool> = train.iter().map(|e| e.label).collect();

    // students in sorted order, dealt round-robin into folds
    let students: BTreeMap<&str, usize> = {
        let mut ids: Vec<&str> = train.iter().map(|e| e.student_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter().enumerate().map(|(i, s)| (s, i)).collect()
    };
    let n_folds = inner_folds.min(students.len());
    let fold_of: Vec<usize> = train.iter().map(|e| students[e.student_id.as_str()] % n_folds).collect();

    // (fold, train indices, test indices) for folds where AUC is defined
    let usable: Vec<(usize, Vec<usize>, Vec<usize>)> = if n_folds < 2 {
        Vec::new()
    } else {
        (0..n_folds)
            .filter_map(|f| {
                let (test, tr): (Vec<usize>, Vec<usize>) = (0..train.len()).partition(|&i| fold_of[i] == f);
                let defined = check_both_classes(test.iter().map(|&i| y[i])).is_ok()
                    && check_both_classes(tr.iter().map(|&i| y[i])).is_ok();
                defined.then_some((f, tr, test))
            })
            .collect()
    };

    let refit_seed = seed::derive(seed, &[0]);
    let mut scores = Vec::with_capacity(points.len());
    for &point in &points {
        let score = if usable.is_empty() {
            let forest = rf_train(&x, &y, point, refit_seed)?;
            GridScore {
                point,
                score: forest.accuracy(&x, &y),
                by_accuracy: true,
            }
        } else {
            let mut total = 0.0;
            for (f, tr, test) in &usable {
                let tx: Vec<FeatureVector> = tr.iter().map(|&i| x[i]).collect();
                let ty: Vec<bool> = tr.iter().map(|&i| y[i]).collect();
                let forest = rf_train(&tx, &ty, point, seed::derive(seed, &[1, *f as u64]))?;
                let s: Vec<f64> = test.iter().map(|&i| forest.score(&x[i])).collect();
                let l: Vec<bool> = test.iter().map(|&i| y[i]).collect();
                total += auc_from_scores(&s, &l)?;
            }
            GridScore {
                point,
                score: total / usable.len() as f64,
                by_accuracy: false,
            }
        };
        scores.push(score);
    }

    // points are already in tie-break order, so the first maximum wins
    let best = scores
        .iter()
        .fold(None::<&GridScore>, |acc, s| match acc {
            Some(a) if a.score >= s.score => Some(a),
            _ => Some(s),
        })
        .expect("non-empty grid")
        .point;
    let forest = rf_train(&x, &y, best, refit_seed)?;
    Ok((best, forest, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::test_util::{example, fv};
    use crate::ingest::ExamKind;

    fn threshold_data(n: usize) -> (Vec<FeatureVector>, Vec<bool>) {
        let mut rng = seed::rng(4);
        let x: Vec<FeatureVector> = (0..n)
            .map(|_| FeatureVector(std::array::from_fn(|_| rng.random_range(-1.0..1.0))))
            .collect();
        let y = x.iter().map(|v| v.0[0] > 0.0).collect();
        (x, y)
    }

    #[test]
    fn default_grid_order() {
        let pts = RfGrid::default().points();
        assert_eq!(pts.len(), 12);
        assert_eq!(pts[0], GridPoint { n_trees: 50, max_depth: MaxDepth::Limited(2) });
        assert_eq!(pts[3], GridPoint { n_trees: 50, max_depth: MaxDepth::Unlimited });
        assert_eq!(pts[11], GridPoint { n_trees: 200, max_depth: MaxDepth::Unlimited });
        assert_eq!(features_per_split(15), 4);
    }

    #[test]
    fn identical_samples_make_single_leaf() {
        let x = vec![fv(&[1.0, 2.0]); 4];
        let y = vec![true, false, true, true];
        let tree = build_tree(&x, &y, (0..4).collect(), MaxDepth::Unlimited, &mut seed::rng(0));
        assert_eq!(tree.nodes, vec![Node::Leaf { positive_fraction: 0.75, n_samples: 4 }]);
        assert_eq!(tree.predict_fraction(&x[0]), 0.75);
    }

    #[test]
    fn unanimous_stumps_score_one() {
        let stump = DecisionTree {
            nodes: vec![Node::Leaf { positive_fraction: 1.0, n_samples: 3 }],
            bootstrap: vec![0, 1, 2],
        };
        let forest = Forest {
            trees: vec![stump; 7],
            grid_point: GridPoint { n_trees: 7, max_depth: MaxDepth::Limited(1) },
        };
        assert_eq!(forest.score(&fv(&[0.3])), 1.0);
    }

    #[test]
    fn leaves_partition_bootstrap() {
        let (x, y) = threshold_data(40);
        let forest = rf_train(&x, &y, GridPoint { n_trees: 20, max_depth: MaxDepth::Limited(3) }, 1).unwrap();
        for tree in &forest.trees {
            let total: usize = tree
                .leaves()
                .map(|l| match l {
                    Node::Leaf { n_samples, .. } => *n_samples,
                    _ => unreachable!(),
                })
                .sum();
            assert_eq!(total, x.len());
            assert_eq!(tree.bootstrap.len(), x.len());
        }
    }

    #[test]
    fn noiseless_threshold_fits_exactly() {
        // every column carries the sign of feature 0, so any sampled
        // feature admits a perfect split
        let mut rng = seed::rng(6);
        let x: Vec<FeatureVector> = (0..30)
            .map(|i| {
                let t = rng.random_range(0.2..1.0) * if i % 2 == 0 { 1.0 } else { -1.0 };
                FeatureVector(std::array::from_fn(|_| t * rng.random_range(0.5..1.5)))
            })
            .collect();
        let y: Vec<bool> = x.iter().map(|v| v.0[0] > 0.0).collect();
        for point in RfGrid::default().points() {
            let forest = rf_train(&x, &y, point, 3).unwrap();
            assert_eq!(forest.accuracy(&x, &y), 1.0, "{point:?}");
        }
    }

    #[test]
    fn tree_beats_majority_baseline_on_its_bootstrap() {
        let mut rng = seed::rng(9);
        let x: Vec<FeatureVector> = (0..30)
            .map(|_| FeatureVector(std::array::from_fn(|_| rng.random_range(-1.0..1.0))))
            .collect();
        let y: Vec<bool> = (0..30).map(|_| rng.random::<bool>()).collect();
        let forest = rf_train(&x, &y, GridPoint { n_trees: 30, max_depth: MaxDepth::Limited(2) }, 5).unwrap();
        for tree in &forest.trees {
            let n = tree.bootstrap.len() as f64;
            let pos = tree.bootstrap.iter().filter(|&&i| y[i]).count() as f64;
            let baseline = pos.max(n - pos) / n;
            let hits = tree
                .bootstrap
                .iter()
                .filter(|&&i| {
                    let f = tree.predict_fraction(&x[i]);
                    // a 50/50 leaf is right for half its samples either way
                    if f == 0.5 { true } else { (f > 0.5) == y[i] }
                })
                .count() as f64;
            assert!(hits / n >= baseline - 1e-12);
        }
    }

    #[test]
    fn seeded_forests_identical() {
        let (x, y) = threshold_data(25);
        let p = GridPoint { n_trees: 15, max_depth: MaxDepth::Unlimited };
        assert_eq!(rf_train(&x, &y, p, 77).unwrap(), rf_train(&x, &y, p, 77).unwrap());
        assert_ne!(rf_train(&x, &y, p, 77).unwrap(), rf_train(&x, &y, p, 78).unwrap());
    }

    fn grouped(n_students: usize) -> Vec<LabeledExample> {
        let mut out = Vec::new();
        for s in 0..n_students {
            for (e, exam) in ExamKind::ALL.into_iter().enumerate() {
                let v = (s as f64 * 0.37 + e as f64 * 0.91).sin();
                out.push(example(&format!("S{s:02}"), exam, &[v, v * v], v > 0.1));
            }
        }
        out
    }

    #[test]
    fn grid_search_picks_from_grid_and_is_deterministic() {
        let data = grouped(9);
        let grid = RfGrid {
            tree_counts: vec![5, 10],
            max_depths: vec![MaxDepth::Limited(1), MaxDepth::Unlimited],
        };
        let (best, forest, scores) = grid_search_rf_scored(&data, &grid, 3, 21).unwrap();
        assert_eq!(scores.len(), 4);
        assert!(scores.iter().all(|s| !s.by_accuracy));
        assert_eq!(forest.grid_point, best);
        assert_eq!(forest.trees.len(), best.n_trees);
        let top = scores.iter().map(|s| s.score).fold(f64::NEG_INFINITY, f64::max);
        // first point reaching the top score
        assert_eq!(scores.iter().find(|s| s.score == top).unwrap().point, best);
        assert_eq!(grid_search_rf(&data, &grid, 3, 21).unwrap(), (best, forest));
    }

    #[test]
    fn grid_search_falls_back_to_training_accuracy() {
        // one student: no grouped inner split is possible
        let data = grouped(1)
            .into_iter()
            .enumerate()
            .map(|(i, mut e)| {
                e.label = i == 0;
                e
            })
            .collect::<Vec<_>>();
        let grid = RfGrid {
            tree_counts: vec![3],
            max_depths: vec![MaxDepth::Limited(1), MaxDepth::Limited(2)],
        };
        let (_, _, scores) = grid_search_rf_scored(&data, &grid, 3, 0).unwrap();
        assert!(scores.iter().all(|s| s.by_accuracy));
    }

    #[test]
    fn grid_search_guards() {
        let mut data = grouped(4);
        assert!(matches!(
            grid_search_rf(&data, &RfGrid::default(), 1, 0),
            Err(Error::InvalidArgument(_))
        ));
        for e in &mut data {
            e.label = true;
        }
        assert_eq!(
            grid_search_rf(&data, &RfGrid::default(), 3, 0),
            Err(Error::SingleClassTrainingSet)
        );
    }
}
