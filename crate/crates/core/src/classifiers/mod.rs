//! Binary classifiers behind one fit/score contract.
//!
//! Every trained model maps a feature vector to a real score that grows
//! with confidence in the positive (high-grade) class. Scores feed ROC
//! analysis directly, so only their order matters.

pub mod forest;
pub mod knn;
pub mod sgd;
pub mod svm;

use std::fmt;

use crate::error::{Error, Result};
use crate::features::{FeatureVector, LabeledExample};

pub use forest::{grid_search_rf, rf_train, Forest, GridPoint, MaxDepth, RfGrid};
pub use knn::KnnModel;
pub use sgd::{sgd_logreg_train, LogRegModel};
pub use svm::{rbf_kernel, smo_train, GammaRule, SvmModel};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_SMO_TOL: f64 = 1e-3;
pub const DEFAULT_SMO_MAX_PASSES: usize = 100;
pub const DEFAULT_LEARNING_RATE: f64 = 0.01;
pub const DEFAULT_EPOCHS: usize = 100;
pub const DEFAULT_L2: f64 = 1e-4;
pub const DEFAULT_INNER_FOLDS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierSpec {
    Knn {
        k: usize,
    },
    SvmRbf {
        c: f64,
        gamma: GammaRule,
        tol: f64,
        max_passes: usize,
    },
    SgdLogReg {
        learning_rate: f64,
        epochs: usize,
        l2: f64,
    },
    RandomForest {
        grid: RfGrid,
        inner_folds: usize,
    },
}

impl ClassifierSpec {
    pub fn default_knn() -> Self {
        ClassifierSpec::Knn { k: DEFAULT_K }
    }

    pub fn default_svm() -> Self {
        ClassifierSpec::SvmRbf {
            c: DEFAULT_C,
            gamma: GammaRule::Scale,
            tol: DEFAULT_SMO_TOL,
            max_passes: DEFAULT_SMO_MAX_PASSES,
        }
    }

    pub fn default_sgd() -> Self {
        ClassifierSpec::SgdLogReg {
            learning_rate: DEFAULT_LEARNING_RATE,
            epochs: DEFAULT_EPOCHS,
            l2: DEFAULT_L2,
        }
    }

    pub fn default_rf() -> Self {
        ClassifierSpec::RandomForest {
            grid: RfGrid::default(),
            inner_folds: DEFAULT_INNER_FOLDS,
        }
    }

    /// All four classifiers in reporting order: RF, SGD, SVM, KNN.
    pub fn defaults() -> Vec<Self> {
        vec![
            Self::default_rf(),
            Self::default_sgd(),
            Self::default_svm(),
            Self::default_knn(),
        ]
    }

    /// Lowercase identifier used in config keys and file names.
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::Knn { .. } => "knn",
            ClassifierSpec::SvmRbf { .. } => "svm",
            ClassifierSpec::SgdLogReg { .. } => "sgd",
            ClassifierSpec::RandomForest { .. } => "rf",
        }
    }

    /// Stable numeric tag for seed derivation, independent of which
    /// classifiers are enabled.
    pub fn seed_tag(&self) -> u64 {
        match self {
            ClassifierSpec::RandomForest { .. } => 0,
            ClassifierSpec::SgdLogReg { .. } => 1,
            ClassifierSpec::SvmRbf { .. } => 2,
            ClassifierSpec::Knn { .. } => 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match self {
            ClassifierSpec::Knn { k } if *k == 0 => bad("knn k must be positive".into()),
            ClassifierSpec::SvmRbf { c, .. } if !(*c > 0.0 && c.is_finite()) => bad(format!("svm c must be > 0, got {c}")),
            ClassifierSpec::SvmRbf { gamma: GammaRule::Fixed(g), .. } if !(*g > 0.0 && g.is_finite()) => {
                bad(format!("svm gamma must be > 0, got {g}"))
            }
            ClassifierSpec::SvmRbf { tol, .. } if !(*tol > 0.0) => bad(format!("svm tol must be > 0, got {tol}")),
            ClassifierSpec::SgdLogReg { learning_rate, .. } if !(*learning_rate > 0.0 && learning_rate.is_finite()) => {
                bad(format!("sgd learning_rate must be > 0, got {learning_rate}"))
            }
            ClassifierSpec::SgdLogReg { l2, .. } if !(*l2 >= 0.0 && l2.is_finite()) => bad(format!("sgd l2 must be >= 0, got {l2}")),
            ClassifierSpec::RandomForest { grid, inner_folds } => {
                if grid.tree_counts.is_empty() || grid.max_depths.is_empty() {
                    return bad("rf grid needs at least one tree count and one depth".into());
                }
                if grid.tree_counts.contains(&0) || grid.max_depths.contains(&MaxDepth::Limited(0)) {
                    return bad("rf tree counts and depths must be positive".into());
                }
                if *inner_folds < 2 {
                    return bad(format!("rf inner_folds must be >= 2, got {inner_folds}"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name().to_ascii_uppercase())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Knn(KnnModel),
    SvmRbf(SvmModel),
    SgdLogReg(LogRegModel),
    RandomForest(Forest),
}

impl TrainedModel {
    pub fn score(&self, features: &FeatureVector) -> f64 {
        match self {
            TrainedModel::Knn(m) => m.score(features),
            TrainedModel::SvmRbf(m) => m.decision_value(features),
            TrainedModel::SgdLogReg(m) => m.probability(features),
            TrainedModel::RandomForest(m) => m.score(features),
        }
    }
}

pub(crate) fn check_both_classes(labels: impl IntoIterator<Item = bool>) -> Result<()> {
    let (mut pos, mut neg) = (false, false);
    for l in labels {
        if l {
            pos = true
        } else {
            neg = true
        }
    }
    if pos && neg {
        Ok(())
    } else {
        Err(Error::SingleClassTrainingSet)
    }
}

/// Trains `spec` on `train`. KNN and SVM ignore `seed`.
pub fn fit(spec: &ClassifierSpec, train: &[LabeledExample], seed: u64) -> Result<TrainedModel> {
    spec.validate()?;
    check_both_classes(train.iter().map(|e| e.label))?;
    let x: Vec<FeatureVector> = train.iter().map(|e| e.features).collect();
    let y: Vec<bool> = train.iter().map(|e| e.label).collect();
    Ok(match spec {
        ClassifierSpec::Knn { k } => TrainedModel::Knn(KnnModel::fit(*k, &x, &y)?),
        ClassifierSpec::SvmRbf {
            c,
            gamma,
            tol,
            max_passes,
        } => {
            let gamma = gamma.resolve(&x);
            TrainedModel::SvmRbf(smo_train(&x, &y, *c, gamma, *tol, *max_passes)?)
        }
        ClassifierSpec::SgdLogReg {
            learning_rate,
            epochs,
            l2,
        } => TrainedModel::SgdLogReg(sgd_logreg_train(&x, &y, *learning_rate, *epochs, *l2, seed)?),
        ClassifierSpec::RandomForest { grid, inner_folds } => {
            let (_, forest) = grid_search_rf(train, grid, *inner_folds, seed)?;
            TrainedModel::RandomForest(forest)
        }
    })
}

pub fn score(model: &TrainedModel, features: &FeatureVector) -> f64 {
    model.score(features)
}
