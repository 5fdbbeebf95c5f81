//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! dataset_root = data
//! roster_path = roster.csv
//! preprocess.ma_window = 5
//! classifiers.enabled = rf, sgd, svm, knn
//! ```
//!
//! Unknown keys are rejected. Relative paths in a config file resolve
//! against the file's directory; paths given as command-line overrides
//! resolve against the working directory.

use std::fs;
use std::path::{Path, PathBuf};

use stressgrade::classifiers::{
    ClassifierSpec, GammaRule, MaxDepth, RfGrid, DEFAULT_C, DEFAULT_EPOCHS, DEFAULT_INNER_FOLDS, DEFAULT_K,
    DEFAULT_L2, DEFAULT_LEARNING_RATE, DEFAULT_SMO_MAX_PASSES, DEFAULT_SMO_TOL,
};
use stressgrade::features::DEFAULT_THRESHOLD;
use stressgrade::preprocess::{NormScope, PreprocessConfig};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    Unreadable { path: PathBuf, message: String },
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("override {0:?} is not of the form key=value")]
    BadOverride(String),
    #[error("missing required setting {0}")]
    Missing(&'static str),
}

pub const CLASSIFIER_NAMES: [&str; 4] = ["rf", "sgd", "svm", "knn"];

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSettings {
    /// Subset of [`CLASSIFIER_NAMES`].
    pub enabled: Vec<String>,
    pub knn_k: usize,
    pub svm_c: f64,
    pub svm_gamma: GammaRule,
    pub svm_tol: f64,
    pub svm_max_passes: usize,
    pub sgd_learning_rate: f64,
    pub sgd_epochs: usize,
    pub sgd_l2: f64,
    pub rf_grid: RfGrid,
    pub rf_inner_folds: usize,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        Self {
            enabled: CLASSIFIER_NAMES.iter().map(|s| s.to_string()).collect(),
            knn_k: DEFAULT_K,
            svm_c: DEFAULT_C,
            svm_gamma: GammaRule::Scale,
            svm_tol: DEFAULT_SMO_TOL,
            svm_max_passes: DEFAULT_SMO_MAX_PASSES,
            sgd_learning_rate: DEFAULT_LEARNING_RATE,
            sgd_epochs: DEFAULT_EPOCHS,
            sgd_l2: DEFAULT_L2,
            rf_grid: RfGrid::default(),
            rf_inner_folds: DEFAULT_INNER_FOLDS,
        }
    }
}

impl ClassifierSettings {
    /// Enabled classifiers in reporting order RF, SGD, SVM, KNN.
    pub fn specs(&self) -> Vec<ClassifierSpec> {
        CLASSIFIER_NAMES
            .iter()
            .filter(|name| self.enabled.iter().any(|e| e == *name))
            .map(|name| match *name {
                "rf" => ClassifierSpec::RandomForest {
                    grid: self.rf_grid.clone(),
                    inner_folds: self.rf_inner_folds,
                },
                "sgd" => ClassifierSpec::SgdLogReg {
                    learning_rate: self.sgd_learning_rate,
                    epochs: self.sgd_epochs,
                    l2: self.sgd_l2,
                },
                "svm" => ClassifierSpec::SvmRbf {
                    c: self.svm_c,
                    gamma: self.svm_gamma,
                    tol: self.svm_tol,
                    max_passes: self.svm_max_passes,
                },
                _ => ClassifierSpec::Knn { k: self.knn_k },
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSettings {
    pub seed: u64,
    pub n_students: usize,
    pub correlation: f64,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            seed: 7,
            n_students: 10,
            correlation: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset_root: Option<PathBuf>,
    pub roster_path: Option<PathBuf>,
    pub exclusions: Vec<String>,
    pub preprocess: PreprocessConfig,
    pub threshold: f64,
    pub classifiers: ClassifierSettings,
    pub repetitions: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    pub synth: SynthSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset_root: None,
            roster_path: None,
            exclusions: Vec::new(),
            preprocess: PreprocessConfig::default(),
            threshold: DEFAULT_THRESHOLD,
            classifiers: ClassifierSettings::default(),
            repetitions: 10,
            base_seed: 42,
            output_dir: PathBuf::from("results"),
            synth: SynthSettings::default(),
        }
    }
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_owned(),
            })?;
            config.set(key.trim(), value.trim(), base_dir)?;
        }
        Ok(config)
    }

    /// Applies a `key=value` command-line override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError::BadOverride(assignment.to_owned()))?;
        self.set(key.trim(), value.trim(), Path::new(""))
    }

    pub fn set(&mut self, key: &str, value: &str, base_dir: &Path) -> Result<(), ConfigError> {
        let invalid = |reason: String| ConfigError::InvalidValue {
            key: key.to_owned(),
            value: value.to_owned(),
            reason,
        };
        fn num<T: std::str::FromStr>(value: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            value.parse::<T>().map_err(|e| e.to_string())
        }
        let positive = |v: f64| if v > 0.0 && v.is_finite() { Ok(v) } else { Err("must be > 0".to_owned()) };
        let path = |v: &str| base_dir.join(v);

        let c = &mut self.classifiers;
        match key {
            "dataset_root" => self.dataset_root = Some(path(value)),
            "roster_path" => self.roster_path = Some(path(value)),
            "output_dir" => self.output_dir = path(value),
            "exclusions" => self.exclusions = list(value),
            "threshold" => {
                let t: f64 = num(value).map_err(invalid)?;
                if !(0.0..=100.0).contains(&t) {
                    return Err(invalid("must be a percentage in [0, 100]".into()));
                }
                self.threshold = t;
            }
            "repetitions" => {
                let r: usize = num(value).map_err(invalid)?;
                if r == 0 {
                    return Err(invalid("must be >= 1".into()));
                }
                self.repetitions = r;
            }
            "base_seed" => self.base_seed = num(value).map_err(invalid)?,
            "preprocess.ma_window" => {
                let w: usize = num(value).map_err(invalid)?;
                if w == 0 || w % 2 == 0 {
                    return Err(invalid("must be odd and positive".into()));
                }
                self.preprocess.ma_window = w;
            }
            "preprocess.norm_scope" => self.preprocess.norm_scope = value.parse::<NormScope>().map_err(invalid)?,
            "classifiers.enabled" => {
                let names = list(value);
                if let Some(bad) = names.iter().find(|n| !CLASSIFIER_NAMES.contains(&n.as_str())) {
                    return Err(invalid(format!("unknown classifier {bad:?}")));
                }
                if names.is_empty() {
                    return Err(invalid("enable at least one classifier".into()));
                }
                c.enabled = names;
            }
            "classifiers.knn.k" => {
                c.knn_k = num(value).map_err(invalid)?;
                if c.knn_k == 0 {
                    return Err(invalid("must be >= 1".into()));
                }
            }
            "classifiers.svm.c" => c.svm_c = num(value).and_then(positive).map_err(invalid)?,
            "classifiers.svm.gamma" => {
                c.svm_gamma = if value.eq_ignore_ascii_case("scale") {
                    GammaRule::Scale
                } else {
                    GammaRule::Fixed(num(value).and_then(positive).map_err(invalid)?)
                }
            }
            "classifiers.svm.tol" => c.svm_tol = num(value).and_then(positive).map_err(invalid)?,
            "classifiers.svm.max_passes" => c.svm_max_passes = num(value).map_err(invalid)?,
            "classifiers.sgd.learning_rate" => c.sgd_learning_rate = num(value).and_then(positive).map_err(invalid)?,
            "classifiers.sgd.epochs" => c.sgd_epochs = num(value).map_err(invalid)?,
            "classifiers.sgd.l2" => {
                let l2: f64 = num(value).map_err(invalid)?;
                if !(l2 >= 0.0 && l2.is_finite()) {
                    return Err(invalid("must be >= 0".into()));
                }
                c.sgd_l2 = l2;
            }
            "classifiers.rf.tree_counts" => {
                let counts = list(value)
                    .iter()
                    .map(|v| num::<usize>(v))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(invalid)?;
                if counts.is_empty() || counts.contains(&0) {
                    return Err(invalid("need one or more positive tree counts".into()));
                }
                c.rf_grid.tree_counts = counts;
            }
            "classifiers.rf.max_depths" => {
                let depths = list(value)
                    .iter()
                    .map(|v| {
                        if v.eq_ignore_ascii_case("unlimited") {
                            Ok(MaxDepth::Unlimited)
                        } else {
                            match num::<usize>(v)? {
                                0 => Err("depth must be positive".to_owned()),
                                d => Ok(MaxDepth::Limited(d)),
                            }
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(invalid)?;
                if depths.is_empty() {
                    return Err(invalid("need one or more depths".into()));
                }
                c.rf_grid.max_depths = depths;
            }
            "classifiers.rf.inner_folds" => {
                c.rf_inner_folds = num(value).map_err(invalid)?;
                if c.rf_inner_folds < 2 {
                    return Err(invalid("must be >= 2".into()));
                }
            }
            "synth.seed" => self.synth.seed = num(value).map_err(invalid)?,
            "synth.n_students" => self.synth.n_students = num(value).map_err(invalid)?,
            "synth.correlation" => {
                let r: f64 = num(value).map_err(invalid)?;
                if !(0.0..=1.0).contains(&r) {
                    return Err(invalid("must lie in [0, 1]".into()));
                }
                self.synth.correlation = r;
            }
            _ => return Err(ConfigError::UnknownKey(key.to_owned())),
        }
        Ok(())
    }

    pub fn dataset_root(&self) -> Result<&Path, ConfigError> {
        self.dataset_root.as_deref().ok_or(ConfigError::Missing("dataset_root"))
    }

    pub fn roster_path(&self) -> Result<&Path, ConfigError> {
        self.roster_path.as_deref().ok_or(ConfigError::Missing("roster_path"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.threshold, 80.0);
        assert_eq!(c.repetitions, 10);
        assert_eq!(c.base_seed, 42);
        assert_eq!(c.preprocess.ma_window, 5);
        assert_eq!(c.preprocess.norm_scope, NormScope::PerStudentPooled);
        let names: Vec<_> = c.classifiers.specs().iter().map(|s| s.name()).collect();
        assert_eq!(names, CLASSIFIER_NAMES);
        assert_eq!(c.classifiers.specs(), ClassifierSpec::defaults());
    }

    #[test]
    fn parses_file_with_comments_and_relative_paths() {
        let text = "# cohort\ndataset_root = data   # inline\nroster_path=roster.csv\n\nexclusions = S03, S11\npreprocess.norm_scope = per_session_signal\nclassifiers.enabled = knn, svm\nclassifiers.svm.gamma = 0.5\nclassifiers.rf.max_depths = 3, unlimited\n";
        let c = RunConfig::parse(text, Path::new("/cfg")).unwrap();
        assert_eq!(c.dataset_root, Some(PathBuf::from("/cfg/data")));
        assert_eq!(c.roster_path, Some(PathBuf::from("/cfg/roster.csv")));
        assert_eq!(c.exclusions, vec!["S03", "S11"]);
        assert_eq!(c.preprocess.norm_scope, NormScope::PerSessionSignal);
        let names: Vec<_> = c.classifiers.specs().iter().map(|s| s.name()).collect();
        assert_eq!(names, vec!["svm", "knn"]);
        assert_eq!(c.classifiers.svm_gamma, GammaRule::Fixed(0.5));
        assert_eq!(c.classifiers.rf_grid.max_depths, vec![MaxDepth::Limited(3), MaxDepth::Unlimited]);
    }

    #[test]
    fn rejects_bad_input() {
        let p = Path::new("");
        assert_eq!(
            RunConfig::parse("preprocess.window = 5", p),
            Err(ConfigError::UnknownKey("preprocess.window".into()))
        );
        assert!(matches!(RunConfig::parse("just text", p), Err(ConfigError::Syntax { line: 1, .. })));
        for bad in [
            "preprocess.ma_window = 4",
            "repetitions = 0",
            "classifiers.enabled = knn, lda",
            "classifiers.svm.c = -1",
            "threshold = 120",
            "classifiers.rf.inner_folds = 1",
            "synth.correlation = 1.5",
        ] {
            assert!(matches!(RunConfig::parse(bad, p), Err(ConfigError::InvalidValue { .. })), "{bad}");
        }
    }

    #[test]
    fn overrides() {
        let mut c = RunConfig::default();
        c.apply_override("repetitions=3").unwrap();
        c.apply_override("dataset_root=some/dir").unwrap();
        assert_eq!(c.repetitions, 3);
        assert_eq!(c.dataset_root, Some(PathBuf::from("some/dir")));
        assert_eq!(c.apply_override("nonsense"), Err(ConfigError::BadOverride("nonsense".into())));
        assert_eq!(c.roster_path(), Err(ConfigError::Missing("roster_path")));
    }
}
