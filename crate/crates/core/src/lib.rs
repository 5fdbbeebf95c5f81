//! Exam grade prediction from wearable physiological recordings.
//!
//! Skin temperature, heart rate and electrodermal activity recorded during
//! an exam are synchronized, smoothed and z-normalized, reduced to a
//! 15-dimensional vector of summary statistics, and classified as above or
//! below a grade threshold. Four classifiers (random forest, SGD logistic
//! regression, RBF SVM, k-nearest neighbours) are evaluated by
//! leave-one-student-out cross-validation with pooled ROC-AUC.

pub mod classifiers;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod ingest;
pub mod preprocess;
pub mod seed;
pub mod synth;

pub use classifiers::{fit, score, ClassifierSpec, TrainedModel};
pub use error::{Error, Result};
pub use evaluation::{loso_folds, run_experiment, EvalSummary};
pub use features::{build_supervector, FeatureVector, LabeledExample};
pub use ingest::{assemble_sessions, DatasetManifest, ExamKind, RawRecording, Session, SignalKind};
pub use preprocess::{preprocess_all, NormScope, PreprocessConfig};
pub use synth::generate_synthetic_dataset;
