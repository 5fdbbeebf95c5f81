//! Leave-one-student-out evaluation with pooled ROC-AUC over repetitions.
//!
//! Fold structure is fixed across repetitions; only the per-repetition seed
//! changes. Within one repetition the held-out predictions of every fold
//! are pooled and scored once, so a fold whose three test sessions share a
//! label never leaves the AUC undefined.

pub mod roc;

use rayon::prelude::*;

use crate::classifiers::{fit, ClassifierSpec};
use crate::error::{Error, Result};
use crate::features::{build_examples, LabeledExample};
use crate::ingest::Session;
use crate::preprocess::{preprocess_all, PreprocessConfig};
use crate::seed;

pub use roc::{auc_from_scores, roc_auc, roc_curve, trapezoid_area, RocPoint, ScoredPrediction};

#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    pub held_out_student: String,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
}

/// One fold per distinct student, ordered by student id.
pub fn loso_folds(examples: &[LabeledExample]) -> Result<FoldPlan> {
    let mut students: Vec<&str> = examples.iter().map(|e| e.student_id.as_str()).collect();
    students.sort_unstable();
    students.dedup();
    if students.len() < 2 {
        return Err(Error::InsufficientStudents(students.len()));
    }
    let folds = students
        .into_iter()
        .map(|held_out| {
            let (test, train) = (0..examples.len()).partition(|&i| examples[i].student_id == held_out);
            Fold {
                held_out_student: held_out.to_owned(),
                train,
                test,
            }
        })
        .collect();
    Ok(FoldPlan { folds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierResult {
    pub spec: ClassifierSpec,
    /// Pooled AUC of each repetition.
    pub aucs: Vec<f64>,
    pub mean_auc: f64,
    /// Population standard deviation over repetitions.
    pub std_auc: f64,
    /// Pooled predictions of the first repetition.
    pub predictions: Vec<ScoredPrediction>,
    pub roc: Vec<RocPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub results: Vec<ClassifierResult>,
    pub n_examples: usize,
    pub n_students: usize,
    pub n_positive: usize,
    pub repetitions: usize,
}

impl EvalSummary {
    pub fn result(&self, name: &str) -> Option<&ClassifierResult> {
        self.results.iter().find(|r| r.spec.name() == name)
    }
}

/// Mean and population std. Identical inputs give exactly that value and 0.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let Some(&first) = values.first() else {
        return (f64::NAN, f64::NAN);
    };
    let n = values.len() as f64;
    let mean = first + values.iter().map(|v| v - first).sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Seed for one (repetition, classifier, fold) training unit.
pub fn unit_seed(base_seed: u64, repetition: usize, spec: &ClassifierSpec, fold: usize) -> u64 {
    let rep_seed = base_seed.wrapping_add(repetition as u64);
    seed::derive(rep_seed, &[spec.seed_tag(), fold as u64])
}

/// Cross-validates every spec on ready-made examples.
pub fn evaluate_examples(
    examples: &[LabeledExample],
    specs: &[ClassifierSpec],
    repetitions: usize,
    base_seed: u64,
) -> Result<EvalSummary> {
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be >= 1".into()));
    }
    for spec in specs {
        spec.validate()?;
    }
    let plan = loso_folds(examples)?;

    let (n_specs, n_folds) = (specs.len(), plan.folds.len());
    let units: Vec<(usize, usize, usize)> = (0..repetitions)
        .flat_map(|r| (0..n_specs).flat_map(move |c| (0..n_folds).map(move |f| (r, c, f))))
        .collect();
    let fold_predictions: Vec<Vec<ScoredPrediction>> = units
        .par_iter()
        .map(|&(r, c, f)| {
            let fold = &plan.folds[f];
            let spec = &specs[c];
            let train: Vec<LabeledExample> = fold.train.iter().map(|&i| examples[i].clone()).collect();
            let model = fit(spec, &train, unit_seed(base_seed, r, spec, f))?;
            Ok(fold
                .test
                .iter()
                .map(|&i| {
                    let e = &examples[i];
                    ScoredPrediction {
                        score: model.score(&e.features),
                        label: e.label,
                        student_id: e.student_id.clone(),
                        exam: e.exam,
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let pooled = |r: usize, c: usize| -> Vec<ScoredPrediction> {
        let start = (r * specs.len() + c) * n_folds;
        fold_predictions[start..start + n_folds].concat()
    };

    let mut results = Vec::with_capacity(specs.len());
    for (c, spec) in specs.iter().enumerate() {
        let aucs = (0..repetitions)
            .map(|r| roc_auc(&pooled(r, c)))
            .collect::<Result<Vec<_>>>()?;
        let (mean_auc, std_auc) = mean_and_std(&aucs);
        let predictions = pooled(0, c);
        let roc = roc_curve(&predictions)?;
        results.push(ClassifierResult {
            spec: spec.clone(),
            aucs,
            mean_auc,
            std_auc,
            predictions,
            roc,
        });
    }

    Ok(EvalSummary {
        results,
        n_examples: examples.len(),
        n_students: n_folds,
        n_positive: examples.iter().filter(|e| e.label).count(),
        repetitions,
    })
}

/// Preprocess, extract features, then cross-validate.
pub fn run_experiment(
    sessions: &[Session],
    preprocess_config: &PreprocessConfig,
    specs: &[ClassifierSpec],
    threshold: f64,
    repetitions: usize,
    base_seed: u64,
) -> Result<EvalSummary> {
    let mut ordered = sessions.to_vec();
    ordered.sort_by(|a, b| (&a.student_id, a.exam).cmp(&(&b.student_id, b.exam)));
    let clean = preprocess_all(&ordered, preprocess_config)?;
    let examples = build_examples(&clean, threshold)?;
    evaluate_examples(&examples, specs, repetitions, base_seed)
}
