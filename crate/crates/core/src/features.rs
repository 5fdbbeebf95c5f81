//! Per-session summary statistics and the 15-dimensional super-vector.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ingest::{ExamKind, SignalKind};
use crate::preprocess::{CleanRecording, CleanSession};

pub const STATS_PER_SIGNAL: usize = 5;
pub const FEATURE_DIM: usize = 15;
pub const STAT_NAMES: [&str; STATS_PER_SIGNAL] = ["mean", "std", "min", "max", "median"];
pub const DEFAULT_THRESHOLD: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
}

impl SummaryStats {
    pub fn to_array(self) -> [f64; STATS_PER_SIGNAL] {
        [self.mean, self.std, self.min, self.max, self.median]
    }
}

pub fn summary_stats(samples: &[f64]) -> Result<SummaryStats> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidSample(i));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let std = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();

    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    };
    // the float mean can land a rounding step outside [min, max]
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    Ok(SummaryStats {
        mean: mean.clamp(min, max),
        std,
        min,
        max,
        median,
    })
}

/// Ordered `[temperature, heart rate, EDA] x [mean, std, min, max, median]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_DIM]);

impl FeatureVector {
    pub fn values(&self) -> &[f64; FEATURE_DIM] {
        &self.0
    }

    /// Column names in vector order, e.g. `temp_mean`, `eda_median`.
    pub fn column_names() -> Vec<String> {
        SignalKind::ALL
            .iter()
            .flat_map(|k| STAT_NAMES.iter().map(move |s| format!("{}_{s}", k.short_name())))
            .collect()
    }

    pub fn squared_distance(&self, other: &FeatureVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

pub fn build_supervector(clean: &BTreeMap<SignalKind, CleanRecording>) -> Result<FeatureVector> {
    let mut values = [0.0; FEATURE_DIM];
    for (block, kind) in SignalKind::ALL.into_iter().enumerate() {
        let rec = clean
            .get(&kind)
            .ok_or_else(|| Error::IncompleteSession(format!("missing {kind}")))?;
        let stats = summary_stats(&rec.samples)?;
        values[block * STATS_PER_SIGNAL..(block + 1) * STATS_PER_SIGNAL].copy_from_slice(&stats.to_array());
    }
    Ok(FeatureVector(values))
}

/// Strictly above the threshold counts as a high scorer.
pub fn binarize_label(percent: f64, threshold: f64) -> bool {
    percent > threshold
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub student_id: String,
    pub exam: ExamKind,
    pub features: FeatureVector,
    pub percent: f64,
    pub label: bool,
}

impl LabeledExample {
    pub fn new(student_id: impl Into<String>, exam: ExamKind, features: FeatureVector, percent: f64, threshold: f64) -> Self {
        Self {
            student_id: student_id.into(),
            exam,
            features,
            percent,
            label: binarize_label(percent, threshold),
        }
    }
}

/// Feature vectors and labels for every session, sorted by (student, exam).
pub fn build_examples(sessions: &[CleanSession], threshold: f64) -> Result<Vec<LabeledExample>> {
    let mut examples = sessions
        .iter()
        .map(|s| {
            let features = build_supervector(&s.recordings).map_err(|e| match e {
                Error::EmptyInput | Error::InvalidSample(_) => Error::InvalidArgument(format!(
                    "student {}, exam {}: {e}",
                    s.student_id, s.exam
                )),
                other => other,
            })?;
            Ok(LabeledExample::new(
                s.student_id.clone(),
                s.exam,
                features,
                s.grade.percent(),
                threshold,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    examples.sort_by(|a, b| (&a.student_id, a.exam).cmp(&(&b.student_id, b.exam)));
    Ok(examples)
}
