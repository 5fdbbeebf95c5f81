use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid sample rate {0} (must be > 0)")]
    InvalidRate(f64),

    #[error("recording has no samples")]
    EmptyRecording,

    #[error("invalid grade for {student_id}: {reason}")]
    InvalidGrade { student_id: String, reason: String },

    #[error("duplicate grade record for student {student_id}, exam {exam}")]
    DuplicateRecord { student_id: String, exam: String },

    #[error("incomplete session: {0}")]
    IncompleteSession(String),

    #[error("no grade for student {student_id}, exam {exam}")]
    MissingGrade { student_id: String, exam: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no common time window for student {student_id}, exam {exam}")]
    NoCommonWindow { student_id: String, exam: String },

    #[error("moving-average window {0} must be odd and positive")]
    InvalidWindow(usize),

    #[error("empty input")]
    EmptyInput,

    #[error("degenerate signal (zero standard deviation): {0}")]
    DegenerateSignal(String),

    #[error("non-finite sample at index {0}")]
    InvalidSample(usize),

    #[error("training set contains a single class")]
    SingleClassTrainingSet,

    #[error("k = {k} exceeds training set size {n}")]
    InvalidK { k: usize, n: usize },

    #[error("need at least 2 students, found {0}")]
    InsufficientStudents(usize),

    #[error("ROC-AUC undefined: {positives} positive and {negatives} negative predictions")]
    UndefinedAuc { positives: usize, negatives: usize },

    #[error("{}: {source}", path.display())]
    InFile { path: PathBuf, source: Box<Error> },

    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn in_file(path: impl Into<PathBuf>, source: Error) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(source),
        }
    }

    pub fn io(path: impl Into<PathBuf>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }
}
