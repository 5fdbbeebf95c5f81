//! Sensor recordings, grade rosters, and the on-disk dataset layout.
//!
//! A dataset lives under one root directory:
//!
//! ```text
//! root/<student_id>/<Midterm1|Midterm2|Final>/{TEMP.csv,HR.csv,EDA.csv}
//! ```
//!
//! Each sensor file follows the wristband export layout: the first line is
//! the start time in seconds since the Unix epoch, the second the sample
//! rate in Hz, and every following line one sample. Grades come from a
//! separate roster CSV with header `student_id,exam,raw_score,max_score`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SignalKind {
    /// Skin surface temperature, °C.
    SkinTemperature,
    /// Heart rate, beats per minute.
    HeartRate,
    /// Electrodermal activity, µS.
    ElectrodermalActivity,
}

impl SignalKind {
    pub const ALL: [SignalKind; 3] = [
        SignalKind::SkinTemperature,
        SignalKind::HeartRate,
        SignalKind::ElectrodermalActivity,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            SignalKind::SkinTemperature => "TEMP.csv",
            SignalKind::HeartRate => "HR.csv",
            SignalKind::ElectrodermalActivity => "EDA.csv",
        }
    }

    /// Short lowercase tag used in column names.
    pub fn short_name(self) -> &'static str {
        match self {
            SignalKind::SkinTemperature => "temp",
            SignalKind::HeartRate => "hr",
            SignalKind::ElectrodermalActivity => "eda",
        }
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignalKind::SkinTemperature => "skin temperature",
            SignalKind::HeartRate => "heart rate",
            SignalKind::ElectrodermalActivity => "electrodermal activity",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExamKind {
    Midterm1,
    Midterm2,
    Final,
}

impl ExamKind {
    pub const ALL: [ExamKind; 3] = [ExamKind::Midterm1, ExamKind::Midterm2, ExamKind::Final];

    /// Directory name in the canonical layout.
    pub fn dir_name(self) -> &'static str {
        match self {
            ExamKind::Midterm1 => "Midterm1",
            ExamKind::Midterm2 => "Midterm2",
            ExamKind::Final => "Final",
        }
    }

    /// Lowercase token used in roster files.
    pub fn token(self) -> &'static str {
        match self {
            ExamKind::Midterm1 => "midterm1",
            ExamKind::Midterm2 => "midterm2",
            ExamKind::Final => "final",
        }
    }
}

impl fmt::Display for ExamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir_name())
    }
}

impl FromStr for ExamKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        ExamKind::ALL
            .into_iter()
            .find(|e| e.token() == lower)
            .ok_or_else(|| format!("unknown exam {s:?} (expected midterm1, midterm2 or final)"))
    }
}

/// One sensor channel of one student-exam.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecording {
    pub kind: SignalKind,
    /// Seconds since the Unix epoch.
    pub start_epoch: f64,
    /// Hz, strictly positive.
    pub sample_rate: f64,
    pub samples: Vec<f64>,
}

impl RawRecording {
    pub fn new(kind: SignalKind, start_epoch: f64, sample_rate: f64, samples: Vec<f64>) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::InvalidRate(sample_rate));
        }
        if samples.is_empty() {
            return Err(Error::EmptyRecording);
        }
        Ok(Self {
            kind,
            start_epoch,
            sample_rate,
            samples,
        })
    }

    pub fn timestamp(&self, index: usize) -> f64 {
        self.start_epoch + index as f64 / self.sample_rate
    }

    /// Timestamp of the last sample.
    pub fn end_epoch(&self) -> f64 {
        self.timestamp(self.samples.len().saturating_sub(1))
    }
}

fn parse_number(line: &str, line_no: usize, what: &str) -> Result<f64> {
    let value: f64 = line.trim().parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("expected {what}, found {:?}", line.trim()),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line: line_no,
            message: format!("{what} must be finite, found {:?}", line.trim()),
        });
    }
    Ok(value)
}

/// Parses a single-channel sensor export. LF and CRLF line endings are
/// accepted and trailing blank lines are ignored.
pub fn parse_sensor_csv(text: &str, kind: SignalKind) -> Result<RawRecording> {
    let mut lines: Vec<&str> = text.lines().collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    if lines.len() < 3 {
        return Err(Error::EmptyRecording);
    }

    let start_epoch = parse_number(lines[0], 1, "start epoch")?;
    let sample_rate = parse_number(lines[1], 2, "sample rate")?;
    if sample_rate <= 0.0 {
        return Err(Error::InvalidRate(sample_rate));
    }
    let samples = lines[2..]
        .iter()
        .enumerate()
        .map(|(i, l)| parse_number(l, i + 3, "numeric sample"))
        .collect::<Result<Vec<_>>>()?;

    RawRecording::new(kind, start_epoch, sample_rate, samples)
}

/// Inverse of [`parse_sensor_csv`]. Uses shortest round-trip float
/// formatting so that parsing the output reproduces the recording exactly.
pub fn render_sensor_csv(recording: &RawRecording) -> String {
    let mut out = String::with_capacity(recording.samples.len() * 8 + 32);
    out.push_str(&format!("{:?}\n{:?}\n", recording.start_epoch, recording.sample_rate));
    for s in &recording.samples {
        out.push_str(&format!("{s:?}\n"));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradeRecord {
    pub student_id: String,
    pub exam: ExamKind,
    pub raw_score: f64,
    pub max_score: f64,
}

impl GradeRecord {
    pub fn new(student_id: impl Into<String>, exam: ExamKind, raw_score: f64, max_score: f64) -> Result<Self> {
        let student_id = student_id.into();
        let invalid = |reason: String| Error::InvalidGrade {
            student_id: student_id.clone(),
            reason,
        };
        if !(max_score > 0.0 && max_score.is_finite()) {
            return Err(invalid(format!("max_score {max_score} must be > 0")));
        }
        if !(raw_score >= 0.0) {
            return Err(invalid(format!("raw_score {raw_score} must be >= 0")));
        }
        if raw_score > max_score {
            return Err(invalid(format!("raw_score {raw_score} exceeds max_score {max_score}")));
        }
        Ok(Self {
            student_id,
            exam,
            raw_score,
            max_score,
        })
    }

    pub fn percent(&self) -> f64 {
        100.0 * self.raw_score / self.max_score
    }
}

pub const ROSTER_HEADER: &str = "student_id,exam,raw_score,max_score";

pub fn parse_grade_roster(text: &str) -> Result<Vec<GradeRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == ROSTER_HEADER => {}
        Some((_, header)) => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header {ROSTER_HEADER:?}, found {:?}", header.trim()),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "missing header".into(),
            })
        }
    }

    let mut seen = BTreeSet::new();
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 4 columns, found {}", fields.len()),
            });
        }
        let exam: ExamKind = fields[1].parse().map_err(|message| Error::Parse { line: line_no, message })?;
        let raw_score = parse_number(fields[2], line_no, "raw_score")?;
        let max_score = parse_number(fields[3], line_no, "max_score")?;
        let record = GradeRecord::new(fields[0], exam, raw_score, max_score)?;
        if !seen.insert((record.student_id.clone(), exam)) {
            return Err(Error::DuplicateRecord {
                student_id: record.student_id,
                exam: exam.to_string(),
            });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn render_grade_roster(records: &[GradeRecord]) -> String {
    let mut out = format!("{ROSTER_HEADER}\n");
    for r in records {
        out.push_str(&format!("{},{},{},{}\n", r.student_id, r.exam.token(), r.raw_score, r.max_score));
    }
    out
}

/// A (student, exam) bundle of the three recordings and the grade.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub student_id: String,
    pub exam: ExamKind,
    pub recordings: BTreeMap<SignalKind, RawRecording>,
    pub grade: GradeRecord,
}

impl Session {
    pub fn new(
        student_id: impl Into<String>,
        exam: ExamKind,
        recordings: BTreeMap<SignalKind, RawRecording>,
        grade: GradeRecord,
    ) -> Result<Self> {
        let student_id = student_id.into();
        for kind in SignalKind::ALL {
            match recordings.get(&kind) {
                Some(r) if r.kind == kind => {}
                Some(_) => {
                    return Err(Error::IncompleteSession(format!(
                        "{student_id}/{exam}: recording stored under {kind} has a different kind"
                    )))
                }
                None => {
                    return Err(Error::IncompleteSession(format!("{student_id}/{exam}: missing {kind}")))
                }
            }
        }
        if grade.exam != exam || grade.student_id != student_id {
            return Err(Error::InvalidArgument(format!(
                "grade for {}/{} attached to session {student_id}/{exam}",
                grade.student_id, grade.exam
            )));
        }
        Ok(Self {
            student_id,
            exam,
            recordings,
            grade,
        })
    }

    pub fn recording(&self, kind: SignalKind) -> &RawRecording {
        &self.recordings[&kind]
    }
}

/// Files found for one (student, exam) directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub student_id: String,
    pub exam: ExamKind,
    pub files: BTreeMap<SignalKind, PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub root: PathBuf,
    /// Every student directory found, including excluded ones.
    pub students: Vec<String>,
    pub entries: Vec<ManifestEntry>,
    pub exclusions: Vec<String>,
}

/// A problem found while validating a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Defect {
    pub path: PathBuf,
    pub reason: String,
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.reason)
    }
}

fn sorted_subdirs(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry.file_type().map_err(|e| Error::io(entry.path(), e))?.is_dir() {
            if let Some(name) = entry.file_name().to_str() {
                names.push(name.to_owned());
            }
        }
    }
    names.sort();
    Ok(names)
}

impl DatasetManifest {
    /// Walks `root` for the canonical per-student, per-exam layout.
    /// Directories that are not exam directories are ignored.
    pub fn discover(root: impl Into<PathBuf>, exclusions: Vec<String>) -> Result<Self> {
        let root = root.into();
        let students = sorted_subdirs(&root)?;
        let mut entries = Vec::new();
        for student in &students {
            let student_dir = root.join(student);
            let exam_dirs = sorted_subdirs(&student_dir)?;
            for exam in ExamKind::ALL {
                if !exam_dirs.iter().any(|d| d == exam.dir_name()) {
                    continue;
                }
                let exam_dir = student_dir.join(exam.dir_name());
                let files = SignalKind::ALL
                    .into_iter()
                    .map(|k| (k, exam_dir.join(k.file_name())))
                    .filter(|(_, p)| p.is_file())
                    .collect();
                entries.push(ManifestEntry {
                    student_id: student.clone(),
                    exam,
                    files,
                });
            }
        }
        Ok(Self {
            root,
            students,
            entries,
            exclusions,
        })
    }

    pub fn is_excluded(&self, student_id: &str) -> bool {
        self.exclusions.iter().any(|s| s == student_id)
    }

    /// Students remaining after exclusions, sorted.
    pub fn included_students(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self
            .students
            .iter()
            .map(String::as_str)
            .filter(|s| !self.is_excluded(s))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn entry(&self, student_id: &str, exam: ExamKind) -> Option<&ManifestEntry> {
        self.entries
            .iter()
            .find(|e| e.student_id == student_id && e.exam == exam)
    }

    fn expected_path(&self, student_id: &str, exam: ExamKind, kind: Option<SignalKind>) -> PathBuf {
        let dir = self.root.join(student_id).join(exam.dir_name());
        match kind {
            Some(k) => dir.join(k.file_name()),
            None => dir,
        }
    }

    /// Missing exam directories and sensor files among included students.
    pub fn completeness_defects(&self) -> Vec<Defect> {
        let mut defects = Vec::new();
        for student in self.included_students() {
            for exam in ExamKind::ALL {
                match self.entry(student, exam) {
                    None => defects.push(Defect {
                        path: self.expected_path(student, exam, None),
                        reason: "missing exam directory".into(),
                    }),
                    Some(entry) => {
                        for kind in SignalKind::ALL {
                            if !entry.files.contains_key(&kind) {
                                defects.push(Defect {
                                    path: self.expected_path(student, exam, Some(kind)),
                                    reason: format!("missing {kind} file"),
                                });
                            }
                        }
                    }
                }
            }
        }
        defects
    }
}

fn read_recording(path: &Path, kind: SignalKind) -> Result<RawRecording> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sensor_csv(&text, kind).map_err(|e| Error::in_file(path, e))
}

/// Loads every included student's sessions, sorted by (student, exam).
pub fn assemble_sessions(manifest: &DatasetManifest, roster: &[GradeRecord]) -> Result<Vec<Session>> {
    let grades: HashMap<(&str, ExamKind), &GradeRecord> = roster
        .iter()
        .map(|g| ((g.student_id.as_str(), g.exam), g))
        .collect();

    let mut sessions = Vec::new();
    for student in manifest.included_students() {
        for exam in ExamKind::ALL {
            let entry = manifest.entry(student, exam).ok_or_else(|| {
                Error::IncompleteSession(format!(
                    "missing {}",
                    manifest.expected_path(student, exam, None).display()
                ))
            })?;
            let mut recordings = BTreeMap::new();
            for kind in SignalKind::ALL {
                let path = entry.files.get(&kind).ok_or_else(|| {
                    Error::IncompleteSession(format!(
                        "missing {}",
                        manifest.expected_path(student, exam, Some(kind)).display()
                    ))
                })?;
                recordings.insert(kind, read_recording(path, kind)?);
            }
            let grade = grades.get(&(student, exam)).ok_or_else(|| Error::MissingGrade {
                student_id: student.to_owned(),
                exam: exam.to_string(),
            })?;
            sessions.push(Session::new(student, exam, recordings, (*grade).clone())?);
        }
    }
    sessions.sort_by(|a, b| (&a.student_id, a.exam).cmp(&(&b.student_id, b.exam)));
    Ok(sessions)
}

/// Every defect that would stop [`assemble_sessions`], collected instead of
/// failing on the first one.
pub fn validate_dataset(manifest: &DatasetManifest, roster: &[GradeRecord]) -> Vec<Defect> {
    let mut defects = manifest.completeness_defects();
    for entry in &manifest.entries {
        if manifest.is_excluded(&entry.student_id) {
            continue;
        }
        for (&kind, path) in &entry.files {
            if let Err(e) = read_recording(path, kind) {
                let reason = match e {
                    Error::InFile { source, .. } => source.to_string(),
                    other => other.to_string(),
                };
                defects.push(Defect {
                    path: path.clone(),
                    reason,
                });
            }
        }
    }
    for student in manifest.included_students() {
        for exam in ExamKind::ALL {
            if !roster.iter().any(|g| g.student_id == student && g.exam == exam) {
                defects.push(Defect {
                    path: manifest.expected_path(student, exam, None),
                    reason: Error::MissingGrade {
                        student_id: student.to_owned(),
                        exam: exam.to_string(),
                    }
                    .to_string(),
                });
            }
        }
    }
    defects
}
