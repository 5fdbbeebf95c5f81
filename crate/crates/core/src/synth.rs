//! Deterministic synthetic cohorts in the canonical dataset layout.
//!
//! Every session gets a latent arousal class (high or low). Each student
//! has one or two high-arousal exams, so the class contrast survives
//! per-student normalization. High arousal raises heart rate and EDA and
//! lowers skin temperature. With `correlation = 1` the grade label equals
//! the arousal class, and the raw EDA mean of every positive session
//! strictly exceeds that of every negative session. With `correlation = 0`
//! labels come from an independent random stream.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::ingest::{render_grade_roster, render_sensor_csv, ExamKind, GradeRecord, RawRecording, SignalKind};
use crate::seed;

/// Generated cohort: sensor files keyed by path relative to the data root,
/// plus the roster CSV text.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub files: BTreeMap<PathBuf, String>,
    pub roster: String,
    /// Latent arousal class per (student, exam), in roster order.
    pub arousal: Vec<(String, ExamKind, bool)>,
}

impl SyntheticDataset {
    pub fn write_to(&self, data_root: &Path, roster_path: &Path) -> Result<()> {
        for (rel, text) in &self.files {
            let path = data_root.join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        if let Some(parent) = roster_path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(roster_path, &self.roster).map_err(|e| Error::io(roster_path, e))
    }
}

const EXAM_EPOCH: [f64; 3] = [1_539_000_000.0, 1_541_000_000.0, 1_544_000_000.0];

fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale).round() / scale
}

struct SignalModel {
    rate: f64,
    baseline: f64,
    arousal_gain: f64,
    drift: f64,
    noise: f64,
    spike_prob: f64,
    spike: f64,
    decimals: i32,
    floor: f64,
}

fn model(kind: SignalKind, baseline: f64) -> SignalModel {
    match kind {
        SignalKind::SkinTemperature => SignalModel {
            rate: 4.0,
            baseline,
            arousal_gain: -1.5,
            drift: 0.2,
            noise: 0.05,
            spike_prob: 0.004,
            spike: -1.0,
            decimals: 2,
            floor: f64::NEG_INFINITY,
        },
        SignalKind::HeartRate => SignalModel {
            rate: 1.0,
            baseline,
            arousal_gain: 25.0,
            drift: 3.0,
            noise: 2.0,
            spike_prob: 0.01,
            spike: 20.0,
            decimals: 2,
            floor: 30.0,
        },
        SignalKind::ElectrodermalActivity => SignalModel {
            rate: 4.0,
            baseline,
            arousal_gain: 4.0,
            drift: 0.3,
            noise: 0.1,
            spike_prob: 0.0,
            spike: 0.0,
            decimals: 6,
            floor: 0.01,
        },
    }
}

fn simulate<R: Rng>(rng: &mut R, m: &SignalModel, arousal: f64, duration: f64) -> Vec<f64> {
    let n = (duration * m.rate).floor() as usize;
    let period = rng.random_range(40.0..120.0);
    let phase = rng.random_range(0.0..TAU);
    let noise = Normal::new(0.0, m.noise).expect("positive noise scale");
    (0..n)
        .map(|i| {
            let t = i as f64 / m.rate;
            let mut x = m.baseline + m.arousal_gain * arousal + m.drift * (TAU * t / period + phase).sin();
            x += noise.sample(rng);
            if rng.random::<f64>() < m.spike_prob {
                x += m.spike;
            }
            round_to(x.max(m.floor), m.decimals)
        })
        .collect()
}

/// Builds a cohort of `n_students` students, three exams each.
pub fn generate_synthetic_dataset(seed: u64, n_students: usize, correlation: f64) -> Result<SyntheticDataset> {
    if n_students < 2 {
        return Err(Error::InvalidArgument(format!("n_students must be >= 2, got {n_students}")));
    }
    if !(0.0..=1.0).contains(&correlation) {
        return Err(Error::InvalidArgument(format!("correlation must be in [0, 1], got {correlation}")));
    }

    let width = n_students.to_string().len().max(2);
    let ids: Vec<String> = (1..=n_students).map(|i| format!("S{i:0width$}")).collect();

    let mut signal_rng = seed::rng(seed::derive(seed, &[0]));
    let mut files = BTreeMap::new();
    let mut arousal_bits = Vec::with_capacity(n_students * 3);

    for (si, id) in ids.iter().enumerate() {
        let baselines = [
            signal_rng.random_range(32.0..35.0),
            signal_rng.random_range(65.0..85.0),
            signal_rng.random_range(0.5..1.5),
        ];
        let n_high = signal_rng.random_range(1..=2usize);
        let mut pattern = [false; 3];
        pattern[..n_high].iter_mut().for_each(|b| *b = true);
        pattern.shuffle(&mut signal_rng);

        for (ei, exam) in ExamKind::ALL.into_iter().enumerate() {
            let high = pattern[ei];
            arousal_bits.push((id.clone(), exam, high));
            let arousal = if high {
                signal_rng.random_range(0.75..1.0)
            } else {
                signal_rng.random_range(0.0..0.3)
            };
            let t0 = EXAM_EPOCH[ei] + (si as f64) * 7.0 + signal_rng.random_range(0..60) as f64;
            let duration = signal_rng.random_range(90.0..150.0f64).round();

            for (ki, kind) in SignalKind::ALL.into_iter().enumerate() {
                let m = model(kind, baselines[ki]);
                // heart rate is derived from a 10 s pulse window, so it starts later
                let lead = if kind == SignalKind::HeartRate { 10.0 } else { 0.0 };
                let tail = signal_rng.random_range(0..5) as f64;
                let samples = simulate(&mut signal_rng, &m, arousal, duration - lead - tail);
                let rec = RawRecording::new(kind, t0 + lead, m.rate, samples)?;
                let rel = Path::new(id).join(exam.dir_name()).join(kind.file_name());
                files.insert(rel, render_sensor_csv(&rec));
            }
        }
    }

    let labels = draw_labels(seed, correlation, &arousal_bits);

    let mut grade_rng = seed::rng(seed::derive(seed, &[2]));
    let mut roster = Vec::with_capacity(labels.len());
    for ((id, exam, _), label) in arousal_bits.iter().zip(&labels) {
        let percent: u32 = if *label {
            grade_rng.random_range(82..=98)
        } else {
            grade_rng.random_range(45..=78)
        };
        let max_score = if *exam == ExamKind::Final { 200.0 } else { 100.0 };
        let raw = f64::from(percent) * max_score / 100.0;
        roster.push(GradeRecord::new(id.clone(), *exam, raw, max_score)?);
    }

    Ok(SyntheticDataset {
        files,
        roster: render_grade_roster(&roster),
        arousal: arousal_bits,
    })
}

/// Label per session: with probability `correlation` the arousal class,
/// otherwise a fair coin. Coins come from their own stream so that at
/// `correlation = 0` labels never depend on the signals. Redraws until both
/// classes occur.
fn draw_labels(seed: u64, correlation: f64, arousal: &[(String, ExamKind, bool)]) -> Vec<bool> {
    for attempt in 0u64.. {
        let mut rng = seed::rng(seed::derive(seed, &[1, attempt]));
        let labels: Vec<bool> = arousal
            .iter()
            .map(|(_, _, high)| {
                let follow = rng.random::<f64>() < correlation;
                let coin = rng.random::<bool>();
                if follow {
                    *high
                } else {
                    coin
                }
            })
            .collect();
        if labels.iter().any(|&l| l) && labels.iter().any(|&l| !l) {
            return labels;
        }
    }
    unreachable!()
}
