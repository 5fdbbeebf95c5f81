//! Synchronization, smoothing and z-normalization of session signals.
//!
//! Order per session: trim all three recordings to their common time
//! window, apply a centered moving average, then z-normalize against the
//! reference set chosen by [`NormScope`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ingest::{ExamKind, GradeRecord, Session, SignalKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormScope {
    /// Statistics pooled over one student's three exams, per signal kind.
    #[default]
    PerStudentPooled,
    /// Statistics of the session's own signal.
    PerSessionSignal,
}

impl NormScope {
    pub fn token(self) -> &'static str {
        match self {
            NormScope::PerStudentPooled => "per_student_pooled",
            NormScope::PerSessionSignal => "per_session_signal",
        }
    }
}

impl fmt::Display for NormScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for NormScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "per_student_pooled" => Ok(NormScope::PerStudentPooled),
            "per_session_signal" => Ok(NormScope::PerSessionSignal),
            other => Err(format!(
                "unknown norm scope {other:?} (expected per_student_pooled or per_session_signal)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessConfig {
    /// Odd moving-average length in samples.
    pub ma_window: usize,
    pub norm_scope: NormScope,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            ma_window: 5,
            norm_scope: NormScope::PerStudentPooled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZNormParams {
    pub mu: f64,
    /// Population standard deviation.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanRecording {
    pub kind: SignalKind,
    pub start_epoch: f64,
    pub sample_rate: f64,
    pub samples: Vec<f64>,
}

/// Output of [`preprocess_all`] for one session.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanSession {
    pub student_id: String,
    pub exam: ExamKind,
    pub recordings: BTreeMap<SignalKind, CleanRecording>,
    pub grade: GradeRecord,
}

/// Keeps only samples whose timestamps fall inside the closed interval
/// shared by all three recordings.
pub fn trim_to_common_window(session: &Session) -> Result<Session> {
    let no_window = || Error::NoCommonWindow {
        student_id: session.student_id.clone(),
        exam: session.exam.to_string(),
    };
    let lo = session
        .recordings
        .values()
        .map(|r| r.start_epoch)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = session
        .recordings
        .values()
        .map(|r| r.end_epoch())
        .fold(f64::INFINITY, f64::min);
    if lo > hi {
        return Err(no_window());
    }

    let mut trimmed = session.clone();
    for rec in trimmed.recordings.values_mut() {
        let keep: Vec<usize> = (0..rec.samples.len())
            .filter(|&i| {
                let t = rec.timestamp(i);
                t >= lo && t <= hi
            })
            .collect();
        let (Some(&first), Some(&last)) = (keep.first(), keep.last()) else {
            return Err(no_window());
        };
        rec.start_epoch = rec.timestamp(first);
        rec.samples = rec.samples[first..=last].to_vec();
    }
    Ok(trimmed)
}

/// Centered moving average, truncated at the edges: output `i` is the mean
/// of the input over `[i - w, i + w]` clipped to valid indices, with
/// `w = (window - 1) / 2`.
pub fn moving_average(samples: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::InvalidWindow(window));
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let half = (window - 1) / 2;
    let n = samples.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let span = &samples[lo..=hi];
            span.iter().sum::<f64>() / span.len() as f64
        })
        .collect())
}

pub fn compute_znorm_params(reference: &[f64]) -> Result<ZNormParams> {
    if reference.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = reference.len() as f64;
    let mu = reference.iter().sum::<f64>() / n;
    let var = reference.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / n;
    Ok(ZNormParams { mu, sigma: var.sqrt() })
}

pub fn apply_znorm(samples: &[f64], params: ZNormParams) -> Result<Vec<f64>> {
    if !(params.sigma > 0.0) {
        return Err(Error::DegenerateSignal(format!(
            "sigma = {} with mu = {}",
            params.sigma, params.mu
        )));
    }
    Ok(samples.iter().map(|x| (x - params.mu) / params.sigma).collect())
}

struct Filtered {
    session: Session,
    samples: BTreeMap<SignalKind, Vec<f64>>,
}

/// Runs trim, filter and normalize over every session. The output follows
/// the input order.
pub fn preprocess_all(sessions: &[Session], config: &PreprocessConfig) -> Result<Vec<CleanSession>> {
    if config.ma_window == 0 || config.ma_window % 2 == 0 {
        return Err(Error::InvalidWindow(config.ma_window));
    }

    let filtered = sessions
        .iter()
        .map(|s| {
            let trimmed = trim_to_common_window(s)?;
            let samples = trimmed
                .recordings
                .iter()
                .map(|(&k, r)| Ok((k, moving_average(&r.samples, config.ma_window)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            Ok(Filtered {
                session: trimmed,
                samples,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut pooled: BTreeMap<(&str, SignalKind), ZNormParams> = BTreeMap::new();
    if config.norm_scope == NormScope::PerStudentPooled {
        let mut reference: BTreeMap<(&str, SignalKind), Vec<f64>> = BTreeMap::new();
        for f in &filtered {
            for (&k, xs) in &f.samples {
                reference
                    .entry((f.session.student_id.as_str(), k))
                    .or_default()
                    .extend_from_slice(xs);
            }
        }
        for ((student, kind), xs) in reference {
            let params = compute_znorm_params(&xs)?;
            if !(params.sigma > 0.0) {
                return Err(Error::DegenerateSignal(format!(
                    "student {student}, all exams, signal {kind}"
                )));
            }
            pooled.insert((student, kind), params);
        }
    }

    filtered
        .iter()
        .map(|f| {
            let s = &f.session;
            let mut recordings = BTreeMap::new();
            for (&kind, xs) in &f.samples {
                let params = match config.norm_scope {
                    NormScope::PerStudentPooled => pooled[&(s.student_id.as_str(), kind)],
                    NormScope::PerSessionSignal => compute_znorm_params(xs)?,
                };
                let normalized = apply_znorm(xs, params).map_err(|_| {
                    Error::DegenerateSignal(format!(
                        "student {}, exam {}, signal {kind}",
                        s.student_id, s.exam
                    ))
                })?;
                let raw = s.recording(kind);
                recordings.insert(
                    kind,
                    CleanRecording {
                        kind,
                        start_epoch: raw.start_epoch,
                        sample_rate: raw.sample_rate,
                        samples: normalized,
                    },
                );
            }
            Ok(CleanSession {
                student_id: s.student_id.clone(),
                exam: s.exam,
                recordings,
                grade: s.grade.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::RawRecording;
    use proptest::prelude::*;

    fn session(recs: [(f64, f64, Vec<f64>); 3]) -> Session {
        let map = SignalKind::ALL
            .into_iter()
            .zip(recs)
            .map(|(k, (start, rate, xs))| (k, RawRecording::new(k, start, rate, xs).unwrap()))
            .collect();
        let grade = GradeRecord::new("S1", ExamKind::Midterm1, 50.0, 100.0).unwrap();
        Session::new("S1", ExamKind::Midterm1, map, grade).unwrap()
    }

    fn ramp(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn trim_identity() {
        let s = session([(5.0, 4.0, ramp(8)), (5.0, 4.0, ramp(8)), (5.0, 4.0, ramp(8))]);
        assert_eq!(trim_to_common_window(&s).unwrap(), s);
    }

    #[test]
    fn trim_hand_enumerated() {
        let s = session([(0.0, 1.0, ramp(10)), (2.0, 1.0, ramp(10)), (0.0, 1.0, ramp(12))]);
        let t = trim_to_common_window(&s).unwrap();
        let a = t.recording(SignalKind::SkinTemperature);
        let b = t.recording(SignalKind::HeartRate);
        let c = t.recording(SignalKind::ElectrodermalActivity);
        assert_eq!(a.samples, (2..=9).map(f64::from).collect::<Vec<_>>());
        assert_eq!(b.samples, (0..=7).map(f64::from).collect::<Vec<_>>());
        assert_eq!(c.samples, (2..=9).map(f64::from).collect::<Vec<_>>());
        for r in [a, b, c] {
            assert_eq!(r.start_epoch, 2.0);
        }
    }

    #[test]
    fn trim_disjoint() {
        let s = session([(0.0, 1.0, ramp(6)), (6.0, 1.0, ramp(5)), (0.0, 1.0, ramp(11))]);
        assert!(matches!(trim_to_common_window(&s), Err(Error::NoCommonWindow { .. })));
    }

    #[test]
    fn trim_mixed_rates() {
        // window [10, 12]: 4 Hz keeps 9 samples, 1 Hz keeps 3
        let s = session([(9.0, 4.0, ramp(20)), (10.0, 1.0, ramp(5)), (8.0, 4.0, ramp(17))]);
        let t = trim_to_common_window(&s).unwrap();
        assert_eq!(t.recording(SignalKind::SkinTemperature).samples.len(), 9);
        assert_eq!(t.recording(SignalKind::HeartRate).samples.len(), 3);
        assert_eq!(t.recording(SignalKind::ElectrodermalActivity).samples.len(), 9);
        assert_eq!(t.recording(SignalKind::ElectrodermalActivity).start_epoch, 10.0);
    }

    #[test]
    fn moving_average_examples() {
        let xs = [0.0, 3.0, 0.0, 3.0, 0.0];
        assert_eq!(moving_average(&xs, 1).unwrap(), xs);
        assert_eq!(moving_average(&xs, 3).unwrap(), vec![1.5, 1.0, 2.0, 1.0, 1.5]);
        assert_eq!(moving_average(&[2.5; 4], 7).unwrap(), vec![2.5; 4]);
        assert_eq!(moving_average(&xs, 4), Err(Error::InvalidWindow(4)));
        assert_eq!(moving_average(&xs, 0), Err(Error::InvalidWindow(0)));
        assert_eq!(moving_average(&[], 3), Err(Error::EmptyInput));
    }

    #[test]
    fn znorm_examples() {
        let p = compute_znorm_params(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.mu, 2.0);
        assert!((p.sigma - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let z = apply_znorm(&[1.0, 2.0, 3.0], p).unwrap();
        let expected = [-1.224744871391589, 0.0, 1.224744871391589];
        for (a, b) in z.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(compute_znorm_params(&[4.0]).unwrap(), ZNormParams { mu: 4.0, sigma: 0.0 });
        assert_eq!(compute_znorm_params(&[5.0; 3]).unwrap(), ZNormParams { mu: 5.0, sigma: 0.0 });
        assert_eq!(compute_znorm_params(&[]), Err(Error::EmptyInput));
        let unit = [-1.0, 1.0];
        assert_eq!(apply_znorm(&unit, compute_znorm_params(&unit).unwrap()).unwrap(), unit);
        assert!(matches!(
            apply_znorm(&[1.0], ZNormParams { mu: 0.0, sigma: 0.0 }),
            Err(Error::DegenerateSignal(_))
        ));
    }

    #[test]
    fn constant_session_is_rejected_with_location() {
        let s = session([(0.0, 1.0, vec![1.0; 5]), (0.0, 1.0, ramp(5)), (0.0, 1.0, ramp(5))]);
        let cfg = PreprocessConfig {
            ma_window: 3,
            norm_scope: NormScope::PerSessionSignal,
        };
        match preprocess_all(&[s], &cfg) {
            Err(Error::DegenerateSignal(msg)) => {
                assert!(msg.contains("S1") && msg.contains("Midterm1") && msg.contains("skin temperature"))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn window_one_equals_trim_then_znorm() {
        let s = session([
            (0.0, 1.0, vec![3.0, 1.0, 4.0, 1.0, 5.0, 9.0]),
            (1.0, 1.0, vec![2.0, 6.0, 5.0, 3.0, 5.0]),
            (0.0, 2.0, (0..12).map(|i| (i * i) as f64).collect()),
        ]);
        let cfg = PreprocessConfig {
            ma_window: 1,
            norm_scope: NormScope::PerSessionSignal,
        };
        let out = preprocess_all(&[s.clone()], &cfg).unwrap();
        let trimmed = trim_to_common_window(&s).unwrap();
        for kind in SignalKind::ALL {
            let xs = &trimmed.recording(kind).samples;
            let expected = apply_znorm(xs, compute_znorm_params(xs).unwrap()).unwrap();
            assert_eq!(out[0].recordings[&kind].samples, expected);
        }
    }

    #[test]
    fn norm_scope_tokens() {
        for scope in [NormScope::PerStudentPooled, NormScope::PerSessionSignal] {
            assert_eq!(scope.token().parse::<NormScope>(), Ok(scope));
        }
        assert!("global".parse::<NormScope>().is_err());
    }

    proptest! {
        #[test]
        fn moving_average_bounded(xs in prop::collection::vec(-1e3f64..1e3, 1..60), half in 0usize..6) {
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for y in moving_average(&xs, 2 * half + 1).unwrap() {
                prop_assert!(y >= lo - 1e-9 && y <= hi + 1e-9);
            }
        }

        #[test]
        fn moving_average_shift_equivariant(xs in prop::collection::vec(-1e3f64..1e3, 12..60), half in 0usize..4, shift in 1usize..4) {
            let w = 2 * half + 1;
            let a = moving_average(&xs, w).unwrap();
            let b = moving_average(&xs[shift..], w).unwrap();
            // interior indices of the shifted copy
            for i in half..b.len().saturating_sub(half) {
                prop_assert!((b[i] - a[i + shift]).abs() <= 1e-9 * (1.0 + a[i + shift].abs()));
            }
        }

        #[test]
        fn znorm_inverse(xs in prop::collection::vec(-1e3f64..1e3, 2..50)) {
            let p = compute_znorm_params(&xs).unwrap();
            prop_assume!(p.sigma > 1e-6);
            let z = apply_znorm(&xs, p).unwrap();
            for (x, zi) in xs.iter().zip(z) {
                let back = zi * p.sigma + p.mu;
                prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(p.mu.abs()).max(p.sigma));
            }
        }

        #[test]
        fn trimming_preserves_values(
            starts in prop::array::uniform3(0u32..20),
            lens in prop::array::uniform3(20usize..40),
        ) {
            let recs = [0usize, 1, 2].map(|j| (f64::from(starts[j]), 1.0, (0..lens[j]).map(|i| (i * 10 + j) as f64).collect::<Vec<_>>()));
            let s = session(recs);
            let t = trim_to_common_window(&s).unwrap();
            for kind in SignalKind::ALL {
                let (orig, new) = (s.recording(kind), t.recording(kind));
                prop_assert!(new.samples.len() <= orig.samples.len());
                let offset = ((new.start_epoch - orig.start_epoch) * orig.sample_rate).round() as usize;
                prop_assert_eq!(&orig.samples[offset..offset + new.samples.len()], &new.samples[..]);
            }
        }
    }
}
