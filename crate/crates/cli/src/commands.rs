use std::fs;
use std::io::Write;
use std::path::Path;

use stressgrade::evaluation::{run_experiment, EvalSummary};
use stressgrade::features::build_examples;
use stressgrade::ingest::{assemble_sessions, parse_grade_roster, validate_dataset, DatasetManifest, Defect, GradeRecord};
use stressgrade::preprocess::preprocess_all;
use stressgrade::{generate_synthetic_dataset, Session};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::report;
use crate::svg;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{} defect{} found", .0.len(), if .0.len() == 1 { "" } else { "s" })]
    Invalid(Vec<Defect>),
    #[error(transparent)]
    Pipeline(#[from] stressgrade::Error),
    #[error("{0}")]
    Refused(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type CommandResult<T> = Result<T, CommandError>;

fn write_file(path: &Path, contents: &str) -> CommandResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| stressgrade::Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| stressgrade::Error::io(path, e))?;
    Ok(())
}

struct Loaded {
    manifest: DatasetManifest,
    roster: Vec<GradeRecord>,
}

/// Discovers the dataset and parses the roster, collecting problems as
/// defects instead of stopping at the first.
fn load(config: &RunConfig) -> CommandResult<(Option<Loaded>, Vec<Defect>)> {
    let root = config.dataset_root()?;
    let roster_path = config.roster_path()?;
    let mut defects = Vec::new();

    let manifest = match DatasetManifest::discover(root, config.exclusions.clone()) {
        Ok(m) => Some(m),
        Err(e) => {
            let reason = match e {
                stressgrade::Error::Io { message, .. } => message,
                other => other.to_string(),
            };
            defects.push(Defect {
                path: root.to_owned(),
                reason,
            });
            None
        }
    };
    let roster = match fs::read_to_string(roster_path) {
        Err(e) => {
            defects.push(Defect {
                path: roster_path.to_owned(),
                reason: e.to_string(),
            });
            None
        }
        Ok(text) => match parse_grade_roster(&text) {
            Ok(r) => Some(r),
            Err(e) => {
                defects.push(Defect {
                    path: roster_path.to_owned(),
                    reason: e.to_string(),
                });
                None
            }
        },
    };
    match (manifest, roster) {
        (Some(manifest), Some(roster)) => {
            defects.extend(validate_dataset(&manifest, &roster));
            if manifest.included_students().is_empty() {
                defects.push(Defect {
                    path: manifest.root.clone(),
                    reason: "no student directories".into(),
                });
            }
            Ok((Some(Loaded { manifest, roster }), defects))
        }
        _ => Ok((None, defects)),
    }
}

fn load_sessions(config: &RunConfig) -> CommandResult<Vec<Session>> {
    match load(config)? {
        (Some(loaded), defects) if defects.is_empty() => Ok(assemble_sessions(&loaded.manifest, &loaded.roster)?),
        (_, defects) => Err(CommandError::Invalid(defects)),
    }
}

pub fn print_defects(out: &mut dyn Write, defects: &[Defect]) {
    for d in defects {
        let _ = writeln!(out, "{d}");
    }
}

/// Returns the number of valid sessions.
pub fn cmd_validate(config: &RunConfig, out: &mut dyn Write) -> CommandResult<usize> {
    let n = load_sessions(config)?.len();
    let _ = writeln!(out, "{n} sessions OK");
    Ok(n)
}

pub fn cmd_features(config: &RunConfig, out: &mut dyn Write) -> CommandResult<()> {
    let sessions = load_sessions(config)?;
    let clean = preprocess_all(&sessions, &config.preprocess)?;
    let examples = build_examples(&clean, config.threshold)?;
    let path = config.output_dir.join("features.csv");
    write_file(&path, &report::features_csv(&examples))?;
    let _ = writeln!(out, "wrote {} rows to {}", examples.len(), path.display());
    Ok(())
}

/// Runs the full experiment. Nothing is written unless every step succeeds.
pub fn cmd_evaluate(config: &RunConfig, out: &mut dyn Write) -> CommandResult<EvalSummary> {
    let sessions = load_sessions(config)?;
    let specs = config.classifiers.specs();
    let summary = run_experiment(
        &sessions,
        &config.preprocess,
        &specs,
        config.threshold,
        config.repetitions,
        config.base_seed,
    )?;

    let mut artifacts = vec![
        ("results.md".to_owned(), report::results_markdown(&summary, config.threshold)),
        ("results.csv".to_owned(), report::results_csv(&summary)),
        ("roc.svg".to_owned(), svg::roc_svg(&summary.results)),
    ];
    for r in &summary.results {
        artifacts.push((report::roc_file_name(r), report::roc_csv(&r.roc)));
    }
    for (name, text) in &artifacts {
        write_file(&config.output_dir.join(name), text)?;
    }

    for r in &summary.results {
        let _ = writeln!(
            out,
            "{:<4} {} ({})",
            report::display_name(r.spec.name()),
            report::round2(r.mean_auc),
            report::round2(r.std_auc)
        );
    }
    let _ = writeln!(out, "results written to {}", config.output_dir.display());
    Ok(summary)
}

/// Writes a synthetic cohort plus a matching config into `out_dir`.
pub fn cmd_synth(config: &RunConfig, out_dir: &Path, out: &mut dyn Write) -> CommandResult<()> {
    if let Ok(mut entries) = fs::read_dir(out_dir) {
        if entries.next().is_some() {
            return Err(CommandError::Refused(format!(
                "output directory {} is not empty",
                out_dir.display()
            )));
        }
    }
    let s = &config.synth;
    let data = generate_synthetic_dataset(s.seed, s.n_students, s.correlation)?;
    data.write_to(&out_dir.join("data"), &out_dir.join("roster.csv"))?;
    let conf = format!(
        "# synthetic cohort: seed {}, {} students, correlation {}\n\
         dataset_root = data\n\
         roster_path = roster.csv\n\
         output_dir = results\n",
        s.seed, s.n_students, s.correlation
    );
    write_file(&out_dir.join("stressgrade.conf"), &conf)?;
    let _ = writeln!(
        out,
        "wrote {} students to {}",
        s.n_students,
        out_dir.display()
    );
    Ok(())
}
