//! Text artifacts: feature table, result table, per-repetition AUCs and
//! ROC points. Floats are written with `Display`, which round-trips.

use std::fmt::Write as _;

use stressgrade::evaluation::{ClassifierResult, EvalSummary, RocPoint};
use stressgrade::features::FeatureVector;
use stressgrade::LabeledExample;

/// Round half away from zero to two decimals.
pub fn round2(x: f64) -> String {
    format!("{:.2}", (x * 100.0).round() / 100.0)
}

pub fn display_name(name: &str) -> String {
    name.to_ascii_uppercase()
}

pub fn features_csv(examples: &[LabeledExample]) -> String {
    let mut out = String::from("student_id,exam");
    for column in FeatureVector::column_names() {
        out.push(',');
        out.push_str(&column);
    }
    out.push_str(",percent,label\n");
    for e in examples {
        write!(out, "{},{}", e.student_id, e.exam.dir_name()).unwrap();
        for v in e.features.values() {
            write!(out, ",{v}").unwrap();
        }
        writeln!(out, ",{},{}", e.percent, u8::from(e.label)).unwrap();
    }
    out
}

/// Markdown table with one column per classifier.
pub fn results_markdown(summary: &EvalSummary, threshold: f64) -> String {
    let mut out = String::from("# ROC-AUC by classifier\n\n");
    writeln!(
        out,
        "Pooled leave-one-student-out ROC-AUC, mean (std) over {} repetition{}. \
         {} sessions from {} students, {} labelled high (> {threshold}%).\n",
        summary.repetitions,
        if summary.repetitions == 1 { "" } else { "s" },
        summary.n_examples,
        summary.n_students,
        summary.n_positive,
    )
    .unwrap();
    let names: Vec<String> = summary.results.iter().map(|r| display_name(r.spec.name())).collect();
    writeln!(out, "| | {} |", names.join(" | ")).unwrap();
    writeln!(out, "|---|{}", "---|".repeat(names.len())).unwrap();
    let cells: Vec<String> = summary
        .results
        .iter()
        .map(|r| format!("{} ({})", round2(r.mean_auc), round2(r.std_auc)))
        .collect();
    writeln!(out, "| ROC-AUC | {} |", cells.join(" | ")).unwrap();
    out
}

pub fn results_csv(summary: &EvalSummary) -> String {
    let mut out = String::from("classifier,mean_auc,std_auc");
    for r in 1..=summary.repetitions {
        write!(out, ",auc_rep{r}").unwrap();
    }
    out.push('\n');
    for result in &summary.results {
        write!(out, "{},{},{}", result.spec.name(), result.mean_auc, result.std_auc).unwrap();
        for auc in &result.aucs {
            write!(out, ",{auc}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn roc_csv(points: &[RocPoint]) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in points {
        writeln!(out, "{},{},{}", p.threshold, p.false_positive_rate, p.true_positive_rate).unwrap();
    }
    out
}

pub fn roc_file_name(result: &ClassifierResult) -> String {
    format!("roc_{}.csv", result.spec.name())
}
