use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn stressgrade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stressgrade")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Synthetic cohort under `<tmp>/cohort`; returns its config path.
fn synth(tmp: &Path, extra: &[&str]) -> String {
    let out = tmp.join("cohort");
    let mut args = vec!["synth", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = stressgrade(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out.join("stressgrade.conf").to_str().unwrap().to_owned()
}

#[test]
fn synth_then_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = synth(tmp.path(), &[]);
    let o = stressgrade(&["validate", "--config", &conf]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "30 sessions OK");

    let root = tmp.path().join("cohort");
    assert!(root.join("data/S01/Midterm1/TEMP.csv").is_file());
    assert!(root.join("data/S10/Final/EDA.csv").is_file());
    let roster = fs::read_to_string(root.join("roster.csv")).unwrap();
    assert!(roster.starts_with("student_id,exam,raw_score,max_score\n"));

    // second run into the same place is refused
    let o = stressgrade(&["synth", "--out", root.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not empty"));
}

#[test]
fn validate_lists_defects() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = synth(tmp.path(), &["synth.n_students=3"]);
    let data = tmp.path().join("cohort/data");
    fs::remove_file(data.join("S02/Midterm2/TEMP.csv")).unwrap();
    fs::write(data.join("S03/Final/HR.csv"), "1544000000.0\n0\n70\n").unwrap();

    let o = stressgrade(&["validate", "--config", &conf]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("S02/Midterm2/TEMP.csv: missing"), "{err}");
    assert!(err.contains("S03/Final/HR.csv"), "{err}");
    assert!(err.contains("2 defects found"), "{err}");
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("bad.conf");
    fs::write(&conf, "dataset_root = data\nwindow = 5\n").unwrap();
    let o = stressgrade(&["validate", "--config", conf.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown config key \"window\""));

    let missing = tmp.path().join("nope.conf");
    assert_eq!(stressgrade(&["evaluate", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(stressgrade(&["evaluate", "repetitions=zero"]).status.code(), Some(2));
    assert_eq!(stressgrade(&["evaluate", "no-equals-sign"]).status.code(), Some(2));
    assert_eq!(stressgrade(&["frobnicate"]).status.code(), Some(2));
    // no dataset configured
    assert_eq!(stressgrade(&["validate"]).status.code(), Some(2));
}

#[test]
fn features_table() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = synth(tmp.path(), &["synth.n_students=4"]);
    let out = tmp.path().join("feat");
    let o = stressgrade(&["features", "--config", &conf, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let csv = fs::read_to_string(out.join("features.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 13);
    let header: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(header.len(), 19);
    assert_eq!(&header[..3], ["student_id", "exam", "temp_mean"]);
    assert_eq!(header[16], "eda_median");
    assert_eq!(&header[17..], ["percent", "label"]);
    for row in &lines[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 19);
        let percent: f64 = cells[17].parse().unwrap();
        assert_eq!(cells[18], if percent > 80.0 { "1" } else { "0" });
        assert!(cells[2..17].iter().all(|c| c.parse::<f64>().unwrap().is_finite()));
    }
}

#[test]
fn evaluate_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = synth(tmp.path(), &[]);
    let out = tmp.path().join("res");
    let o = stressgrade(&["evaluate", "--config", &conf, "--out", out.to_str().unwrap(), "repetitions=3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let md = fs::read_to_string(out.join("results.md")).unwrap();
    assert!(md.contains("| | RF | SGD | SVM | KNN |"), "{md}");
    assert!(md.contains("| ROC-AUC | 1.00 (0.00) | 1.00 (0.00) | 1.00 (0.00) | 1.00 (0.00) |"), "{md}");

    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "classifier,mean_auc,std_auc,auc_rep1,auc_rep2,auc_rep3");
    let names: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["rf", "sgd", "svm", "knn"]);

    for name in names {
        let roc = fs::read_to_string(out.join(format!("roc_{name}.csv"))).unwrap();
        let rows: Vec<&str> = roc.lines().collect();
        assert_eq!(rows[0], "threshold,fpr,tpr");
        assert_eq!(rows[1], "inf,0,0");
        assert!(rows.last().unwrap().ends_with(",1,1"));
    }

    let svg = fs::read_to_string(out.join("roc.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "svg");
    assert_eq!(root.attribute("viewBox"), Some("0 0 800 600"));
    let polylines = root.descendants().filter(|n| n.has_tag_name("polyline")).count();
    assert_eq!(polylines, 4);
    assert!(root
        .descendants()
        .any(|n| n.has_tag_name("line") && n.attribute("stroke-dasharray").is_some()));
    let texts: Vec<&str> = root.descendants().filter_map(|n| n.has_tag_name("text").then(|| n.text().unwrap())).collect();
    for legend in ["RF", "SGD", "SVM", "KNN"] {
        assert!(texts.contains(&legend));
    }
}

#[test]
fn evaluate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = synth(tmp.path(), &["synth.correlation=0.5", "synth.n_students=6"]);
    let run = |dir: &str| {
        let out = tmp.path().join(dir);
        let o = stressgrade(&["evaluate", "--config", &conf, "--out", out.to_str().unwrap(), "repetitions=3"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for file in ["results.csv", "results.md", "roc.svg", "roc_rf.csv", "roc_sgd.csv"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn classifier_subset_and_failed_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = synth(tmp.path(), &["synth.n_students=4"]);
    let out = tmp.path().join("knn");
    let o = stressgrade(&["evaluate", "--config", &conf, "--out", out.to_str().unwrap(), "classifiers.enabled=knn"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("roc_knn.csv").is_file());
    assert!(!out.join("roc_svm.csv").exists());

    // every session above a 0% threshold: one class, nothing written
    let out = tmp.path().join("single");
    let o = stressgrade(&["evaluate", "--config", &conf, "--out", out.to_str().unwrap(), "threshold=0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn validate_reports_missing_grade() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = synth(tmp.path(), &["synth.n_students=3"]);
    let roster = tmp.path().join("cohort/roster.csv");
    let text = fs::read_to_string(&roster).unwrap();
    let kept: Vec<&str> = text.lines().filter(|l| !l.starts_with("S02,midterm2")).collect();
    assert_eq!(kept.len(), text.lines().count() - 1, "{text}");
    fs::write(&roster, kept.join("\n") + "\n").unwrap();

    let o = stressgrade(&["validate", "--config", &conf]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no grade for student S02"), "{}", stderr(&o));
}

#[test]
fn features_rerun_and_session_scope() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = synth(tmp.path(), &["synth.n_students=3"]);
    let run = |dir: &str, extra: &[&str]| {
        let out = tmp.path().join(dir);
        let mut args = vec!["features", "--config", &conf, "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert_eq!(stressgrade(&args).status.code(), Some(0));
        fs::read_to_string(out.join("features.csv")).unwrap()
    };
    assert_eq!(run("a", &[]), run("b", &[]));

    let csv = run("c", &["preprocess.norm_scope=per_session_signal"]);
    for row in csv.lines().skip(1) {
        let cells: Vec<f64> = row.split(',').skip(2).map(|c| c.parse().unwrap()).collect();
        // temp_mean and temp_std
        assert!(cells[0].abs() < 1e-9, "{row}");
        assert!((cells[1] - 1.0).abs() < 1e-9, "{row}");
    }
}

fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_owned()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn synth_is_deterministic_and_guarded() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = stressgrade(&["synth", "--out", dir.to_str().unwrap(), "synth.correlation=0.3"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let ta = tree(&a);
    assert_eq!(ta.len(), 10 * 3 * 3 + 2);
    assert_eq!(ta, tree(&b));

    let c = tmp.path().join("c");
    let o = stressgrade(&["synth", "--out", c.to_str().unwrap(), "synth.n_students=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("n_students"));
}

#[test]
fn summary_columns_match_repetitions() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = synth(tmp.path(), &["synth.correlation=0.5", "synth.n_students=5"]);
    let out = tmp.path().join("res");
    let o = stressgrade(&["evaluate", "--config", &conf, "--out", out.to_str().unwrap(), "repetitions=4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    for row in csv.lines().skip(1) {
        let v: Vec<f64> = row.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
        let aucs = &v[2..];
        assert_eq!(aucs.len(), 4);
        let mean = aucs.iter().sum::<f64>() / 4.0;
        let std = (aucs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 4.0).sqrt();
        assert!((mean - v[0]).abs() < 1e-12 && (std - v[1]).abs() < 1e-12, "{row}");
    }
}
