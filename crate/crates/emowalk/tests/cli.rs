use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use emowalk::config::TaskChoice;
use emowalk::model_io::Model;
use emowalk::results::{self, ResultsFile, RESULTS_FORMAT};
use emowalk_core::eval::{MetricSet, ModelEvaluation, ModelKind, Protocol, Task, UserEvaluation};
use emowalk_core::features::WindowingConfig;

fn emowalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emowalk")).args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let out = emowalk(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tree_bytes(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

const TINY: &str = "\
[protocol]
k = 3
n_iter = 3
seed = 5
task = \"both\"

[search]
n_trees = [5, 10]

[forest]
n_trees = 10

[synth]
n_users = 3
conditions = [1]
walk_duration_s = 10
seed = 5
";

fn tiny_cohort(dir: &Path) -> PathBuf {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, TINY).unwrap();
    ok(&["--config", s(&cfg), "synth", "--out", s(&dir.join("cohort"))]);
    cfg
}

#[test]
fn missing_encoding_is_a_data_error_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("walking");
    let out = emowalk(&[
        "walkgen",
        "--encoding",
        s(&dir.path().join("absent.csv")),
        "--raw-dir",
        s(dir.path()),
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.csv"));
    assert!(!out_dir.exists());
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(emowalk(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(emowalk(&["report"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[protocol]\nseeed = 3\n").unwrap();
    let out = emowalk(&["--config", s(&cfg), "report", "--results", "x.yaml", "--out", "y"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(emowalk(&["--help"]).status.success());
}

#[test]
fn malformed_raw_row_names_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    tiny_cohort(dir.path());
    let raw = dir.path().join("cohort/raw/SY001.csv");
    let mut text = std::fs::read_to_string(&raw).unwrap();
    let second_line_end = text.match_indices('\n').nth(1).unwrap().0;
    text.insert_str(second_line_end + 1, "not,a,row\n");
    std::fs::write(&raw, text).unwrap();
    let args = |extra: &'static str| {
        let mut a = vec![
            "walkgen".to_string(),
            "--encoding".into(),
            s(&dir.path().join("cohort/encoding.csv")).into(),
            "--raw-dir".into(),
            s(&dir.path().join("cohort/raw")).into(),
            "--out".into(),
            s(&dir.path().join("w")).into(),
        ];
        if !extra.is_empty() {
            a.push(extra.into());
        }
        a
    };
    let strict = Command::new(env!("CARGO_BIN_EXE_emowalk"))
        .args(args(""))
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("SY001.csv:3"));
    let lenient = Command::new(env!("CARGO_BIN_EXE_emowalk"))
        .args(args("--lenient"))
        .output()
        .unwrap();
    assert!(lenient.status.success());
}

#[test]
fn run_all_equals_manual_chaining() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_cohort(dir.path());
    let d = |p: &str| dir.path().join(p);
    let enc = d("cohort/encoding.csv");
    let raw = d("cohort/raw");
    ok(&[
        "--config",
        s(&cfg),
        "run-all",
        "--encoding",
        s(&enc),
        "--raw-dir",
        s(&raw),
        "--out",
        s(&d("auto")),
    ]);
    ok(&[
        "--config",
        s(&cfg),
        "walkgen",
        "--encoding",
        s(&enc),
        "--raw-dir",
        s(&raw),
        "--out",
        s(&d("manual/walking")),
    ]);
    ok(&[
        "--config",
        s(&cfg),
        "featex",
        "--walking",
        s(&d("manual/walking")),
        "--out",
        s(&d("manual/features")),
    ]);
    ok(&[
        "--config",
        s(&cfg),
        "evaluate",
        "--features",
        s(&d("manual/features")),
        "--out",
        s(&d("manual/results.yaml")),
    ]);
    ok(&[
        "report",
        "--results",
        s(&d("manual/results.yaml")),
        "--out",
        s(&d("manual/report")),
    ]);
    let auto = tree_bytes(&d("auto"));
    assert_eq!(auto, tree_bytes(&d("manual")));
    let yaml = String::from_utf8(auto[Path::new("results.yaml")].clone()).unwrap();
    assert!(yaml.contains("seed: 5"));
    assert!(yaml.contains("config_digest: "));
    assert!(auto.contains_key(Path::new("report/boxplot_ternary.csv")));
}

#[test]
fn flags_override_config_and_change_the_digest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_cohort(dir.path());
    let d = |p: &str| dir.path().join(p);
    let enc = d("cohort/encoding.csv");
    let raw = d("cohort/raw");
    ok(&[
        "--config",
        s(&cfg),
        "walkgen",
        "--encoding",
        s(&enc),
        "--raw-dir",
        s(&raw),
        "--out",
        s(&d("w")),
    ]);
    ok(&[
        "--config",
        s(&cfg),
        "featex",
        "--walking",
        s(&d("w")),
        "--out",
        s(&d("f")),
    ]);
    for (name, seed) in [("r5.yaml", "5"), ("r6.yaml", "6")] {
        ok(&[
            "--config",
            s(&cfg),
            "evaluate",
            "--features",
            s(&d("f")),
            "--task",
            "binary",
            "--seed",
            seed,
            "--out",
            s(&d(name)),
        ]);
    }
    let a = results::read_results(&d("r5.yaml")).unwrap();
    let b = results::read_results(&d("r6.yaml")).unwrap();
    assert_eq!((a.seed, b.seed), (5, 6));
    assert_eq!(a.task, TaskChoice::Binary);
    assert_ne!(a.config_digest, b.config_digest);
    assert!(a.evaluations.iter().all(|e| e.task == Task::Binary));
}

#[test]
fn tune_writes_audit_and_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_cohort(dir.path());
    let d = |p: &str| dir.path().join(p);
    ok(&[
        "--config",
        s(&cfg),
        "run-all",
        "--encoding",
        s(&d("cohort/encoding.csv")),
        "--raw-dir",
        s(&d("cohort/raw")),
        "--out",
        s(&d("o")),
    ]);
    let features = d("o/features/SY001_c1.csv");
    let out = emowalk(&[
        "--config",
        s(&cfg),
        "tune",
        "--features",
        s(&features),
        "--out",
        s(&d("t.yaml")),
    ]);
    assert_eq!(out.status.code(), Some(1), "task both is ambiguous for tune");
    ok(&[
        "--config",
        s(&cfg),
        "tune",
        "--features",
        s(&features),
        "--task",
        "ternary",
        "--n-iter",
        "4",
        "--out",
        s(&d("t.yaml")),
        "--model-out",
        s(&d("m.txt")),
    ]);
    let audit = std::fs::read_to_string(d("t.yaml")).unwrap();
    assert_eq!(audit.matches("sample_index:").count(), 4);
    let model = Model::from_text(&std::fs::read_to_string(d("m.txt")).unwrap()).unwrap();
    assert!(matches!(model, Model::Forest(_)));
}

fn fixture_user(pid: &str, accs: [f64; 4]) -> UserEvaluation {
    let models = ModelKind::ALL
        .iter()
        .zip(accs)
        .map(|(&model, a)| {
            let m = MetricSet {
                auc: a,
                f1_weighted: a,
                accuracy: a,
            };
            ModelEvaluation {
                model,
                metrics: m,
                folds: vec![m],
            }
        })
        .collect();
    UserEvaluation {
        participant_id: pid.into(),
        condition: 0,
        task: Task::Binary,
        n_windows: 40,
        models,
        tuning: vec![],
    }
}

#[test]
fn report_reproduces_printed_lifts() {
    // per-user accuracies whose means are the printed column means
    let users = [
        fixture_user("P1", [0.500, 0.800, 0.840, 0.860]),
        fixture_user("P2", [0.524, 0.836, 0.866, 0.882]),
        fixture_user("P3", [0.512, 0.818, 0.853, 0.871]),
    ];
    let file = ResultsFile {
        format: RESULTS_FORMAT.into(),
        seed: 0,
        config_digest: "fixture".into(),
        catalog_version: "1".into(),
        task: TaskChoice::Binary,
        windowing: WindowingConfig::default(),
        protocol: Protocol::default(),
        evaluations: users.to_vec(),
        skipped: vec![],
    };
    let dir = tempfile::tempdir().unwrap();
    let yaml = dir.path().join("results.yaml");
    std::fs::write(&yaml, results::to_yaml(&file)).unwrap();
    ok(&["report", "--results", s(&yaml), "--out", s(&dir.path().join("report"))]);
    let csv = std::fs::read_to_string(dir.path().join("report/summary_binary.csv")).unwrap();
    let lifts: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(8).unwrap()).collect();
    assert_eq!(lifts, ["", "0.306", "0.341", "0.359"]);
    let baseline = csv.lines().nth(1).unwrap();
    assert!(baseline.starts_with("0,baseline,"));
    assert!(baseline.ends_with(",,"));
    assert!(!dir.path().join("report/summary_ternary.csv").exists());
}
