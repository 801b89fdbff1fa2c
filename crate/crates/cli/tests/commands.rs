use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ipursuit::datagen::{canonical_ensemble, sample_points, DataMatrix};
use ipursuit::Rng;
use ipursuit_cli::commands::TheoryMetrics;
use ipursuit_cli::record::ResultRecord;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ipursuit"));
    c.env_remove("IPURSUIT_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_points(path: &Path, d: &DataMatrix, with_labels: bool) {
    let m = d.ambient_dim();
    let mut text = String::new();
    if with_labels {
        let names: Vec<String> = (0..m).map(|i| format!("x{i}")).collect();
        text.push_str(&names.join(","));
        text.push_str(",label\n");
    }
    for j in 0..d.len() {
        let row: Vec<String> = (0..m).map(|i| format!("{:e}", d.points()[(i, j)])).collect();
        text.push_str(&row.join(","));
        if with_labels {
            text.push_str(&format!(",{}", d.labels().unwrap()[j]));
        }
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

/// Two orthogonal planes in R^6, 15 labeled points each.
fn orthogonal_csv(dir: &TempDir) -> PathBuf {
    let ens = canonical_ensemble(6, 2, 2, 0).unwrap();
    let d = sample_points(&ens, 15, &mut Rng::new(11)).unwrap();
    let p = dir.path().join("orth.csv");
    write_points(&p, &d, true);
    p
}

fn record(path: &Path) -> ResultRecord {
    ResultRecord::from_json(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn cluster_orthogonal_is_perfect() {
    let dir = TempDir::new().unwrap();
    let input = orthogonal_csv(&dir);
    let (json, labels) = (dir.path().join("r.json"), dir.path().join("l.csv"));
    let out = run(&["cluster", "--input", s(&input), "--k", "2", "--out", s(&json), "--labels-out", s(&labels)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("accuracy: 1.000000"));
    let r = record(&json);
    assert_eq!(r.metrics["accuracy"], 1.0);
    assert_eq!(r.seed, Some(0));
    assert_eq!(r.config["k"], 2);
    assert_eq!(fs::read_to_string(&labels).unwrap().lines().count(), 30);
}

#[test]
fn labels_go_to_stdout_without_path() {
    let dir = TempDir::new().unwrap();
    let input = orthogonal_csv(&dir);
    let out = run(&["cluster", "--input", s(&input), "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 30);
    assert!(stdout.lines().all(|l| l == "0" || l == "1"));
}

#[test]
fn cluster_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = orthogonal_csv(&dir);
    let mut outputs = Vec::new();
    for tag in ["a", "b"] {
        let (json, labels) = (dir.path().join(format!("{tag}.json")), dir.path().join(format!("{tag}.csv")));
        let out = run(&[
            "cluster", "--input", s(&input), "--k", "2", "--seed", "5", "--enhance", "auto",
            "--out", s(&json), "--labels-out", s(&labels),
        ]);
        assert_eq!(out.status.code(), Some(0));
        outputs.push((fs::read(json).unwrap(), fs::read(labels).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn baselines_run() {
    let dir = TempDir::new().unwrap();
    let input = orthogonal_csv(&dir);
    for method in ["tsc", "kmeans"] {
        let json = dir.path().join(format!("{method}.json"));
        let out = run(&["cluster", "--input", s(&input), "--k", "2", "--method", method, "--out", s(&json)]);
        assert_eq!(out.status.code(), Some(0), "{method}");
        assert_eq!(record(&json).config["method"], method);
    }
}

#[test]
fn timing_is_opt_in() {
    let dir = TempDir::new().unwrap();
    let input = orthogonal_csv(&dir);
    let json = dir.path().join("t.json");
    let out = run(&["cluster", "--input", s(&input), "--k", "2", "--timing", "--out", s(&json)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(record(&json).elapsed_ms.is_some());
}

#[test]
fn zero_k_is_usage_error_without_output() {
    let dir = TempDir::new().unwrap();
    let input = orthogonal_csv(&dir);
    let (json, labels) = (dir.path().join("r.json"), dir.path().join("l.csv"));
    let out = run(&["cluster", "--input", s(&input), "--k", "0", "--out", s(&json), "--labels-out", s(&labels)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!json.exists() && !labels.exists());
}

#[test]
fn validation_failures_exit_two() {
    let dir = TempDir::new().unwrap();
    let input = orthogonal_csv(&dir);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,abc\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["cluster", "--input", s(&input), "--k", "31"],
        vec!["cluster", "--input", s(&input), "--k", "2", "--enhance", "lots"],
        vec!["cluster", "--input", s(&input), "--k", "2", "--tol", "-1"],
        vec!["cluster", "--input", s(&bad), "--k", "1"],
        vec!["cluster", "--input", "/nonexistent.csv", "--k", "1"],
        vec!["--workers", "0", "cluster", "--input", s(&input), "--k", "2"],
        vec!["cluster", "--k", "2"],
        vec!["no-such-command"],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = run(&["cluster", "--input", s(&bad), "--k", "1"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn worker_env_var_is_read() {
    let dir = TempDir::new().unwrap();
    let input = orthogonal_csv(&dir);
    let bad = bin()
        .args(["cluster", "--input", s(&input), "--k", "2"])
        .env("IPURSUIT_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let one = bin()
        .args(["cluster", "--input", s(&input), "--k", "2"])
        .env("IPURSUIT_WORKERS", "1")
        .output()
        .unwrap();
    let flag = run(&["--workers", "2", "cluster", "--input", s(&input), "--k", "2"]);
    assert_eq!(one.stdout, flag.stdout);
}

#[test]
fn singular_values_of_rank_two_file() {
    let dir = TempDir::new().unwrap();
    let ens = canonical_ensemble(5, 1, 2, 0).unwrap();
    let d = sample_points(&ens, 20, &mut Rng::new(2)).unwrap();
    let (input, out_csv) = (dir.path().join("r2.csv"), dir.path().join("sv.csv"));
    write_points(&input, &d, false);
    let out = run(&["singular-values", "--input", s(&input), "--out", s(&out_csv)]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&out_csv).unwrap();
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 5);
    assert!(values.windows(2).all(|w| w[0] >= w[1]));
    assert_eq!(values.iter().filter(|&&v| v > 1e-10 * values[0]).count(), 2);
    assert_eq!(record(&ipursuit_cli::commands::sidecar_path(&out_csv)).metrics["rank"], 2);
}

#[test]
fn singular_values_recommend_one_for_shared_component() {
    // d_i = u + 0.1 g_i: one dominant shared direction.
    let dir = TempDir::new().unwrap();
    let mut rng = Rng::new(9);
    let mut text = String::new();
    for _ in 0..40 {
        let row: Vec<String> = (0..10)
            .map(|j| {
                let u = if j == 0 { 1.0 } else { 0.0 };
                format!("{}", u + 0.1 * rng.normal())
            })
            .collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    let (input, out_csv) = (dir.path().join("shared.csv"), dir.path().join("sv.csv"));
    fs::write(&input, text).unwrap();
    let out = run(&["singular-values", "--input", s(&input), "--out", s(&out_csv), "--top", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("recommended s_hat: 1"));
    assert_eq!(fs::read_to_string(&out_csv).unwrap().lines().count(), 4);
    let again = dir.path().join("sv2.csv");
    run(&["singular-values", "--input", s(&input), "--out", s(&again), "--top", "3"]);
    assert_eq!(fs::read(&out_csv).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn theory_check_orthogonal_consistency_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("theory.json");
    let out = run(&[
        "theory-check", "--M", "20", "--K", "3", "--m", "3", "--s", "0", "--n", "200",
        "--ensemble-kind", "orthogonal", "--out", s(&json),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&json).unwrap();
    let r = ResultRecord::from_json(&text).unwrap();
    let metrics: TheoryMetrics = serde_json::from_value(r.metrics.clone()).unwrap();
    assert!(metrics.report.theorem1_ok);
    assert_eq!(metrics.pipeline_accuracy, 1.0);
    assert!(text.contains("\"T_limit\""));
    // Typed round trip reproduces the file byte for byte.
    let mut back = r.clone();
    back.metrics = serde_json::to_value(&metrics).unwrap();
    assert_eq!(back.to_json().unwrap(), text);
}

#[test]
fn theory_check_flags_large_intersection() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("theory.json");
    let out = run(&[
        "theory-check", "--M", "20", "--K", "2", "--m", "10", "--s", "9", "--n", "30", "--kappa", "0.5",
        "--ensemble-kind", "orthogonal", "--out", s(&json),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let metrics: TheoryMetrics = serde_json::from_value(record(&json).metrics).unwrap();
    assert!(!metrics.report.theorem1_ok);
    assert!(metrics.report.t3 > std::f64::consts::FRAC_1_SQRT_2);
}

#[test]
fn theory_check_from_files() {
    let dir = TempDir::new().unwrap();
    let input = orthogonal_csv(&dir);
    let ens_path = dir.path().join("ens.json");
    let e = |i: usize| (0..6).map(|j| if i == j { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
    let ens = ipursuit_cli::commands::EnsembleFile {
        intersection: vec![],
        innovations: vec![vec![e(0), e(1)], vec![e(2), e(3)]],
    };
    fs::write(&ens_path, serde_json::to_string(&ens).unwrap()).unwrap();
    let json = dir.path().join("theory.json");
    let out = run(&["theory-check", "--input", s(&input), "--ensemble", s(&ens_path), "--out", s(&json)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let metrics: TheoryMetrics = serde_json::from_value(record(&json).metrics).unwrap();
    assert_eq!(metrics.n_points, 30);
    assert!(metrics.report.t1 < 1e-12);

    // Without an ensemble description the command refuses.
    let out = run(&["theory-check", "--input", s(&input), "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_reproducible_and_validated() {
    let dir = TempDir::new().unwrap();
    let args = |out: &Path| -> Vec<String> {
        [
            "synth-sweep", "--M", "20", "--K", "2", "--m-rule", "s+2", "--s-list", "2,4",
            "--n-per-cluster", "10", "--trials", "1", "--shat-offset", "1", "--seed", "3", "--out",
        ]
        .iter()
        .map(|x| x.to_string())
        .chain([s(out).to_string()])
        .collect()
    };
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(bin().args(args(&a)).output().unwrap().status.code(), Some(0));
    assert_eq!(bin().args(args(&b)).output().unwrap().status.code(), Some(0));
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().next().unwrap(), "param,value,method,mean_accuracy,std_accuracy,trials");
    assert_eq!(text.lines().count(), 5);
    let meta = record(&ipursuit_cli::commands::sidecar_path(&a));
    assert_eq!(meta.config["seed"], 3);

    let bad = dir.path().join("bad.csv");
    let out = run(&["synth-sweep", "--M", "20", "--K", "5", "--m-rule", "s+4", "--s-list", "2", "--out", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!bad.exists());
    let out = run(&["synth-sweep", "--preset", "fig2a", "--M", "30", "--out", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ratio_experiment_rows_and_seed() {
    let dir = TempDir::new().unwrap();
    let run_once = |name: &str, seed: &str, extra: &[&str]| -> String {
        let p = dir.path().join(name);
        let mut args = vec!["ratio-experiment", "--M", "400", "--K", "3", "--s-list", "10", "--trials", "1", "--seed", seed];
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--out", s(&p)]);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read_to_string(p).unwrap()
    };
    let a = run_once("a.csv", "1", &[]);
    assert_eq!(a.lines().count(), 2);
    assert!(a.starts_with("s,m,T,mean_ratio,min_ratio,max_ratio\n"));
    assert_eq!(a, run_once("b.csv", "1", &[]));
    assert_ne!(a, run_once("c.csv", "2", &[]));
    let sq = run_once("d.csv", "1", &["--sqrt-convention"]);
    assert!(sq.lines().next().unwrap().ends_with("sqrt_mean_ratio,sqrt_min_ratio,sqrt_max_ratio"));

    let bad = dir.path().join("bad.csv");
    let out = run(&["ratio-experiment", "--M", "50", "--K", "10", "--s-list", "10", "--out", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!bad.exists());
}
