use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lingam::datagen::generate;
use lingam::io::{read_ground_truth, read_result, write_dataset};
use lingam::GroundTruthModel;
use nalgebra::DMatrix;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

fn lingam(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lingam"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_model_data(path: &Path, model: &GroundTruthModel, m: usize, seed: u64) {
    let data = generate(model, m, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    write_dataset(fs::File::create(path).unwrap(), &data).unwrap();
}

/// x4 drives x1 and x2, which both drive x3.
fn example_model() -> GroundTruthModel {
    let mut b = DMatrix::zeros(4, 4);
    b[(1, 0)] = 1.0;
    b[(2, 0)] = 0.2;
    b[(3, 1)] = -5.0;
    b[(3, 2)] = -2.0;
    let exponents = vec![0.6, 1.6, 0.7, 1.9];
    GroundTruthModel::new(b, vec![0.0; 4], vec![1.0; 4], exponents, vec![1, 2, 3, 0]).unwrap()
}

fn example_dir(m: usize) -> (TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("example.csv");
    write_model_data(&path, &example_model(), m, 21);
    (dir, path)
}

#[test]
fn generate_writes_dataset_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = lingam(
        dir.path(),
        &["generate", "--n", "4", "--m", "100", "--seed", "1", "-o", "d.csv"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 101);
    assert!(lines.iter().all(|l| l.split(',').count() == 4));
    assert_eq!(lines[0], "x1,x2,x3,x4");
    let truth = read_ground_truth(fs::File::open(dir.path().join("d.truth.json")).unwrap()).unwrap();
    assert_eq!(truth.n(), 4);
}

#[test]
fn generate_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["generate", "--n", "5", "--m", "300", "--seed", "7", "--sparsity", "0.3"];
    lingam(dir.path(), &[&args[..], &["-o", "a.csv"]].concat());
    lingam(dir.path(), &[&args[..], &["-o", "b.csv"]].concat());
    let read = |p: &str| fs::read(dir.path().join(p)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.truth.json"), read("b.truth.json"));

    lingam(
        dir.path(),
        &["generate", "--n", "5", "--m", "300", "--seed", "8", "-o", "c.csv"],
    );
    assert_ne!(read("a.csv"), read("c.csv"));
}

#[test]
fn generate_full_sparsity_has_no_edges() {
    let dir = tempfile::tempdir().unwrap();
    let out = lingam(dir.path(), &["generate", "--sparsity", "1", "-o", "d.csv"]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("d.truth.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["edges"], serde_json::json!([]));
}

#[test]
fn generate_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = lingam(dir.path(), &["generate", "--n", "2", "--m", "10", "--truth", "t.json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 11);
    assert!(dir.path().join("t.json").exists());
}

#[test]
fn generate_unwritable_path_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = lingam(dir.path(), &["generate", "-o", "missing/dir/d.csv"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cannot write"), "{}", stderr(&out));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "samples = 50\nseed = 3\n[model]\nn = 3\n").unwrap();
    lingam(dir.path(), &["--config", "run.toml", "generate", "-o", "a.csv"]);
    lingam(
        dir.path(),
        &["--config", "run.toml", "generate", "--m", "20", "-o", "b.csv"],
    );
    let rows = |p: &str| fs::read_to_string(dir.path().join(p)).unwrap().lines().count() - 1;
    assert_eq!(rows("a.csv"), 50);
    assert_eq!(rows("b.csv"), 20);

    fs::write(dir.path().join("bad.toml"), "[ica]\nrestart = 2\n").unwrap();
    let out = lingam(dir.path(), &["--config", "bad.toml", "generate", "-o", "c.csv"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn discover_finds_the_example_order() {
    let (dir, _) = example_dir(10_000);
    let out = lingam(
        dir.path(),
        &[
            "discover",
            "example.csv",
            "-o",
            "r.json",
            "--dot",
            "r.dot",
            "--seed",
            "3",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let result = read_result(fs::File::open(dir.path().join("r.json")).unwrap()).unwrap();
    let order = &result.causal_order.order;
    assert_eq!(order[0], 3);
    assert_eq!(order[3], 2);

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["ica"]["seed"], 3);
    assert_eq!(json["causal_order_names"][0], "x4");

    let dot = fs::read_to_string(dir.path().join("r.dot")).unwrap();
    assert!(dot.contains("digraph"));
    let line = dot.lines().find(|l| l.contains("\"x4\" -> \"x1\"")).unwrap();
    let label: f64 = line.split('"').nth(5).unwrap().parse().unwrap();
    assert!((label - 1.0).abs() < 0.15, "{line}");
}

#[test]
fn discover_formats() {
    let (dir, _) = example_dir(2000);
    let out = lingam(dir.path(), &["discover", "example.csv", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x1,x2,x3,x4");
    assert_eq!(text.lines().count(), 5);

    let out = lingam(dir.path(), &["discover", "example.csv", "--format", "dot"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("// lingam discover"));
}

#[test]
fn discover_single_variable() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("one.csv"), "a\n1\n3\n5\n7\n2\n8\n4\n4\n0\n1\n6\n").unwrap();
    let out = lingam(dir.path(), &["discover", "one.csv", "-o", "r.json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let result = read_result(fs::File::open(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(result.causal_order.order, vec![0]);
    assert_eq!(result.b_hat.get(0, 0), 0.0);
}

#[test]
fn discover_bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "a,b\n1,2\n3,x\n").unwrap();
    let out = lingam(dir.path(), &["discover", "bad.csv"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("not a number"), "{}", stderr(&out));

    fs::write(dir.path().join("const.csv"), "a,b\n1,4\n2,4\n3,4\n5,4\n").unwrap();
    let out = lingam(dir.path(), &["discover", "const.csv"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("degenerate"), "{}", stderr(&out));

    let out = lingam(dir.path(), &["discover", "absent.csv"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn discover_non_convergence_exits_4_with_output() {
    let (dir, _) = example_dir(2000);
    let out = lingam(
        dir.path(),
        &[
            "discover",
            "example.csv",
            "--max-iterations",
            "1",
            "--tolerance",
            "1e-15",
            "-o",
            "r.json",
        ],
    );
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("did not converge"));
    let result = read_result(fs::File::open(dir.path().join("r.json")).unwrap()).unwrap();
    assert!(!result.ica_report.unwrap().converged);
}

#[test]
fn discover_warnings_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut b = DMatrix::zeros(3, 3);
    b[(1, 0)] = 0.8;
    b[(2, 1)] = -0.6;
    let model = GroundTruthModel::new(b, vec![0.0; 3], vec![1.0; 3], vec![1.0; 3], vec![0, 1, 2]).unwrap();
    write_model_data(&dir.path().join("g.csv"), &model, 2000, 1);
    let out = lingam(dir.path(), &["discover", "g.csv", "-o", "r.json"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("warning:"));
    assert!(dir.path().join("r.json").exists());
}

#[test]
fn prune_example() {
    let (dir, _) = example_dir(10_000);
    lingam(dir.path(), &["discover", "example.csv", "-o", "r.json"]);
    let out = lingam(
        dir.path(),
        &[
            "prune",
            "example.csv",
            "r.json",
            "-o",
            "edges.csv",
            "--dot",
            "pruned.dot",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let edges = fs::read_to_string(dir.path().join("edges.csv")).unwrap();
    assert_eq!(edges.lines().next().unwrap(), "i,j,mean,std,verdict");
    let kept: Vec<(usize, usize)> = edges
        .lines()
        .filter(|l| l.ends_with(",kept"))
        .map(|l| {
            let mut f = l.split(',').map(|v| v.parse::<usize>().unwrap_or(usize::MAX));
            (f.next().unwrap(), f.next().unwrap())
        })
        .collect();
    for edge in [(0, 3), (1, 3), (2, 0), (2, 1)] {
        assert!(kept.contains(&edge), "{edge:?} missing from {kept:?}");
    }
    let dot = fs::read_to_string(dir.path().join("pruned.dot")).unwrap();
    assert_eq!(dot.matches("->").count(), kept.len());
    for edge in [
        "\"x4\" -> \"x1\"",
        "\"x4\" -> \"x2\"",
        "\"x1\" -> \"x3\"",
        "\"x2\" -> \"x3\"",
    ] {
        assert!(dot.contains(edge), "{dot}");
    }

    let out = lingam(
        dir.path(),
        &[
            "prune",
            "example.csv",
            "r.json",
            "--z-threshold",
            "0",
            "--resamples",
            "20",
        ],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains(",pruned"));

    let out = lingam(
        dir.path(),
        &[
            "prune",
            "example.csv",
            "r.json",
            "--format",
            "report",
            "--resamples",
            "10",
        ],
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["format"], "lingam-prune");
    assert_eq!(report["config"]["prune"]["resamples"], 10);
}

#[test]
fn prune_sparse_keeps_no_more_than_dense() {
    let dir = tempfile::tempdir().unwrap();
    let count = |name: &str, sparsity: &str| {
        let csv = format!("{name}.csv");
        let res = format!("{name}.json");
        lingam(
            dir.path(),
            &[
                "generate",
                "--n",
                "5",
                "--m",
                "5000",
                "--seed",
                "4",
                "--sparsity",
                sparsity,
                "-o",
                &csv,
            ],
        );
        lingam(dir.path(), &["discover", &csv, "-o", &res]);
        let out = lingam(dir.path(), &["prune", &csv, &res, "--resamples", "30"]);
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .filter(|l| l.ends_with(",kept"))
            .count()
    };
    assert!(count("sparse", "0.7") <= count("dense", "0"));
}

#[test]
fn prune_dimension_mismatch_exits_2() {
    let (dir, _) = example_dir(2000);
    lingam(dir.path(), &["discover", "example.csv", "-o", "r.json"]);
    lingam(dir.path(), &["generate", "--n", "3", "--m", "500", "-o", "three.csv"]);
    let out = lingam(dir.path(), &["prune", "three.csv", "r.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("dimension mismatch"), "{}", stderr(&out));
}

#[test]
fn experiment_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "experiment",
        "--n-values",
        "3",
        "--m-values",
        "200,2000",
        "--sparsity-values",
        "0",
        "--trials",
        "4",
        "--seed",
        "2",
    ];
    let run = |out: &str| {
        let o = lingam(
            dir.path(),
            &[&args[..], &["-o", out, "--summary", "s.json", "--table", "t.txt"]].concat(),
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        fs::read(dir.path().join(out)).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next().unwrap(), "trial,n,m,i,j,b_true,b_est");
    assert_eq!(text.lines().count(), 1 + 2 * 4 * 6);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(summary["cells"].as_array().unwrap().len(), 2);
    assert_eq!(summary["config"]["experiment"]["trials"], 4);
    let table = fs::read_to_string(dir.path().join("t.txt")).unwrap();
    assert!(table.starts_with("  n"));
}

#[test]
fn experiment_zero_trials_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = lingam(dir.path(), &["experiment", "--trials", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "trial,n,m,i,j,b_true,b_est\n");
}

#[test]
fn unsupported_format_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = lingam(dir.path(), &["generate", "--format", "dot"]);
    assert_eq!(code(&out), 2);
}
