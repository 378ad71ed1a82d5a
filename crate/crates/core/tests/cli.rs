use std::fs::File;
use std::path::Path;
use std::process::{Command, Output};

use morrey_lab::grid::read_dump;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_morrey-lab"));
    c.env_remove("MORREY_LAB_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn corpus_listing_is_stable() {
    let a = run(&["corpus", "list"]);
    let b = run(&["corpus", "list"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let entries = json(&a)["entries"].as_array().unwrap().len();
    assert!(entries >= 12);
}

#[test]
fn corpus_load_writes_a_dump() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tail.grid");
    let out = run(&[
        "corpus",
        "load",
        "power-tail-lambda4",
        "--points",
        "16",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["name"], "power-tail-λ4");
    let f = read_dump(File::open(&path).unwrap()).unwrap();
    assert_eq!(f.grid().len(), 256);

    let mismatch = run(&["corpus", "load", "power-tail-λ4", "--version", "2"]);
    assert_eq!(mismatch.status.code(), Some(2));
    assert!(stderr(&mismatch).contains("version"));
    assert_eq!(run(&["corpus", "verify"]).status.code(), Some(0));
    assert_eq!(
        run(&["corpus", "load", "no-such-entry"]).status.code(),
        Some(2)
    );
}

#[test]
fn norm_from_dump_matches_corpus_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cube.grid");
    run(&[
        "corpus",
        "load",
        "indicator-cube",
        "--output",
        path.to_str().unwrap(),
    ]);
    let from_file = run(&[
        "norm",
        "--space",
        "lorentz",
        "--p",
        "2",
        "--d",
        "4",
        "--input",
        path.to_str().unwrap(),
    ]);
    let from_corpus = run(&[
        "norm",
        "--space",
        "lorentz",
        "--p",
        "2",
        "--d",
        "4",
        "--corpus",
        "indicator-cube",
    ]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(json(&from_file)["value"], json(&from_corpus)["value"]);
    // L^{2,4} quasinorm of an indicator is |E|^{1/2}.
    let f = read_dump(File::open(&path).unwrap()).unwrap();
    let measure = f.values().iter().filter(|v| **v != 0.0).count() as f64 * f.grid().cell_volume();
    let v = json(&from_file)["value"].as_f64().unwrap();
    assert!((v - measure.sqrt()).abs() < 1e-12, "{v} vs {measure}");

    let morrey = run(&[
        "norm",
        "--space",
        "morrey",
        "--p",
        "2",
        "--lambda",
        "4",
        "--corpus",
        "indicator-cube",
    ]);
    let summary = json(&morrey);
    assert!(summary["argmax"]["cells"].as_u64().is_some());
    assert!(summary["value"].as_f64().unwrap() >= v - 1e-12);
}

#[test]
fn malformed_exponents_exit_two_with_the_relation() {
    let out = run(&[
        "norm",
        "--space",
        "morrey",
        "--p",
        "4",
        "--lambda",
        "2",
        "--corpus",
        "indicator-cube",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("p <= lambda"), "{}", stderr(&out));

    let out = run(&["solve", "--rho", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("rho"), "{}", stderr(&out));

    let out = run(&[
        "sharpness",
        "--r",
        "2",
        "--mu",
        "4",
        "--p",
        "2",
        "--lambda",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("r/mu > p/lambda"));

    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn sharpness_table_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ratios.csv");
    let out = run(&[
        "sharpness",
        "--r",
        "2",
        "--mu",
        "4",
        "--p",
        "2",
        "--lambda",
        "8",
        "--depth",
        "4",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let summary = json(&out);
    let rows = summary["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows
        .iter()
        .all(|r| r["norm_grid"].as_f64().unwrap() <= 1.0 + 1e-9));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.starts_with("depth,"));
    // Exit status follows the divergence verdict.
    let expected = if summary["strictly_increasing"].as_bool().unwrap() {
        0
    } else {
        1
    };
    assert_eq!(out.status.code(), Some(expected));
}

#[test]
fn solve_with_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    let history = dir.path().join("history.csv");
    let trace = dir.path().join("trace.grid");
    std::fs::write(
        &config,
        format!(
            "# small nonlinear run\nsubcommand = solve\nrho = 3\nmu = 2.1\nf = bump:0.2\nV = bump:0.3\nb = bump:0.2\npoints = 16\ncsv = {}\noutput = {}\n",
            history.display(),
            trace.display()
        ),
    )
    .unwrap();
    let out = run(&["--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let s = json(&out);
    assert_eq!(s["converged"], true);
    assert_eq!(s["certified"], true);
    assert!(s["theta_emp"].as_f64().unwrap() <= s["certificate"]["theta"].as_f64().unwrap());
    assert!(Path::new(&trace).exists());
    let lines = std::fs::read_to_string(&history).unwrap().lines().count();
    assert_eq!(lines, s["iterations"].as_u64().unwrap() as usize + 1);

    // Command-line flags override the file.
    let out = run(&["--config", config.to_str().unwrap(), "--max-iter", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["converged"], false);

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "rho 3\n").unwrap();
    assert_eq!(
        run(&["--config", bad.to_str().unwrap(), "solve", "--rho", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn divergent_iteration_exits_one() {
    let out = run(&[
        "solve",
        "--rho",
        "3",
        "--V",
        "bump:40",
        "--points",
        "16",
        "--certificate",
        "off",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("diverged"));
}

#[test]
fn verify_oracles_passes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("table.csv");
    let out = run(&[
        "verify",
        "--suite",
        "oracles",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let s = json(&out);
    assert_eq!(s["pass"], true);
    assert!(s["checks"].as_array().unwrap().len() >= 4);
    assert!(stderr(&out).lines().all(|l| l.starts_with("PASS")));
    assert!(std::fs::read_to_string(&csv).unwrap().contains("bubble"));
}

#[test]
fn maximal_and_riesz_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("m.grid");
    let out = run(&[
        "maximal",
        "--alpha",
        "0",
        "--corpus",
        "indicator-ball",
        "--points",
        "16",
        "--output",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!((json(&out)["max"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(
        read_dump(File::open(&dump).unwrap()).unwrap().grid().len(),
        256
    );

    let out = run(&[
        "riesz",
        "--alpha",
        "0.5",
        "--corpus",
        "gaussian-wide",
        "--points",
        "16",
        "--p",
        "1.5",
        "--lambda",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let bound = &json(&out)["bound"];
    assert!((bound["target"]["mu"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert!((bound["target"]["r"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert!(bound["ratio"].as_f64().unwrap() > 0.0);

    let both = run(&[
        "riesz",
        "--alpha",
        "0.5",
        "--transform",
        "1",
        "--corpus",
        "gaussian-wide",
    ]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn layer_zero_mode_policy() {
    let strict = run(&[
        "layer",
        "--heights",
        "0,0.1",
        "--corpus",
        "gaussian-wide",
        "--periodic",
        "--points",
        "16",
    ]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(stderr(&strict).contains("mean"));
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("layers.csv");
    let dropped = run(&[
        "layer",
        "--heights",
        "0,0.1",
        "--zero-mode",
        "drop",
        "--corpus",
        "gaussian-wide",
        "--periodic",
        "--points",
        "16",
        "--operator",
        "grad-n",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(dropped.status.code(), Some(0), "{}", stderr(&dropped));
    let s = json(&dropped);
    assert!(s["neumann_recovery_defect"].as_f64().unwrap() < 1e-12);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("height,x1,x2,component1,component2,component3"));
    assert_eq!(text.lines().count(), 1 + 2 * 256);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = [
        "norm",
        "--space",
        "weak-morrey",
        "--p",
        "2",
        "--lambda",
        "4",
        "--corpus",
        "band-limited-b",
        "--points",
        "64",
    ];
    let default = run(&args);
    let single = bin()
        .args(args)
        .env("MORREY_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(default.stdout, single.stdout);
    let bad = bin()
        .args(args)
        .env("MORREY_LAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn summary_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("summary.json");
    let out = run(&["--summary", path.to_str().unwrap(), "corpus", "verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
}
