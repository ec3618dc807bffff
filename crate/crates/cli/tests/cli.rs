use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_ubrain");

fn zoo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/zoo.data")
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("UBRAIN_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn write(dir: &TempDir, name: &str, contents: &str) -> String {
    let p = path(dir, name);
    fs::write(&p, contents).unwrap();
    p
}

fn learn_zoo(dir: &TempDir, t: &str) -> (Output, String) {
    let out = path(dir, &format!("type{t}.txt"));
    let z = zoo();
    let o = run(&[
        "learn",
        "--input",
        z.to_str().unwrap(),
        "--format",
        "zoo",
        "--positive-type",
        t,
        "--output",
        &out,
    ]);
    (o, out)
}

#[test]
fn learn_mammals_and_invertebrates() {
    let dir = TempDir::new().unwrap();
    let (o, out) = learn_zoo(&dir, "1");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&out).unwrap(), "x4\n");
    assert_eq!(stdout(&o), "x4\nliterals=1 terms=1 E=0\n");
    let json: Value = serde_json::from_str(&fs::read_to_string(format!("{out}.json")).unwrap()).unwrap();
    assert_eq!(json["n"], 20);
    assert_eq!(json["terms"][0][0]["var"], 4);

    let (o, out) = learn_zoo(&dir, "7");
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(out).unwrap().trim(), "~x9 ~x14 | ~x10 x14");
}

#[test]
fn learn_json_output() {
    let dir = TempDir::new().unwrap();
    let z = zoo();
    let o = run(&[
        "learn", "--json", "--input", z.to_str().unwrap(), "--format", "zoo",
        "--positive-type", "4", "--output", &path(&dir, "f.txt"),
    ]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["formula"], "x12 x3");
    assert_eq!(v["literals"], 2);
    assert_eq!(v["terms"], 1);
    assert_eq!(v["errors"], 0);
}

#[test]
fn contradictory_rows_abort_with_code_3() {
    let dir = TempDir::new().unwrap();
    let csv = write(&dir, "d.csv", "id,a,b,label\np,1,0,+\nq,1,0,-\n");
    let o = run(&["learn", "--input", &csv, "--output", &path(&dir, "f.txt")]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("\"p\"") && err.contains("\"q\""), "{err}");
}

#[test]
fn data_and_usage_errors() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.data", "ant,0,0,1,0,0,0,0,0,0,1,0,0,3,0,0,0,6\n");
    let o = run(&["learn", "--input", &bad, "--format", "zoo", "--positive-type", "6", "--output", &path(&dir, "f")]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    let z = zoo();
    let o = run(&["learn", "--input", z.to_str().unwrap(), "--format", "zoo", "--output", &path(&dir, "f")]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&run(&["learn"])), 1);
    assert_eq!(code(&run(&["bogus"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn mask_requires_truth_for_trustworthy() {
    let dir = TempDir::new().unwrap();
    let z = zoo();
    let o = run(&[
        "mask", "--input", z.to_str().unwrap(), "--format", "zoo", "--positive-type", "1",
        "--mode", "trustworthy", "--fraction", "10", "--output", &path(&dir, "m.csv"),
    ]);
    assert_eq!(code(&o), 1);

    let o = run(&[
        "mask", "--input", z.to_str().unwrap(), "--format", "zoo", "--positive-type", "1",
        "--mode", "trustworthy", "--fraction", "50", "--truth", "x4", "--output", &path(&dir, "m.csv"),
        "--json",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["masked"], 1010);
    assert!(v["cells"].as_array().unwrap().iter().all(|c| c["var"] != 4));
}

#[test]
fn mask_zero_keeps_content_and_seeds_repeat() {
    let dir = TempDir::new().unwrap();
    let src = write(&dir, "d.csv", "id,a,b,c,label\nu1,1,?,0,+\nv1,0,1,1,-\nu2,1,1,0,+\n");
    let out = path(&dir, "m0.csv");
    let o = run(&["mask", "--input", &src, "--mode", "random", "--fraction", "0", "--output", &out]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&src).unwrap(), fs::read(&out).unwrap());

    let z = zoo();
    let masked = |name: &str| {
        let out = path(&dir, name);
        let o = run(&[
            "mask", "--input", z.to_str().unwrap(), "--format", "zoo", "--positive-type", "1",
            "--mode", "random", "--fraction", "10", "--seed", "7", "--output", &out,
        ]);
        assert_eq!(code(&o), 0);
        assert_eq!(stdout(&o), "masked 202 of 2020 cells\n");
        fs::read(out).unwrap()
    };
    assert_eq!(masked("a.csv"), masked("b.csv"));
}

#[test]
fn eval_reports_error_counts() {
    let dir = TempDir::new().unwrap();
    let z = zoo();
    let eval = |formula: &str| {
        let f = write(&dir, "f.txt", formula);
        let o = run(&["eval", "--formula", &f, "--input", z.to_str().unwrap(), "--format", "zoo", "--positive-type", "1"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    assert_eq!(eval("x4\n"), "E=0 R=0.000\n");
    assert_eq!(eval("~x3 ~x11 | x16 x19\n"), "E=1 R=0.010\n");
    assert!(eval("FALSE\n").starts_with("E=41 "));
}

#[test]
fn learn_then_eval_round_trip() {
    let dir = TempDir::new().unwrap();
    let z = zoo();
    for t in ["3", "5"] {
        let (o, out) = learn_zoo(&dir, t);
        let reported = stdout(&o).lines().nth(1).unwrap().rsplit("E=").next().unwrap().to_string();
        let e = run(&["eval", "--formula", &out, "--input", z.to_str().unwrap(), "--format", "zoo", "--positive-type", t]);
        assert!(stdout(&e).starts_with(&format!("E={reported} ")));
        let e = run(&["eval", "--formula", &format!("{out}.json"), "--input", z.to_str().unwrap(), "--format", "zoo", "--positive-type", t]);
        assert!(stdout(&e).starts_with(&format!("E={reported} ")));
    }
}

#[test]
fn traces_do_not_depend_on_threads() {
    let dir = TempDir::new().unwrap();
    let z = zoo();
    let masked = path(&dir, "m.csv");
    run(&[
        "mask", "--input", z.to_str().unwrap(), "--format", "zoo", "--positive-type", "3",
        "--mode", "random", "--fraction", "30", "--seed", "11", "--output", &masked,
    ]);
    let trace = |threads: &str, via_env: bool| {
        let t = path(&dir, &format!("trace{threads}{via_env}.txt"));
        let f = path(&dir, &format!("f{threads}{via_env}.txt"));
        let mut cmd = Command::new(BIN);
        cmd.args(["learn", "--input", &masked, "--output", &f, "--trace", &t]);
        if via_env {
            cmd.env("UBRAIN_THREADS", threads);
        } else {
            cmd.args(["--threads", threads]);
        }
        cmd.output().unwrap();
        (fs::read(t).unwrap(), fs::read(f).unwrap())
    };
    let base = trace("1", false);
    assert!(!base.0.is_empty());
    assert_eq!(trace("4", false), base);
    assert_eq!(trace("3", true), base);
}

#[test]
fn experiment_commands() {
    let dir = TempDir::new().unwrap();
    let z = zoo();
    let report = path(&dir, "report.txt");
    let o = run(&["experiment", "--dataset", z.to_str().unwrap(), "--fractions", "0", "--report", &report, "--json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["runs"].as_array().unwrap().iter().all(|r| r["errors"] == 0));
    assert!(fs::read_to_string(&report).unwrap().contains("Overall"));
    assert!(fs::read_to_string(format!("{report}.runs.csv")).unwrap().starts_with("type,mode"));
    assert!(fs::read_to_string(format!("{report}.summary.csv")).unwrap().starts_with("mode,fraction"));

    let o = run(&[
        "experiment", "--dataset", z.to_str().unwrap(), "--modes", "trustworthy", "--fractions", "40,50",
        "--seeds", "1,2", "--json",
    ]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    for row in v["summary"].as_array().unwrap() {
        assert_eq!(row["aen"], 0.0);
    }

    let o = run(&["experiment", "--dataset", z.to_str().unwrap(), "--fractions", "0.9"]);
    assert_eq!(code(&o), 1);
    let o = run(&["experiment", "--dataset", z.to_str().unwrap(), "--types", "9"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn verify_certificates() {
    let dir = TempDir::new().unwrap();
    let reduced = write(&dir, "r.csv", "id,x1,x2,x3,label\nu1,1,0,0,+\nu2,0,1,0,+\nv1,1,1,0,-\n");
    let f = write(&dir, "f.txt", "~x1 | ~x2\n");
    let o = run(&["verify", "--formula", &f, "--input", &reduced]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "u1 + exact\nu2 + exact\nv1 - exact\nviolated=0 of 3\n");

    let raw = write(&dir, "raw.csv", "id,x1,x2,x3,label\nv1,1,?,0,-\n");
    let taut = write(&dir, "t.txt", "~x2 | x2\n");
    let o = run(&["verify", "--formula", &taut, "--input", &raw]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).starts_with("v1 - VIOLATED"));

    let one = write(&dir, "one.csv", "id,a,b,label\nu,?,0,+\n");
    let x1 = write(&dir, "x1.txt", "x1");
    let o = run(&["verify", "--formula", &x1, "--input", &one, "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["certificates"][0]["witness"], "10");

    let xor = write(&dir, "xor.csv", "a,b,label\n1,0,+\n0,1,+\n0,0,-\n1,1,-\n");
    let g = write(&dir, "g.txt", "x1 ~x2 | ~x1 x2");
    let o = run(&["verify", "--formula", &g, "--input", &xor, "--exhaustive-min"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("minimal: x1 ~x2 | ~x1 x2 (4 literals"));
}
