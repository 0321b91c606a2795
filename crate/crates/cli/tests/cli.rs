use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn restrictlab(args: &[&str]) -> Output {
    restrictlab_env(args, None)
}

fn restrictlab_env(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_restrictlab"));
    cmd.args(args).env_remove("RESTRICTLAB_THREADS");
    if let Some(t) = threads {
        cmd.env("RESTRICTLAB_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().skip(1).filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn energy_of_the_parabola_mod_15() {
    let out = restrictlab(&["energy", "--n", "15"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,omega,subset_size,energy,bound,max_rep");
    assert_eq!(lines[1], "15,2,15,675,900,4");
    assert!(lines[2].starts_with("# seed=0 version="));
    assert_eq!(lines.len(), 3);
}

#[test]
fn restrict_verify_writes_one_row_per_trial() {
    let out = restrictlab(&["restrict-verify", "--n", "15", "--trials", "1000", "--seed", "7"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("N,omega,squarefree,r,lhs,rhs,ratio,constant,satisfied,witness_kind\n"));
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 1000);
    assert!(rows.iter().all(|r| r.ends_with(",true,gaussian")));
    assert!(text.lines().last().unwrap().starts_with("# seed=7 "));
}

#[test]
fn six_fifths_and_dual_checks_pass() {
    let out = restrictlab(&[
        "restrict-verify",
        "--moduli",
        "6,10",
        "--trials",
        "50",
        "--structured",
        "12",
        "--r",
        "6/5",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(data_lines(&stdout(&out)).len(), 124);
    for extra in [&[][..], &["--l1-l2"][..]] {
        let mut args = vec!["dual-verify", "--n", "15", "--trials", "40", "--structured", "8"];
        args.extend_from_slice(extra);
        let out = restrictlab(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn same_seed_is_byte_identical_across_thread_counts() {
    let args = [
        "restrict-verify",
        "--moduli",
        "6,15",
        "--trials",
        "200",
        "--structured",
        "30",
        "--seed",
        "11",
    ];
    let one = restrictlab_env(&args, Some("1"));
    let four = restrictlab_env(&args, Some("4"));
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);

    let sweep = ["sweep", "--n", "15", "--sizes", "4..8", "--trials", "6", "--seed", "3"];
    let a = restrictlab_env(&sweep, Some("1"));
    let b = restrictlab_env(&sweep, Some("3"));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(data_lines(&stdout(&a)).len(), 5);
}

#[test]
fn usage_errors_exit_2() {
    // squarefree-gated commands reject non-squarefree moduli
    for cmd in ["restrict-verify", "dual-verify", "certificate"] {
        assert_eq!(code(&restrictlab(&[cmd, "--n", "9"])), 2);
    }
    assert_eq!(
        code(&restrictlab(&["uncertainty", "--n", "12", "--max-support", "2"])),
        2
    );
    // ... unless they are filtered out
    let out = restrictlab(&["certificate", "--moduli", "8..10", "--squarefree-only"]);
    assert_eq!(code(&out), 0);
    assert_eq!(data_lines(&stdout(&out)).len(), 1);

    assert_eq!(code(&restrictlab(&["frobnicate"])), 2);
    assert_eq!(code(&restrictlab(&["energy"])), 2);
    assert_eq!(code(&restrictlab(&["energy", "--n", "1"])), 2);
    assert_eq!(code(&restrictlab(&["restrict-verify", "--n", "15", "--r", "3/2"])), 2);
    assert_eq!(
        code(&restrictlab(&["uncertainty", "--n", "6", "--max-support", "9"])),
        2
    );
    assert_eq!(code(&restrictlab(&["sweep", "--n", "3", "--sizes", "5..10"])), 2);
    assert_eq!(code(&restrictlab_env(&["energy", "--n", "5"], Some("zero"))), 2);
    assert_eq!(code(&restrictlab(&["--help"])), 0);
}

#[test]
fn sharpness_runs_on_non_squarefree_moduli() {
    let out = restrictlab(&["sharpness", "--moduli", "9,10", "--trials", "20"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("9,1,false,"));
    assert!(rows[1].starts_with("10,2,true,"));
}

#[test]
fn small_uncertainty_search_finds_nothing() {
    let out = restrictlab(&[
        "uncertainty",
        "--n",
        "6",
        "--max-support",
        "5",
        "--exhaustive",
        "3",
        "--trials",
        "2000",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(data_lines(&text), vec!["6,2,5,9.0,3,7140,2000,false,"]);
}

#[test]
fn recovery_problem_round_trips_through_json() {
    let dir = TempDir::new().unwrap();
    let problem = dir.path().join("problem.json");
    let p = problem.to_str().unwrap();
    let out = restrictlab(&[
        "recover",
        "--n",
        "15",
        "--support-size",
        "6",
        "--seed",
        "2",
        "--save-problem",
        p,
    ]);
    assert_eq!(code(&out), 0);
    assert!(data_lines(&stdout(&out))[0].starts_with("15,15,6,logan,exact,"));

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&problem).unwrap()).unwrap();
    assert_eq!(json["n"], 15);
    assert_eq!(json["values"].as_array().unwrap().len(), 225);
    assert_eq!(
        json["missing"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|m| m.as_bool().unwrap())
            .count(),
        15
    );

    let out = restrictlab(&["recover", "--input", p, "--format", "json"]);
    assert_eq!(code(&out), 0);
    let recovered: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(recovered["values"].as_array().unwrap().len(), 225);
    assert_eq!(recovered["missing"], json["missing"]);
    let nonzero = recovered["values"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|v| v[0].as_f64().unwrap().hypot(v[1].as_f64().unwrap()) > 1e-6)
        .count();
    assert_eq!(nonzero, 6);

    let out = restrictlab(&[
        "recover",
        "--n",
        "15",
        "--support-size",
        "6",
        "--seed",
        "2",
        "--method",
        "least-squares",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        code(&restrictlab(&["recover", "--input", p, "--method", "least-squares"])),
        2
    );
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn summarize_fixtures() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, n) in [(&a, "6"), (&b, "15")] {
        let out = restrictlab(&[
            "restrict-verify",
            "--n",
            n,
            "--trials",
            "30",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());

    // empty input
    let out = restrictlab(&["summarize"]);
    assert_eq!(code(&out), 0);
    assert!(data_lines(&stdout(&out)).is_empty());

    // all pass
    let out = restrictlab(&["summarize", a, b]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("6,restriction,1.3333333333333333,30,") && rows[0].ends_with(",,,0,pass"));

    // injected violation
    let mut bad = fs::read_to_string(b).unwrap();
    let trailer = bad.rfind('#').unwrap();
    bad.insert_str(
        trailer,
        "15,2,true,1.3333333333333333,9.0,1.0,9.0,1.4142135623730951,false,gaussian\n",
    );
    let bad = write(dir.path(), "bad.csv", &bad);
    let out = restrictlab(&["summarize", a, &bad]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains(",1,fail\n"));

    // schema mismatch
    let energy = dir.path().join("e.csv");
    assert_eq!(
        code(&restrictlab(&[
            "energy",
            "--n",
            "5",
            "--output",
            energy.to_str().unwrap()
        ])),
        0
    );
    assert_eq!(code(&restrictlab(&["summarize", a, energy.to_str().unwrap()])), 2);
    assert_eq!(
        code(&restrictlab(&[
            "summarize",
            &write(dir.path(), "junk.csv", "x,y\n1,2\n")
        ])),
        2
    );
    assert_eq!(code(&restrictlab(&["summarize", "/nonexistent/report.csv"])), 2);
}

#[test]
fn json_tables_parse() {
    let out = restrictlab(&["decay", "--moduli", "5,7", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert!((rows[0]["max_ratio"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}
