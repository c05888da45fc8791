//! End-to-end checks of the binary: exit codes, golden output, and the
//! usage-error contract.

use std::path::Path;
use std::process::{Command, Output};

use sunflower_core::family::generate_random_family;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sunflower"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn write_family(dir: &Path, name: &str, family: &sunflower_core::SetFamily) -> String {
    let path = dir.join(name);
    std::fs::write(&path, family.canonical_json()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_extremal_golden_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("fam.json");
    let out = run(&[
        "gen",
        "--extremal",
        "--p",
        "3",
        "--k",
        "2",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(written, "{\"n\":4,\"k\":2,\"sets\":[[1,3],[1,4],[2,3],[2,4]]}\n");
}

#[test]
fn spread_violation_exit_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let fam = write_family(
        dir.path(),
        "fam.json",
        &sunflower_core::generate_extremal(3, 2).unwrap(),
    );
    let out = run(&["spread", "--family", &fam, "--r", "19/10"]);
    assert_eq!(out.status.code(), Some(1), "violated maps to exit 1");
    let text = stdout(&out);
    assert!(text.contains("verdict: violated"), "{text}");
    assert!(text.contains("witness Z: {1}"), "{text}");
    assert!(text.contains("count: 2"), "{text}");

    let ok = run(&["spread", "--family", &fam, "--r", "2"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok), "verdict: spread\n");
}

#[test]
fn sunflower_found_on_guaranteed_instance() {
    let dir = tempfile::tempdir().unwrap();
    let nine = generate_random_family(8, 2, 9, 0, true).unwrap();
    let fam = write_family(dir.path(), "nine.json", &nine);
    let out = run(&["sunflower", "--family", &fam, "--p", "3", "--method", "erdos-rado"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("core:"), "{text}");
    assert!(text.contains("petals:"), "{text}");

    // the extremal family has no 3-sunflower: exit 1, text "none"
    let extremal = write_family(
        dir.path(),
        "ext.json",
        &sunflower_core::generate_extremal(3, 2).unwrap(),
    );
    let none = run(&["sunflower", "--family", &extremal, "--p", "3"]);
    assert_eq!(none.status.code(), Some(1));
    assert_eq!(stdout(&none), "none\n");
}

#[test]
fn chi_text_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let fam = write_family(
        dir.path(),
        "fam.json",
        &sunflower_core::generate_extremal(3, 2).unwrap(),
    );
    let out = run(&["chi", "--family", &fam, "--x", "1", "--w", "3,4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "chi: {1}\nwitness: 1\nsize: 1\n");

    let json_out = run(&["--json", "chi", "--family", &fam, "--x", "1", "--w", "3,4"]);
    let value: serde_json::Value = serde_json::from_str(&stdout(&json_out)).unwrap();
    assert_eq!(value["size"], 1);
    assert_eq!(value["witness"], 1);

    let covers = run(&["chi", "--family", &fam, "--w", "1,4", "--covers"]);
    assert_eq!(covers.status.code(), Some(0));
    assert_eq!(stdout(&covers), "covers: 2\n");
    let none = run(&["chi", "--family", &fam, "--w", "", "--covers"]);
    assert_eq!(none.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    // unknown flag
    let out = run(&["spread", "--nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    // missing seed on a stochastic run
    let out = run(&["gen", "--random", "--n", "6", "--k", "2", "--l", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("--seed"), "{err}");
    // bad rational
    let dir = tempfile::tempdir().unwrap();
    let fam = write_family(
        dir.path(),
        "fam.json",
        &sunflower_core::generate_extremal(3, 2).unwrap(),
    );
    let out = run(&["spread", "--family", &fam, "--r", "x/y"]);
    assert_eq!(out.status.code(), Some(2));
    // malformed family file -> input error
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\":2,\"k\":2,\"sets\":[[1,3]]}").unwrap();
    let out = run(&["spread", "--family", bad.to_str().unwrap(), "--r", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("element 3 exceeds n=2"), "{err}");
    // sunflower spread method without seed
    let out = run(&["sunflower", "--family", &fam, "--p", "3", "--method", "spread"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kraft_golden() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("code.txt");
    std::fs::write(&code, "0\n10\n110\n").unwrap();
    let out = run(&["kraft", "--code", code.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("kraft_sum: 7/8"), "{text}");
    assert!(text.contains("length_bound: holds"), "{text}");

    std::fs::write(&code, "0\n01\n").unwrap();
    let out = run(&["kraft", "--code", code.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("word 1 is a prefix of word 2"));
}

#[test]
fn audit_encoding_csv_and_single_pair() {
    let dir = tempfile::tempdir().unwrap();
    let fam = write_family(
        dir.path(),
        "fam.json",
        &sunflower_core::generate_extremal(3, 2).unwrap(),
    );
    let csv = dir.path().join("audit.csv");
    let out = run(&[
        "audit-encoding",
        "--family",
        &fam,
        "--v",
        "2",
        "--rho",
        "4",
        "--r",
        "2",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("pairs: 24"), "{text}");
    assert!(text.contains("prefix_free: ok"), "{text}");
    assert!(text.contains("mean_chi_w: 1/3"), "{text}");
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 25, "header plus one row per pair");
    assert!(rows.starts_with("x,V,case,total_bits,f1,f2,f3,f4,f5,f6,chi_u,chi_w\n"));

    // single-pair encode prints bits that decode back
    let one = run(&[
        "audit-encoding",
        "--family",
        &fam,
        "--v",
        "2",
        "--rho",
        "4",
        "--r",
        "2",
        "--x",
        "1",
        "--v-set",
        "2,3",
    ]);
    assert_eq!(one.status.code(), Some(0));
    let text = stdout(&one);
    assert!(text.contains("round_trip: ok"), "{text}");
    let bits_line = text.lines().next().unwrap().trim_start_matches("bits: ").to_string();
    let dec = run(&[
        "audit-encoding",
        "--family",
        &fam,
        "--v",
        "2",
        "--rho",
        "4",
        "--r",
        "2",
        "--decode",
        &bits_line,
    ]);
    assert_eq!(dec.status.code(), Some(0));
    assert_eq!(stdout(&dec), "decoded: x=1 V={2,3}\n");
}

#[test]
fn experiment_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let fam = write_family(
        dir.path(),
        "fam.json",
        &sunflower_core::generate_extremal(3, 2).unwrap(),
    );
    let csv = dir.path().join("exp.csv");
    let out = run(&[
        "experiment",
        "coverage",
        "--family",
        &fam,
        "--w",
        "2",
        "--exact",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("coverage_probability w=2: 2/3"));
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        rows,
        "statistic,m_or_w,value,ci_halfwidth,trials,seed\ncoverage_probability,2,2/3,,,\n"
    );
}
