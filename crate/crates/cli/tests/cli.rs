use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn golden(name: &str) -> String {
    fs::read_to_string(fixture(name)).unwrap()
}

fn perlat<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_perlat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn gen_cyclic_matches_worked_square() {
    let o = perlat(["gen-cyclic", "5"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("worked_R.lrect"));
}

#[test]
fn two_extension_steps_are_golden() {
    let r = fixture("worked_R.lrect");
    let t = fixture("worked_T.lrect");
    let o = perlat([
        "extend".as_ref(),
        r.as_os_str(),
        r.as_os_str(),
        "--col".as_ref(),
        "3".as_ref(),
        "--sym".as_ref(),
        "5".as_ref(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("worked_T.lrect"));

    let o = perlat([
        "extend".as_ref(),
        t.as_os_str(),
        r.as_os_str(),
        "--col".as_ref(),
        "0".as_ref(),
        "--sym".as_ref(),
        "13".as_ref(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("worked_T_prime.lrect"));

    let o = perlat([
        "verify".as_ref(),
        fixture("worked_T_prime.lrect").as_os_str(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("verify_T_prime.txt"));
}

#[test]
fn trace_keeps_raw_labels() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.json");
    let r = fixture("worked_R.lrect");
    let o = perlat([
        "extend".as_ref(),
        r.as_os_str(),
        r.as_os_str(),
        "--col".as_ref(),
        "3".as_ref(),
        "--sym".as_ref(),
        "5".as_ref(),
        "--trace".as_ref(),
        trace.as_os_str(),
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    let raw: Vec<Vec<u32>> = serde_json::from_value(v["raw"].clone()).unwrap();
    assert_eq!(raw[0], [0, 1, 2, 4, 3, 6, 7, 8, 9]);
    assert_eq!(raw[4], [1, 2, 3, 0, 6, 7, 8, 9, 4]);
    assert_eq!(v["substitution_column"], serde_json::json!([0, 1, 2, 3, 4]));
    let witnesses = v["witnesses"].as_array().unwrap();
    assert_eq!(witnesses.len(), 10);
    for w in witnesses {
        assert_eq!(w["cycle_length"], 9);
        assert_eq!(w["phases"], serde_json::json!([4, 1, 3, 1]));
    }
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.lrect");
    fs::write(&one, "1 1\n0\n").unwrap();
    let o = perlat(["verify".as_ref(), one.as_os_str()]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "shape 1 1\npf 0\ntotal 0\nperfect true\n");

    let o = perlat(["verify".as_ref(), fixture("cyclic9.lrect").as_os_str()]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o), golden("verify_cyclic9.txt"));
}

#[test]
fn malformed_input_names_line_and_column() {
    for (name, loc) in [("bad_token.lrect", ":3:3:"), ("missing_row.lrect", ":3:1:")] {
        let path = fixture(name);
        let o = perlat(["verify".as_ref(), path.as_os_str()]);
        assert_eq!(code(&o), 2, "{name}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert!(err.contains(&format!("{}{loc}", path.display())), "{err}");
        assert!(o.stdout.is_empty());
    }
    let o = perlat(["verify", "/nonexistent/x.lrect"]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&perlat(["no-such-command"])), 2);
    assert_eq!(code(&perlat(["gen-cyclic", "five"])), 2);
}

#[test]
fn chain_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.lrect");
    let o = perlat([
        "chain".as_ref(),
        "5".as_ref(),
        "1".as_ref(),
        "--emit".as_ref(),
        out.as_os_str(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("width 13\n"));
    let o = perlat(["verify".as_ref(), out.as_os_str()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("shape 5 13\npf 10\ntotal 10\nperfect true\n"));

    let o = perlat(["chain", "5", "1"]);
    assert_eq!(stdout(&o), golden("chain_5_1.txt"));
    let text = stdout(&o);
    let emitted = text.split("\n\n").nth(1).unwrap();
    assert_eq!(emitted, fs::read_to_string(&out).unwrap());
}

#[test]
fn extend_rejects_imperfect_input() {
    let c9 = fixture("cyclic9.lrect");
    let o = perlat([
        "extend".as_ref(),
        c9.as_os_str(),
        c9.as_os_str(),
        "--col".as_ref(),
        "0".as_ref(),
        "--sym".as_ref(),
        "9".as_ref(),
    ]);
    assert_eq!(code(&o), 1);
    let r = fixture("worked_R.lrect");
    let o = perlat([
        "extend".as_ref(),
        r.as_os_str(),
        r.as_os_str(),
        "--col".as_ref(),
        "7".as_ref(),
        "--sym".as_ref(),
        "5".as_ref(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn search_outputs_and_codes() {
    let o = perlat(["search", "6", "6", "--mode", "count", "--reduced"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().nth(2), Some("count 0"));
    assert!(stdout(&o).ends_with("termination exhausted\n"));

    let o = perlat([
        "search",
        "6",
        "6",
        "--mode",
        "count",
        "--reduced",
        "--latin-only",
    ]);
    assert_eq!(stdout(&o).lines().nth(2), Some("count 9408"));

    let o = perlat(["search", "4", "4", "--mode", "first", "--reduced"]);
    assert_eq!(code(&o), 1);

    let o = perlat(["search", "5", "5", "--mode", "count", "--budget", "10"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("termination budget-exhausted"));

    let o = perlat(["search", "5", "5", "--mode", "all", "--reduced"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let blocks: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(blocks.len(), 7);
    assert!(blocks[0].contains("count 6"));
    let dir = tempfile::tempdir().unwrap();
    for (k, b) in blocks[1..].iter().enumerate() {
        let p = dir.path().join(format!("{k}.lrect"));
        let text = if b.ends_with('\n') {
            b.to_string()
        } else {
            format!("{b}\n")
        };
        fs::write(&p, text).unwrap();
        assert_eq!(code(&perlat(["verify".as_ref(), p.as_os_str()])), 0);
    }
}

#[test]
fn single_thread_output_is_deterministic() {
    let a = perlat([
        "search",
        "5",
        "7",
        "--mode",
        "all",
        "--reduced",
        "--threads",
        "1",
    ]);
    let b = perlat([
        "search",
        "5",
        "7",
        "--mode",
        "all",
        "--reduced",
        "--threads",
        "1",
    ]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let par = perlat([
        "search",
        "5",
        "7",
        "--mode",
        "count",
        "--reduced",
        "--threads",
        "4",
    ]);
    let text = stdout(&a);
    let count = text.lines().nth(2).unwrap();
    assert_eq!(stdout(&par).lines().nth(2).unwrap(), count);
}

#[test]
fn theta_commands() {
    let o = perlat(["theta", "7", "5", "--cutoff", "30"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(
        text.starts_with("m 7\ni 5\nvalue 11\nstatus exact\n"),
        "{text}"
    );

    let o = perlat(["theta", "7", "3", "--cutoff", "9", "--budget", "10"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("status unknown-above-cutoff"));

    let o = perlat(["--json", "theta-m", "5", "--cutoff", "20"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["bound"], 7);
    assert_eq!(v["known_value"], 5);
    assert_eq!(v["status"], "exact");

    assert_eq!(code(&perlat(["theta", "6", "1", "--cutoff", "10"])), 2);
}

#[test]
fn theta_uses_registry_directory() {
    let dir = tempfile::tempdir().unwrap();
    let args = |cutoff: &str| {
        vec![
            "--registry".into(),
            dir.path().as_os_str().to_owned(),
            "theta".into(),
            "7".into(),
            "3".into(),
            "--cutoff".into(),
            cutoff.into(),
            "--budget".into(),
            "1".into(),
        ]
    };
    // with a one-node budget, width 9 is undecided without help
    let o = perlat(args("9"));
    assert_eq!(code(&o), 3);

    fs::write(dir.path().join("9.lrect"), golden("perfect9.lrect")).unwrap();
    let o = perlat(args("9"));
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(
        text.contains("value 9\nstatus exact\nwidth 9 found registry\n"),
        "{text}"
    );

    fs::write(dir.path().join("9.lrect"), golden("cyclic9.lrect")).unwrap();
    let o = perlat(args("9"));
    assert_eq!(code(&o), 2, "imperfect registry squares are rejected");
}

#[test]
fn bound_output() {
    let o = perlat(["bound", "10"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("bound_10.txt"));
    let o = perlat(["--json", "bound", "2"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["unconditional"], 5402);
    assert_eq!(code(&perlat(["bound", "1"])), 2);
}

#[test]
fn factorization_export_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.txt");
    let o = perlat([
        "export-factorization".as_ref(),
        fixture("worked_R.lrect").as_os_str(),
        "--out".as_ref(),
        edges.as_os_str(),
    ]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(&edges).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 25);
    assert_eq!(lines[0], "0 5 0");
    // row 1 of the square is 4 0 1 2 3
    assert_eq!(lines[5], "0 9 1");

    let o = perlat([
        "oracle-verify".as_ref(),
        fixture("cyclic9.lrect").as_os_str(),
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o), golden("oracle_cyclic9.txt"));
    let o = perlat([
        "oracle-verify".as_ref(),
        fixture("worked_T_prime.lrect").as_os_str(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("agree true\n"));
}

#[test]
fn json_flag_emits_parseable_objects() {
    let r = fixture("worked_R.lrect");
    for args in [
        vec!["--json".as_ref(), "verify".as_ref(), r.as_os_str()],
        vec!["--json".as_ref(), "gen-cyclic".as_ref(), "7".as_ref()],
        vec![
            "--json".as_ref(),
            "chain".as_ref(),
            "7".as_ref(),
            "3".as_ref(),
        ],
        vec!["--json".as_ref(), "oracle-verify".as_ref(), r.as_os_str()],
        vec![
            "--json".as_ref(),
            "search".as_ref(),
            "3".as_ref(),
            "5".as_ref(),
            "--reduced".as_ref(),
        ],
        vec![
            "--json".as_ref(),
            "--seed".as_ref(),
            "42".as_ref(),
            "export-factorization".as_ref(),
            r.as_os_str(),
        ],
    ] {
        let o = perlat(&args);
        assert_eq!(code(&o), 0, "{args:?}");
        let _: Value =
            serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    }
}

#[test]
fn emitted_rectangles_reparse() {
    let dir = tempfile::tempdir().unwrap();
    for n in [1usize, 2, 3, 8, 17, 31] {
        let o = perlat(["gen-cyclic".to_string(), n.to_string()]);
        let p = dir.path().join(format!("{n}.lrect"));
        fs::write(&p, &o.stdout).unwrap();
        let v = perlat(["verify".as_ref(), p.as_os_str()]);
        assert_ne!(code(&v), 2, "order {n}");
    }
}
