use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn hsmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsmc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn mutex_violation_prints_counterexample() {
    let m = data("mutex.kripke");
    let o = hsmc(&["check", "-m", &m, "-e", "[E]!(e0 & e1)"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("violated\n"), "{out}");
    let ce = out.lines().find_map(|l| l.strip_prefix("CE: ")).expect("CE line");
    let states: Vec<&str> = ce.split_whitespace().collect();
    assert_eq!(states.first(), Some(&"w0"));
    assert!(states.ends_with(&["w8", "w9"]), "{ce}");
}

#[test]
fn representative_verdicts_and_oracle_recheck() {
    let m = data("mutex.kripke");
    let o = hsmc(&["check", "-m", &m, "-e", "x0 -> <Bi>x0", "--verify-with-oracle"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "holds\n");
    let o = hsmc(&["check", "-m", &m, "-e", "[A](r0 -> [A](e0 | (!r0 & !r1 & !e0 & !e1)))", "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("CE: w0"));
}

#[test]
fn per_track_checks() {
    let k2 = data("k2.kripke");
    let o = hsmc(&["check", "-m", &k2, "-e", "<A>q", "--track", "v0 v1 v0 v1", "--track", "v0 v1 v0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "v0 v1 v0 v1: holds\nv0 v1 v0: violated\n");
}

#[test]
fn output_is_deterministic() {
    let m = data("mutex.kripke");
    let args = ["check", "-m", &m, "-e", "[A](r0 -> [A](e0 | (!r0 & !r1 & !e0 & !e1)))"];
    let first = stdout(&hsmc(&args));
    for _ in 0..3 {
        assert_eq!(stdout(&hsmc(&args)), first);
    }
}

#[test]
fn errors_exit_with_two() {
    let k2 = data("k2.kripke");
    let o = hsmc(&["check", "-m", &k2, "-e", "<E>p"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
    let o = hsmc(&["check", "-m", &k2, "-e", "p &"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hsmc(&["check", "-m", "/nonexistent/model", "-e", "p"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn formula_file_and_oracle_engine() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("sched.hs");
    std::fs::write(&f, "[E](<E>^10 T -> <E><Ai>p3)\n").unwrap();
    let s = data("sched.kripke");
    let o = hsmc(&["oracle", "-m", &s, "-f", f.to_str().unwrap(), "--depth", "14"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violated\nCE: v0"));
    let o = hsmc(&["check", "-m", &s, "-f", f.to_str().unwrap(), "--engine", "oracle"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn descriptors_and_unravel() {
    let four = data("four.kripke");
    let o = hsmc(&["descriptors", "-m", &four, "--track", "v0 v0 v0 v1 v2 v1 v2 v3 v3 v2 v2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("[(v0,{v0,v1,v2,v3},v3)"), "{out}");
    assert_eq!(out.lines().filter(|l| l.starts_with("cluster ")).count(), 3);
    let k2 = data("k2.kripke");
    let o = hsmc(&["unravel", "-m", &k2, "-k", "0"]);
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(lines.first().map(String::as_str), Some("v0 v0"));
    assert!(lines.iter().all(|l| l.split_whitespace().count() <= 6));
    let o = hsmc(&["unravel", "-m", &k2, "-k", "1", "--dir", "backw", "--from", "v1", "--limit", "5"]);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().all(|l| l.ends_with("v1")));
}

#[test]
fn generated_instances_check_as_reported() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..4 {
        let prefix = dir.path().join(format!("q{seed}"));
        let o = hsmc(&["gen", "qbf", "--vars", "2", "--seed", &seed.to_string(), "--out", prefix.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let truth = stdout(&o).contains("formula is true");
        let model = format!("{}.kripke", prefix.display());
        let formula = format!("{}.hs", prefix.display());
        let o = hsmc(&["check", "-m", &model, "-f", &formula]);
        assert_eq!(o.status.code(), Some(if truth { 0 } else { 1 }), "seed {seed}");

        let prefix = dir.path().join(format!("s{seed}"));
        let o = hsmc(&[
            "gen",
            "sat",
            "--vars",
            "3",
            "--clauses",
            "10",
            "--seed",
            &seed.to_string(),
            "--out",
            prefix.to_str().unwrap(),
        ]);
        let sat = stdout(&o).contains("formula is satisfiable");
        let model = format!("{}.kripke", prefix.display());
        let formula = format!("{}.hs", prefix.display());
        let o = hsmc(&["counterexample", "-m", &model, "-f", &formula]);
        assert_eq!(o.status.code(), Some(if sat { 1 } else { 0 }), "seed {seed}");
    }
    let cnf = dir.path().join("in.cnf");
    std::fs::write(&cnf, "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let prefix = dir.path().join("contra");
    let o = hsmc(&["gen", "sat", "--from", cnf.to_str().unwrap(), "--out", prefix.to_str().unwrap()]);
    assert!(stdout(&o).contains("unsatisfiable"));
}
