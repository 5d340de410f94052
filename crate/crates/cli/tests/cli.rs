use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn nwpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nwpc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

#[test]
fn lmp_report_matches_hand_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    let file = data("path5.nwpc");
    let out = nwpc(&["solve", "lmp", file.to_str().unwrap(), "--audit", "--trace", trace.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden("path5_lmp_audit.csv"));
    assert_eq!(std::fs::read_to_string(trace).unwrap(), golden("path5_lmp.trace"));
}

#[test]
fn lmp_json_report() {
    let out = nwpc(&["solve", "lmp", data("path5.nwpc").to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden("path5_lmp.json"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["solution"]["rows"][0]["ratio"], "1");
}

#[test]
fn pcsf_report_matches_hand_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    let out = nwpc(&[
        "solve",
        "pcsf",
        data("umv.nwpc").to_str().unwrap(),
        "--audit",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden("umv_pcsf_audit.csv"));
    assert_eq!(std::fs::read_to_string(trace).unwrap(), golden("umv_pcsf.trace"));
}

#[test]
fn combine_lists_candidates_and_one_winner() {
    let out = nwpc(&["solve", "combine", data("path5.nwpc").to_str().unwrap(), "--eps", "1/100", "--audit"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let section: Vec<&str> = text
        .split("\n\n")
        .find(|s| s.starts_with("# candidates"))
        .unwrap()
        .lines()
        .skip(2)
        .collect();
    assert!(section.len() > 1);
    assert_eq!(section.iter().filter(|l| l.ends_with(",*")).count(), 1);
    assert!(text.contains("combine,0 1 2,3,3.000000,3/10,0.300000,33/10,3.300000"));
}

#[test]
fn nwst_connects_all_terminals() {
    let out = nwpc(&["solve", "nwst", data("path5.nwpc").to_str().unwrap(), "--audit"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("nwst,0 1 2 3 4,4,"));
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(nwpc(&["solve", "lmp", "/nonexistent/file.nwpc"]).status.code(), Some(2));
    assert_eq!(nwpc(&["solve", "lmp", data("umv.nwpc").to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(nwpc(&["solve", "pcsf", data("path5.nwpc").to_str().unwrap()]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.nwpc");
    std::fs::write(&bad, "nwpc tree 2 1\nroot 0\ne 0 5\n").unwrap();
    assert_eq!(nwpc(&["solve", "lmp", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(nwpc(&["solve", "lmp", data("path5.nwpc").to_str().unwrap(), "--eps", "0"]).status.code(), Some(2));
}

#[test]
fn empty_bench_prints_headers_only() {
    let out = nwpc(&["bench", "--count", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "# summary\nalgo,kind,n,count,bound,max_ratio,max_ratio~,mean_ratio,mean_ratio~\n\n\
         # instances\nid,seed,total,total~,opt,opt~,ratio,ratio~\n"
    );
}

fn max_ratio(report: &str) -> f64 {
    let row = report.lines().nth(2).unwrap();
    row.split(',').nth(6).unwrap().parse().unwrap()
}

#[test]
fn bench_ratios_within_bounds() {
    let out = nwpc(&["bench", "--kind", "grid", "--n", "7", "--count", "40", "--algo", "lmp"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(max_ratio(&stdout(&out)) <= 3.0);
    let out = nwpc(&["bench", "--algo", "pcsf", "--n", "7", "--count", "40"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(max_ratio(&stdout(&out)) <= 4.0);
    let out = nwpc(&["bench", "--algo", "combine", "--kind", "outerplanar-cycle", "--n", "6", "--count", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(max_ratio(&stdout(&out)) <= 3.63);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<String>> = vec![
        vec!["bench", "--kind", "triangulated-grid", "--n", "8", "--count", "15", "--seed", "7"],
        vec!["bench", "--algo", "pcsf", "--n", "8", "--count", "15", "--format", "json"],
        vec!["generate", "--forest", "--n", "9", "--seed", "3"],
        vec!["solve", "combine", data("path5.nwpc").to_str().unwrap(), "--audit"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in &runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = nwpc(&args);
        let b = nwpc(&args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let file = dir.path().join("g.nwpc");
    let out = nwpc(&["generate", "--n", "9", "--seed", "5", "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let first = nwpc(&["solve", "lmp", file.to_str().unwrap(), "--audit"]);
    let second = nwpc(&["solve", "lmp", file.to_str().unwrap(), "--audit"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn nwst_bound_discounts_terminal_weights() {
    // Both bought vertices are weighted terminals, so no moat pays for them.
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("t.nwpc");
    std::fs::write(&file, "nwpc tree 3 2\nroot 0\ne 0 1\ne 1 2\nw 1 1/2\nw 2 3/2\np 1 1\np 2 1\n").unwrap();
    let out = nwpc(&["solve", "nwst", file.to_str().unwrap(), "--audit"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("steiner-bound,ok"));
}
