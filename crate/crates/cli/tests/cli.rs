use std::path::Path;
use std::process::{Command, Output};

use sortnet::{certify, LayeredNetwork, NetworkClass};

fn sortnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sortnet"))
        .args(args)
        .current_dir(dir)
        .env_remove("SORTNET_SOLVER")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn read_network(path: &Path) -> LayeredNetwork {
    LayeredNetwork::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_sat_writes_a_certified_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = sortnet(
        dir.path(),
        &["solve", "--n", "5", "--class", "single-exception", "--depth", "4", "--encoding", "dbck"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["verdict"]["status"], "SAT");
    assert_eq!(report["verdict"]["certification"]["verdict"], true);
    let net = read_network(&dir.path().join("witness.json"));
    assert!(net.depth() <= 4);
    assert!(certify(&net, NetworkClass::SingleException).unwrap().verdict);

    let verify = sortnet(dir.path(), &["verify", "--network", "witness.json", "--class", "single-exception"]);
    assert_eq!(code(&verify), 0);
    let verify = sortnet(dir.path(), &["verify", "--network", "witness.json", "--class", "sorting"]);
    assert_eq!(code(&verify), 20);
}

#[test]
fn solve_unsat_exits_20_without_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = sortnet(dir.path(), &["solve", "--n", "6", "--class", "sorting", "--depth", "4", "--encoding", "dfwd"]);
    assert_eq!(code(&out), 20, "{}", stderr(&out));
    assert!(stdout(&out).contains("\"UNSAT\""));
    assert!(!dir.path().join("witness.json").exists());
}

#[test]
fn solve_time_out_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = sortnet(dir.path(), &["solve", "--n", "6", "--class", "sorting", "--size", "11", "--time-limit", "0"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stdout(&out).contains("UNKNOWN"));
}

#[test]
fn halver_figure_verifies_with_exact_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&sortnet(dir.path(), &["figures", "--export", "figs"])), 0);
    let out = sortnet(dir.path(), &["verify", "--network", "figs/halver_12.json", "--class", "halver", "--eps", "1/4"]);
    assert_eq!(code(&out), 0);
    let record: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(record["verdict"], true);

    let out = sortnet(dir.path(), &["verify", "--network", "figs/halver_12.json", "--class", "halver", "--eps", "0/1"]);
    assert_eq!(code(&out), 20);
    let out = sortnet(dir.path(), &["verify", "--network", "figs/halver_12.json", "--class", "halver", "--eps", "0.25"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("num/den"));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["solve", "--n", "5", "--class", "sorting"][..],
        &["solve", "--n", "5", "--class", "sorting", "--size", "3", "--depth", "3"],
        &["solve", "--n", "5", "--class", "halver", "--depth", "3"],
        &["solve", "--n", "6", "--class", "sorting", "--eps", "1/4", "--depth", "3"],
        &["solve", "--n", "5", "--class", "single-exception", "--size", "8", "--encoding", "sfwd"],
        &["encode", "--n", "5", "--class", "sorting", "--size", "8", "--size-cap", "3"],
        &["encode", "--n", "5", "--class", "sorting", "--size", "8", "--encoding", "xyz"],
        &["encode", "--n", "5", "--class", "sorting", "--size", "8", "--break-reflection"],
        &["encode", "--n", "5", "--class", "sorting", "--depth", "3", "--encoding", "dbck", "--prune-redundant"],
        &["frobnicate"],
    ] {
        let out = sortnet(dir.path(), args);
        assert_eq!(code(&out), 1, "{args:?}: {}", stderr(&out));
    }
    assert_eq!(code(&sortnet(dir.path(), &["--help"])), 0);
}

#[test]
fn runtime_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = sortnet(dir.path(), &["render", "--network", "missing.json"]);
    assert_eq!(code(&out), 2);
    std::fs::write(dir.path().join("bad.json"), "{\"n\": 3, \"layers\": [[[1, 4]]]}").unwrap();
    let out = sortnet(dir.path(), &["verify", "--network", "bad.json", "--class", "sorting"]);
    assert_eq!(code(&out), 2);
    let out = sortnet(
        dir.path(),
        &["solve", "--n", "3", "--class", "sorting", "--size", "3", "--solver", "no-such-solver-binary"],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no-such-solver-binary"));
}

#[test]
fn encode_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["encode", "--n", "5", "--class", "single-exception", "--size", "8", "-o", out];
    assert_eq!(code(&sortnet(dir.path(), &args("a.cnf"))), 0);
    assert_eq!(code(&sortnet(dir.path(), &args("b.cnf"))), 0);
    let a = std::fs::read(dir.path().join("a.cnf")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.cnf")).unwrap());
    assert!(a.starts_with(b"p cnf "));

    let stdout_run = sortnet(dir.path(), &["encode", "--n", "5", "--class", "single-exception", "--size", "8"]);
    assert_eq!(stdout_run.stdout, a);
}

#[test]
fn varmap_names_the_leading_variables() {
    let dir = tempfile::tempdir().unwrap();
    let out = sortnet(
        dir.path(),
        &["encode", "--n", "3", "--class", "sorting", "--size", "3", "--encoding", "sfwd", "-o", "f.cnf", "--varmap", "map.json"],
    );
    assert_eq!(code(&out), 0);
    let map: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("map.json")).unwrap()).unwrap();
    assert_eq!(map["g(1,1,2)"], 1);
    assert_eq!(map["g(3,2,3)"], 9);
    assert_eq!(map["o(0,0)"], 10);
    assert_eq!(map.len(), 9 + 4 * 8);
}

#[test]
fn render_draws_every_channel() {
    let dir = tempfile::tempdir().unwrap();
    sortnet(dir.path(), &["figures", "--export", "."]);
    let out = sortnet(dir.path(), &["render", "--network", "sorting_4.json"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().next().unwrap().starts_with('1'));
}

#[test]
fn sat_subcommand_follows_competition_conventions() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sat.cnf"), "p cnf 2 2\n1 2 0\n-1 0\n").unwrap();
    std::fs::write(dir.path().join("unsat.cnf"), "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let out = sortnet(dir.path(), &["sat", "sat.cnf"]);
    assert_eq!(code(&out), 10);
    assert_eq!(stdout(&out), "s SATISFIABLE\nv -1 2 0\n");
    let out = sortnet(dir.path(), &["sat", "unsat.cnf"]);
    assert_eq!(code(&out), 20);
    assert_eq!(stdout(&out), "s UNSATISFIABLE\n");
}

#[test]
fn external_mode_round_trips_through_a_subprocess() {
    let dir = tempfile::tempdir().unwrap();
    let solver = format!("{} sat", env!("CARGO_BIN_EXE_sortnet"));
    let out = sortnet(
        dir.path(),
        &["solve", "--n", "4", "--class", "sorting", "--size", "5", "--solver", &solver, "--temp-dir", "cnf"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(certify(&read_network(&dir.path().join("witness.json")), NetworkClass::Sorting).unwrap().verdict);
    let files: Vec<_> = std::fs::read_dir(dir.path().join("cnf")).unwrap().collect();
    assert_eq!(files.len(), 1);

    let out = Command::new(env!("CARGO_BIN_EXE_sortnet"))
        .args(["solve", "--n", "4", "--class", "sorting", "--size", "4", "--witness", "w.json"])
        .current_dir(dir.path())
        .env("SORTNET_SOLVER", &solver)
        .output()
        .unwrap();
    assert_eq!(code(&out), 20, "{}", stderr(&out));
}

#[test]
fn search_reports_optimum_or_interval() {
    let dir = tempfile::tempdir().unwrap();
    let out = sortnet(
        dir.path(),
        &["search", "--n", "4", "--class", "sorting", "--objective", "size", "--witness", "best.json"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!((r["lower"].as_u64(), r["upper"].as_u64()), (Some(5), Some(5)));
    assert_eq!(r["lower_bound"], "solver-attested");
    assert_eq!(read_network(&dir.path().join("best.json")).size(), 5);

    let out = sortnet(
        dir.path(),
        &["search", "--n", "8", "--class", "single-exception", "--objective", "size", "--per-instance", "0"],
    );
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("[18, 20]"));

    let out = sortnet(dir.path(), &["search", "--n", "5", "--class", "sorting", "--objective", "size-depth"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("(9,5)"));
}

#[test]
fn tables_write_markdown_csv_and_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let out = sortnet(
        dir.path(),
        &["tables", "--from", "2", "--to", "4", "--format", "csv", "-o", "t.csv", "--witness-dir", "w", "--jobs", "2"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 18);
    assert!(csv.lines().skip(1).all(|l| l.contains(",yes,")), "{csv}");
    let witness = dir.path().join("w/size_sorting_n4_s5.json");
    assert!(certify(&read_network(&witness), NetworkClass::Sorting).unwrap().verdict);
    assert!(dir.path().join("w/size-depth_single-exception_n4_s5_d3.json").exists());

    let out = sortnet(dir.path(), &["tables", "--from", "3", "--to", "3", "--only", "depth"]);
    assert_eq!(code(&out), 0);
    let md = stdout(&out);
    assert!(md.contains("| D1(n) | 2 |") && md.contains("| D(n) | 3 |"), "{md}");
    assert!(!md.contains("Optimal size"));

    let out = sortnet(dir.path(), &["tables", "--from", "5", "--to", "3"]);
    assert_eq!(code(&out), 1);
}
