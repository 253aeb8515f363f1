use std::fs;
use std::process::{Command, Output};

use deletion_capacity::cli::{parse_table_csv, BoundsTable};
use deletion_capacity::sources::RunLengthDistribution;
use serde_json::Value;

fn delcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delcap")).args(args).output().expect("run delcap")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

#[test]
fn constants_json() {
    let o = delcap(&["constants"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["c4"].as_f64().unwrap() - 0.690_013_21).abs() < 1e-7);
}

#[test]
fn table_round_trips_and_notes_go_to_stderr() {
    let o = delcap(&["table"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("d,lower,C_est,upper\n"));
    let rows = parse_table_csv(&text).unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0].lower, Some(0.7283));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds the upper bound"));
    assert!(!text.contains("note"));
}

#[test]
fn table_from_file_and_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("bounds.csv");
    fs::write(&good, "d,lower,upper\n0.1,0.5,0.7\n").unwrap();
    let o = delcap(&["table", "--bounds", good.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "d,lower,upper\n0.1,0.5,0.7\n0.2,oops,0.6\n").unwrap();
    let o = delcap(&["table", "--bounds", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&o.stderr));

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let o = delcap(&["table", "--bounds", empty.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(parse_table_csv(&stdout(&o)).unwrap().len(), 10);

    assert_eq!(delcap(&["table", "--bounds", "/no/such/file.csv"]).status.code(), Some(3));
}

#[test]
fn figure_writes_data_and_script() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("fig.csv");
    let script = dir.path().join("fig.gp");
    let o = delcap(&[
        "figure",
        "--step",
        "0.05",
        "--output",
        data.to_str().unwrap(),
        "--gnuplot",
        script.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let rows = parse_table_csv(&fs::read_to_string(&data).unwrap()).unwrap();
    assert_eq!(rows.len(), 10);
    assert!(fs::read_to_string(&script).unwrap().contains(data.to_str().unwrap()));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(delcap(&["verify", "constants"]).status.code(), Some(0));
    assert_eq!(delcap(&["verify", "dp"]).status.code(), Some(0));
    assert_eq!(delcap(&["verify", "formulas"]).status.code(), Some(1));
    assert_eq!(delcap(&["verify", "nonsense"]).status.code(), Some(2));

    let o = delcap(&["verify", "rates", "--n", "50", "--samples", "4", "--out-bits", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "underpowered");
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn estimate_is_deterministic_json() {
    let args = [
        "estimate", "--d", "0.1", "--source", "bernoulli", "--n", "200", "--samples", "50", "--out-bits", "1000000",
    ];
    let a = delcap(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(stdout(&a), stdout(&delcap(&args)));
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    for key in ["rate", "h_out", "h_cond", "std_err", "n", "samples", "d", "seed", "mode"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["mode"], "exact-renewal");
}

#[test]
fn markov_estimate_needs_opt_in() {
    let base = ["estimate", "--d", "0.1", "--source", "markov:0.55", "--n", "100", "--samples", "20", "--out-bits", "1000000"];
    assert_eq!(delcap(&base).status.code(), Some(2));
    let mut with = base.to_vec();
    with.push("--allow-upper-bound");
    let o = delcap(&with);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["mode"], "upper-bound");
}

#[test]
fn dist_file_feeds_renewal_source() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dagger.txt");
    let o = delcap(&["dist", "--d", "0.1"]);
    assert!(o.status.success());
    fs::write(&path, &o.stdout).unwrap();
    let dist = RunLengthDistribution::read(fs::read_to_string(&path).unwrap().as_bytes()).unwrap();
    assert_eq!(dist.l_max(), 64);

    let source = format!("renewal:{}", path.display());
    let o = delcap(&["runstats", "--source", &source, "--bits", "20000"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["n_runs"].as_u64().unwrap() > 1000);
}

#[test]
fn runstats_from_input_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.txt");
    fs::write(&path, "0011101\n00100011\n").unwrap();
    let o = delcap(&["runstats", "--input", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // Runs 00|111|0|1|00|1|000|11 with the two boundary runs dropped.
    assert_eq!(v["n_runs"], 6);

    fs::write(&path, "0102").unwrap();
    assert_eq!(delcap(&["runstats", "--input", path.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn shipped_bounds_round_trip() {
    let t = BoundsTable::shipped();
    let again = BoundsTable::parse(t.to_csv().unwrap().as_bytes()).unwrap();
    assert_eq!(t, again);
}
