use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn sentinel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sentinel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_exit_codes() {
    let three_vehicle = fixture("three_vehicle.json");
    let o = sentinel(&["verify", three_vehicle.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("classification safe"));

    let single = fixture("single_vehicle.json");
    assert_eq!(sentinel(&["verify", single.to_str().unwrap()]).status.code(), Some(0));

    let overlap = fixture("forced_overlap.json");
    let o = sentinel(&["verify", overlap.to_str().unwrap(), "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("classification unsafe"));

    let o = sentinel(&[
        "verify",
        three_vehicle.to_str().unwrap(),
        "--positions",
        "17,16.5,15",
        "--speeds",
        "10,10,10",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn bad_input_exits_with_one() {
    assert_eq!(sentinel(&["verify", "/no/such/file.json"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"vehicles\": [\n").unwrap();
    let o = sentinel(&["verify", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    assert_eq!(sentinel(&["verify"]).status.code(), Some(1));
}

#[test]
fn simulate_reports_overrides_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("three_vehicle.csv");
    let o = sentinel(&[
        "simulate",
        fixture("three_vehicle.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let overrides: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("overrides "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(overrides >= 1);
    assert!(text.contains("bad_set_steps 0"));
    assert!(text.contains("step_latency_s"));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("step,time,vehicle,pos,speed,u_applied,overridden,s_lower,s_upper,in_bad,in_shrunk,in_inflated")
    );
    assert_eq!(lines.count(), 60 * 3);
}

#[test]
fn open_loop_enters_bad_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("open.csv");
    let o = sentinel(&[
        "open-loop",
        fixture("three_vehicle.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--no-bounds",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("bad_set_steps 0"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.lines().skip(1).any(|l| l.split(',').nth(9) == Some("1")));
}

#[test]
fn zero_steps_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("empty.csv");
    let o = sentinel(&[
        "simulate",
        fixture("three_vehicle.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--steps",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1);
}

#[test]
fn refused_start_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let o = sentinel(&[
        "simulate",
        fixture("forced_overlap.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn bench_single_iteration() {
    let o = sentinel(&["bench", fixture("three_vehicle.json").to_str().unwrap(), "--iterations", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("step_latency_s")).unwrap();
    let fields: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(fields[2], fields[6], "p50 equals max for one sample: {line}");
}

#[test]
fn bench_twenty_vehicles_within_budget() {
    let o = sentinel(&[
        "bench",
        fixture("twenty_vehicle.json").to_str().unwrap(),
        "--iterations",
        "50",
        "--seed",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("budget 0.1 s: met"), "{}", stdout(&o));
}

#[test]
fn export_lp_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("upper.lp");
    let three_vehicle = fixture("three_vehicle.json");
    let o = sentinel(&["export-lp", three_vehicle.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let lp = std::fs::read_to_string(&out).unwrap();
    assert!(lp.contains("Minimize") && lp.contains("Binary") && lp.trim_end().ends_with("End"));
    let o = sentinel(&["export-lp", three_vehicle.to_str().unwrap(), "--problem", "lower"]);
    let lower = stdout(&o);
    assert!(lower.contains("Subject To"));
    assert!(lower.lines().filter(|l| l.trim_start().starts_with('k')).count() >= 3);
}
