use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn ftspan(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftspan"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("running ftspan")
}

fn points(dir: &Path, n: usize) -> PathBuf {
    let text: String = (0..n)
        .map(|i| format!("{} {}\n", (i * 37) % 101, (i * 59) % 103))
        .collect();
    let path = dir.join("points.txt");
    fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn build_writes_edges_and_stats() {
    let dir = TempDir::new().unwrap();
    let pts = points(dir.path(), 40);
    let o = ftspan(dir.path(), &["build", "--input", pts.to_str().unwrap(), "--k", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let edges = fs::read_to_string(dir.path().join("edges.jsonl")).unwrap();
    assert!(edges.lines().count() > 0);
    for line in edges.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["u"].as_u64().unwrap() < 40 && v["v"].as_u64().unwrap() < 40);
    }
    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["n"], 40);
    assert_eq!(stats["k"], 2);
    assert_eq!(stats["edge_count"].as_u64().unwrap() as usize, edges.lines().count());
}

#[test]
fn oversized_k_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let pts = points(dir.path(), 5);
    let o = ftspan(dir.path(), &["build", "--input", pts.to_str().unwrap(), "--k", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("k must be ≤ n−2"), "{}", stderr(&o));
}

#[test]
fn builds_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let pts = points(dir.path(), 60);
    let mut runs = Vec::new();
    for out in ["a.jsonl", "b.jsonl"] {
        let o = ftspan(dir.path(), &["build", "--input", pts.to_str().unwrap(), "--k", "1", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
        runs.push(fs::read(dir.path().join(out)).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn exhaustive_verify_counts_fault_sets() {
    let dir = TempDir::new().unwrap();
    let pts = points(dir.path(), 30);
    let p = pts.to_str().unwrap();
    assert_eq!(ftspan(dir.path(), &["build", "--input", p, "--k", "2"]).status.code(), Some(0));
    let o = ftspan(
        dir.path(),
        &["verify", "--input", p, "--edges", "edges.jsonl", "--k", "2", "--faults", "exhaustive"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("tested 466 fault sets"), "{}", stdout(&o));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn corrupted_edge_file_is_a_violation() {
    let dir = TempDir::new().unwrap();
    let pts = points(dir.path(), 20);
    let p = pts.to_str().unwrap();
    assert_eq!(ftspan(dir.path(), &["build", "--input", p, "--k", "1"]).status.code(), Some(0));
    // Keep only the first edge at point 0: failing its neighbour isolates it.
    let edges = fs::read_to_string(dir.path().join("edges.jsonl")).unwrap();
    let mut seen = false;
    let kept: String = edges
        .lines()
        .filter(|line| {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            let touches = v["u"] == 0 || v["v"] == 0;
            let keep = !touches || !seen;
            seen |= touches;
            keep
        })
        .map(|l| format!("{l}\n"))
        .collect();
    assert!(kept.lines().count() < edges.lines().count());
    fs::write(dir.path().join("bad.jsonl"), kept).unwrap();
    let o = ftspan(
        dir.path(),
        &["verify", "--input", p, "--edges", "bad.jsonl", "--k", "1", "--faults", "exhaustive"],
    );
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
}

#[test]
fn bench_prints_one_row_per_size_and_k() {
    let dir = TempDir::new().unwrap();
    let o = ftspan(dir.path(), &["bench", "--sizes", "32", "--ks", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "n,k,max_degree,edges,lightness,hop_diameter,build_time");
    assert_eq!(lines[1].split(',').count(), 7);
    assert!(lines[1].starts_with("32,1,"));
}
