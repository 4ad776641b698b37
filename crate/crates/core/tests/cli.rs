use std::path::Path;
use std::process::{Command, Output};

use hexloop::hexlattice::SQRT3;
use tempfile::TempDir;

fn hexloop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hexloop")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn total(text: &str) -> u64 {
    csv_rows(text).iter().map(|r| r[2].parse::<u64>().unwrap()).sum()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn enumerate_counts() {
    let out = stdout(&hexloop(&["enumerate", "--k", "1"]));
    assert!(out.starts_with("i,j,count\n"));
    assert_eq!(total(&out), 3);
    assert_eq!(total(&stdout(&hexloop(&["enumerate", "--k", "2"]))), 9);
}

#[test]
fn enumerate_refuses_large_k() {
    let out = hexloop(&["enumerate", "--k", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("hexloop: "));
}

#[test]
fn frozen_weights_exit_3() {
    let out = hexloop(&["stats", "--k", "6", "--weights", "1,1,3", "--sweeps", "4"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(hexloop(&["sample", "--k", "six"]).status.code(), Some(2));
    assert_eq!(hexloop(&["stats", "--weights", "1,2"]).status.code(), Some(2));
    assert_eq!(hexloop(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(hexloop(&["--help"]).status.code(), Some(0));
}

#[test]
fn sampling_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let run = |tag: &str| {
        let bin = dir.path().join(format!("{tag}.bin"));
        let log = dir.path().join(format!("{tag}.csv"));
        let rep = dir.path().join(format!("{tag}-report.csv"));
        let out = hexloop(&[
            "sample", "--k", "12", "--seed", "7", "--sweeps", "20", "--burn-in", "10", "--thinning", "5",
            "--out", path_str(&bin), "--log", path_str(&log), "--report", path_str(&rep), "--probe", "3,3",
        ]);
        stdout(&out);
        (std::fs::read(bin).unwrap(), std::fs::read(log).unwrap(), std::fs::read(rep).unwrap())
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b);
    let log = String::from_utf8(a.1).unwrap();
    assert!(log.starts_with("sweep,acceptance,count_a,count_b,count_c\n"));
    assert_eq!(log.lines().count(), 5);
    for row in csv_rows(&log) {
        let counts: Vec<usize> = row[2..].iter().map(|x| x.parse().unwrap()).collect();
        assert_eq!(counts.iter().sum::<usize>(), 144);
    }
    let report = String::from_utf8(a.2).unwrap();
    assert!(report.starts_with("sample,cycles,winding,max_cycle_length,clusters,trifurcations,probes,flags\n"));
}

#[test]
fn stats_are_deterministic_and_exact_in_a_sector() {
    let args = ["stats", "--k", "6", "--seed", "3", "--sweeps", "40", "--burn-in", "10"];
    let a = stdout(&hexloop(&args));
    assert_eq!(a, stdout(&hexloop(&args)));
    let rows = csv_rows(&a);
    assert_eq!(rows.len(), 4);
    // k = 6 fits the central sector, so every type frequency is exactly 1/3
    for r in &rows[..3] {
        assert_eq!(r[4], "0.0000");
    }
}

#[test]
fn kasteleyn_eval_prints_probabilities() {
    let out = stdout(&hexloop(&["kasteleyn-eval", "--weights", "1,1,1", "--displacement", "0,0", "--edge", "B:2,-1"]));
    let rows = csv_rows(&out);
    assert_eq!(rows[0][0], "kinv");
    assert_eq!(rows[1][0], "edge_probability");
    let p: f64 = rows[1][2].parse().unwrap();
    assert!((p - 1.0 / 3.0).abs() < 1e-9);
    assert_eq!(hexloop(&["kasteleyn-eval", "--weights", "1,1,1"]).status.code(), Some(2));
}

#[test]
fn double_dimer_reports() {
    let out = stdout(&hexloop(&["double-dimer", "--k", "8", "--seed", "1", "--sweeps", "3", "--burn-in", "5"]));
    assert!(out.starts_with("sample,doubled,cycles,homology,surrounding\n"));
    for r in csv_rows(&out) {
        let doubled: usize = r[1].parse().unwrap();
        assert!(doubled <= 64);
    }
}

#[test]
fn render_parses_as_svg() {
    let dir = TempDir::new().unwrap();
    let dump = dir.path().join("all.bin");
    stdout(&hexloop(&["enumerate", "--k", "2", "--dump", path_str(&dump)]));
    for (layer, lines) in [("dimers", 4), ("loops", 8)] {
        let svg = dir.path().join(format!("{layer}.svg"));
        stdout(&hexloop(&[
            "render", "--input", path_str(&dump), "--index", "0", "--layer", layer, "--heights", "--out", path_str(&svg),
        ]));
        let text = std::fs::read_to_string(&svg).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("line")).count(), lines);
    }
    let missing = hexloop(&["render", "--input", path_str(&dump), "--index", "99"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn swap_demo_writes_outputs() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("demo");
    let (w, h, big_r) = (60usize, 68usize, 28.0);
    stdout(&hexloop(&[
        "swap-demo", "--width", "60", "--height", "68", "--radii", "4,12,28", "--flips-per-face", "0", "--out",
        path_str(&out),
    ]));
    for f in ["before.svg", "after.svg"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        roxmltree::Document::parse(&text).unwrap();
    }
    let flips: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(out.join("flips.json")).unwrap()).unwrap();
    assert!(!flips.is_empty());
    let mid = (w as f64 / 2.0, h as f64 * SQRT3 / 4.0);
    for f in &flips {
        let (n, m) = (f["n"].as_f64().unwrap(), f["m"].as_f64().unwrap());
        let (x, y) = (n + m / 2.0, m * SQRT3 / 2.0);
        assert!(((x - mid.0).powi(2) + (y - mid.1).powi(2)).sqrt() < big_r);
    }
}

#[test]
fn config_file_and_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "enumerate", "k": 2}"#).unwrap();
    assert_eq!(total(&stdout(&hexloop(&["enumerate", "--config", path_str(&cfg)]))), 9);
    assert_eq!(total(&stdout(&hexloop(&["enumerate", "--config", path_str(&cfg), "--k", "1"]))), 3);
    assert_eq!(hexloop(&["stats", "--config", path_str(&cfg)]).status.code(), Some(2));
    std::fs::write(&cfg, r#"{"k": 2, "colour": "red"}"#).unwrap();
    assert_eq!(hexloop(&["enumerate", "--config", path_str(&cfg)]).status.code(), Some(2));
}
