use std::f64::consts::LN_2;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

struct Sandbox {
    out: TempDir,
    cache: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self {
            out: tempfile::tempdir().unwrap(),
            cache: tempfile::tempdir().unwrap(),
        }
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_zetaglue"))
            .args(args)
            .arg("--out")
            .arg(self.out.path())
            .env("ZETAGLUE_CACHE_DIR", self.cache.path())
            .output()
            .unwrap()
    }

    fn read(&self, name: &str) -> Vec<u8> {
        fs::read(self.out.path().join(name)).unwrap()
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_slice(&self.read(name)).unwrap()
    }
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.json");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn point_gluing_passes() {
    let s = Sandbox::new();
    let o = s.run(&["glue", "--model", "point", "--a", "1", "--b", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = s.json("glue.json");
    let row = &doc["rows"][0];
    assert_eq!(row["identity"], "gluing");
    assert!(row["residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["config"]["numeric"]["tolerances"]["exact"], 1e-10);
}

#[test]
fn collar_on_point_is_log_two() {
    let s = Sandbox::new();
    let o = s.run(&["adiabatic", "--identity", "collar-dtn"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = String::from_utf8(s.read("adiabatic.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(lines.len(), 5);
    for line in lines {
        let lhs: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!((lhs - LN_2).abs() < 1e-12, "{line}");
    }
    let doc = s.json("adiabatic.json");
    assert_eq!(doc["config"]["numeric"]["r_grid"], serde_json::json!([1.0, 2.0, 4.0, 8.0]));
}

#[test]
fn untwisted_torsion_is_a_hypothesis_failure() {
    let s = Sandbox::new();
    let o = s.run(&["torsion", "--model", "circle", "--holonomy", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kernel present"), "{}", stderr(&o));
}

#[test]
fn twisted_torsion_passes() {
    let s = Sandbox::new();
    let o = s.run(&["torsion", "--model", "circle", "--holonomy", "0.5", "--b", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(s.json("torsion.json")["config"]["geometry"]["form_grading"], true);
}

#[test]
fn cache_hit_is_byte_identical() {
    let s = Sandbox::new();
    let args = ["glue", "--model", "circle"];
    let first = s.run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert!(!stderr(&first).contains("cache hit"));
    let (json, csv) = (s.read("glue.json"), s.read("glue.csv"));
    let second = s.run(&args);
    assert!(stderr(&second).contains("cache hit"));
    assert_eq!(s.read("glue.json"), json);
    assert_eq!(s.read("glue.csv"), csv);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn tolerance_change_misses_the_cache() {
    let s = Sandbox::new();
    s.run(&["glue", "--tol", "1e-6"]);
    let o = s.run(&["glue", "--tol", "1e-7"]);
    assert!(!stderr(&o).contains("cache hit"));
    assert_eq!(s.json("glue.json")["config"]["numeric"]["tolerances"]["fixed"], 1e-7);
}

#[test]
fn corrupt_cache_entries_are_recomputed() {
    let s = Sandbox::new();
    s.run(&["glue"]);
    let reference = s.read("glue.json");
    for entry in fs::read_dir(s.cache.path()).unwrap() {
        fs::write(entry.unwrap().path(), "{\"version\": 7").unwrap();
    }
    let o = s.run(&["glue"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stderr(&o).contains("cache hit"));
    assert_eq!(s.read("glue.json"), reference);
    let o = s.run(&["glue"]);
    assert!(stderr(&o).contains("cache hit"));
}

#[test]
fn uncached_runs_are_deterministic() {
    let s = Sandbox::new();
    s.run(&["zeta", "--model", "linear", "--offset", "0.25", "--no-cache"]);
    let first = s.read("zeta.json");
    s.run(&["zeta", "--model", "linear", "--offset", "0.25", "--no-cache"]);
    assert_eq!(s.read("zeta.json"), first);
    assert_eq!(fs::read_dir(s.cache.path()).unwrap().count(), 0);
}

#[test]
fn tolerance_failure_exits_three() {
    let s = Sandbox::new();
    let o = s.run(&["glue", "--model", "circle", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn usage_and_config_errors_exit_one() {
    let s = Sandbox::new();
    assert_eq!(s.run(&["nonsense"]).status.code(), Some(1));
    assert_eq!(s.run(&["glue", "--a", "-1"]).status.code(), Some(1));
    let bad = write_config(s.out.path(), r#"{"geometry": {"length": 2.0}}"#);
    let o = s.run(&["glue", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown field"), "{}", stderr(&o));
    let other = write_config(s.out.path(), r#"{"experiment": "zeta"}"#);
    assert_eq!(s.run(&["glue", "--config", &other]).status.code(), Some(1));
}

#[test]
fn config_file_drives_the_run() {
    let s = Sandbox::new();
    let cfg = write_config(
        s.out.path(),
        r#"{
            "experiment": "logdet",
            "geometry": {"cross_section": {"kind": "circle", "circumference": 6.283185307179586}},
            "cylinder": {"length": 3.141592653589793}
        }"#,
    );
    let o = s.run(&["logdet", "--config", &cfg, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!s.out.path().join("logdet.csv").exists());
    let doc = s.json("logdet.json");
    let v = doc["values"]["factorized"]["value"][0].as_f64().unwrap();
    assert!((v + 0.527_344_1).abs() < 1e-7, "{v}");
}

#[test]
fn symbols_print_closed_forms() {
    let s = Sandbox::new();
    let cfg = write_config(s.out.path(), r#"{"symbols": {"potential": {"constant": 0.5, "cos": [1.0]}, "depth": 3}}"#);
    let o = s.run(&["symbols", "--config", &cfg, "--model", "circle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = s.json("symbols.json");
    assert_eq!(doc["values"]["orders"][2], "q_-1 = 1/2 V (xi^2+t)^(-1/2)");
    assert_eq!(doc["values"]["orders"][3], "q_-2 = i/4 xi V' (xi^2+t)^(-3/2)");
}
