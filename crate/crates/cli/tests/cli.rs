use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_legchain"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn out_file(dir: &Path, name: &str) -> PathBuf {
    dir.join("out").join(name)
}

/// Data rows of a CSV written by the tool, without the metadata block.
fn table(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

fn column(path: &Path, name: &str) -> Vec<String> {
    let text = fs::read_to_string(path).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    let idx = header.split(',').position(|c| c == name).unwrap();
    table(path).into_iter().map(|r| r[idx].clone()).collect()
}

const SHORT_WALK: &str = "[simulate]\nt_sim_s = 3.0\n";

#[test]
fn simulate_writes_trace_with_metadata() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), SHORT_WALK, &["simulate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let path = out_file(dir.path(), "trace.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# legchain "));
    assert!(text.contains("# command = simulate"));
    assert!(text.contains("# t_sim_s = 3.0"));
    let rows = table(&path);
    assert_eq!(rows.len(), 301);
    assert_eq!(rows[0].len(), 9);
}

#[test]
fn simulate_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = "[simulate]\nt_sim_s = 3.0\nperturbation_sigma_rad = 0.01\n";
    assert!(run(a.path(), cfg, &["simulate", "--seed", "5"]).status.success());
    assert!(run(b.path(), cfg, &["simulate", "--seed", "5"]).status.success());
    let fa = fs::read(out_file(a.path(), "trace.csv")).unwrap();
    let fb = fs::read(out_file(b.path(), "trace.csv")).unwrap();
    assert_eq!(fa, fb);
    let text = String::from_utf8(fa).unwrap();
    assert!(text.contains("# seed = 5"));
}

#[test]
fn negative_stiffness_is_rejected_by_key() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), "[model]\nk1_nmm_deg = -5.0\n", &["simulate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model.k1_nmm_deg"), "{}", stderr(&o));
}

#[test]
fn unknown_key_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), "[model]\nk_one = 3.0\n", &["simulate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("k_one"), "{}", stderr(&o));
}

#[test]
fn empty_sweep_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), "[floquet]\nk_list_nmm_deg = []\n", &["floquet"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("floquet.k_list_nmm_deg"), "{}", stderr(&o));
}

#[test]
fn zero_jobs_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), SHORT_WALK, &["simulate", "--jobs", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--jobs"));
}

#[test]
fn floquet_module_count_study() {
    let dir = TempDir::new().unwrap();
    let cfg = "[floquet]\nk_list_nmm_deg = [20.0, 10.0]\nvary = \"n_modules\"\nvary_values = [4, 6, 8, 10]\n";
    let o = run(dir.path(), cfg, &["floquet"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let crit = out_file(dir.path(), "floquet_critical.csv");
    let kc: Vec<f64> = column(&crit, "k_c_Nmm_deg").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(kc.len(), 4);
    assert!(kc.iter().all(|k| *k > 3.0 && *k < 40.0));
    assert!(column(&crit, "status").iter().all(|s| s == "ok"));
    let sweep = out_file(dir.path(), "floquet_sweep.csv");
    assert_eq!(column(&sweep, "crossing_type"), ["none", "real"]);
}

#[test]
fn turning_without_controller_costs_nothing() {
    let dir = TempDir::new().unwrap();
    let cfg = "[turning]\ncontroller = false\nk1_list_nmm_deg = [14.0]\nt_max_s = 10.0\neval_time_s = 10.0\n";
    let o = run(dir.path(), cfg, &["turning"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let eps3 = column(&out_file(dir.path(), "turning_summary.csv"), "eps3");
    assert_eq!(eps3, ["0"]);
}

#[test]
fn blow_up_is_reported_with_nonzero_exit() {
    let dir = TempDir::new().unwrap();
    let cfg = "[model]\nk1_nmm_deg = 0.001\n[simulate]\nt_sim_s = 200.0\nperturbation_rad = 1.5\n";
    let o = run(dir.path(), cfg, &["simulate"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let text = fs::read_to_string(out_file(dir.path(), "trace.csv")).unwrap();
    assert!(text.contains("# status = aborted"));
}
