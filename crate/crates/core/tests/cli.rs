use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stencil-lab")).args(args).output().expect("binary runs")
}

fn without_wall_time(csv: &str) -> Vec<String> {
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let skip = header.iter().position(|c| *c == "wall_time_s");
    csv.lines()
        .map(|l| l.split(',').enumerate().filter(|(i, _)| Some(*i) != skip).map(|(_, v)| v).collect::<Vec<_>>().join(","))
        .collect()
}

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("exp.toml");
    let text = format!(
        "name = \"exp\"\ndomain = \"disc\"\nh = 0.05\nseed = 2\noutput = {:?}\n{extra}\n[sweep]\nn_min = 12\nn_max = 15\n",
        dir.join("out").to_str().unwrap()
    );
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_writes_csv_and_manifest_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = cli(&["-q", "run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let csv = fs::read_to_string(out.join("exp.csv")).unwrap();
    assert!(csv.starts_with("n,e_max_poiss,e_avg_poiss,e_max_lap,e_avg_lap,dN_poiss,dN_lap,wall_time_s\n"));
    assert_eq!(csv.lines().count(), 5);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("exp.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["config"]["seed"], 2);
    assert_eq!(manifest["csv_header"].as_str().unwrap(), csv.lines().next().unwrap());

    let rerun = dir.path().join("rerun");
    let o = cli(&["-q", "run", "--config", out.join("exp.manifest.json").to_str().unwrap(), "--out", rerun.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let again = fs::read_to_string(rerun.join("exp.csv")).unwrap();
    assert_eq!(without_wall_time(&csv), without_wall_time(&again));
}

#[test]
fn json_config_and_imex_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.json");
    let out = dir.path().join("o");
    let text = serde_json::json!({
        "name": "j",
        "domain": "annulus",
        "h": 0.05,
        "m": 2,
        "output": out,
        "sweep": {"n_min": 9, "n_max": 10},
        "imex": {},
    });
    fs::write(&path, text.to_string()).unwrap();
    let o = cli(&["-q", "run", "--config", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let imex = fs::read_to_string(out.join("j_imex.csv")).unwrap();
    assert!(imex.starts_with("n,imex_avg,wall_time_s\n"));
    assert_eq!(imex.lines().count(), 3);
}

#[test]
fn invalid_config_fails_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m = 9");
    let o = cli(&["-q", "run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("validate"), "{err}");
    assert!(!dir.path().join("out").exists());

    let path = dir.path().join("typo.toml");
    fs::write(&path, "domian = \"disc\"\nh = 0.1\n").unwrap();
    let o = cli(&["-q", "run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("domian"));
}

#[test]
fn dump_system_writes_matrix_market() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let o = cli(&["-q", "run", "--config", cfg.to_str().unwrap(), "--dump-system"]);
    assert!(o.status.success());
    let mtx = fs::read_to_string(dir.path().join("out/exp_n12.mtx")).unwrap();
    assert!(mtx.starts_with("%%MatrixMarket matrix coordinate real general"));
    assert!(dir.path().join("out/exp_n15_rhs.mtx").exists());
}

#[test]
fn presets_and_unknown_preset() {
    let o = cli(&["presets"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["fig2", "tableA2", "fig5", "fig15lite"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} not listed");
    }
    let o = cli(&["-q", "repro", "fig99"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fig99"));
}

#[test]
fn nodes_command_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n.csv");
    let o = cli(&["nodes", "--domain", "disc", "--h", "0.05", "--out", out.to_str().unwrap(), "--generator", "halton"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.lines().count() > 100);
    assert!(String::from_utf8_lossy(&o.stdout).contains("gamma"));

    let shape = r#"{"shape":"triangle","vertices":[[0.0,0.0],[2.0,0.0],[0.0,1.0]]}"#;
    let o = cli(&["nodes", "--domain", shape, "--h", "0.1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = cli(&["nodes", "--domain", "disc", "--h", "0.05", "--out", out.to_str().unwrap(), "--generator", "sobol"]);
    assert!(!o.status.success());
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_stencil-lab")).env("STENCIL_LAB_THREADS", "zero").arg("presets").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("STENCIL_LAB_THREADS"));
}
