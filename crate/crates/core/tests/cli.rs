//! End-to-end checks of the command-line interface and emitted artifacts.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_npgap")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("npgap_cli_{tag}_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const SMALL_CONFIG: &str = r#"
[shape1]
kind = "circle"
radius = 1.0

[shape2]
kind = "circle"
radius = 1.0

[gap]
values = [0.1, 0.05]

[background]
re_coeffs = [1.0]

[problem]
kind = "conducting"

[numerics]
n_override = 128
probe_count = 11

[output]
stem = "t"
"#;

#[test]
fn sweep_emits_deterministic_artifacts() {
    let dir = temp_dir("sweep");
    let cfg = dir.join("cfg.toml");
    std::fs::write(&cfg, SMALL_CONFIG).unwrap();

    let run = || {
        let out = Command::new(bin())
            .args([
                "sweep",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                dir.to_str().unwrap(),
                "--format",
                "both",
                "--plot",
                "eps:max_gap_grad_u",
            ])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "stdout: {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        );
        std::fs::read(dir.join("t.csv")).unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first, second, "identical config must produce identical CSV bytes");

    let csv = String::from_utf8(first).unwrap();
    let lines: Vec<&str> = csv.trim_end().lines().collect();
    assert_eq!(lines.len(), 3, "header + 2 rows");
    assert!(lines[0].starts_with("eps,n_used,"));

    // JSON report echoes the config byte-for-byte.
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("t.json")).unwrap()).unwrap();
    assert_eq!(json["config"].as_str().unwrap(), SMALL_CONFIG);
    assert_eq!(json["rows"].as_array().unwrap().len(), 2);

    // SVG has one polyline for the single requested series.
    let svg = std::fs::read_to_string(dir.join("t_eps_max_gap_grad_u.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_errors_exit_code_two() {
    let dir = temp_dir("badcfg");
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, SMALL_CONFIG.replace("[background]", "[background]\nbogus = 3")).unwrap();
    let out = Command::new(bin())
        .args(["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_config_exit_code_two() {
    let out = Command::new(bin())
        .args(["spectrum", "--config", "/definitely/not/here.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_gap_list_succeeds_with_empty_output() {
    let dir = temp_dir("empty");
    let cfg = dir.join("cfg.toml");
    std::fs::write(&cfg, SMALL_CONFIG.replace("values = [0.1, 0.05]", "values = []")).unwrap();
    let out = Command::new(bin())
        .args([
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("t.csv")).unwrap();
    assert_eq!(csv.trim_end().lines().count(), 1, "header only");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn oracle_subcommand_passes_on_disks() {
    let dir = temp_dir("oracle");
    let cfg = dir.join("cfg.toml");
    std::fs::write(&cfg, SMALL_CONFIG.replace("values = [0.1, 0.05]", "values = [0.05]")).unwrap();
    let out = Command::new(bin())
        .args(["oracle", "--config", cfg.to_str().unwrap(), "--n-override", "288"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn solve_subcommand_writes_row() {
    let dir = temp_dir("solve");
    let cfg = dir.join("cfg.toml");
    std::fs::write(&cfg, SMALL_CONFIG).unwrap();
    let out = Command::new(bin())
        .args(["solve", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("t_solve.json")).unwrap()).unwrap();
    // Solve reports the largest configured gap.
    assert!((json["row"]["eps"].as_f64().unwrap() - 0.1).abs() < 1e-15);
    assert_eq!(json["row"]["multiplicity"].as_u64().unwrap(), 2);
    std::fs::remove_dir_all(&dir).ok();
}
