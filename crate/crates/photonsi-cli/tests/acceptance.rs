//! End-to-end checks of the binary: byte-identical reruns across worker
//! counts (acceptance check 15), the exit-code contract, CSV round-trip
//! precision, charting, and the shipped example configs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_photonsi"))
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

const CURVE_CFG: &str = r#"{
  "schema_version": 1,
  "experiment": "dof-curve",
  "seed": 11,
  "compare_without_injection": true,
  "pipeline": {
    "modes": 4,
    "photons": 2,
    "input": [2, 0, 0, 0],
    "stages": [
      {"type": "mesh", "style": "triangular-rotations"},
      {"type": "inject", "modes": [0]},
      {"type": "mesh", "style": "rotations-plus-phases"},
      {"type": "extra-bs", "count": 3, "seed": 5},
      {"type": "circuit", "circuit": {"modes": 4, "gates": [
        {"kind": "ps", "mode": 1, "slot": 0},
        {"kind": "bs", "modes": [0, 3], "fixed": 0.7}
      ]}}
    ]
  }
}"#;

const PROBE_CFG: &str = r#"{
  "schema_version": 1,
  "experiment": "probestim",
  "seed": 21,
  "modes": 3,
  "photons": 2,
  "layer_seeds": [41, 42],
  "input": [2, 0, 0],
  "samples": 10000,
  "max_sigma": 6.0
}"#;

const PURITY_CFG: &str = r#"{
  "schema_version": 1,
  "experiment": "purity-bounds",
  "seed": 3,
  "modes": 3,
  "photons": 1,
  "layers": [1, 2],
  "draws": 12
}"#;

#[test]
fn acceptance_15_identical_reruns_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (name, cfg) in [("curve", CURVE_CFG), ("probe", PROBE_CFG), ("purity", PURITY_CFG)] {
        let cfg_path = write(dir.path(), &format!("{name}.json"), cfg);
        let mut outputs: Vec<Vec<u8>> = Vec::new();
        for threads in ["1", "4"] {
            let out = dir.path().join(format!("{name}-{threads}.csv"));
            let status = bin()
                .arg("run")
                .arg(&cfg_path)
                .arg("--out")
                .arg(&out)
                .env("RAYON_NUM_THREADS", threads)
                .status()
                .unwrap();
            assert!(status.success(), "{name} failed with {threads} workers");
            outputs.push(fs::read(&out).unwrap());
        }
        assert!(!outputs[0].is_empty(), "{name} wrote nothing");
        assert_eq!(outputs[0], outputs[1], "{name}: bytes differ across worker counts");
        println!("15: {name}, {} bytes, identical with 1 and 4 workers", outputs[0].len());
    }
}

#[test]
fn run_stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "curve.json", CURVE_CFG);
    let out_path = dir.path().join("curve.csv");
    assert!(bin().arg("run").arg(&cfg).arg("--out").arg(&out_path).status().unwrap().success());
    let piped = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(piped.status.success());
    assert_eq!(piped.stdout, fs::read(&out_path).unwrap());
}

#[test]
fn exit_codes_follow_failure_class() {
    let dir = tempfile::tempdir().unwrap();

    let code = |out: std::process::Output| out.status.code();

    let good = write(dir.path(), "good.json", PURITY_CFG);
    assert_eq!(code(bin().arg("validate").arg(&good).output().unwrap()), Some(0));

    // A sampling check that cannot hold: every estimate deviates by more
    // than a billionth of its error bar.
    let breached = write(dir.path(), "breached.json", &PROBE_CFG.replace("6.0", "1e-9"));
    let out = bin().arg("run").arg(&breached).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("check failed"));

    assert_eq!(code(bin().arg("run").arg(dir.path().join("nope.json")).output().unwrap()), Some(2));

    let bad_json = write(dir.path(), "bad.json", "{not json");
    assert_eq!(code(bin().arg("run").arg(&bad_json).output().unwrap()), Some(2));

    let bad_version = write(dir.path(), "ver.json", &PURITY_CFG.replace("\"schema_version\": 1", "\"schema_version\": 9"));
    assert_eq!(code(bin().arg("run").arg(&bad_version).output().unwrap()), Some(2));

    let unknown_field = write(dir.path(), "unk.json", &PURITY_CFG.replace("\"seed\": 3", "\"seed\": 3, \"tpyo\": 1"));
    assert_eq!(code(bin().arg("run").arg(&unknown_field).output().unwrap()), Some(2));

    let unknown_exp = write(dir.path(), "exp.json", &PURITY_CFG.replace("purity-bounds", "warp-drive"));
    assert_eq!(code(bin().arg("run").arg(&unknown_exp).output().unwrap()), Some(2));
}

#[test]
fn csv_floats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "purity.json", PURITY_CFG);
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "purity").unwrap();
    let mut checked = 0;
    for line in lines {
        let cell = line.split(',').nth(col).unwrap();
        let value: f64 = cell.parse().unwrap();
        assert_eq!(format!("{value}"), cell, "cell does not round-trip");
        checked += 1;
    }
    assert_eq!(checked, 24);
}

#[test]
fn regimes_prints_full_table() {
    let out = bin().arg("regimes").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 16);
    assert_eq!(lines[0], "channel_growth,photon_growth,verdict");
    assert!(lines.contains(&"O(m),O(m^2),hard"));
    assert!(lines.contains(&"O(1),O(m log m),open"));
    assert!(lines.contains(&"O(log m),O(log m),simulable"));
    let count = |verdict: &str| lines[1..].iter().filter(|l| l.ends_with(verdict)).count();
    assert_eq!((count(",simulable"), count(",hard"), count(",open")), (6, 6, 3));
}

#[test]
fn plot_renders_polylines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "curve.json", CURVE_CFG);
    let csv = dir.path().join("curve.csv");
    assert!(bin().arg("run").arg(&cfg).arg("--out").arg(&csv).status().unwrap().success());
    let svg_path = dir.path().join("curve.svg");
    let status = bin()
        .arg("plot")
        .arg(&csv)
        .arg("--out")
        .arg(&svg_path)
        .args(["--x", "step", "--y", "rank,rank_without_injection", "--gnuplot"])
        .status()
        .unwrap();
    assert!(status.success());
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains("rank_without_injection"));
    let dat = fs::read_to_string(dir.path().join("curve.dat")).unwrap();
    assert!(dat.starts_with("# rank\n"));
    let gp = fs::read_to_string(dir.path().join("curve.gp")).unwrap();
    assert!(gp.contains("index 1 using 1:2"));
}

#[test]
fn plot_missing_column_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "t.csv", "a,b\n1,2\n");
    let out = bin()
        .arg("plot")
        .arg(&csv)
        .arg("--out")
        .arg(dir.path().join("t.svg"))
        .args(["--x", "a", "--y", "missing"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));
}

#[test]
fn plot_empty_data_draws_axes_only() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "empty.csv", "a,b\n");
    let svg_path = dir.path().join("empty.svg");
    let status = bin()
        .arg("plot")
        .arg(&csv)
        .arg("--out")
        .arg(&svg_path)
        .args(["--x", "a", "--y", "b"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(!svg.contains("<polyline"));
}

#[test]
fn plot_series_groups_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "purity.json", PURITY_CFG);
    let csv = dir.path().join("purity.csv");
    assert!(bin().arg("run").arg(&cfg).arg("--out").arg(&csv).status().unwrap().success());
    let svg_path = dir.path().join("purity.svg");
    let status = bin()
        .arg("plot")
        .arg(&csv)
        .arg("--out")
        .arg(&svg_path)
        .args(["--x", "draw", "--y", "purity", "--series", "layers"])
        .status()
        .unwrap();
    assert!(status.success());
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(svg.contains("layers=1") && svg.contains("layers=2"));
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut entries: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    entries.sort();
    assert!(entries.len() >= 6, "expected the full example set, found {}", entries.len());
    for path in entries {
        let out = bin().arg("validate").arg(&path).output().unwrap();
        assert!(
            out.status.success(),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: "));
    }
}
