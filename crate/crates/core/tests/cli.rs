use std::fs;
use std::path::Path;
use std::process::Command;

use ris_secrecy::cli::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ris-secrecy"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn manifest(dir: &Path) -> toml::Table {
    fs::read_to_string(dir.join("manifest.toml"))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn zero_elements_exits_2_naming_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.toml",
        "[system]\nm_tx_antennas = 4\nn_ris_elements = 0\n",
    );
    let out = tmp.path().join("out");
    let res = bin()
        .args(["ergodic-sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("n_ris_elements"), "{stderr}");
    assert!(stderr.contains("line 3"), "{stderr}");
}

#[test]
fn bob_beyond_eve_exits_3_and_still_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "far.toml",
        "[geometry]\ndist_ris_bob_m = 40.0\ndist_ris_eve_m = 30.0\n",
    );
    let out = tmp.path().join("out");
    let res = bin()
        .args(["bound-check", "--trials", "1000", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(3));
    let m = manifest(&out);
    assert_eq!(m["status"].as_str(), Some("failed"));
    assert!(m["error"].as_str().unwrap().contains("l_B"));
}

#[test]
fn eta_check_writes_table_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let res = bin()
        .args([
            "eta-check",
            "--trials",
            "200000",
            "--seed",
            "5",
            "--threads",
            "2",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = fs::read_to_string(out.join("eta_check.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("n_ris_elements,mc_estimate,std_error,eta_formula,relative_error")
    );
    for line in lines {
        let rel: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(rel < 0.05, "{line}");
    }
    let m = manifest(&out);
    assert_eq!(m["status"].as_str(), Some("ok"));
    assert_eq!(m["seed"].as_integer(), Some(5));
    assert_eq!(m["trials"].as_integer(), Some(200_000));
}

#[test]
fn effective_config_reproduces_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "sweep.toml",
        "[system]\nm_tx_antennas = 8\n[sweep]\nparameter = \"n_ris_elements\"\nvalues = [4, 8, 16]\n[monte_carlo]\ntrials = 5000\n",
    );
    let first = tmp.path().join("first");
    assert!(bin()
        .args(["ergodic-sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&first)
        .status()
        .unwrap()
        .success());
    let second = tmp.path().join("second");
    assert!(bin()
        .args(["ergodic-sweep", "--config"])
        .arg(first.join("effective_config.toml"))
        .arg("--out")
        .arg(&second)
        .status()
        .unwrap()
        .success());
    let (a, b) = (manifest(&first), manifest(&second));
    assert_eq!(a["config_hash"], b["config_hash"]);
    assert_eq!(
        fs::read(first.join("sweep.csv")).unwrap(),
        fs::read(second.join("sweep.csv")).unwrap()
    );
    let effective = fs::read_to_string(first.join("effective_config.toml")).unwrap();
    let parsed = RunConfig::from_toml(&effective).unwrap();
    assert_eq!(parsed.config_hash(), a["config_hash"].as_str().unwrap());
}

#[test]
fn sweep_over_n_is_increasing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let res = bin()
        .args(["ergodic-sweep", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(res.status.success());
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rates: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rates.len(), 5);
    assert!(rates.windows(2).all(|w| w[1] > w[0]), "{rates:?}");
}

#[test]
fn secrecy_map_writes_grid_and_contours() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "map.toml",
        "[system]\nm_tx_antennas = 32\n[geometry]\ndist_alice_ris_m = 7.0710678118654755\ndist_ris_eve_m = 28.284271247461902\n[map]\npsi_steps = 11\ndist_steps = 20\nthresholds_bps_hz = [1.0]\n",
    );
    let out = tmp.path().join("out");
    assert!(bin()
        .args(["secrecy-map", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let grid = fs::read_to_string(out.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 11 * 20);
    assert!(grid.starts_with("psi_rad,dist_m,rate_bps_hz\n"));
    let contour = fs::read_to_string(out.join("contour_r0_1.csv")).unwrap();
    assert!(contour.starts_with("psi_rad,dist_m\n"));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let res = bin()
        .args(["eta-check", "--threads", "zero"])
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unknown_key_reports_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "typo.toml", "[system]\n\ntx_power_dbm = 30\n");
    let res = bin()
        .args(["eta-check", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 3"));
}
