use mraqc::secondq::{write_fcidump, IntegralTensors};
use mraqc::wfn::fci;
use std::path::Path;
use std::process::Command;

fn mraqc() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mraqc"));
    c.env("RUST_LOG", "warn");
    c
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const H2_XYZ: &str = "2\nunits=bohr\nH 0 0 -0.7\nH 0 0 0.7\n";

/// Loose-threshold configuration that runs in seconds.
fn quick_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    write(&dir.join("h2.xyz"), H2_XYZ);
    let cfg = dir.join("run.json");
    write(
        &cfg,
        &format!(
            r#"{{"geometry": "h2.xyz", "k": 6, "epsilon": 1e-3, "box": 20.0,
                "active": {{"qubits": 4}}, "solver": {{"method": "fci"}},
                "refine": {{"max_macro": 0}}{extra}}}"#
        ),
    );
    cfg
}

#[test]
fn unknown_key_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    write(&cfg, r#"{"basiss": "cc-pvdz"}"#);
    let out = mraqc().arg("run").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("basiss"));
}

#[test]
fn missing_geometry_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    write(&cfg, "{}");
    let out = mraqc()
        .arg("run")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fcidump_solve_matches_library_fci() {
    let dir = tempfile::tempdir().unwrap();
    let t = IntegralTensors::random(3, 11);
    let path = dir.path().join("h.fcidump");
    write_fcidump(&t, 2, &path).unwrap();
    let expect = fci(&t, 2).unwrap().energy;
    let out_dir = dir.path().join("out");
    let out = mraqc()
        .args(["fcidump-solve"])
        .arg(&path)
        .args(["--solver", "fci", "--out-dir"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("result.json")).unwrap()).unwrap();
    let e = json["energy"].as_f64().unwrap();
    assert!((e - expect).abs() < 1e-9, "{e} vs {expect}");

    // SPA+GSD is exact for two electrons in two orbitals
    let t2 = IntegralTensors::random(2, 12);
    let p2 = dir.path().join("two.fcidump");
    write_fcidump(&t2, 2, &p2).unwrap();
    let out = mraqc()
        .args(["fcidump-solve"])
        .arg(&p2)
        .args(["--solver", "vqe", "--seed", "3", "--restarts", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let e: f64 = stdout.split("E = ").nth(1).unwrap().trim().parse().unwrap();
    assert!((e - fci(&t2, 2).unwrap().energy).abs() < 1e-6);
}

#[test]
fn corrupt_fcidump_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.fcidump");
    write(&path, "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n1.0 1 1 x 1\n");
    let out = mraqc().arg("fcidump-solve").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_and_resumable_scan() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(
        dir.path(),
        r#", "units": "bohr", "scan": {"coordinate": "bond_length", "grid": [1.4]}"#,
    );
    let run_dir = dir.path().join("run");
    let out = mraqc().arg("run").arg(&cfg).arg("--out-dir").arg(&run_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("result.json")).unwrap()).unwrap();
    assert_eq!(rec["label"], "FCI/PNO(2,4)");
    let e_run = rec["energy"].as_f64().unwrap();
    assert!((e_run + 1.15).abs() < 0.05, "{e_run}");
    assert!(run_dir.join("iter_0.fcidump").exists());
    assert!(run_dir.join("config.resolved.json").exists());

    // a one-point scan reproduces the single point exactly
    let scan_dir = dir.path().join("scan");
    let out = mraqc().arg("scan").arg(&cfg).arg("--out-dir").arg(&scan_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(scan_dir.join("scan.csv")).unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let row = reader.records().next().unwrap().unwrap();
    assert_eq!(&row[3], "FCI/PNO(2,4)");
    assert_eq!(row[4].parse::<f64>().unwrap(), e_run);
    assert_eq!(&row[row.len() - 1], "1");

    // resuming skips the completed point
    let out = mraqc().arg("scan").arg(&cfg).arg("--out-dir").arg(&scan_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(scan_dir.join("scan.csv")).unwrap(), csv);
}
