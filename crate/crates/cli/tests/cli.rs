use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn shearbook(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shearbook"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = shearbook(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn pipeline(dir: &Path, threads: &str) -> Vec<PathBuf> {
    let t = ["--threads", threads];
    ok(dir, &[&t[..], &["synth", "--noise", "0.05", "--windows", "24", "--out", "synth.csv"]].concat());
    ok(dir, &[&t[..], &["ingest", "--input", "synth.csv", "--out", "snaps.jsonl"]].concat());
    ok(dir, &[&t[..], &["profile", "--in", "snaps.jsonl", "--out", "profiles.json"]].concat());
    ok(dir, &[&t[..], &["shear", "--profiles", "profiles.json", "--out", "shear.csv"]].concat());
    ok(dir, &[&t[..], &["fit", "--profiles", "profiles.json", "--out", "fits.csv"]].concat());
    ok(dir, &[&t[..], &["compare", "--fits", "fits.csv", "--out", "table2.csv"]].concat());
    ["synth.csv", "snaps.jsonl", "profiles.json", "shear.csv", "fits.csv", "table2.csv"]
        .iter()
        .map(|f| dir.join(f))
        .collect()
}

#[test]
fn gamma_pipeline_favours_gamma_against_every_alternative() {
    let dir = tempfile::tempdir().unwrap();
    let files = pipeline(dir.path(), "2");
    let (header, rows) = csv_rows(&files[5]);
    assert_eq!(header.join(","), shearbook_core::models::TABLE2_HEADER);
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(row[2], "24");
        for col in ["dAIC_power", "dAIC_exp", "dAIC_lognormal"] {
            let i = header.iter().position(|h| h == col).unwrap();
            let v: f64 = row[i].parse().unwrap();
            assert!(v > 0.0, "{col} = {v} on {}", row[1]);
        }
    }
    for f in &files {
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(format!("{}.manifest.json", f.display())).unwrap()).unwrap();
        let digest = hex::encode(Sha256::digest(std::fs::read(f).unwrap()));
        assert_eq!(manifest["output"]["sha256"], digest.as_str());
        assert_eq!(manifest["tool"], "shearbook");
    }
}

#[test]
fn thread_count_and_reruns_leave_bytes_unchanged() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let fa = pipeline(a.path(), "1");
    let fb = pipeline(b.path(), "4");
    for (x, y) in fa.iter().zip(&fb) {
        assert!(std::fs::read(x).unwrap() == std::fs::read(y).unwrap(), "{} differs", x.display());
    }
}

#[test]
fn no_arguments_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = shearbook(dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(shearbook(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(shearbook(dir.path(), &["fit", "--help"]).status.code(), Some(0));
    assert_eq!(shearbook(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(shearbook(dir.path(), &["profile", "--window", "soon"]).status.code(), Some(1));
}

fn write_shear(path: &Path, rows: &[(f64, f64)]) {
    let mut text = String::from("window_index,A_T,abs_drift,sigma_1\n");
    for (i, (a, d)) in rows.iter().enumerate() {
        text.push_str(&format!("{i},{a},{d},{a}\n"));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn stats_on_two_windows_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    write_shear(&dir.path().join("short.csv"), &[(1.0, 0.01), (2.0, 0.02)]);
    let out = shearbook(dir.path(), &["stats", "--shear", "short.csv", "--out", "t1.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("t1.csv").exists());
}

#[test]
fn stats_table_covers_every_asset() {
    let dir = tempfile::tempdir().unwrap();
    let up: Vec<(f64, f64)> = (0..30).map(|i| (i as f64, 0.01 * i as f64 + 0.001 * ((i * 7) % 5) as f64)).collect();
    let mixed: Vec<(f64, f64)> = (0..30).map(|i| (((i * 11) % 30) as f64, 0.01 * ((i * 17) % 30) as f64)).collect();
    write_shear(&dir.path().join("up.csv"), &up);
    write_shear(&dir.path().join("mixed.csv"), &mixed);
    let args = ["stats", "--shear", "UP=up.csv", "--shear", "mixed.csv", "--bootstrap", "2000", "--perm", "20000"];
    ok(dir.path(), &[&args[..], &["--out", "t1.csv"]].concat());
    let (header, rows) = csv_rows(&dir.path().join("t1.csv"));
    assert_eq!(header.join(","), "asset,rho,ci_lo,ci_hi,p,p_fdr,p_bonf,n_windows");
    assert_eq!(rows[0][0], "UP");
    assert_eq!(rows[1][0], "mixed");
    assert!(rows[0][1].parse::<f64>().unwrap() > 0.9);
    assert_eq!(rows[0][4].parse::<f64>().unwrap(), 1.0 / 20_001.0);
    assert_eq!(rows[1][7], "30");
    ok(dir.path(), &[&args[..], &["--method", "t", "--out", "t1t.csv"]].concat());
}

#[test]
fn config_file_fills_unset_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.conf"), "# synthetic run\nwindows = 3\nseed = 99\nsnapshots = 2\n").unwrap();
    ok(dir.path(), &["synth", "--config", "run.conf", "--seed", "5", "--out", "s.csv"]);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("s.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config"]["windows"], 3);
    assert_eq!(m["config"]["seed"], 5);
    assert_eq!(m["seed"], 5);
    std::fs::write(dir.path().join("bad.conf"), "no_such_flag = 1\n").unwrap();
    assert_eq!(shearbook(dir.path(), &["synth", "--config", "bad.conf"]).status.code(), Some(1));
}

#[test]
fn malformed_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let text = "timestamp_ns,symbol,side,level,price,size\n\
                1704205800000000000,AAPL,BID,0,189.99,300\n\
                1704205800000000000,AAPL,ASK,0,190.01\n\
                1704205800000000000,AAPL,ASK,0,190.01,200\n";
    std::fs::write(dir.path().join("l2.csv"), text).unwrap();
    let out = shearbook(dir.path(), &["ingest", "--input", "l2.csv", "--out", "s.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    ok(dir.path(), &["ingest", "--input", "l2.csv", "--lenient", "--out", "s.jsonl"]);
    let snaps = std::fs::read_to_string(dir.path().join("s.jsonl")).unwrap();
    assert_eq!(snaps.lines().count(), 2);
}

#[test]
fn substrate_writes_coordinate_mass_pairs() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["substrate", "--vertices", "50", "--edges", "80", "--coord-dist", "int:0,9", "--out", "m.json"]);
    let atoms: Vec<[f64; 2]> = serde_json::from_slice(&std::fs::read(dir.path().join("m.json")).unwrap()).unwrap();
    assert!(!atoms.is_empty() && atoms.len() <= 10);
    assert!(atoms.windows(2).all(|w| w[0][0] < w[1][0]));
    let bad = shearbook(dir.path(), &["substrate", "--weight-dist", "normal:0,1"]);
    assert_eq!(bad.status.code(), Some(2));
}
