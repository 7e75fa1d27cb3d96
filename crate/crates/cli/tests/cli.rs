use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const DEFAULT_CONFIG: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml");

fn ptsense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptsense")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(str::to_owned).collect()
}

#[test]
fn validate_echoes_default_parameters() {
    let o = ptsense(&["validate", "--config", DEFAULT_CONFIG]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("J_p = 4 x 2pi kHz"), "{s}");
    assert!(s.contains("J_l = 30 x 2pi kHz"));
    assert!(s.contains("T = 200 us"));
    assert!(s.contains("Conjugated"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(ptsense(&["sweep", "--beta-p", "1.5", "--out", out]).status.code(), Some(1));
    assert_eq!(ptsense(&["sweep", "--sign", "up", "--out", out]).status.code(), Some(1));
    assert_eq!(ptsense(&["simulate", "--config", "/nonexistent.toml"]).status.code(), Some(1));
    assert_eq!(ptsense(&["no-such-command"]).status.code(), Some(1));

    let tight = dir.path().join("tight.toml");
    fs::write(&tight, "rtol = 1e-18\natol = 1e-30\n").unwrap();
    let o = ptsense(&["simulate", "--config", tight.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("underflow"));
}

#[test]
fn simulate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = ptsense(&["simulate", "--config", DEFAULT_CONFIG, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(text.starts_with("# t_us,re_c0,im_c0,re_c1,im_c1,pop_branch1,pop_branch2,p_z\n"));
    let rows = data_lines(&dir.path().join("trajectory.csv"));
    let last: Vec<f64> = rows.last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[0], 200.0);
    assert!((last[7] - 0.713_270_436_2).abs() < 1e-6);
}

#[test]
fn figure2_rows_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let o = ptsense(&["figure2", "--out", dir.path().to_str().unwrap(), "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_lines(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 82);
    let betas: Vec<&str> = rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    assert!(betas[..41].iter().all(|b| *b == "0.0000000000000000e0"));
    assert!(betas[41..].iter().all(|b| *b == "7.5000000000000000e-1"));
    assert!(dir.path().join("figure2_cfi.csv").exists());
}

#[test]
fn sweep_respects_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = ptsense(&["sweep", "--beta-p", "0,0.5", "--delta-range", "-1:1:5", "--sign", "+", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_lines(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",ok")));
}

#[test]
fn cfi_json_and_determinism_across_workers() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (d, w) in [(&a, "1"), (&b, "3")] {
        let o = ptsense(&["cfi", "--config", DEFAULT_CONFIG, "--workers", w, "--out", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (ja, jb) = (fs::read(a.path().join("cfi.json")).unwrap(), fs::read(b.path().join("cfi.json")).unwrap());
    let text = String::from_utf8(ja.clone()).unwrap();
    for key in ["\"theta_grid\"", "\"p_z\"", "\"dpz_dtheta\"", "\"contributions\"", "\"I\"", "\"floor_hits\"", "\"config_echo\"", "\"schema_version\""] {
        assert!(text.contains(key), "{key}");
    }
    // echo differs only in the worker count
    let strip = |v: Vec<u8>| String::from_utf8(v).unwrap().lines().filter(|l| !l.contains("\"workers\"")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(ja), strip(jb));
}

#[test]
fn geometry_roundtrip_and_chirality_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(ptsense(&["geometry", "--out", out]).status.code(), Some(0));
    let rows = data_lines(&dir.path().join("geometry.csv"));
    assert_eq!(rows.len(), 401);
    assert!(rows.iter().all(|r| r.split(',').count() == 11));

    let o = ptsense(&["roundtrip", "--beta-p", "0,0.75", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_to_string(dir.path().join("roundtrip.json")).unwrap().contains("\"restoration\""));

    let o = ptsense(&["chirality", "--beta-p", "0.75", "--delta-range", "-2:2:5", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(data_lines(&dir.path().join("chirality.csv")).len(), 4);
}
