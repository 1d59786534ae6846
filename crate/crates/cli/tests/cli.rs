use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cnoidal-lab"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env_remove("CNOIDAL_LAB_OUT")
        .output()
        .expect("binary runs")
}

fn read(dir: &TempDir, name: &str) -> String {
    std::fs::read_to_string(dir.path().join(name)).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn figure1_is_deterministic_and_flags_the_soliton() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        assert!(lab(d.path(), &["figure1"]).status.success());
    }
    for name in ["figure1_ee0.csv", "figure1_ee0.4.csv", "figure1_ee0.8.csv"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
    let soliton = read(&a, "figure1_ee0.csv");
    assert!(soliton.contains("# heteroclinic"));
    let closed = read(&a, "figure1_ee0.4.csv");
    assert!(!closed.contains("heteroclinic"));
    let pts = rows(&closed);
    assert_eq!(pts.len(), 256);
    let (first, last) = (&pts[0], &pts[255]);
    assert!((first[0] - last[0]).abs() < 1e-12 && (first[1] - last[1]).abs() < 1e-12);
    assert!(closed
        .lines()
        .last()
        .unwrap()
        .starts_with("# config-sha256="));
}

#[test]
fn figure2_bands() {
    let d = TempDir::new().unwrap();
    assert!(lab(
        d.path(),
        &["figure2", "--a", "0", "--c", "2", "--n-kappa", "11"]
    )
    .status
    .success());
    let exact = read(&d, "figure2_exact.csv");
    assert!(exact.starts_with("kappa,n=-3,"));
    let mid = &rows(&exact)[5];
    assert_eq!(mid[0], 0.0);
    // Double zero at kappa = 0 from n = -1 and n = 1.
    assert_eq!((mid[3], mid[5]), (0.0, 0.0));

    assert!(lab(d.path(), &["figure2", "--a", "0.2", "--c", "2.5"])
        .status
        .success());
    assert!(read(&d, "figure2_model.csv").contains("outside the asymptotic interval"));
    assert!(lab(d.path(), &["figure2", "--a", "0.2", "--c", "2"])
        .status
        .success());
    let model = read(&d, "figure2_model.csv");
    assert!(!model.contains("outside"));
    let split = rows(&model).iter().find(|r| r[0] == 0.0).unwrap().clone();
    assert!(split[2] - split[1] > 1e-3, "{split:?}");
}

#[test]
fn figure3_sweep() {
    let d = TempDir::new().unwrap();
    assert!(lab(d.path(), &["figure3"]).status.success());
    let r = rows(&read(&d, "figure3.csv"));
    assert_eq!(r.len(), 50);
    let row = r.iter().find(|r| r[0] == 0.8).unwrap();
    assert_eq!((row[1], row[2]), (1.4, 2.6));
    let last = r.last().unwrap();
    assert_eq!(&last[1..], &[2.0, 2.0, 2.0, 2.0]);
    for w in r.windows(2) {
        assert!(w[0][2] - w[0][1] > w[1][2] - w[1][1]);
    }
}

#[test]
fn band_table() {
    let d = TempDir::new().unwrap();
    let out = lab(
        d.path(),
        &[
            "bands",
            "--kind",
            "kminus",
            "--ee",
            "0.5",
            "--n-kappa",
            "9",
            "--grid-m",
            "64",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(&d, "bands_Kminus_ee0.5_c2.csv");
    assert!(csv.starts_with("kappa,band_0,band_1,band_2,band_3\n"));
    assert_eq!(rows(&csv).len(), 9);
    assert_eq!(
        lab(d.path(), &["bands", "--kind", "Q"]).status.code(),
        Some(2)
    );
}

#[test]
fn verify_exit_codes() {
    let d = TempDir::new().unwrap();
    let ok = lab(d.path(), &["verify", "--check", "norms"]);
    assert!(ok.status.success());
    let csv = read(&d, "verify.csv");
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().starts_with("norms,"));

    let bad = lab(
        d.path(),
        &[
            "verify",
            "--check",
            "spectral_stability",
            "--kernel-tol",
            "1e-15",
        ],
    );
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("spectral_stability"));
    assert!(read(&d, "verify.csv").contains(",false"));

    assert_eq!(
        lab(d.path(), &["verify", "--check", "nope"]).status.code(),
        Some(3)
    );
    assert_eq!(
        lab(d.path(), &["verify", "--grid-m", "63"]).status.code(),
        Some(3)
    );
}

#[test]
fn evolve_reports() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        assert!(lab(d.path(), &["evolve"]).status.success());
    }
    assert_eq!(read(&a, "evolve.json"), read(&b, "evolve.json"));
    assert_eq!(read(&a, "evolve.csv"), read(&b, "evolve.csv"));
    let v: serde_json::Value = serde_json::from_str(&read(&a, "evolve.json")).unwrap();
    assert!(v["summary"]["max_dist"].as_f64().unwrap() <= 1e-2);
    assert_eq!(v["time_series"].as_array().unwrap().len(), 201);
    assert!(read(&a, "evolve.csv").starts_with("t,xi,theta,dist,lambda2,"));

    assert!(lab(a.path(), &["evolve", "--delta", "0"]).status.success());
    let v: serde_json::Value = serde_json::from_str(&read(&a, "evolve.json")).unwrap();
    assert!(v["summary"]["max_dist"].as_f64().unwrap() < 1e-8);

    let bad = lab(a.path(), &["evolve", "--ee", "1.5"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("ee = 1.5"));
}

#[test]
fn environment_overrides_out_dir() {
    let (flag, env) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let out = Command::new(env!("CARGO_BIN_EXE_cnoidal-lab"))
        .args(["figure3", "--n-points", "5", "--out-dir"])
        .arg(flag.path())
        .env("CNOIDAL_LAB_OUT", env.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env.path().join("figure3.csv").exists());
    assert!(!flag.path().join("figure3.csv").exists());
}

#[test]
fn hash_tracks_settings() {
    let d = TempDir::new().unwrap();
    let trailer = |args: &[&str]| {
        assert!(lab(d.path(), args).status.success());
        read(&d, "figure3.csv").lines().last().unwrap().to_string()
    };
    let a = trailer(&["figure3"]);
    assert_eq!(a, trailer(&["figure3"]));
    assert_ne!(a, trailer(&["figure3", "--seed", "2"]));
    assert_ne!(a, trailer(&["figure3", "--n-points", "49"]));
}
