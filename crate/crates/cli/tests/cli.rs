use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sphq(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphq"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SPHQ_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn pointgen_random_writes_unit_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let o = sphq(&["pointgen", "--random", "--seed", "1", "--count", "100"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,z"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 100);
    for r in rows {
        let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        assert!((norm - 1.0).abs() < 1e-14);
    }
}

#[test]
fn lsq_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&sphq(
            &["pointgen", "--random", "--seed", "3", "--count", "8192", "--out", "pts.csv"],
            d
        )),
        0
    );
    let o = sphq(
        &[
            "weights-lsq",
            "--points",
            "pts.csv",
            "--degree",
            "14",
            "--out",
            "rule.csv",
        ],
        d,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let meta = json(&d.join("rule.json"));
    assert_eq!(meta["exactness_degree"], 14);
    assert_eq!(meta["construction"], "lsq");
    let o = sphq(&["verify", "--rule", "rule.csv", "--out", "report.json"], d);
    assert_eq!(code(&o), 0);
    let report = json(&d.join("report.json"));
    assert_eq!(report["degree"], 14);
    assert!(report["gcom_max_err"].as_f64().unwrap() < 1e-12);
}

#[test]
fn rec_on_dyadic_points() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&sphq(&["pointgen", "--dyadic", "3", "--out", "pts.csv"], d)), 0);
    let o = sphq(
        &[
            "weights-rec",
            "--points",
            "pts.csv",
            "--degree",
            "8",
            "--out",
            "rec.csv",
        ],
        d,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = sphq(
        &[
            "verify",
            "--rule",
            "rec.csv",
            "--degree",
            "8",
            "--spectrum-points",
            "pts.csv",
        ],
        d,
    );
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["gcom_max_err"].as_f64().unwrap() < 1e-10);
    assert!(report["condition"].as_f64().unwrap() >= 1.0);
}

#[test]
fn artifacts_round_trip_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&sphq(
            &["pointgen", "--random", "--seed", "9", "--count", "300", "--out", "a.csv"],
            d
        )),
        0
    );
    assert_eq!(
        code(&sphq(
            &["weights-lsq", "--points", "a.csv", "--degree", "6", "--out", "r.csv"],
            d
        )),
        0
    );
    let before = fs::read(d.join("r.csv")).unwrap();
    let (rule, meta) = sphere_quad::io::read_rule(&d.join("r.csv")).unwrap();
    sphere_quad::io::write_rule(&d.join("r2.csv"), &rule, &meta.unwrap()).unwrap();
    assert_eq!(before, fs::read(d.join("r2.csv")).unwrap());
    assert_eq!(
        fs::read(d.join("r.json")).unwrap(),
        fs::read(d.join("r2.json")).unwrap()
    );
}

#[test]
fn too_few_points_is_a_construction_failure() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&sphq(&["pointgen", "--random", "--count", "20", "--out", "p.csv"], d)),
        0
    );
    let o = sphq(&["weights-lsq", "--points", "p.csv", "--degree", "10"], d);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("construction failure"));
}

#[test]
fn usage_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&sphq(&["pointgen", "--bogus"], d)), 2);
    assert_eq!(code(&sphq(&["pointgen", "--random"], d)), 2);
    assert_eq!(code(&sphq(&["experiment", "nonsense"], d)), 2);
    assert_eq!(code(&sphq(&["verify", "--rule", "missing.csv"], d)), 4);
    fs::write(d.join("bad.csv"), "x,y,z,w\n1,0,0,0.5\nfoo,0,1,0.5\n").unwrap();
    let o = sphq(&["verify", "--rule", "bad.csv", "--degree", "2"], d);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
}

#[test]
fn ingest_grid_and_reject_duplicates() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut text = String::from("lon_deg,lat_deg,value\n");
    for i in 0..90 {
        for j in 0..91 {
            let lon = -180.0 + 4.0 * i as f64;
            let lat = -90.0 + 2.0 * j as f64;
            text.push_str(&format!("{lon},{lat},{}\n", i + j));
        }
    }
    fs::write(d.join("grid.csv"), &text).unwrap();
    let input_before = fs::read(d.join("grid.csv")).unwrap();
    let o = sphq(
        &[
            "ingest", "--input", "grid.csv", "--points", "p.csv", "--values", "v.csv",
        ],
        d,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(d.join("grid.csv")).unwrap(), input_before);
    let pts = fs::read_to_string(d.join("p.csv")).unwrap();
    assert_eq!(pts.lines().count() - 1, 8190);

    fs::write(d.join("dup.csv"), "lon_deg,lat_deg,value\n10,20,1\n30,40,2\n10,20,3\n").unwrap();
    let o = sphq(
        &[
            "ingest", "--input", "dup.csv", "--points", "p2.csv", "--values", "v2.csv",
        ],
        d,
    );
    assert_ne!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains('4'));
}

#[test]
fn approx_and_kernel_profile() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let rule = sphere_quad::quadrature::reference_rule(16).unwrap();
    let meta = sphere_quad::io::RuleMetadata {
        exactness_degree: 16,
        construction: "reference".into(),
        seed: None,
        solver: None,
    };
    sphere_quad::io::write_rule(&d.join("ref.csv"), &rule, &meta).unwrap();
    let o = sphq(
        &[
            "approx",
            "--rule",
            "ref.csv",
            "--function",
            "g2",
            "--degree",
            "8",
            "--filter",
            "5",
            "--out",
            "a.csv",
        ],
        d,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = sphere_quad::io::read_table(&d.join("a.csv")).unwrap();
    assert_eq!(t.header, vec!["x", "y", "z", "value", "error"]);
    assert_eq!(t.rows.len(), 1000);
    assert!(t.rows.iter().all(|r| r[4] < 0.1));

    let o = sphq(
        &[
            "kernel-profile",
            "--degree",
            "32",
            "--filter",
            "5",
            "--samples",
            "50",
            "--out",
            "k.csv",
        ],
        d,
    );
    assert_eq!(code(&o), 0);
    let t = sphere_quad::io::read_table(&d.join("k.csv")).unwrap();
    assert_eq!(t.rows.len(), 50);
    assert!(t.rows[0][1] > t.rows[49][1].abs());
    assert!(json(&d.join("k.json"))["decay_slope"].as_f64().unwrap() < 0.0);
}

#[test]
fn experiment_honours_config_precedence_and_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("cfg.json"),
        r#"{"sizes": [{"points": 300, "degree": 6}], "repetitions": 4, "seed": 1}"#,
    )
    .unwrap();
    let run = |out: &str| {
        Command::new(env!("CARGO_BIN_EXE_sphq"))
            .args([
                "--threads",
                "2",
                "experiment",
                "lsq-stats",
                "--config",
                "cfg.json",
                "--repetitions",
                "2",
            ])
            .current_dir(d)
            .env("SPHQ_OUT_DIR", d.join(out))
            .output()
            .unwrap()
    };
    let o = run("first");
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let prov = json(&d.join("first/lsq-stats.provenance.json"));
    assert_eq!(prov["config"]["repetitions"], 2);
    assert_eq!(prov["config"]["seed"], 1);
    assert!(prov["wall_time_s"].as_f64().unwrap() >= 0.0);
    let csv = fs::read_to_string(d.join("first/lsq_stats.csv")).unwrap();
    assert!(csv.starts_with("M,degree,succeeded"));
    assert!(csv.lines().nth(1).unwrap().starts_with("300,6,2,0,"));
    assert_eq!(code(&run("second")), 0);
    assert_eq!(csv, fs::read_to_string(d.join("second/lsq_stats.csv")).unwrap());
}
