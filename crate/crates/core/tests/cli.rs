use std::path::PathBuf;
use std::process::{Command, Output};

fn incompat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_incompat")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("incompat-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn tau_of_three_paulis() {
    let o = incompat(&["tau", "--pauli", "g=3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0.57735");
}

#[test]
fn kesten_mckay_grid_is_symmetric() {
    let o = incompat(&["spectra", "kesten-mckay", "--g", "3", "--grid", "101"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,density,cdf"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 101);
    for i in 0..101 {
        let (a, b) = (&rows[i], &rows[100 - i]);
        assert!((a[0] + b[0]).abs() < 1e-12);
        assert!((a[1] - b[1]).abs() < 1e-12);
        assert!((a[2] + b[2] - 1.0).abs() < 1e-6);
    }
}

#[test]
fn sampled_set_feeds_witness_and_criteria() {
    let dir = scratch("witness");
    let o = incompat(&["sample", "basis", "--d", "2", "--seed", "4"]);
    assert!(o.status.success());
    let povm: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let z = serde_json::json!({
        "dim": 2,
        "effects": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]], [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]]
    });
    let set = serde_json::json!({ "dim": 2, "outcome_counts": [2, 2], "povms": [z, povm] });
    let input = dir.join("set.json");
    std::fs::write(&input, set.to_string()).unwrap();
    let input = input.to_str().unwrap();

    let o = incompat(&["witness", "--input", input]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let w: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let pairing = w["certificate"]["pairing"].as_f64().unwrap();
    let upper = w["bracket"]["upper"].as_f64().unwrap();
    assert!((upper - 1.0 / pairing).abs() < 1e-9);
    assert!((std::f64::consts::FRAC_1_SQRT_2 - 1e-6..=1.0).contains(&upper));

    let o = incompat(&["criteria", "--input", input]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().count() > 3);
    assert!(text.starts_with("value,kind,source,applicability,tight"));
    assert!(text.contains("JordanProduct"), "{text}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn experiment_writes_reports() {
    let dir = scratch("experiment");
    let cfg = dir.join("km.json");
    std::fs::write(
        &cfg,
        r#"{"experiment":"kesten_mckay","dims":[40],"g":3,"trials":2,"seed":3,"targets":{"max_ks":0.5}}"#,
    )
    .unwrap();
    let base = dir.join("out/km");
    let o = incompat(&["experiment", "--config", cfg.to_str().unwrap(), "--output", base.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().any(|l| l.starts_with("PASS ks[d=40]")));
    assert!(dir.join("out/km.csv").exists() && dir.join("out/km.json").exists());

    std::fs::write(
        &cfg,
        r#"{"experiment":"kesten_mckay","dims":[40],"g":3,"trials":2,"seed":3,"targets":{"max_ks":0.0}}"#,
    )
    .unwrap();
    let o = incompat(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).lines().any(|l| l.starts_with("FAIL ks[d=40]")));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(incompat(&[]).status.code(), Some(1));
    assert_eq!(incompat(&["tau"]).status.code(), Some(1));
    assert_eq!(incompat(&["tau", "--pauli", "g=x"]).status.code(), Some(1));
    assert_eq!(incompat(&["experiment", "--config", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(incompat(&["spectra", "nu-kc", "--k", "1", "--c", "0.5"]).status.code(), Some(1));
}

#[test]
fn sampling_is_seeded() {
    let a = incompat(&["sample", "unitary", "--d", "3", "--seed", "9", "--stream", "2"]);
    let b = incompat(&["sample", "unitary", "--d", "3", "--seed", "9", "--stream", "2"]);
    let c = incompat(&["sample", "unitary", "--d", "3", "--seed", "9", "--stream", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}
