use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mlab");

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn mlab(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(BIN);
    c.args(args);
    match threads {
        Some(t) => c.env("MLAB_THREADS", t),
        None => c.env_remove("MLAB_THREADS"),
    };
    c.output().unwrap()
}

#[test]
fn list_names_every_experiment() {
    let out = mlab(&["list"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["gowers_stability", "progression_means", "padic_contraction", "linear_equations"] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn seeded_runs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"experiment": "single_scale_decay", "parameters": {"log2_n_values": "5,6"}, "seed": 4}"#,
    );
    let cfg = cfg.to_str().unwrap();
    let mut csvs = Vec::new();
    for (sub, t) in [("a", "1"), ("b", "3")] {
        let out = dir.path().join(sub);
        let o = mlab(&["run", "single_scale_decay", "--config", cfg, "--out", out.to_str().unwrap()], Some(t));
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        csvs.push(std::fs::read(out.join("single_scale_decay.csv")).unwrap());
        assert!(out.join("single_scale_decay.svg").exists());
    }
    assert_eq!(csvs[0], csvs[1]);

    let out = dir.path().join("c");
    let o = mlab(&["run", "single_scale_decay", "--config", cfg, "--out", out.to_str().unwrap(), "--seed", "5"], None);
    assert!(o.status.success());
    let other = std::fs::read(out.join("single_scale_decay.csv")).unwrap();
    assert_ne!(other, csvs[0]);
}

#[test]
fn overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"experiment": "prime_weyl", "parameters": {"n_values": "1000"}}"#);
    let out = dir.path().join("o");
    let o = mlab(
        &["run", "prime_weyl", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--set", "n_values=100,200"],
        None,
    );
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out.join("prime_weyl.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("100.0,") && rows[2].starts_with("200.0,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    let code = |cfg: &str, exp: &str, extra: &[&str]| {
        let p = write(dir.path(), "x.json", cfg);
        let mut args = vec!["run", exp, "--config", p.to_str().unwrap(), "--out", out];
        args.extend_from_slice(extra);
        mlab(&args, None).status.code().unwrap()
    };
    assert_eq!(code(r#"{"experiment": "prime_weyl", "parameters": {"bogus": 1}}"#, "prime_weyl", &[]), 2);
    assert_eq!(code(r#"{"experiment": "prime_weyl"}"#, "moment_growth", &[]), 2);
    assert_eq!(code(r#"{"experiment": "no_such"}"#, "no_such", &[]), 2);
    assert_eq!(code("not json", "prime_weyl", &[]), 2);
    assert_eq!(code(r#"{"experiment": "prime_weyl"}"#, "prime_weyl", &["--set", "n_values=abc"]), 2);
    assert_eq!(code(r#"{"experiment": "prime_weyl", "parameters": {"n_values": "1000000000"}}"#, "prime_weyl", &[]), 3);
    assert_eq!(code(r#"{"experiment": "single_scale_decay", "parameters": {"log2_n_values": "14"}}"#, "single_scale_decay", &[]), 3);
    assert_eq!(mlab(&["run", "prime_weyl", "--config", "/nonexistent.json"], None).status.code(), Some(2));
    let p = write(dir.path(), "y.json", r#"{"experiment": "prime_weyl", "parameters": {"n_values": "100"}}"#);
    assert_eq!(mlab(&["run", "prime_weyl", "--config", p.to_str().unwrap(), "--out", out], Some("0")).status.code(), Some(2));
}

#[test]
fn csv_header_carries_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"experiment": "moment_growth", "parameters": {"n": 1000, "q_values": "10"}, "seed": 9}"#);
    let out = dir.path().join("o");
    assert!(mlab(&["run", "moment_growth", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None).status.success());
    let csv = std::fs::read_to_string(out.join("moment_growth.csv")).unwrap();
    assert!(csv.starts_with("# experiment: moment_growth\n# config_sha256: "));
    assert!(csv.contains("\n# seed: 9\n"));
    let svg = std::fs::read_to_string(out.join("moment_growth.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}
