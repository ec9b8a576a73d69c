use std::fs;
use std::process::{Command, Output};

fn ortholab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ortholab"))
        .args(args)
        .env_remove("ORTHOLAB_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_all_is_byte_identical_across_thread_counts() {
    let one = ortholab(&["verify-all", "--form", "delta", "--limit", "1e4", "--seed", "7", "--threads", "1"]);
    let four = ortholab(&["verify-all", "--form", "delta", "--limit", "1e4", "--seed", "7", "--threads", "4"]);
    assert_eq!(one.status.code(), Some(0), "{}", stdout(&one));
    assert_eq!(one.stdout, four.stdout);
    let text = stdout(&one);
    assert!(text.lines().last().unwrap().starts_with("summary:"));
    assert!(!text.contains("FAIL"));
    assert!(text.lines().filter(|l| l.starts_with("[PASS]")).count() >= 30);
}

#[test]
fn sums_are_identical_across_thread_counts() {
    let args = ["sum", "--variant", "moebius", "--alpha", "golden", "--limit", "1e5"];
    let a = ortholab(&[&args[..], &["--threads", "1"]].concat());
    let b = ortholab(&[&args[..], &["--threads", "3"]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn csv_has_header_metadata_and_round_trip_numbers() {
    let o = ortholab(&["sum", "--variant", "prime", "--alpha", "sqrt2-1", "--limit", "5000"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "X,re,im,abs,normalized");
    let meta = lines.last().unwrap();
    assert!(meta.starts_with("# ortholab ") && meta.contains(" config="));
    assert_eq!(meta.rsplit("config=").next().unwrap().len(), 64);
    for row in &lines[1..lines.len() - 1] {
        for field in row.split(',') {
            let v: f64 = field.parse().unwrap();
            assert_eq!(v.to_string(), field);
        }
    }
    assert_eq!(lines[lines.len() - 2].split(',').next(), Some("5000"));
}

#[test]
fn config_hash_tracks_the_configuration() {
    let meta = |alpha: &str| {
        let o = ortholab(&["sum", "--alpha", alpha, "--limit", "100"]);
        stdout(&o).lines().last().unwrap().to_string()
    };
    assert_eq!(meta("golden"), meta("golden"));
    assert_ne!(meta("golden"), meta("1/3"));
}

#[test]
fn arcs_json() {
    let o = ortholab(&["arcs", "--alpha", "0.5", "--limit", "1e6"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kind"], "Major");
    assert_eq!(v["q"], 2);
    assert_eq!(v["schema_version"], 1);
    let o = ortholab(&["arcs", "--alpha", "golden", "--limit", "1e6", "--c1", "1.0"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kind"], "Minor");
    for key in ["a", "q", "err", "Q"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(ortholab(&["bogus"]).status.code(), Some(2));
    assert_eq!(ortholab(&["sum", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(ortholab(&["sum", "--limit", "1.5"]).status.code(), Some(2));
    assert_eq!(ortholab(&["sum", "--limit", "2e5"]).status.code(), Some(2));
    assert_eq!(ortholab(&["arcs", "--alpha", "1/0"]).status.code(), Some(2));
    assert_eq!(ortholab(&["certify-localfactor", "--step", "0.1"]).status.code(), Some(2));
    let o = ortholab(&["pnt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn failing_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    // λ(2) = 3 breaks both the prime bound and Hecke multiplicativity
    let mut body = String::from("n,lambda,lambda_star\n1,1,1\n2,3,1\n");
    for n in 3..=2000 {
        body.push_str(&format!("{n},0,1\n"));
    }
    fs::write(&path, body).unwrap();
    let form = format!("table:{}", path.display());
    let o = ortholab(&["verify-all", "--form", &form, "--limit", "2000"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("[FAIL] form.prime_bound"));
    assert!(text.lines().last().unwrap().ends_with("FAIL"));
}

#[test]
fn exported_table_reloads_and_cache_dir_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("delta.csv");
    let cache = dir.path().join("cache");
    let o = Command::new(env!("CARGO_BIN_EXE_ortholab"))
        .args(["form", "export", "--weight", "12", "--limit", "3000", "--csv"])
        .arg(&table)
        .env("ORTHOLAB_CACHE_DIR", &cache)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(fs::read_dir(&cache).unwrap().count() >= 2);

    let text = fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("n,lambda,lambda_star\n1,1,1\n2,-0.5303300858899106,"));
    let form = format!("table:{}", table.display());
    let a = ortholab(&["sum", "--form", "delta", "--alpha", "1/7", "--limit", "3000"]);
    let b = ortholab(&["sum", "--form", &form, "--alpha", "1/7", "--limit", "3000"]);
    let rows = |o: &Output| stdout(o).lines().filter(|l| !l.starts_with('#')).map(String::from).collect::<Vec<_>>();
    assert_eq!(rows(&a), rows(&b));
}

#[test]
fn exact_coefficients_export() {
    let o = ortholab(&["form", "export", "--weight", "16", "--limit", "3", "--coefficients"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(&lines[..4], &["n,coefficient", "1,1", "2,216", "3,-3348"]);
    let o = ortholab(&["form", "export", "--form", "synthetic:3", "--limit", "10", "--coefficients"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn remaining_subcommands_run() {
    let o = ortholab(&["moments", "--form", "delta", "--power", "2", "--limit", "1e4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("X,sum,per_x,per_x_log\n"));

    let o = ortholab(&["vaughan", "--limit", "2e4", "--alpha", "0.4142", "--y", "auto", "--z", "auto", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["decomposition"]["passed"], true);
    assert_eq!(v["type2"]["blocks_match"], true);

    let o = ortholab(&["pnt", "--q", "5", "--limit", "1e4"]);
    let text = stdout(&o);
    // four characters, one row per grid point each
    let chis: std::collections::BTreeSet<&str> =
        text.lines().skip(1).filter(|l| !l.starts_with('#')).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(chis.len(), 4);

    let o = ortholab(&["circle", "--form", "delta", "--nmax", "500", "--csv"]);
    let text = stdout(&o);
    let row9 = text.lines().find(|l| l.starts_with("9,")).unwrap();
    assert!(row9.starts_with("9,4,") && row9.ends_with(",false"));
    assert!(text.lines().find(|l| l.starts_with("10,")).unwrap().ends_with(",true"));

    let o = ortholab(&["certify-localfactor", "--step", "1e-3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "Certified");
}
