use std::process::{Command, Output};

fn niven(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_niven")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn check_912() {
    let out = niven(&["check", "912", "--g", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("niven: true"));
}

#[test]
fn check_json() {
    let out = niven(&["check", "106", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["niven"], false);
    assert_eq!(v["zuckerman"], false);
}

#[test]
fn verify_range_niven_two_summands() {
    let out = niven(&["verify-range", "--N", "1000000", "--k", "2", "--kind", "niven", "--g", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("exceptions: 0\n"));
}

#[test]
fn verify_range_claim_failure_and_expect() {
    let out = niven(&["verify-range", "--N", "2000", "--k", "3", "--kind", "zuckerman"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("verify-range"));
    let out = niven(&["verify-range", "--N", "2000", "--k", "4", "--kind", "zuckerman", "--expect", "106"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_range_artifacts_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for workers in ["1", "3"] {
        let csv = dir.path().join(format!("ex{workers}.csv"));
        let stats = dir.path().join(format!("st{workers}.json"));
        let out = niven(&[
            "verify-range", "--N", "5000", "--k", "1", "--kind", "niven", "--workers", workers,
            "--out", csv.to_str().unwrap(), "--stats", stats.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(1));
        files.push((std::fs::read(&csv).unwrap(), std::fs::read(&stats).unwrap()));
    }
    assert_eq!(files[0], files[1]);
    let text = String::from_utf8(files[0].0.clone()).unwrap();
    assert!(text.starts_with("n_exception\n11\n"));
}

#[test]
fn decompose_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = niven(&[
            "decompose", "--from-sample", "--g", "2", "--len", "12000", "--seed", "7",
            "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let out = niven(&["verify-cert", a.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["valid"], true);
    assert!(v["summands"].as_u64().unwrap() <= 51);
}

#[test]
fn decompose_file_input_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let sample = dir.path().join("sample.json");
    let out = niven(&["decompose", "--from-sample", "--g", "2", "--len", "12000", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    std::fs::write(&sample, cert["n"].to_string()).unwrap();

    let out = niven(&["decompose", sample.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let again: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(again, cert);

    let mut bad = cert.clone();
    bad["summands"].as_array_mut().unwrap().pop();
    let bad_path = dir.path().join("bad.json");
    std::fs::write(&bad_path, bad.to_string()).unwrap();
    let out = niven(&["verify-cert", bad_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid"));
}

#[test]
fn exit_codes() {
    // usage
    assert_eq!(niven(&["decompose"]).status.code(), Some(2));
    assert_eq!(niven(&["check", "12", "--g", "1"]).status.code(), Some(2));
    assert_eq!(niven(&["decompose", "12", "--from-sample"]).status.code(), Some(2));
    // precondition failure
    let out = niven(&["decompose", "12345"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("precondition"));
    // s' = 64 is even: no prime triple
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ones.json");
    std::fs::write(&path, format!(r#"{{"base":2,"digits":[{}]}}"#, vec!["1"; 100].join(","))).unwrap();
    let out = niven(&["decompose", path.to_str().unwrap(), "--best-effort"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prime triple"));
}

#[test]
fn count_and_density() {
    let out = niven(&["count", "--x", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,count,c_estimate");
    assert!(lines[2].starts_with("100,33,"));
    let out = niven(&["density", "--q", "3", "--r", "0", "--N", "100000", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["density"].as_f64().unwrap() - 1.0 / 3.0).abs() < 0.01);
}

#[test]
fn quick_selftest() {
    let out = niven(&["selftest", "--quick"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).matches("PASS").count(), 3);
}

#[test]
fn calibrate_lists_every_residue() {
    let out = niven(&["calibrate-residues", "--g", "2", "--samples", "1", "--magnitude", "6000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 421);
}
