use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn anisolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anisolab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.conf");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL: &str = "n1 = 10\nn2 = 10\nepsilons = 1 1/2 1/4 1/8 1/16 1/32\nsamples = 5\n";

#[test]
fn solve_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}epsilon = 1/2\n"));
    let out = dir.path().join("out");
    let o = anisolab(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = fs::read_to_string(out.join("solve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# anisolab-csv v1 table=solution"));
    assert!(csv.contains("# config: epsilon = 1/2"));
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("epsilon,n,n1,n2,beta"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 100);

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("solve.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["command"], "solve");
    assert_eq!(summary["pass"], true);
    assert!(summary["details"]["iterations"].as_u64().unwrap() >= 2);
}

#[test]
fn unknown_config_key_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n1 = 10\nbetta = 3\n");
    let o = anisolab(&["solve", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key 'betta'"));
    assert!(!dir.path().join("solve.csv").exists());
}

#[test]
fn inadmissible_beta_cites_the_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}beta = 0.9\n"));
    let o = anisolab(&["check", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("must exceed M|Ω|^(1/2-1/r) = 1"), "{err}");
}

#[test]
fn picard_cap_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}picard_max = 2\n"));
    let o = anisolab(&["solve", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("solve.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], false);
    assert_eq!(summary["details"]["history"]["records"].as_array().unwrap().len(), 2);
}

#[test]
fn failed_property_exits_with_three() {
    // the cut-off commutation inequality does not hold for h = 1
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n1 = 10\nn2 = 10\nkernel = one\nbeta = 4\nsamples = 20\n");
    let o = anisolab(&["check", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("check.csv")).unwrap();
    assert!(csv.contains("commutation,true,false"), "{csv}");
}

#[test]
fn sweep_is_identical_sequential_and_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = anisolab(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--parallel", threads]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(
        fs::read_to_string(a.join("sweep.csv")).unwrap(),
        fs::read_to_string(b.join("sweep.csv")).unwrap()
    );
}

#[test]
fn seed_flag_makes_checks_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut outputs = Vec::new();
    for (sub, seed) in [("x", "11"), ("y", "11"), ("z", "12")] {
        let out = dir.path().join(sub);
        let o = anisolab(&["check", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", seed]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read_to_string(out.join("check.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_ne!(outputs[0], outputs[2]);
}

#[test]
fn help_succeeds_and_bad_subcommand_fails() {
    assert_eq!(anisolab(&["--help"]).status.code(), Some(0));
    assert_eq!(anisolab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(anisolab(&[]).status.code(), Some(1));
}
