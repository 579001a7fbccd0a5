use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_manet-wall"))
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write_config(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("base.cfg");
    fs::write(&p, "# small run\nn = 25\nduration = 25\nspeed = 2-4\n").unwrap();
    p
}

#[test]
fn sim_writes_identical_artifacts_for_one_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    for d in ["a", "b"] {
        ok(bin()
            .args(["sim", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(tmp.path().join(d))
            .args(["--seed", "7"])
            .output()
            .unwrap());
    }
    let mut names: Vec<_> = fs::read_dir(tmp.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for f in [
        "summary.json",
        "intervals.csv",
        "hist_connectivity.csv",
        "hist_repair.csv",
        "reachability.csv",
        "churn.csv",
        "nlo.csv",
    ] {
        assert!(names.iter().any(|n| n == f), "{f} missing");
    }
    for n in names {
        let a = fs::read(tmp.path().join("a").join(&n)).unwrap();
        let b = fs::read(tmp.path().join("b").join(&n)).unwrap();
        assert!(a == b, "{n:?} differs");
    }
    let head = fs::read_to_string(tmp.path().join("a/intervals.csv")).unwrap();
    assert!(head.starts_with("pair_src,pair_dst,state,start_s,end_s,tainted\n"));
}

#[test]
fn sweep_then_analyze() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let out = tmp.path().join("sw");
    let stdout = ok(bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--axis", "n=15,25,35", "--seeds", "1,2", "--out"])
        .arg(&out)
        .output()
        .unwrap());
    assert!(stdout.contains("6 runs"), "{stdout}");
    let runs = fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 7);
    ok(bin().arg("analyze").arg(&out).output().unwrap());
    for f in ["curves.csv", "fits.csv", "wall.csv", "theory.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let curves = fs::read_to_string(out.join("curves.csv")).unwrap();
    assert!(curves.starts_with("curve_id,n,kind,median_s,mean_s"));
}

#[test]
fn empty_axis_sweep_is_one_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let out = tmp.path().join("one");
    ok(bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap());
    let dirs = fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).count();
    assert_eq!(dirs, 1);
}

#[test]
fn failing_sweep_names_the_configuration() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .args(["--axis", "B=0.5,-1", "--seeds", "3", "--out"])
        .arg(tmp.path().join("bad"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("hb-1") && err.contains("_s3"), "{err}");
}

#[test]
fn errors_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.cfg");
    fs::write(&bad, "n = two\n").unwrap();
    let out = bin().args(["sim", "--config"]).arg(&bad).args(["--out", "x"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    let out = bin().arg("analyze").arg(tmp.path()).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn theory_prints_predictions() {
    let stdout = ok(bin()
        .args(["theory", "--n", "50,200", "--theta", "0.02", "--calibrate", "50:4.0"])
        .output()
        .unwrap());
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "n,predicted_connectivity_s,mean_hops");
    assert!(lines[1].starts_with("50,4.000000,"));
    assert!(lines[2].starts_with("200,2.000000,"));
}
