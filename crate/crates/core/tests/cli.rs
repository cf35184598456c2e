//! The `salem-lab` binary end to end.

use std::fs;
use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_salem-lab");

fn config(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(cfg: &str, stage: &str, out: &Path) -> std::process::Output {
    Command::new(BIN)
        .args(["--config", cfg, "--stage", stage, "--out"])
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn reruns_are_byte_identical_apart_from_the_timestamp() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let o = run(&config("uniform.cfg"), "nu_mass", dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 7, "{names:?}");
    for name in names {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        if name == "report.txt" {
            let strip = |v: &[u8]| String::from_utf8_lossy(v).lines().skip(1).collect::<Vec<_>>().join("\n");
            assert_eq!(strip(&x), strip(&y));
        } else {
            assert_eq!(x, y, "{name:?} differs");
        }
    }
}

#[test]
fn partial_stage_writes_only_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&config("uniform.cfg"), "decompose", dir.path());
    assert!(o.status.success());
    assert!(dir.path().join("report.txt").exists());
    assert!(!dir.path().join("scan.csv").exists());
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "measure = cantor\nbranching = 3\nsurvivors = 5\n").unwrap();
    let o = run(cfg.to_str().unwrap(), "construct", dir.path());
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("survivors"), "{err}");
    let o = run(&config("uniform.cfg"), "nonsense", dir.path());
    assert!(!o.status.success());
}
