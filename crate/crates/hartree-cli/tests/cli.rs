use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hartree"))
}

#[test]
fn ground_state_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "grid.n = 256\n").unwrap();
    let out = dir.path().join("gs");
    let o = bin()
        .args(["ground-state", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(["--seed", "4", "--threads", "2"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(text.contains("seed = 4") && text.contains("threads = 2") && text.contains("n = 256"));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn invalid_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().arg("virial").arg("--out").arg(dir.path()).env("HARTREE_GRID__N", "4").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[cli-io/config-invalid]"));
}

#[test]
fn numeric_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("modulate")
        .arg("--out")
        .arg(dir.path())
        .env("HARTREE_GRID__N", "256")
        .env("HARTREE_PHYSICS__MU", "1e6")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("modulation/scale-out-of-range"));
}
