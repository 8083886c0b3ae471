use hartree_io::config::RunConfig;
use hartree_io::manifest::{sha256_hex, verify_manifest, RunManifest, MANIFEST_NAME};
use hartree_io::run_subcommand;

fn cfg(extra: &str) -> RunConfig {
    RunConfig::parse(&format!("grid.n = 256\n{extra}")).unwrap()
}

#[test]
fn ground_state_writes_checksummed_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_subcommand("ground-state", &cfg(""), dir.path()).unwrap();
    assert!((m.derived["c0"] - 0.9836).abs() < 1e-3);
    let names: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
    for n in ["config.txt", "ground_state.csv", "w.field", "w.csv"] {
        assert!(names.contains(&n), "{names:?}");
    }
    for f in &m.files {
        assert_eq!(sha256_hex(&std::fs::read(dir.path().join(&f.path)).unwrap()), f.sha256);
    }
    let text = std::fs::read_to_string(dir.path().join(MANIFEST_NAME)).unwrap();
    let back: RunManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(back.config_hash, m.config_hash);
    assert!(verify_manifest(dir.path()).unwrap().is_empty());

    std::fs::write(dir.path().join("w.csv"), "tampered").unwrap();
    assert_eq!(verify_manifest(dir.path()).unwrap(), vec!["w.csv".to_string()]);
}

#[test]
fn evolve_of_w_is_trapped_throughout() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg("integrator.t_end = 0.02\nintegrator.cadence = 20\nphysics.virial_radii = [10.0]\n");
    run_subcommand("evolve", &c, dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "t");
    let flag = header.iter().position(|h| *h == "flag").unwrap();
    let rows: Vec<String> = lines.map(|l| l.split(',').nth(flag).unwrap().to_string()).collect();
    assert!(rows.len() >= 2 && rows.iter().all(|f| f == "trapped"), "{rows:?}");
}

#[test]
fn other_subcommands_run() {
    for name in ["spectrum", "modulate", "virial", "kelvin-check", "construct-wpm"] {
        let dir = tempfile::tempdir().unwrap();
        let m = run_subcommand(name, &cfg(""), dir.path()).unwrap();
        assert!(m.files.len() >= 2, "{name}");
        assert!(verify_manifest(dir.path()).unwrap().is_empty());
    }
}

#[test]
fn file_initial_data_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    run_subcommand("construct-wpm", &cfg("physics.a = -1.0"), dir.path()).unwrap();
    let input = dir.path().join("wpm.field");
    let c = cfg(&format!("physics.initial = \"file\"\nphysics.input = \"{}\"\n", input.display()));
    let out = tempfile::tempdir().unwrap();
    let m = run_subcommand("modulate", &c, out.path()).unwrap();
    assert!(m.files.iter().any(|f| f.path == "h.field"));
}

#[test]
fn unknown_subcommand_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let e = run_subcommand("nope", &cfg(""), dir.path()).unwrap_err();
    assert_eq!(e.code(), "cli-io/config-invalid");
}
