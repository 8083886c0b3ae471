//! Run a subcommand into a directory, then verify every checksum in its manifest
//! and read the written field back.

use hartree_io::fieldio::read_field;
use hartree_io::manifest::verify_manifest;
use hartree_io::{run_subcommand, RunConfig};
use std::path::Path;

fn main() -> hartree::Result<()> {
    let cfg = RunConfig::parse("grid.n = 256\nseed = 3\n")?;
    let dir = Path::new("target/example-run");
    let m = run_subcommand("ground-state", &cfg, dir)?;
    for f in &m.files {
        println!("{:>8} bytes  {}  {}", f.bytes, &f.sha256[..16], f.path);
    }
    println!("config hash {}", m.config_hash);
    println!("mismatches: {:?}", verify_manifest(dir)?);
    let w = read_field(&dir.join("w.field"), None)?;
    println!("W(r_min) = {:.10}", w.values()[0].re);
    Ok(())
}
