//! Runs every acceptance criterion and prints one PASS/FAIL line each.
//! `HARTREE_ACCEPTANCE_ONLY=3,7` restricts the run.

use hartree_io::acceptance::{run_all, AcceptanceOptions};
use std::time::Instant;

fn main() {
    let only = std::env::var("HARTREE_ACCEPTANCE_ONLY")
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let t = Instant::now();
    let res = run_all(&AcceptanceOptions { only, ..Default::default() }, |r| println!("{}", r.line()));
    let failed = res.iter().filter(|r| !r.pass).count();
    println!("acceptance: {} passed, {failed} failed, {:.0}s", res.len() - failed, t.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
