//! Calibrate W on the default grid and print the scalar identities.
//!
//!     cargo run --release --example ground_state -- 2048

use hartree::{energy, GridSpec, Lab};

fn main() -> hartree::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1024);
    let lab = Lab::new(GridSpec::default().with_n(n))?;
    let g = &lab.ground;
    println!("N = {n}, d = {}", g.d());
    println!("c0            {:.12}", g.c0());
    println!("residual      {:.3e}", g.residual());
    println!("|∇W|²         {:.12}  (225/16 = {})", g.grad_norm_sq(), 225.0 / 16.0);
    println!("quartic       {:.12}", g.quartic());
    println!("E(W)          {:.12}", energy(g.w(), &lab.k4)?);
    for r in [0.0, 1.0, 10.0, 100.0] {
        println!("W({r:>5})     {:.6e}", g.profile(r));
    }
    Ok(())
}
