//! The sharp Hardy-Littlewood-Sobolev functional on random radial fields;
//! W is the minimizer, so nothing should go below I(W) = 0.

use hartree::trial::trial_fields;
use hartree::{hls_functional, GridSpec, Lab};

fn main() -> hartree::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let lab = Lab::new(GridSpec::default().with_n(512))?;
    let g = &lab.ground;
    println!("I(W) = {:.3e}", hls_functional(g.w(), g, &lab.k4)?);
    let mut vals: Vec<f64> = trial_fields(&lab.grid, g, seed, 100)
        .iter()
        .map(|u| hls_functional(u, g, &lab.k4))
        .collect::<hartree::Result<_>>()?;
    vals.sort_by(f64::total_cmp);
    println!("min {:.3e}  median {:.3e}  max {:.3e}", vals[0], vals[50], vals[99]);
    Ok(())
}
