//! Evolve W with a small real perturbation and watch the diagnostics.
//! A negative amplitude lowers ‖∇u‖² below ‖∇W‖²; try `-- 1.02` for blowup.

use hartree::evolution::{evolve, EvolutionConfig, EvolutionContext};
use hartree::{GridSpec, Lab};

fn main() -> hartree::Result<()> {
    let lambda: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.98);
    let lab = Lab::new(GridSpec::default().with_n(512))?;
    let u0 = lab.ground.w().scale_real(lambda);
    let ctx = EvolutionContext { k4: lab.k4.clone(), ground: lab.ground.clone(), projector: None };
    let cfg = EvolutionConfig { dt: 2e-4, t_end: 2.0, cadence: 500, adaptive: true, ..Default::default() };
    let rec = evolve(&u0, &cfg, &ctx)?;
    println!("{:>8} {:>12} {:>12} {:>10}  flag", "t", "|∇u|²", "δ", "V_R");
    for s in &rec.samples {
        println!("{:8.4} {:12.6} {:+12.4e} {:10.4}  {}", s.t, s.grad_norm_sq, s.delta, s.v_r, s.flag);
    }
    println!("status {}  energy drift {:.1e}  mass drift {:.1e}", rec.status, rec.energy_drift, rec.mass_drift);
    if let Some(why) = &rec.halted {
        println!("halted: {why}");
    }
    Ok(())
}
