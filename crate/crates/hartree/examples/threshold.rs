//! Build W^± at t₀ from the exponential expansion and run each forward and
//! backward. Pass `-1` for W⁻.

use hartree::evolution::{Direction, EvolutionConfig, EvolutionContext};
use hartree::special::{build_expansion, time_residual, verify_threshold_convergence, wpm_initial_data, WpmOptions};
use hartree::{GridSpec, Lab};

fn main() -> hartree::Result<()> {
    let sign: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let lab = Lab::new(GridSpec::default().with_n(512))?;
    let sys = lab.linearized()?;
    let pair = lab.eigenpair_fast(&sys)?;
    let e0 = pair.e0;

    let series = build_expansion(sign, 4, &sys, &pair)?;
    for r in &series.residuals {
        println!("order {} residual {:.2e}", r.order, r.relative);
    }
    println!("defect at t = 2/e0: {:.3e}", time_residual(&series, &sys, 2.0 / e0)?.l2_norm());

    let data = wpm_initial_data(sign, &sys, &pair, WpmOptions::default())?;
    println!("t0 {:.4}  E - E(W) rel {:.2e}  |∇u|² - |∇W|² {:+.4}", data.t0, data.energy_error(), data.grad_norm_sq - data.grad_norm_sq_w);

    let ctx = EvolutionContext { k4: lab.k4.clone(), ground: lab.ground.clone(), projector: None };
    let cfg = EvolutionConfig { dt: 1e-4, cadence: 100, ..Default::default() };
    let fwd = verify_threshold_convergence(&data, 3.0 / e0, Direction::Forward, &cfg, &ctx)?;
    println!("forward: rate {:?} vs e0 {e0:.4}, {}", fwd.rate_delta, fwd.status);
    let cfg = EvolutionConfig { adaptive: true, modulation: false, cadence: 200, ..cfg };
    let horizon = if sign > 0.0 { 5.0 / e0 } else { 40.0 / e0 };
    let bwd = verify_threshold_convergence(&data, horizon, Direction::Backward, &cfg, &ctx)?;
    println!("backward: {} at t = {:.3}", bwd.status, bwd.window.1);
    Ok(())
}
