//! Fit phase and scale to a perturbed, rescaled W.

use hartree::{fit_modulation, grad_norm_sq, GridSpec, Lab, RadialField};

fn main() -> hartree::Result<()> {
    let lab = Lab::new(GridSpec::default().with_n(1024))?;
    let g = &lab.ground;
    let bump = RadialField::from_real_fn(lab.grid.clone(), |r| (-r * r).exp());
    for eps in [0.0, 1e-3, 1e-2, 5e-2] {
        let h = bump.scale_real(eps * (g.grad_norm_sq() / grad_norm_sq(&bump)).sqrt());
        let u = g.scaled(0.4, 1.3).add(&h);
        let f = fit_modulation(&u, g)?;
        println!(
            "ε {eps:<6} θ {:+.8} μ {:.8} α {:+.3e} δ {:+.3e} ({} iterations)",
            f.theta, f.mu, f.alpha, f.delta, f.iterations
        );
    }
    Ok(())
}
