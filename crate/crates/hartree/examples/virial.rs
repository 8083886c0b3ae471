//! Localized virial quantities for W and for a moving solution.

use hartree::evolution::{step, virial_first, virial_second, virial_value, VirialProfile};
use hartree::{GridSpec, Lab, RadialField};
use num_complex::Complex64;

fn main() -> hartree::Result<()> {
    let lab = Lab::new(GridSpec::default().with_n(1024))?;
    for r in [5.0, 10.0, 20.0, 40.0] {
        let p = VirialProfile::new(&lab.grid, r)?;
        let s = virial_second(lab.ground.w(), &p, &lab.k4)?;
        println!("R {r:>4}: A_R(W) {:+.3e}  (gradient {:+.4e}, bilaplacian {:+.4e}, nonlocal {:+.4e})",
            s.a_r, s.gradient_term, s.bilaplacian_term, s.nonlocal_term);
    }

    let mut u = lab.ground.w().add(&RadialField::from_fn(lab.grid.clone(), |r| {
        Complex64::new(0.05, 0.03) * (-0.5 * r * r).exp()
    }));
    let p = VirialProfile::new(&lab.grid, 10.0)?;
    let dt = 1e-3;
    for _ in 0..5 {
        let s = virial_second(&u, &p, &lab.k4)?;
        println!("V_R {:.8}  ∂V {:+.6e}  ∂²V {:+.6e}", virial_value(&u, &p), virial_first(&u, &p), s.d2);
        for _ in 0..10 {
            u = step(&u, dt / 10.0, &lab.k4)?;
        }
    }
    Ok(())
}
