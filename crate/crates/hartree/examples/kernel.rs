//! The |x|^-γ kernel on radial functions: potential of W² against the
//! closed form and the Kelvin transform on the grid.

use hartree::ground_state::{integral_system_residual, tail_asymptotics};
use hartree::{assemble_kernel, kelvin_transform, GridSpec, Lab, RadialField};

fn main() -> hartree::Result<()> {
    let lab = Lab::new(GridSpec::default().with_n(1024))?;
    let w = lab.ground.w();
    let w2: Vec<f64> = w.re().iter().map(|x| x * x).collect();
    let v = lab.k4.apply(&w2);

    // K₄W² = ω W̃ ... checked through the integral pair
    let kd2 = assemble_kernel(&lab.grid, (lab.grid.d() - 2) as f64)?;
    let vf = RadialField::from_real(lab.grid.clone(), &v);
    let pair = integral_system_residual(w, &vf, &lab.k4, &kd2)?;
    println!("integral system residuals {:.2e} {:.2e}", pair.first, pair.second);

    let kw = kelvin_transform(w)?;
    let i = lab.grid.len() / 2;
    println!("at r = {:.4}: W = {:.10e}, (KW) = {:.10e}", lab.grid.nodes()[i], w.values()[i].re, kw.values()[i].re);

    let tail = tail_asymptotics(w)?;
    println!("tail constant {:.8} vs c0 {:.8}", tail.omega_inf, lab.ground.c0());
    Ok(())
}
