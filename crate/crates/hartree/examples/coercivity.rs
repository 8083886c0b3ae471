//! Lower bounds of Φ on the constrained subspaces, and a decomposition of
//! a perturbation into unstable, stable, symmetry and orthogonal parts.

use hartree::{coercivity_constant, decompose_perturbation, GridSpec, Lab, RadialField, Subspace};
use num_complex::Complex64;

fn main() -> hartree::Result<()> {
    let lab = Lab::new(GridSpec::default().with_n(512))?;
    let sys = lab.linearized()?;
    let pair = lab.eigenpair_fast(&sys)?;
    println!("unconstrained {:+.6}", coercivity_constant(&sys, Subspace::Unconstrained)?);
    println!("H⊥            {:+.6}", coercivity_constant(&sys, Subspace::HPerp)?);
    println!("G⊥            {:+.6}", coercivity_constant(&sys, Subspace::GPerp(&pair))?);

    let v = RadialField::from_fn(lab.grid.clone(), |r| Complex64::new(1.0, 0.5) * (-r * r / 4.0).exp());
    let d = decompose_perturbation(&v, &pair, &sys)?;
    println!("α+ {:+.4e} α- {:+.4e} β {:+.4e} γ {:+.4e}", d.alpha_plus, d.alpha_minus, d.beta, d.gamma);
    println!("Φ(v⊥) = {:.4e}, reconstruction {:.1e}", sys.phi(&d.perp)?, d.reconstruction_residual);
    Ok(())
}
