//! The unstable eigenvalue e₀ of the linearized operator, with the three
//! independent estimates side by side.

use hartree::eigen::{compute_eigenpair_with, EigenOptions};
use hartree::{GridSpec, Lab};

fn main() -> hartree::Result<()> {
    let lab = Lab::new(GridSpec::default().with_n(512))?;
    let sys = lab.linearized()?;
    let (nm, np) = sys.null_residuals();
    println!("null residuals  L-W {nm:.2e}  L+W~ {np:.2e}");

    let pair = compute_eigenpair_with(&sys, EigenOptions::for_size(512))?;
    let o = &pair.oracles;
    println!("e0        {:.10}", pair.e0);
    println!("block     {:?} ({:?} positive)", o.block, o.block_count);
    println!("pencil    {:?}", o.pencil);
    println!("symmetric {:.10} ({} negative)", o.symmetric, o.symmetric_count);
    println!("residual  {:.2e}, tail R² {:.4}", pair.residual, pair.tail_r2);
    println!("B(Y+,Y-)  {:.12}", sys.bilinear_b(&pair.y_plus(), &pair.y_minus())?);
    Ok(())
}
