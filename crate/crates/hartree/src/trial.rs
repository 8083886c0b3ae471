//! Seeded random smooth, radially decaying trial fields.

use crate::field::RadialField;
use crate::ground_state::GroundState;
use crate::grid::RadialGrid;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// One of three families, chosen uniformly: Gaussian mixtures, algebraic
/// bubbles (1 + (r/σ)²)^{-p} with p > (d-2)/2, and W plus a smooth bump.
pub fn trial_field(grid: &Arc<RadialGrid>, ground: &GroundState, rng: &mut impl Rng) -> RadialField {
    let d = grid.d() as f64;
    match rng.gen_range(0..3) {
        0 => {
            let m = rng.gen_range(1..=3);
            let terms: Vec<(Complex64, f64)> = (0..m)
                .map(|_| {
                    let c = Complex64::from_polar(rng.gen_range(0.2..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
                    (c, rng.gen_range(0.3_f64..5.0).ln())
                })
                .collect();
            RadialField::from_fn(grid.clone(), |r| {
                terms.iter().map(|(c, ls)| c * (-0.5 * (r / ls.exp()).powi(2)).exp()).sum()
            })
        }
        1 => {
            let p = 0.5 * (d - 2.0) + rng.gen_range(0.3..2.0);
            let s = rng.gen_range(0.3..4.0);
            let c = rng.gen_range(0.2..3.0);
            RadialField::from_real_fn(grid.clone(), |r| c * (1.0 + (r / s).powi(2)).powf(-p))
        }
        _ => {
            let eps = Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
            let s = rng.gen_range(0.5..3.0);
            let w = ground.w();
            let bump = RadialField::from_fn(grid.clone(), |r| eps * (-(r / s).powi(2)).exp());
            w.add(&bump)
        }
    }
}

/// `count` trial fields from a ChaCha8 stream seeded with `seed`.
pub fn trial_fields(grid: &Arc<RadialGrid>, ground: &GroundState, seed: u64, count: usize) -> Vec<RadialField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| trial_field(grid, ground, &mut rng)).collect()
}
