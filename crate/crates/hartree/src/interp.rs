//! Off-grid evaluation of sampled radial functions.
//!
//! Inside the grid: 6-point Lagrange interpolation in the grid coordinate.
//! Below r_min: the even model a + b r² through the first two nodes.
//! Above r_max: the harmonic tail c r^{-(d-2)}.

use crate::grid::{Grading, RadialGrid};

pub struct Interpolator<'a> {
    grid: &'a RadialGrid,
    values: &'a [f64],
}

impl<'a> Interpolator<'a> {
    pub fn new(grid: &'a RadialGrid, values: &'a [f64]) -> Self {
        assert_eq!(grid.len(), values.len());
        Self { grid, values }
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let r = self.grid.nodes();
        let n = r.len();
        let f = self.values;
        if rho <= r[0] {
            let b = (f[1] - f[0]) / (r[1] * r[1] - r[0] * r[0]);
            return f[0] + b * (rho * rho - r[0] * r[0]);
        }
        if rho >= r[n - 1] {
            let p = (self.grid.d() - 2) as i32;
            return f[n - 1] * (r[n - 1] / rho).powi(p);
        }
        let xi = match self.grid.grading() {
            Grading::Geometric => rho.ln(),
            Grading::Uniform => rho,
        };
        let pos = (xi - self.grid.coord_origin()) / self.grid.step();
        let k = pos.floor() as i64;
        let start = (k - 2).clamp(0, n as i64 - 6) as usize;
        let mut acc = 0.0;
        for a in 0..6 {
            let xa = (start + a) as f64;
            if (pos - xa).abs() < 1e-14 {
                return f[start + a];
            }
            let mut l = 1.0;
            for b in 0..6 {
                if a != b {
                    let xb = (start + b) as f64;
                    l *= (pos - xb) / (xa - xb);
                }
            }
            acc += l * f[start + a];
        }
        acc
    }
}
