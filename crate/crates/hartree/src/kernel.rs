//! Nyström discretization of g ↦ |x|^{-γ} * g on radial functions.
//!
//! Off-diagonal entries sample the angular kernel. The diagonal is fixed by
//! requiring the rule to be exact on the smooth bump χ(ln ρ - ln r_i), whose
//! integral against the weakly singular kernel is computed once by adaptive
//! quadrature in the self-similar variable x = ln(ρ/r).

use crate::angular::AngularKernel;
use crate::error::{HartreeError, Result};
use crate::grid::{Grading, RadialGrid};
use crate::quad::integrate;
use faer::{Col, Mat};
use rayon::prelude::*;
use std::sync::Arc;

/// C^∞ cutoff: 1 on (-∞, 1], 0 on [4, ∞).
pub fn cutoff(x: f64) -> f64 {
    const A: f64 = 1.0;
    const B: f64 = 4.0;
    if x <= A {
        return 1.0;
    }
    if x >= B {
        return 0.0;
    }
    let psi = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let y = (x - A) / (B - A);
    let p = psi(1.0 - y);
    p / (p + psi(y))
}

/// Dense discrete convolution operator with a declared exponent.
#[derive(Debug, Clone)]
pub struct NonlocalKernelMatrix {
    gamma: f64,
    grid: Arc<RadialGrid>,
    mat: Mat<f64>,
}

/// Assemble the kernel matrix for γ ∈ {4, d-2}.
pub fn assemble_kernel(grid: &Arc<RadialGrid>, gamma: f64) -> Result<NonlocalKernelMatrix> {
    let d = grid.d();
    let kern = AngularKernel::new(d, gamma)?;
    let n = grid.len();
    let r = grid.nodes();
    let w = grid.weights();
    let area = grid.sphere();
    let lr: Vec<f64> = r.iter().map(|x| x.ln()).collect();

    let mut mat = match grid.grading() {
        Grading::Geometric => {
            let h = grid.step();
            // only 2n-1 distinct ratios r_i / ρ_j = e^{(i-j)h}
            let vals: Vec<f64> = (0..2 * n - 1)
                .into_par_iter()
                .map(|k| {
                    let m = k as i64 - (n as i64 - 1);
                    if m == 0 {
                        0.0
                    } else {
                        kern.eval((m as f64 * h).exp())
                    }
                })
                .collect();
            Mat::from_fn(n, n, |i, j| {
                if i == j {
                    0.0
                } else {
                    w[j] / area * r[j].powf(-gamma) * vals[i + n - 1 - j]
                }
            })
        }
        Grading::Uniform => {
            let cols: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|j| {
                    (0..n)
                        .map(|i| if i == j { 0.0 } else { w[j] / area * r[j].powf(-gamma) * kern.eval(r[i] / r[j]) })
                        .collect()
                })
                .collect();
            Mat::from_fn(n, n, |i, j| cols[j][i])
        }
    };

    let dg = d as f64 - gamma;
    // the diagonal singularity is integrable; a sample landing on it is dropped
    let vx = |x: f64| {
        let v = kern.eval((-x).exp());
        if v.is_finite() {
            (dg * x).exp() * v
        } else {
            0.0
        }
    };
    let g = |x: f64| vx(x) * cutoff(x);

    // node 0 stands for the whole inner ball; average the kernel over it
    // instead of sampling at r_0, then restore symmetry for row 0
    let faces = grid.cell_faces();
    let ball = area * faces[1].powi(d as i32) / d as f64;
    let lb = faces[1].ln();
    let col0: Vec<(usize, f64)> = (1..n)
        .into_par_iter()
        .filter(|&i| lr[i] - lb < 4.0)
        .map(|i| {
            let up = lb - lr[i];
            let lo = up - 40.0 / d as f64;
            let v = integrate(vx, lo, up, &[], 1e-12, 0.0);
            (i, w[0] / ball * r[i].powf(dg) * v)
        })
        .collect();
    for (i, v) in col0 {
        mat[(i, 0)] = v;
        mat[(0, i)] = w[i] * v / w[0];
    }

    // self-similar bump integral F(L) = ∫_{-∞}^{L} e^{(d-γ)x} V(e^{-x}) χ(x) dx
    let x_lo = -40.0 / d as f64;
    let near: Vec<f64> = (1..12).map(|k| -(10f64).powi(-k)).collect();
    let f0 = integrate(g, x_lo, 0.0, &near, 1e-13, 0.0);
    let end = grid.cell_faces()[n].ln();
    let mut ls: Vec<f64> = lr.iter().map(|s| (end - s).clamp(0.0, 4.0)).collect();
    ls.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ls.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut table: Vec<(f64, f64)> = Vec::with_capacity(ls.len());
    let mut acc = f0;
    let mut prev = 0.0;
    for &l in &ls {
        if l > prev {
            let brk: Vec<f64> = if prev == 0.0 { (1..12).map(|k| (10f64).powi(-k)).collect() } else { vec![] };
            acc += integrate(g, prev, l, &brk, 1e-13, 1e-300);
            prev = l;
        }
        table.push((l, acc));
    }
    let lookup = |l: f64| -> f64 {
        let k = table.partition_point(|e| e.0 < l - 1e-14);
        table[k.min(table.len() - 1)].1
    };

    // row 0 is a ball average, so its bump target is the ball average of Kχ_0
    let f1 = |l: f64| {
        let lo = l.min(0.0) - 40.0 / d as f64;
        let brk: Vec<f64> = (1..10).flat_map(|k| [-(10f64).powi(-k), (10f64).powi(-k)]).collect();
        integrate(vx, lo, l, &brk, 1e-12, 0.0)
    };
    let off = lb - lr[0];
    let y_lo = -40.0 / (2.0 * d as f64 - gamma);
    let ball_target = area / ball
        * r[0].powf(2.0 * d as f64 - gamma)
        * integrate(|y| ((2.0 * d as f64 - gamma) * y).exp() * cutoff(y) * f1(off - y), y_lo, 4.0, &[off], 1e-11, 0.0);

    let diag: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let rr = if i == 0 { ball_target } else { r[i].powf(dg) * lookup((end - lr[i]).clamp(0.0, 4.0)) };
            let mut s = 0.0;
            for j in 0..n {
                if j != i {
                    let c = cutoff(lr[j] - lr[i]);
                    if c > 0.0 {
                        s += mat[(i, j)] * c;
                    }
                }
            }
            rr - s
        })
        .collect();
    for i in 0..n {
        mat[(i, i)] = diag[i];
    }
    if mat.col_iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(HartreeError::NonFinite("kernel matrix"));
    }
    Ok(NonlocalKernelMatrix { gamma, grid: grid.clone(), mat })
}

impl NonlocalKernelMatrix {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn matrix(&self) -> &Mat<f64> {
        &self.mat
    }

    /// (K g)_i for a real array.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        let col = Col::from_fn(g.len(), |i| g[i]);
        let y = &self.mat * &col;
        y.iter().copied().collect()
    }

    /// ⟨K a, b⟩ in the weighted inner product.
    pub fn form(&self, a: &[f64], b: &[f64]) -> f64 {
        self.grid.dot(&self.apply(a), b)
    }

    /// max |w_i K_ij - w_j K_ji| / max |w_i K_ij|.
    pub fn asymmetry(&self) -> f64 {
        let w = self.grid.weights();
        let n = w.len();
        let mut num: f64 = 0.0;
        let mut den: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let a = w[i] * self.mat[(i, j)];
                let b = w[j] * self.mat[(j, i)];
                num = num.max((a - b).abs());
                den = den.max(a.abs());
            }
        }
        num / den
    }

    pub fn min_entry(&self) -> f64 {
        let mut m = f64::INFINITY;
        for c in self.mat.col_iter() {
            for v in c.iter() {
                m = m.min(*v);
            }
        }
        m
    }

    pub fn require_gamma(&self, gamma: f64) -> Result<()> {
        if self.gamma == gamma {
            Ok(())
        } else {
            Err(HartreeError::KernelMismatch { expected: gamma, found: self.gamma })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(-3.0), 1.0);
        assert_eq!(cutoff(4.5), 0.0);
        assert!((cutoff(2.5) - 0.5).abs() < 1e-12);
        let mut prev = 1.0;
        for k in 0..100 {
            let c = cutoff(1.0 + 3.0 * k as f64 / 99.0);
            assert!(c <= prev + 1e-15);
            prev = c;
        }
    }
}
