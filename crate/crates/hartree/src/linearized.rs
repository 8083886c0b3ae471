//! Linearization around W: L₊, L₋, the block generator 𝓛 and the forms Φ, B.
//!
//! Real fields h = h₁ + i h₂ are stored as pairs (h₁, h₂). The weighted
//! matrices M L± are symmetric; `hat` variants are M^{1/2} L± M^{-1/2}.

use crate::error::{HartreeError, Result};
use crate::field::RadialField;
use crate::ground_state::GroundState;
use crate::kernel::NonlocalKernelMatrix;
use faer::Mat;
use num_complex::Complex64;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct LinearizedSystem {
    ground: GroundState,
    k4: Arc<NonlocalKernelMatrix>,
    /// K₄W² sampled on the grid.
    potential: Vec<f64>,
    lplus: Mat<f64>,
    lminus: Mat<f64>,
    /// M L₊ and M L₋, symmetrized.
    mplus: Mat<f64>,
    mminus: Mat<f64>,
}

fn symmetrize(a: &mut Mat<f64>) {
    let n = a.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// L₊h = -Δh - (K₄W²)h - 2(K₄(Wh))W, L₋h = -Δh - (K₄W²)h.
pub fn assemble_linearized(ground: &GroundState, k4: &Arc<NonlocalKernelMatrix>) -> Result<LinearizedSystem> {
    k4.require_gamma(4.0)?;
    let grid = ground.grid();
    if !(Arc::ptr_eq(grid, k4.grid()) || **grid == **k4.grid()) {
        return Err(HartreeError::GridMismatch);
    }
    let n = grid.len();
    let w = grid.weights();
    let wr = ground.w().re();
    let w2: Vec<f64> = wr.iter().map(|x| x * x).collect();
    let potential = k4.apply(&w2);
    let s = grid.stiffness().to_dense();
    let k = k4.matrix();

    let mut mminus = Mat::from_fn(n, n, |i, j| s[(i, j)] - if i == j { w[i] * potential[i] } else { 0.0 });
    symmetrize(&mut mminus);
    let mut mplus = Mat::from_fn(n, n, |i, j| mminus[(i, j)] - 2.0 * w[i] * wr[i] * k[(i, j)] * wr[j]);
    symmetrize(&mut mplus);
    let lminus = Mat::from_fn(n, n, |i, j| mminus[(i, j)] / w[i]);
    let lplus = Mat::from_fn(n, n, |i, j| mplus[(i, j)] / w[i]);
    Ok(LinearizedSystem { ground: ground.clone(), k4: k4.clone(), potential, lplus, lminus, mplus, mminus })
}

fn matvec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let mut y = vec![0.0; n];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj != 0.0 {
            let col = a.col(j);
            for i in 0..n {
                y[i] += col[i] * xj;
            }
        }
    }
    y
}

impl LinearizedSystem {
    pub fn ground(&self) -> &GroundState {
        &self.ground
    }
    pub fn kernel(&self) -> &Arc<NonlocalKernelMatrix> {
        &self.k4
    }
    pub fn grid(&self) -> &Arc<crate::grid::RadialGrid> {
        self.ground.grid()
    }
    pub fn len(&self) -> usize {
        self.lplus.nrows()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn lplus(&self) -> &Mat<f64> {
        &self.lplus
    }
    pub fn lminus(&self) -> &Mat<f64> {
        &self.lminus
    }
    /// M L₊ (symmetric).
    pub fn weighted_plus(&self) -> &Mat<f64> {
        &self.mplus
    }
    /// M L₋ (symmetric).
    pub fn weighted_minus(&self) -> &Mat<f64> {
        &self.mminus
    }
    /// K₄W².
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn apply_plus(&self, h: &[f64]) -> Vec<f64> {
        matvec(&self.lplus, h)
    }
    pub fn apply_minus(&self, h: &[f64]) -> Vec<f64> {
        matvec(&self.lminus, h)
    }

    /// 𝓛(h₁, h₂) = (-L₋h₂, L₊h₁).
    pub fn apply_block(&self, h1: &[f64], h2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let a: Vec<f64> = self.apply_minus(h2).into_iter().map(|x| -x).collect();
        (a, self.apply_plus(h1))
    }

    pub fn apply_block_field(&self, h: &RadialField) -> Result<RadialField> {
        self.check(h)?;
        let (a, b) = self.apply_block(&h.re(), &h.im());
        Ok(RadialField::from_parts(self.grid().clone(), &a, &b))
    }

    /// Dense 2N×2N block matrix [[0, -L₋], [L₊, 0]].
    pub fn block_matrix(&self) -> Mat<f64> {
        let n = self.len();
        Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, false) => -self.lminus[(i, j - n)],
            (false, true) => self.lplus[(i - n, j)],
            _ => 0.0,
        })
    }

    /// M^{1/2} L M^{-1/2} for L = L₊ (plus = true) or L₋.
    pub fn hat(&self, plus: bool) -> Mat<f64> {
        let w = self.grid().weights();
        let m = if plus { &self.mplus } else { &self.mminus };
        let n = self.len();
        let sq: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();
        Mat::from_fn(n, n, |i, j| m[(i, j)] / (sq[i] * sq[j]))
    }

    fn check(&self, h: &RadialField) -> Result<()> {
        if Arc::ptr_eq(h.grid(), self.grid()) || **h.grid() == **self.grid() {
            Ok(())
        } else {
            Err(HartreeError::GridMismatch)
        }
    }

    /// B(g, h) = ½⟨L₊g₁, h₁⟩ + ½⟨L₋g₂, h₂⟩.
    pub fn bilinear_b(&self, g: &RadialField, h: &RadialField) -> Result<f64> {
        self.check(g)?;
        self.check(h)?;
        Ok(self.form_b(&g.re(), &g.im(), &h.re(), &h.im()))
    }

    /// Φ(h) = B(h, h).
    pub fn phi(&self, h: &RadialField) -> Result<f64> {
        self.bilinear_b(h, h)
    }

    pub fn form_b(&self, g1: &[f64], g2: &[f64], h1: &[f64], h2: &[f64]) -> f64 {
        let a = matvec(&self.mplus, g1);
        let b = matvec(&self.mminus, g2);
        let s1: f64 = a.iter().zip(h1).map(|(x, y)| x * y).sum();
        let s2: f64 = b.iter().zip(h2).map(|(x, y)| x * y).sum();
        0.5 * (s1 + s2)
    }

    /// ‖L₋W‖/‖W‖ and ‖L₊W̃‖/‖W̃‖ in the weighted L² norm.
    pub fn null_residuals(&self) -> (f64, f64) {
        let grid = self.grid();
        let w = self.ground.w().re();
        let wt = self.ground.wtilde().re();
        let a = grid.l2(&self.apply_minus(&w)) / grid.l2(&w);
        let b = grid.l2(&self.apply_plus(&wt)) / grid.l2(&wt);
        (a, b)
    }

    /// Vh = -(K₄W²)h - 2(K₄(W Re h))W.
    pub fn potential_v(&self, h: &RadialField) -> Result<RadialField> {
        potential_v(h, &self.ground, &self.k4)
    }

    /// R(h) = i(K₄|h|²)(W+h) + 2i(K₄(W Re h))h.
    pub fn remainder_r(&self, h: &RadialField) -> Result<RadialField> {
        remainder_r(h, &self.ground, &self.k4)
    }
}

fn check_field(h: &RadialField, ground: &GroundState, k4: &NonlocalKernelMatrix) -> Result<()> {
    k4.require_gamma(4.0)?;
    h.check_grid(ground.w())
}

pub fn potential_v(h: &RadialField, ground: &GroundState, k4: &NonlocalKernelMatrix) -> Result<RadialField> {
    check_field(h, ground, k4)?;
    let w = ground.w().re();
    let w2: Vec<f64> = w.iter().map(|x| x * x).collect();
    let p = k4.apply(&w2);
    let wh: Vec<f64> = h.values().iter().zip(&w).map(|(z, x)| z.re * x).collect();
    let q = k4.apply(&wh);
    let vals: Vec<Complex64> = h.values().iter().enumerate().map(|(i, z)| -p[i] * z - 2.0 * q[i] * w[i]).collect();
    RadialField::new(h.grid().clone(), vals)
}

pub fn remainder_r(h: &RadialField, ground: &GroundState, k4: &NonlocalKernelMatrix) -> Result<RadialField> {
    check_field(h, ground, k4)?;
    let w = ground.w().re();
    let a = k4.apply(&h.abs2());
    let wh: Vec<f64> = h.values().iter().zip(&w).map(|(z, x)| z.re * x).collect();
    let q = k4.apply(&wh);
    let i = Complex64::i();
    let vals: Vec<Complex64> =
        h.values().iter().enumerate().map(|(j, z)| i * (a[j] * (w[j] + z) + 2.0 * q[j] * z)).collect();
    RadialField::new(h.grid().clone(), vals)
}
