//! The explicit ground state W = c₀(1+r²)^{-(d-2)/2}, its scaling mode W̃,
//! the Kelvin transform, the integral system and tail asymptotics.

use crate::error::{HartreeError, Result};
use crate::field::RadialField;
use crate::functionals::grad_norm_sq;
use crate::grid::RadialGrid;
use crate::interp::Interpolator;
use crate::kernel::NonlocalKernelMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;

/// Largest relative elliptic residual accepted by [`calibrate_ground_state`].
pub const DEFAULT_RESIDUAL_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct GroundState {
    c0: f64,
    i_d: f64,
    w: RadialField,
    wtilde: RadialField,
    residual: f64,
    grad_norm_sq: f64,
    quartic: f64,
}

/// Relative sup-norm residual ‖-Δw - (K₄w²)w‖∞ / ‖Δw‖∞ of a real profile.
pub fn elliptic_residual(grid: &RadialGrid, w: &[f64], k4: &NonlocalKernelMatrix) -> f64 {
    let lw = grid.laplacian_real(w);
    let w2: Vec<f64> = w.iter().map(|x| x * x).collect();
    let p = k4.apply(&w2);
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for i in 0..w.len() {
        num = num.max((-lw[i] - p[i] * w[i]).abs());
        den = den.max(lw[i].abs());
    }
    num / den
}

fn check_same(grid: &Arc<RadialGrid>, k: &NonlocalKernelMatrix) -> Result<()> {
    if Arc::ptr_eq(grid, k.grid()) || **grid == **k.grid() {
        Ok(())
    } else {
        Err(HartreeError::GridMismatch)
    }
}

/// Calibrate with the default residual limit.
pub fn calibrate_ground_state(grid: &Arc<RadialGrid>, k4: &NonlocalKernelMatrix) -> Result<GroundState> {
    calibrate_ground_state_with_limit(grid, k4, DEFAULT_RESIDUAL_LIMIT)
}

/// c₀² = d(d-2)/I_d with I_d = (K₄(1+r²)^{-(d-2)})(0) measured on the grid.
pub fn calibrate_ground_state_with_limit(
    grid: &Arc<RadialGrid>,
    k4: &NonlocalKernelMatrix,
    limit: f64,
) -> Result<GroundState> {
    k4.require_gamma(4.0)?;
    check_same(grid, k4)?;
    let d = grid.d() as f64;
    let r = grid.nodes();
    let g: Vec<f64> = r.iter().map(|x| (1.0 + x * x).powf(-(d - 2.0))).collect();
    let kg = k4.apply(&g);
    // (K g)(r) is even and smooth in r; extrapolate to r = 0 in r²
    let (a, b) = (r[1] * r[1], r[2] * r[2]);
    let i_d = (b * kg[1] - a * kg[2]) / (b - a);
    if !(i_d > 0.0) {
        return Err(HartreeError::NonFinite("ground-state amplitude"));
    }
    let c0 = (d * (d - 2.0) / i_d).sqrt();
    let gs = GroundState::with_amplitude(grid, k4, c0, i_d)?;
    if !(gs.residual <= limit) {
        return Err(HartreeError::ResidualTooLarge { residual: gs.residual, limit });
    }
    Ok(gs)
}

impl GroundState {
    fn with_amplitude(grid: &Arc<RadialGrid>, k4: &NonlocalKernelMatrix, c0: f64, i_d: f64) -> Result<Self> {
        let d = grid.d();
        let w = RadialField::from_real_fn(grid.clone(), |r| w_profile(d, c0, r));
        let wtilde = RadialField::from_real_fn(grid.clone(), |r| wtilde_profile(d, c0, r));
        let wr = w.re();
        let residual = elliptic_residual(grid, &wr, k4);
        let w2: Vec<f64> = wr.iter().map(|x| x * x).collect();
        let quartic = k4.form(&w2, &w2);
        let grad_norm_sq = grad_norm_sq(&w);
        Ok(Self { c0, i_d, w, wtilde, residual, grad_norm_sq, quartic })
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }
    /// Measured (K₄(1+r²)^{-(d-2)})(0).
    pub fn i_d(&self) -> f64 {
        self.i_d
    }
    pub fn w(&self) -> &RadialField {
        &self.w
    }
    pub fn wtilde(&self) -> &RadialField {
        &self.wtilde
    }
    pub fn residual(&self) -> f64 {
        self.residual
    }
    pub fn grad_norm_sq(&self) -> f64 {
        self.grad_norm_sq
    }
    /// ∬ W²(x)W²(y)/|x-y|⁴.
    pub fn quartic(&self) -> f64 {
        self.quartic
    }
    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.w.grid()
    }
    pub fn d(&self) -> usize {
        self.grid().d()
    }
    /// W at an arbitrary radius.
    pub fn profile(&self, r: f64) -> f64 {
        w_profile(self.d(), self.c0, r)
    }
    /// W̃ at an arbitrary radius.
    pub fn tilde_profile(&self, r: f64) -> f64 {
        wtilde_profile(self.d(), self.c0, r)
    }
    /// W_{θ,μ} sampled on the grid.
    pub fn scaled(&self, theta: f64, mu: f64) -> RadialField {
        let d = self.d();
        let c0 = self.c0;
        let amp = mu.powf(-(d as f64 - 2.0) / 2.0);
        let ph = Complex64::from_polar(amp, theta);
        RadialField::from_fn(self.grid().clone(), |r| ph * w_profile(d, c0, r / mu))
    }
}

pub fn w_profile(d: usize, c0: f64, r: f64) -> f64 {
    c0 * (1.0 + r * r).powf(-(d as f64 - 2.0) / 2.0)
}

/// (d-2)/2·W + rW' = (d-2)/2·c₀(1-r²)(1+r²)^{-d/2}.
pub fn wtilde_profile(d: usize, c0: f64, r: f64) -> f64 {
    let p = (d as f64 - 2.0) / 2.0;
    p * c0 * (1.0 - r * r) * (1.0 + r * r).powf(-p - 1.0)
}

/// (Kf)(r) = r^{-(d-2)} f(1/r).
pub fn kelvin_transform(field: &RadialField) -> Result<RadialField> {
    let grid = field.grid();
    let r = grid.nodes();
    if !(r[0] < 1.0 && *r.last().unwrap() > 1.0) {
        return Err(HartreeError::InsufficientSpan);
    }
    let p = (grid.d() - 2) as i32;
    let re = field.re();
    let im = field.im();
    let fr = Interpolator::new(grid, &re);
    let fi = Interpolator::new(grid, &im);
    Ok(RadialField::from_fn(grid.clone(), |x| {
        let y = 1.0 / x;
        Complex64::new(fr.eval(y), fi.eval(y)) * x.powi(-p)
    }))
}

/// Residuals of ω = C∫ωv/|x-y|^{d-2} and v = ∫ω²/|x-y|⁴.
#[derive(Debug, Clone, Serialize)]
pub struct IntegralPair {
    #[serde(skip)]
    pub omega: Vec<f64>,
    #[serde(skip)]
    pub v: Vec<f64>,
    /// Relative sup residual of the first equation with the best-fit C.
    pub first: f64,
    /// Relative sup residual of the second equation.
    pub second: f64,
    /// Best-fit constant C; 1/((d-2)|S^{d-1}|) for the Green function of -Δ.
    pub constant: f64,
}

impl IntegralPair {
    pub fn residuals(&self) -> (f64, f64) {
        (self.first, self.second)
    }
}

fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn integral_system_residual(
    omega: &RadialField,
    v: &RadialField,
    k4: &NonlocalKernelMatrix,
    kd2: &NonlocalKernelMatrix,
) -> Result<IntegralPair> {
    omega.check_grid(v)?;
    k4.require_gamma(4.0)?;
    let grid = omega.grid();
    kd2.require_gamma((grid.d() - 2) as f64)?;
    check_same(grid, k4)?;
    check_same(grid, kd2)?;
    let w = omega.re();
    let vv = v.re();
    let wv: Vec<f64> = w.iter().zip(&vv).map(|(a, b)| a * b).collect();
    let g = kd2.apply(&wv);
    let gg = grid.dot(&g, &g);
    let constant = if gg > 0.0 { grid.dot(&w, &g) / gg } else { 0.0 };
    let r1: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a - constant * b).collect();
    let w2: Vec<f64> = w.iter().map(|x| x * x).collect();
    let kw = k4.apply(&w2);
    let r2: Vec<f64> = vv.iter().zip(&kw).map(|(a, b)| a - b).collect();
    let rel = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
    Ok(IntegralPair {
        first: rel(sup(&r1), sup(&w)),
        second: rel(sup(&r2), sup(&vv)),
        constant,
        omega: w,
        v: vv,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailFit {
    /// lim r^{d-2} f(r).
    pub omega_inf: f64,
    /// RMS misfit of the regression in log coordinates.
    pub residual: f64,
    /// Set when f decays faster than r^{-(d-2)}; omega_inf is then 0.
    pub fast_decay: bool,
}

/// Fit ln(r^{d-2}f) = a + b r^{-2} over [r_max/10, r_max]; ω_∞ = e^a.
pub fn tail_asymptotics(field: &RadialField) -> Result<TailFit> {
    let grid = field.grid();
    let r = grid.nodes();
    let rmax = *r.last().unwrap();
    let p = (grid.d() - 2) as i32;
    let f = field.re();
    let idx: Vec<usize> = (0..r.len()).filter(|&i| r[i] >= rmax / 10.0).collect();
    if idx.len() < 3 {
        return Err(HartreeError::InsufficientSpan);
    }
    let g: Vec<f64> = idx.iter().map(|&i| f[i] * r[i].powi(p)).collect();
    let (g0, g1) = (g[0], *g.last().unwrap());
    if g0 > 0.0 && g1 < 1e-3 * g0 {
        return Ok(TailFit { omega_inf: 0.0, residual: 0.0, fast_decay: true });
    }
    if g.iter().any(|x| !(*x > 0.0)) {
        return Err(HartreeError::NonpositiveTail);
    }
    let xs: Vec<f64> = idx.iter().map(|&i| r[i].powi(-2)).collect();
    let ys: Vec<f64> = g.iter().map(|x| x.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let res = (xs.iter().zip(&ys).map(|(x, y)| (y - a - b * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(TailFit { omega_inf: a.exp(), residual: res, fast_decay: false })
}
