//! The real eigenpair 𝓛𝒴± = ±e₀𝒴± and its cross-checks.
//!
//! Three independent computations of e₀:
//! * `block`: real eigenvalues of the full 2N×2N generator,
//! * `pencil`: negative eigenvalues of L₋L₊ (= -e₀²),
//! * `symmetric`: lowest eigenvalue of L₋^{1/2} L₊ L₋^{1/2}, assembled on the
//!   low modes of L₋ with the null direction removed.
//!
//! Everything runs in the symmetrized coordinates x̂ = M^{1/2} x.

use crate::error::{HartreeError, Result};
use crate::field::RadialField;
use crate::functionals::h1_inner;
use crate::linearized::LinearizedSystem;
use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use serde::Serialize;

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Run the dense block-matrix oracle.
    pub block: bool,
    /// Run the dense L₋L₊ oracle.
    pub pencil: bool,
    /// Modes of L₋ with eigenvalue above this are dropped from the symmetric oracle.
    pub mode_cut: f64,
    /// Inverse-iteration sweeps on the block generator.
    pub refine_steps: usize,
}

impl EigenOptions {
    /// Dense oracles on when N ≤ 1024.
    pub fn for_size(n: usize) -> Self {
        Self { block: n <= 1024, pencil: n <= 1024, mode_cut: 1e4, refine_steps: 2 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleReport {
    pub block: Option<f64>,
    pub pencil: Option<f64>,
    pub symmetric: f64,
    /// Positive real eigenvalues of the block generator, if computed.
    pub block_count: Option<usize>,
    /// Negative eigenvalues of the symmetric operator.
    pub symmetric_count: usize,
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub e0: f64,
    /// Re 𝒴₊.
    pub y1: RadialField,
    /// Im 𝒴₊.
    pub y2: RadialField,
    /// B(𝒴₊, 𝒴₋) before rescaling, for ‖𝒴₊‖_{L²} = 1.
    pub pre_normalization: f64,
    /// ‖𝓛𝒴₊ - e₀𝒴₊‖ / ‖𝒴₊‖ in the weighted L² norm.
    pub residual: f64,
    pub oracles: OracleReport,
    /// R² of the log-linear fit of |𝒴₊| on its decay window.
    pub tail_r2: f64,
}

impl EigenPair {
    pub fn y_plus(&self) -> RadialField {
        RadialField::from_parts(self.y1.grid().clone(), &self.y1.re(), &self.y2.re())
    }
    /// 𝒴₋ = -conj(𝒴₊), an eigenvector for -e₀ with B(𝒴₊, 𝒴₋) = 1.
    pub fn y_minus(&self) -> RadialField {
        let a: Vec<f64> = self.y1.re().iter().map(|x| -x).collect();
        RadialField::from_parts(self.y1.grid().clone(), &a, &self.y2.re())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// e₀ from the real spectrum of the block generator; also counts positive real eigenvalues.
pub fn block_oracle(sys: &LinearizedSystem) -> Result<(f64, usize)> {
    let n = sys.len();
    let lp = sys.hat(true);
    let lm = sys.hat(false);
    let blk = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, false) => -lm[(i, j - n)],
        (false, true) => lp[(i - n, j)],
        _ => 0.0,
    });
    let ev = blk.eigenvalues().map_err(|e| HartreeError::EigenFailure(format!("{e:?}")))?;
    let real: Vec<f64> = ev
        .iter()
        .filter(|z| z.re > 1e-2 && z.im.abs() <= 1e-8 * z.re.abs().max(1.0))
        .map(|z| z.re)
        .collect();
    let best = real.iter().cloned().fold(f64::NAN, f64::max);
    if real.is_empty() {
        return Err(HartreeError::NoRealEigenvalue);
    }
    Ok((best, real.len()))
}

/// e₀ = sqrt(-λ) for the negative eigenvalue λ of L₋L₊.
pub fn pencil_oracle(sys: &LinearizedSystem) -> Result<(f64, usize)> {
    let lp = sys.hat(true);
    let lm = sys.hat(false);
    let prod = &lm * &lp;
    let ev = prod.eigenvalues().map_err(|e| HartreeError::EigenFailure(format!("{e:?}")))?;
    let lmin = ev.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if !(lmin < 0.0) {
        return Err(HartreeError::NoRealEigenvalue);
    }
    let neg: Vec<f64> = ev
        .iter()
        .filter(|z| z.re < -1e-3 * lmin.abs() && z.im.abs() <= 1e-8 * z.re.abs())
        .map(|z| z.re)
        .collect();
    if neg.is_empty() {
        return Err(HartreeError::NoRealEigenvalue);
    }
    Ok(((-lmin).sqrt(), neg.len()))
}

/// Lowest eigenpair of L₋^{1/2}L₊L₋^{1/2}; returns (e₀, count of negative
/// eigenvalues, Ŷ₁ in symmetrized coordinates).
pub fn symmetric_oracle(sys: &LinearizedSystem, mode_cut: f64) -> Result<(f64, usize, Vec<f64>)> {
    let n = sys.len();
    let lp = sys.hat(true);
    let lm = sys.hat(false);
    let e = lm.self_adjoint_eigen(Side::Lower).map_err(|e| HartreeError::EigenFailure(format!("{e:?}")))?;
    let s: Vec<f64> = e.S().column_vector().iter().copied().collect();
    let q = e.U();
    // index 0 is the discrete null direction of L₋
    let keep: Vec<usize> = (1..n).filter(|&j| s[j] < mode_cut).collect();
    let m = keep.len();
    if m < 2 {
        return Err(HartreeError::NoRealEigenvalue);
    }
    let qk = Mat::from_fn(n, m, |i, j| q[(i, keep[j])]);
    let a = qk.transpose() * &lp * &qk;
    let sq: Vec<f64> = keep.iter().map(|&j| s[j].max(0.0).sqrt()).collect();
    let p = Mat::from_fn(m, m, |i, j| sq[i] * 0.5 * (a[(i, j)] + a[(j, i)]) * sq[j]);
    let pe = p.self_adjoint_eigen(Side::Lower).map_err(|e| HartreeError::EigenFailure(format!("{e:?}")))?;
    let ev: Vec<f64> = pe.S().column_vector().iter().copied().collect();
    let lmin = ev[0];
    if !(lmin < 0.0) {
        return Err(HartreeError::NoRealEigenvalue);
    }
    let count = ev.iter().filter(|x| **x < -1e-3 * lmin.abs()).count();
    let c: Vec<f64> = (0..m).map(|j| sq[j] * pe.U()[(j, 0)]).collect();
    let y: Vec<f64> = (0..n).map(|i| (0..m).map(|j| qk[(i, j)] * c[j]).sum()).collect();
    Ok(((-lmin).sqrt(), count, y))
}

/// Fit ln|f| = a + b r where 10⁻¹⁰ ≤ |f|/max|f| ≤ 10⁻³; returns R².
pub fn tail_r_squared(r: &[f64], amp: &[f64]) -> f64 {
    let mx = amp.iter().cloned().fold(0.0, f64::max);
    let imax = amp.iter().position(|a| *a == mx).unwrap_or(0);
    let pts: Vec<(f64, f64)> = (imax..r.len())
        .filter(|&i| amp[i] >= 1e-10 * mx && amp[i] <= 1e-3 * mx)
        .map(|i| (r[i], amp[i].ln()))
        .collect();
    if pts.len() < 3 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - ym).powi(2)).sum();
    if syy == 0.0 {
        return 0.0;
    }
    sxy * sxy / (sxx * syy)
}

pub fn compute_eigenpair(sys: &LinearizedSystem) -> Result<EigenPair> {
    compute_eigenpair_with(sys, EigenOptions::for_size(sys.len()))
}

pub fn compute_eigenpair_with(sys: &LinearizedSystem, opts: EigenOptions) -> Result<EigenPair> {
    let n = sys.len();
    let grid = sys.grid().clone();
    let w = grid.weights();
    let sqw: Vec<f64> = w.iter().map(|x| x.sqrt()).collect();

    let (e_sym, sym_count, yh1) = symmetric_oracle(sys, opts.mode_cut)?;
    if sym_count > 1 {
        return Err(HartreeError::SpuriousMultiplicity(sym_count));
    }
    let (block, block_count) = if opts.block {
        let (e, c) = block_oracle(sys)?;
        if c > 1 {
            return Err(HartreeError::SpuriousMultiplicity(c));
        }
        (Some(e), Some(c))
    } else {
        (None, None)
    };
    let pencil = if opts.pencil { Some(pencil_oracle(sys)?.0) } else { None };

    // inverse iteration on the block generator in symmetrized coordinates
    let lp = sys.hat(true);
    let lm = sys.hat(false);
    let mut e0 = e_sym;
    let yh2: Vec<f64> = {
        let v = &lp * faer::Col::from_fn(n, |i| yh1[i]);
        v.iter().map(|x| x / e0).collect()
    };
    let mut x: Vec<f64> = yh1.iter().chain(yh2.iter()).copied().collect();
    let apply = |x: &[f64]| -> Vec<f64> {
        let a = &lm * faer::Col::from_fn(n, |i| x[n + i]);
        let b = &lp * faer::Col::from_fn(n, |i| x[i]);
        a.iter().map(|v| -v).chain(b.iter().copied()).collect()
    };
    let rayleigh = |x: &[f64], lx: &[f64]| -> f64 {
        // left eigenvector of the block is the swap (x₂, x₁)
        let num = dot(&x[n..], &lx[..n]) + dot(&x[..n], &lx[n..]);
        let den = 2.0 * dot(&x[..n], &x[n..]);
        num / den
    };
    if opts.refine_steps > 0 {
        let shifted = Mat::from_fn(2 * n, 2 * n, |i, j| {
            let v = match (i < n, j < n) {
                (true, false) => -lm[(i, j - n)],
                (false, true) => lp[(i - n, j)],
                _ => 0.0,
            };
            if i == j {
                v - e0
            } else {
                v
            }
        });
        let lu = shifted.partial_piv_lu();
        for _ in 0..opts.refine_steps {
            let mut rhs = Mat::from_fn(2 * n, 1, |i, _| x[i]);
            lu.solve_in_place(&mut rhs);
            let nrm = (0..2 * n).map(|i| rhs[(i, 0)].powi(2)).sum::<f64>().sqrt();
            if !nrm.is_finite() || nrm == 0.0 {
                return Err(HartreeError::LinearSolveFailure("eigenvector refinement"));
            }
            x = (0..2 * n).map(|i| rhs[(i, 0)] / nrm).collect();
        }
        e0 = rayleigh(&x, &apply(&x));
    }
    let lx = apply(&x);
    let res: f64 = lx.iter().zip(&x).map(|(a, b)| (a - e0 * b).powi(2)).sum::<f64>().sqrt();
    let nx: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let residual = res / nx;

    let mut y1: Vec<f64> = (0..n).map(|i| x[i] / sqw[i]).collect();
    let mut y2: Vec<f64> = (0..n).map(|i| x[n + i] / sqw[i]).collect();
    let l2 = (grid.dot(&y1, &y1) + grid.dot(&y2, &y2)).sqrt();
    y1.iter_mut().chain(y2.iter_mut()).for_each(|v| *v /= l2);

    // B(𝒴₊, -conj 𝒴₊) = -½⟨L₊Y₁,Y₁⟩ + ½⟨L₋Y₂,Y₂⟩
    let neg: Vec<f64> = y1.iter().map(|v| -v).collect();
    let pre = sys.form_b(&y1, &y2, &neg, &y2);
    if !(pre > 0.0) {
        return Err(HartreeError::UnnormalizedPair(pre));
    }
    let mut sc = 1.0 / pre.sqrt();
    let wf = sys.ground().w();
    let y1f = RadialField::from_real(grid.clone(), &y1);
    if h1_inner(wf, &y1f)? < 0.0 {
        sc = -sc;
    }
    y1.iter_mut().chain(y2.iter_mut()).for_each(|v| *v *= sc);

    let amp: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a.hypot(*b)).collect();
    let tail_r2 = tail_r_squared(grid.nodes(), &amp);

    Ok(EigenPair {
        e0,
        y1: RadialField::from_real(grid.clone(), &y1),
        y2: RadialField::from_real(grid, &y2),
        pre_normalization: pre,
        residual,
        oracles: OracleReport { block, pencil, symmetric: e_sym, block_count, symmetric_count: sym_count },
        tail_r2,
    })
}
