//! Threshold solutions: the exponential series h^a_k = Σ e^{-je₀t}Z_j, the
//! approximate data U^{±1}_k(t₀) and their forward/backward behaviour.
//!
//! The series is handled as a polynomial in X = e^{-e₀t} with field
//! coefficients. Since R is cubic, a degree-k h gives a residual polynomial of
//! degree 3k, kept in full.

use crate::error::{HartreeError, Result};
use crate::evolution::{evolve, Direction, EvolutionConfig, EvolutionContext, Flag, TrajectoryRecord};
use crate::eigen::EigenPair;
use crate::field::RadialField;
use crate::functionals::{energy, grad_norm_sq};
use crate::linearized::LinearizedSystem;
use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

/// Largest accepted e₀‖(𝓛 - je₀)⁻¹‖.
pub const RESOLVENT_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Serialize)]
pub struct OrderResidual {
    pub order: usize,
    /// Weighted L² norm of the X^order coefficient of ∂ₜh + 𝓛h - R(h).
    pub norm: f64,
    /// norm / max_j ‖Z_j‖.
    pub relative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionSeries {
    pub a: f64,
    pub e0: f64,
    pub k: usize,
    /// Z_1..Z_k.
    #[serde(skip)]
    pub z: Vec<RadialField>,
    /// Residual coefficients for orders 1..=3k.
    #[serde(skip)]
    pub residual_coeffs: Vec<RadialField>,
    pub residuals: Vec<OrderResidual>,
    /// e₀‖(𝓛 - je₀)⁻¹‖ for j = 2..=k.
    pub resolvent: Vec<f64>,
    #[serde(skip)]
    w: RadialField,
}

fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}

/// Coefficients of R(h) for h = Σ_{j≥1} X^j H[j-1], up to order 3·len(H).
fn remainder_poly(h: &[Vec<Complex64>], w: &[f64], sys: &LinearizedSystem) -> Vec<Vec<Complex64>> {
    let k = h.len();
    let n = w.len();
    let k4 = sys.kernel();
    let top = 3 * k;
    // K|h|² at orders 2..=2k, K(W Re h) at orders 1..=k
    let mut krho = vec![vec![0.0; n]; 2 * k + 1];
    for (m, slot) in krho.iter_mut().enumerate().skip(2) {
        let mut rho = vec![0.0; n];
        for p in 1..m {
            let q = m - p;
            if p > k || q > k {
                continue;
            }
            for i in 0..n {
                rho[i] += (h[p - 1][i].conj() * h[q - 1][i]).re;
            }
        }
        *slot = k4.apply(&rho);
    }
    let mut ks = vec![vec![0.0; n]; k + 1];
    for m in 1..=k {
        let s: Vec<f64> = (0..n).map(|i| w[i] * h[m - 1][i].re).collect();
        ks[m] = k4.apply(&s);
    }
    let i1 = Complex64::i();
    let mut out = vec![zeros(n); top + 1];
    for (m, c) in out.iter_mut().enumerate() {
        if m < 2 {
            continue;
        }
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            if m <= 2 * k {
                acc += krho[m][i] * w[i];
            }
            for q in 1..=k.min(m - 1) {
                let p = m - q;
                if p <= 2 * k {
                    acc += krho[p][i] * h[q - 1][i];
                }
                if p <= k {
                    acc += 2.0 * ks[p][i] * h[q - 1][i];
                }
            }
            c[i] = i1 * acc;
        }
    }
    out
}

fn field(sys: &LinearizedSystem, v: Vec<Complex64>) -> RadialField {
    RadialField::new(sys.grid().clone(), v).expect("length matches grid")
}

/// Residual coefficients E_m = m-th coefficient of ∂ₜh + 𝓛h - R(h), m = 1..=3k.
fn residual_poly(h: &[Vec<Complex64>], e0: f64, sys: &LinearizedSystem) -> Vec<Vec<Complex64>> {
    let w = sys.ground().w().re();
    let r = remainder_poly(h, &w, sys);
    let mut e = Vec::with_capacity(r.len() - 1);
    for (m, rm) in r.iter().enumerate().skip(1) {
        let mut c: Vec<Complex64> = rm.iter().map(|z| -z).collect();
        if m <= h.len() {
            let hm = &h[m - 1];
            let re: Vec<f64> = hm.iter().map(|z| z.re).collect();
            let im: Vec<f64> = hm.iter().map(|z| z.im).collect();
            let (a, b) = sys.apply_block(&re, &im);
            for i in 0..c.len() {
                c[i] += Complex64::new(a[i], b[i]) - m as f64 * e0 * hm[i];
            }
        }
        e.push(c);
    }
    e
}

/// Solve (𝓛 - s)z = c as a real 2N system; returns z and e₀‖(𝓛 - s)⁻¹‖₂ (power estimate).
fn shifted_solve(sys: &LinearizedSystem, shift: f64, e0: f64, c: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let n = sys.len();
    let mut a = sys.block_matrix();
    for i in 0..2 * n {
        a[(i, i)] -= shift;
    }
    let lu = a.partial_piv_lu();
    let mut rhs = Mat::from_fn(2 * n, 1, |i, _| if i < n { c[i].re } else { c[i - n].im });
    lu.solve_in_place(&mut rhs);
    // one step of iterative refinement
    let z1: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    let z2: Vec<f64> = (0..n).map(|i| rhs[(i + n, 0)]).collect();
    let (a1, a2) = sys.apply_block(&z1, &z2);
    let mut corr = Mat::from_fn(2 * n, 1, |i, _| {
        if i < n {
            c[i].re - (a1[i] - shift * z1[i])
        } else {
            c[i - n].im - (a2[i - n] - shift * z2[i - n])
        }
    });
    lu.solve_in_place(&mut corr);
    rhs += &corr;
    // ‖A⁻¹‖₂ from a few steps of power iteration on A⁻ᵀA⁻¹
    let mut x = Mat::from_fn(2 * n, 1, |i, _| 1.0 + 0.1 * ((i * 7919) % 13) as f64);
    let mut sigma = 0.0;
    for _ in 0..6 {
        let nx = x.norm_l2();
        x = x * faer::Scale(1.0 / nx);
        lu.solve_in_place(&mut x);
        sigma = x.norm_l2();
        lu.solve_transpose_in_place(&mut x);
    }
    let cond = e0 * sigma;
    if !cond.is_finite() || (0..2 * n).any(|i| !rhs[(i, 0)].is_finite()) {
        return Err(HartreeError::LinearSolveFailure("shifted resolvent"));
    }
    Ok(((0..n).map(|i| Complex64::new(rhs[(i, 0)], rhs[(i + n, 0)])).collect(), cond))
}

/// Build Z_1 = a𝒴₊ and Z_{j} = (𝓛 - je₀)⁻¹ c_j, with c_j the X^j coefficient of R(h_{j-1}).
pub fn build_expansion(a: f64, k: usize, sys: &LinearizedSystem, pair: &EigenPair) -> Result<ExpansionSeries> {
    if k == 0 {
        return Err(HartreeError::ConfigInvalid("expansion order k = 0".into()));
    }
    if !a.is_finite() {
        return Err(HartreeError::ConfigInvalid(format!("a = {a}")));
    }
    sys.ground().w().check_grid(&pair.y1)?;
    let b = sys.bilinear_b(&pair.y_plus(), &pair.y_minus())?;
    if (b - 1.0).abs() > 1e-8 {
        return Err(HartreeError::UnnormalizedPair(b));
    }
    let e0 = pair.e0;
    let w = sys.ground().w().re();
    let yp = pair.y_plus();
    let mut h: Vec<Vec<Complex64>> = vec![yp.values().iter().map(|z| a * z).collect()];
    let mut resolvent = Vec::new();
    for j in 2..=k {
        let r = remainder_poly(&h, &w, sys);
        let (z, cond) = if a == 0.0 {
            (zeros(w.len()), 0.0)
        } else {
            shifted_solve(sys, j as f64 * e0, e0, &r[j])?
        };
        if cond > RESOLVENT_LIMIT {
            return Err(HartreeError::ResolventNearSingular { order: j, cond });
        }
        resolvent.push(cond);
        h.push(z);
    }
    let e = residual_poly(&h, e0, sys);
    let grid = sys.grid();
    let l2 = |v: &[Complex64]| {
        let a: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
        grid.sum(&a).sqrt()
    };
    let zmax = h.iter().map(|v| l2(v)).fold(0.0, f64::max);
    let residuals = e
        .iter()
        .enumerate()
        .map(|(m, c)| {
            let norm = l2(c);
            OrderResidual { order: m + 1, norm, relative: if zmax > 0.0 { norm / zmax } else { 0.0 } }
        })
        .collect();
    Ok(ExpansionSeries {
        a,
        e0,
        k,
        z: h.into_iter().map(|v| field(sys, v)).collect(),
        residual_coeffs: e.into_iter().map(|v| field(sys, v)).collect(),
        residuals,
        resolvent,
        w: sys.ground().w().clone(),
    })
}

impl ExpansionSeries {
    /// h^a_k(t).
    pub fn correction(&self, t: f64) -> RadialField {
        let x = (-self.e0 * t).exp();
        let mut out = RadialField::zeros(self.w.grid().clone());
        let mut xp = 1.0;
        for z in &self.z {
            xp *= x;
            out = out.axpy(Complex64::new(xp, 0.0), z);
        }
        out
    }

    /// Σ_m X^m E_m: the residual assembled from the stored coefficients.
    pub fn residual_from_coefficients(&self, t: f64) -> RadialField {
        let x = (-self.e0 * t).exp();
        let mut out = RadialField::zeros(self.w.grid().clone());
        let mut xp = 1.0;
        for c in &self.residual_coeffs {
            xp *= x;
            out = out.axpy(Complex64::new(xp, 0.0), c);
        }
        out
    }

    /// β(t) = ∫_t^∞ e^{-e₀(s-t)} B(E(s), 𝒴₊) ds restricted to the neglected
    /// orders: the 𝒴₋ coefficient that keeps the linearized error bounded.
    pub fn unstable_shift(&self, sys: &LinearizedSystem, pair: &EigenPair, t: f64) -> f64 {
        let x = (-self.e0 * t).exp();
        let yp = pair.y_plus();
        let (y1, y2) = (yp.re(), yp.im());
        self.residual_coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| i + 1 > self.k)
            .map(|(i, c)| {
                let m = (i + 1) as f64;
                sys.form_b(&c.re(), &c.im(), &y1, &y2) * x.powf(m) / ((m + 1.0) * self.e0)
            })
            .sum()
    }

    /// Σ_{m>k} ‖E_m‖ X^m at time t.
    pub fn tail_bound(&self, t: f64) -> f64 {
        let x = (-self.e0 * t).exp();
        self.residuals.iter().filter(|r| r.order > self.k).map(|r| r.norm * x.powi(r.order as i32)).sum()
    }
}

/// U^a_k(t) = W + h^a_k(t).
pub fn evaluate_approximation(series: &ExpansionSeries, t: f64) -> RadialField {
    series.w.add(&series.correction(t))
}

/// ∂ₜh + 𝓛h - R(h) at time t, evaluated directly on the fields.
pub fn time_residual(series: &ExpansionSeries, sys: &LinearizedSystem, t: f64) -> Result<RadialField> {
    let x = (-series.e0 * t).exp();
    let h = series.correction(t);
    let mut dh = RadialField::zeros(h.grid().clone());
    let mut xp = 1.0;
    for (j, z) in series.z.iter().enumerate() {
        xp *= x;
        dh = dh.axpy(Complex64::new(-((j + 1) as f64) * series.e0 * xp, 0.0), z);
    }
    let lh = sys.apply_block_field(&h)?;
    let r = sys.remainder_r(&h)?;
    Ok(dh.add(&lh).sub(&r))
}

#[derive(Debug, Clone, Copy)]
pub struct WpmOptions {
    pub k: usize,
    /// t₀ in units of 1/e₀.
    pub t0_factor: f64,
    /// Largest accepted tail_bound(t₀)/‖W‖ (weighted L²).
    pub limit: f64,
    /// Remove the growing 𝒴₋ component forced by the neglected orders.
    pub stable_correction: bool,
}

impl Default for WpmOptions {
    fn default() -> Self {
        Self { k: 3, t0_factor: 2.0, limit: 1e-2, stable_correction: true }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WpmData {
    pub sign: f64,
    pub t0: f64,
    pub k: usize,
    #[serde(skip)]
    pub u0: RadialField,
    pub energy: f64,
    pub energy_w: f64,
    pub grad_norm_sq: f64,
    pub grad_norm_sq_w: f64,
    /// Relative size of the neglected residual orders at t₀.
    pub tail_bound: f64,
    /// Coefficient of 𝒴₋ added to U_k(t₀).
    pub unstable_shift: f64,
    pub series: ExpansionSeries,
}

impl WpmData {
    pub fn energy_error(&self) -> f64 {
        (self.energy - self.energy_w).abs() / self.energy_w
    }
}

/// U^{±1}_k(t₀) as a stand-in for W^±(0).
pub fn wpm_initial_data(sign: f64, sys: &LinearizedSystem, pair: &EigenPair, opts: WpmOptions) -> Result<WpmData> {
    if sign != 1.0 && sign != -1.0 {
        return Err(HartreeError::ConfigInvalid(format!("sign = {sign}, expected ±1")));
    }
    let t0 = opts.t0_factor / pair.e0;
    if !(t0 > 0.0) {
        return Err(HartreeError::ConfigInvalid(format!("t0 = {t0}")));
    }
    let series = build_expansion(sign, opts.k, sys, pair)?;
    let w = sys.ground().w();
    let bound = series.tail_bound(t0) / w.l2_norm();
    if bound > opts.limit {
        return Err(HartreeError::T0TooSmall { t0, bound, limit: opts.limit });
    }
    let shift = if opts.stable_correction { series.unstable_shift(sys, pair, t0) } else { 0.0 };
    let u0 = evaluate_approximation(&series, t0).axpy(Complex64::new(shift, 0.0), &pair.y_minus());
    let k4 = sys.kernel();
    Ok(WpmData {
        sign,
        t0,
        k: opts.k,
        energy: energy(&u0, k4)?,
        energy_w: energy(w, k4)?,
        grad_norm_sq: grad_norm_sq(&u0),
        grad_norm_sq_w: sys.ground().grad_norm_sq(),
        u0,
        tail_bound: bound,
        unstable_shift: shift,
        series,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub sign: f64,
    pub direction: Direction,
    pub e0: f64,
    /// Decay rate of δ(t) from a least-squares fit of ln δ.
    pub rate_delta: Option<f64>,
    /// Decay rate of ‖u_{θ,μ} - W‖_{Ḣ¹}.
    pub rate_distance: Option<f64>,
    pub window: (f64, f64),
    /// The trajectory left the modulation basin inside the window.
    pub left_basin: bool,
    pub status: Flag,
    pub record: TrajectoryRecord,
}

impl ThresholdReport {
    pub fn rate_error(&self) -> Option<f64> {
        self.rate_delta.map(|r| (r - self.e0).abs() / self.e0)
    }
}

fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Evolve W^± data over |t| ≤ horizon. Forward runs fit the decay rates on
/// the whole horizon; backward runs only record flags.
pub fn verify_threshold_convergence(
    data: &WpmData,
    horizon: f64,
    direction: Direction,
    cfg: &EvolutionConfig,
    ctx: &EvolutionContext,
) -> Result<ThresholdReport> {
    let e0 = data.series.e0;
    let cfg = EvolutionConfig { t_end: horizon, direction, ..cfg.clone() };
    let record = evolve(&data.u0, &cfg, ctx)?;
    let mut pd = Vec::new();
    let mut ph = Vec::new();
    let mut left = false;
    for s in &record.samples {
        if s.delta > 0.0 {
            pd.push((s.t.abs(), s.delta.ln()));
        }
        match s.distance {
            Some(d) if d > 0.0 => ph.push((s.t.abs(), d.ln())),
            Some(_) => {}
            None => left = true,
        }
    }
    let fwd = direction == Direction::Forward;
    let rate_delta = if fwd { slope(&pd).map(|s| -s) } else { None };
    let rate_distance = if fwd { slope(&ph).map(|s| -s) } else { None };
    let end = record.samples.last().map_or(0.0, |s| s.t);
    Ok(ThresholdReport {
        sign: data.sign,
        direction,
        e0,
        rate_delta,
        rate_distance,
        window: (0.0, end),
        left_basin: left,
        status: record.status,
        record,
    })
}
