//! The symmetry action u_{θ,μ}(x) = e^{iθ}μ^{-(d-2)/2}u(x/μ) and the
//! orthogonality-based modulation fit around W.
//!
//! The fit never resamples u. Since the Ḣ¹ pairing is invariant under the
//! action, ⟨u_{θ,μ}, f⟩ = ⟨u, f_{-θ,1/μ}⟩, and f ∈ {W, W̃} are known in
//! closed form at every radius.

use crate::error::{HartreeError, Result};
use crate::field::RadialField;
use crate::functionals::{grad_norm_sq, h1_inner};
use crate::ground_state::GroundState;
use crate::interp::Interpolator;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Largest |ln μ| accepted, as a fraction of the grid's log-span.
const SCALE_SPAN_FRACTION: f64 = 0.25;

pub fn check_scale(grid: &crate::grid::RadialGrid, mu: f64) -> Result<()> {
    let r = grid.nodes();
    let span = (r[r.len() - 1] / r[0]).ln();
    if !(mu > 0.0 && mu.is_finite()) || mu.ln().abs() > SCALE_SPAN_FRACTION * span {
        return Err(HartreeError::ScaleOutOfRange(mu));
    }
    Ok(())
}

/// u_{θ,μ} by interpolation in the grid coordinate.
pub fn scale_phase_apply(u: &RadialField, theta: f64, mu: f64) -> Result<RadialField> {
    let grid = u.grid();
    check_scale(grid, mu)?;
    if mu == 1.0 {
        return Ok(u.scale(Complex64::from_polar(1.0, theta)));
    }
    let d = grid.d() as f64;
    let re = u.re();
    let im = u.im();
    let fr = Interpolator::new(grid, &re);
    let fi = Interpolator::new(grid, &im);
    let ph = Complex64::from_polar(mu.powf(-(d - 2.0) / 2.0), theta);
    Ok(RadialField::from_fn(grid.clone(), |r| {
        let y = r / mu;
        ph * Complex64::new(fr.eval(y), fi.eval(y))
    }))
}

#[derive(Debug, Clone, Copy)]
pub struct ModulationOptions {
    /// Basin threshold as a fraction of ‖∇W‖².
    pub delta0_fraction: f64,
    pub max_newton: usize,
    /// Stop when both conditions are below tol·‖u‖_{Ḣ¹}‖W‖_{Ḣ¹}.
    pub tol: f64,
}

impl Default for ModulationOptions {
    fn default() -> Self {
        Self { delta0_fraction: 0.3, max_newton: 30, tol: 1e-13 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModulationFit {
    pub theta: f64,
    pub mu: f64,
    pub alpha: f64,
    pub delta: f64,
    #[serde(skip)]
    pub h: RadialField,
    /// |⟨u_{θ,μ}, iW⟩| / ‖u‖_{Ḣ¹}.
    pub residual_phase: f64,
    /// |⟨u_{θ,μ}, W̃⟩| / ‖u‖_{Ḣ¹}.
    pub residual_scale: f64,
    /// ‖u_{θ,μ} - (1+α)W - h‖ / ‖u‖ (weighted L²).
    pub reconstruction: f64,
    pub iterations: usize,
}

struct Pairings<'a> {
    ground: &'a GroundState,
    su1: Vec<f64>,
    su2: Vec<f64>,
    r: &'a [f64],
    p: f64,
}

impl<'a> Pairings<'a> {
    fn new(u: &'a RadialField, ground: &'a GroundState) -> Self {
        let grid = u.grid();
        let n = grid.len();
        let mut su1 = vec![0.0; n];
        let mut su2 = vec![0.0; n];
        grid.stiffness().matvec(&u.re(), &mut su1);
        grid.stiffness().matvec(&u.im(), &mut su2);
        Self { ground, su1, su2, r: grid.nodes(), p: (grid.d() as f64 - 2.0) / 2.0 }
    }

    /// (⟨u, W_{g⁻¹}⟩, ⟨u, iW_{g⁻¹}⟩, ⟨u, W̃_{g⁻¹}⟩) with g = (θ, μ).
    fn eval(&self, theta: f64, mu: f64) -> [f64; 3] {
        let (s, c) = theta.sin_cos();
        let amp = mu.powf(self.p);
        let mut a = [0.0; 3];
        for (i, &r) in self.r.iter().enumerate() {
            let w = amp * self.ground.profile(mu * r);
            let wt = amp * self.ground.tilde_profile(mu * r);
            let (u1, u2) = (self.su1[i], self.su2[i]);
            // f_{g⁻¹} = e^{-iθ} f(μ·): real part c f, imaginary part -s f
            a[0] += w * (c * u1 - s * u2);
            a[1] += w * (s * u1 + c * u2);
            a[2] += wt * (c * u1 - s * u2);
        }
        a
    }
}

fn wrap(theta: f64) -> f64 {
    theta.rem_euclid(2.0 * PI)
}

pub fn fit_modulation(u: &RadialField, ground: &GroundState) -> Result<ModulationFit> {
    fit_modulation_with(u, ground, ModulationOptions::default())
}

pub fn fit_modulation_with(u: &RadialField, ground: &GroundState, opts: ModulationOptions) -> Result<ModulationFit> {
    u.check_grid(ground.w())?;
    let gw = ground.grad_norm_sq();
    let gu = grad_norm_sq(u);
    let delta = (gu - gw).abs();
    if delta > opts.delta0_fraction * gw {
        return Err(HartreeError::NoConvergence(delta));
    }
    let pr = Pairings::new(u, ground);
    let scale = gu.sqrt() * gw.sqrt();

    // coarse scan maximizing ⟨u_{θ,μ}, W⟩
    let mut best = (0.0, 1.0, f64::NEG_INFINITY);
    for i in 0..16 {
        let th = 2.0 * PI * i as f64 / 16.0;
        for j in 0..16 {
            let mu = (-1.0 + 2.0 * j as f64 / 15.0).exp();
            let f = pr.eval(th, mu)[0];
            if f > best.2 {
                best = (th, mu, f);
            }
        }
    }

    // Newton on G(θ, ln μ) = (⟨u, iW_{g⁻¹}⟩, ⟨u, W̃_{g⁻¹}⟩) with a centered-difference Jacobian
    let (mut th, mut lm) = (best.0, best.1.ln());
    let g = |th: f64, lm: f64| {
        let a = pr.eval(th, lm.exp());
        [a[1], a[2]]
    };
    let mut it = 0;
    let mut cur = g(th, lm);
    let norm = |v: [f64; 2]| v[0].hypot(v[1]);
    while norm(cur) > opts.tol * scale {
        if it >= opts.max_newton {
            return Err(HartreeError::NoConvergence(norm(cur) / scale));
        }
        it += 1;
        let e = 1e-6;
        let a = g(th + e, lm);
        let b = g(th - e, lm);
        let c = g(th, lm + e);
        let dd = g(th, lm - e);
        let j = [
            [(a[0] - b[0]) / (2.0 * e), (c[0] - dd[0]) / (2.0 * e)],
            [(a[1] - b[1]) / (2.0 * e), (c[1] - dd[1]) / (2.0 * e)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(HartreeError::NoConvergence(norm(cur) / scale));
        }
        let dth = (j[1][1] * cur[0] - j[0][1] * cur[1]) / det;
        let dlm = (-j[1][0] * cur[0] + j[0][0] * cur[1]) / det;
        // damping: halve until the residual decreases
        let mut t = 1.0;
        loop {
            let (nth, nlm) = (th - t * dth, lm - t * dlm);
            let nv = g(nth, nlm);
            if norm(nv) < norm(cur) || t < 1e-4 {
                th = nth;
                lm = nlm;
                cur = nv;
                break;
            }
            t *= 0.5;
        }
    }
    let theta = wrap(th);
    let mu = lm.exp();

    let v = scale_phase_apply(u, theta, mu)?;
    let w = ground.w();
    let alpha = h1_inner(&v, w)? / gw - 1.0;
    let h = v.axpy(Complex64::new(-(1.0 + alpha), 0.0), w);
    let iw = w.scale(Complex64::i());
    let nu = gu.sqrt();
    let residual_phase = h1_inner(&v, &iw)?.abs() / nu;
    let residual_scale = h1_inner(&v, ground.wtilde())?.abs() / nu;
    let rec = v.sub(&w.scale_real(1.0 + alpha).add(&h)).l2_norm() / u.l2_norm().max(f64::MIN_POSITIVE);
    Ok(ModulationFit { theta, mu, alpha, delta, h, residual_phase, residual_scale, reconstruction: rec, iterations: it })
}
