//! Angular averages of |x - y|^{-γ} for radial functions.
//!
//! `V_γ(t) = ∫_{S^{d-1}} |t e₁ - ω|^{-γ} dω`, so that
//! `(|x|^{-γ} * g)(r) = ∫ ρ^{d-1-γ} V_γ(r/ρ) g(ρ) dρ`.

use crate::error::{HartreeError, Result};
use crate::grid::sphere_area;
use crate::quad::integrate;
use std::f64::consts::PI;

/// Half-width of the band around t = 1 where the divergent kernels refuse to evaluate.
pub const SINGULAR_BAND: f64 = 1e-12;

/// Whether V_γ diverges at t = 1.
pub fn diverges_on_diagonal(d: usize, gamma: f64) -> bool {
    gamma >= (d - 1) as f64
}

/// V_γ(ρ) by adaptive quadrature of the polar-angle integral.
pub fn angular_kernel(d: usize, gamma: f64, rho: f64) -> Result<f64> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(HartreeError::NonFinite("angular kernel argument"));
    }
    if (rho - 1.0).abs() < SINGULAR_BAND && diverges_on_diagonal(d, gamma) {
        return Err(HartreeError::DiagonalSingularity(rho));
    }
    if rho > 1.0 {
        // V(ρ) = ρ^{-γ} V(1/ρ)
        return Ok(rho.powf(-gamma) * angular_quad(d, gamma, 1.0 / rho));
    }
    Ok(angular_quad(d, gamma, rho))
}

fn angular_quad(d: usize, gamma: f64, t: f64) -> f64 {
    let w = sphere_area(d - 2);
    let m = (d - 2) as i32;
    let f = |th: f64| {
        let s = th.sin();
        if s == 0.0 {
            return 0.0;
        }
        // t² - 2t cos θ + 1 = (1-t)² + 4t sin²(θ/2), stable near t = 1
        let h = (0.5 * th).sin();
        let q = (1.0 - t) * (1.0 - t) + 4.0 * t * h * h;
        s.powi(m) * q.powf(-0.5 * gamma)
    };
    let gap = (1.0 - t).abs().max(1e-10);
    let mut breaks = Vec::new();
    let mut b = gap;
    while b < PI {
        breaks.push(b);
        b *= 4.0;
    }
    w * integrate(f, 0.0, PI, &breaks, 1e-13, 0.0)
}

/// Closed form for d = 5, γ = 4, valid for t ≠ 1.
pub fn v5_gamma4(t: f64) -> f64 {
    if t > 1.0 {
        return t.powi(-4) * v5_gamma4_lt1(1.0 / t);
    }
    v5_gamma4_lt1(t)
}

fn v5_gamma4_lt1(t: f64) -> f64 {
    let pi2 = PI * PI;
    if t < 0.2 {
        // 2π² Σ_{k≥1} t^{2k-2} 4k/(4k²-1)
        let t2 = t * t;
        let mut acc = 0.0;
        let mut p = 1.0;
        for k in 1..40 {
            let kf = k as f64;
            acc += p * 4.0 * kf / (4.0 * kf * kf - 1.0);
            p *= t2;
            if p < 1e-18 {
                break;
            }
        }
        2.0 * pi2 * acc
    } else {
        let l = ((1.0 + t) / (1.0 - t)).ln();
        pi2 * ((1.0 + t * t) * l - 2.0 * t) / (t * t * t)
    }
}

/// Newton's theorem: V_{d-2}(t) = |S^{d-1}| min(1, t^{-(d-2)}).
pub fn newton_kernel(d: usize, t: f64) -> f64 {
    sphere_area(d - 1) * if t <= 1.0 { 1.0 } else { t.powi(-((d - 2) as i32)) }
}

/// Evaluator choosing the closed form when one is available.
#[derive(Debug, Clone, Copy)]
pub struct AngularKernel {
    pub d: usize,
    pub gamma: f64,
}

impl AngularKernel {
    pub fn new(d: usize, gamma: f64) -> Result<Self> {
        if !(gamma == 4.0 || gamma == (d - 2) as f64) {
            return Err(HartreeError::UnsupportedExponent(gamma));
        }
        Ok(Self { d, gamma })
    }

    pub fn has_closed_form(&self) -> bool {
        self.gamma == (self.d - 2) as f64 || (self.d == 5 && self.gamma == 4.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.gamma == (self.d - 2) as f64 {
            newton_kernel(self.d, t)
        } else if self.d == 5 && self.gamma == 4.0 {
            v5_gamma4(t)
        } else {
            angular_kernel(self.d, self.gamma, t).unwrap_or(f64::INFINITY)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_matches_quadrature() {
        for &t in &[0.0, 0.05, 0.3, 0.7, 0.95, 0.999, 1.001, 1.5, 3.0, 40.0] {
            let q = angular_kernel(5, 4.0, t).unwrap();
            let c = v5_gamma4(t);
            assert!(((q - c) / c).abs() < 1e-9, "t={t} q={q} c={c}");
        }
    }

    #[test]
    fn newton_matches_quadrature() {
        for d in [5usize, 6, 7] {
            for &t in &[0.2, 0.9, 1.0, 1.1, 4.0] {
                let q = angular_kernel(d, (d - 2) as f64, t).unwrap();
                let c = newton_kernel(d, t);
                assert!(((q - c) / c).abs() < 1e-9, "d={d} t={t}");
            }
        }
    }

    #[test]
    fn diagonal_refused() {
        assert!(angular_kernel(5, 4.0, 1.0).is_err());
        assert!(angular_kernel(5, 3.0, 1.0).is_ok());
    }
}
