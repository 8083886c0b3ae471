//! Ḣ¹ pairing, energy, gradient variant δ and the HLS functional.

use crate::error::{HartreeError, Result};
use crate::field::RadialField;
use crate::ground_state::GroundState;
use crate::kernel::NonlocalKernelMatrix;
use serde::Serialize;

/// Re ∫ ∇f · ∇ḡ.
pub fn h1_inner(f: &RadialField, g: &RadialField) -> Result<f64> {
    f.check_grid(g)?;
    let grid = f.grid();
    Ok(grid.stiffness_form(&f.re(), &g.re()) + grid.stiffness_form(&f.im(), &g.im()))
}

/// ‖∇u‖².
pub fn grad_norm_sq(u: &RadialField) -> f64 {
    let grid = u.grid();
    let re = u.re();
    let im = u.im();
    grid.stiffness_form(&re, &re) + grid.stiffness_form(&im, &im)
}

fn check_kernel(u: &RadialField, k: &NonlocalKernelMatrix) -> Result<()> {
    k.require_gamma(4.0)?;
    if !(std::sync::Arc::ptr_eq(u.grid(), k.grid()) || **u.grid() == **k.grid()) {
        return Err(HartreeError::KernelMismatch { expected: 4.0, found: k.gamma() });
    }
    Ok(())
}

/// ∬ |u(x)|²|u(y)|² / |x-y|⁴.
pub fn quartic_term(u: &RadialField, k4: &NonlocalKernelMatrix) -> Result<f64> {
    check_kernel(u, k4)?;
    let a = u.abs2();
    Ok(k4.form(&a, &a))
}

/// E(u) = ½‖∇u‖² - ¼ ∬ |u|²|u|²/|x-y|⁴.
pub fn energy(u: &RadialField, k4: &NonlocalKernelMatrix) -> Result<f64> {
    let q = quartic_term(u, k4)?;
    Ok(0.5 * grad_norm_sq(u) - 0.25 * q)
}

/// δ(u) = |‖∇u‖² - ‖∇W‖²|.
pub fn delta(u: &RadialField, ground: &GroundState) -> Result<f64> {
    u.check_grid(ground.w())?;
    Ok((grad_norm_sq(u) - ground.grad_norm_sq()).abs())
}

/// I(u) = ‖∇u‖⁴/‖∇W‖⁴ - ∬|u|²|u|²/|x-y|⁴ / ∬|W|²|W|²/|x-y|⁴.
pub fn hls_functional(u: &RadialField, ground: &GroundState, k4: &NonlocalKernelMatrix) -> Result<f64> {
    let g = grad_norm_sq(u);
    if g == 0.0 {
        return Err(HartreeError::ZeroInput("hls_functional"));
    }
    let gw = ground.grad_norm_sq();
    let q = quartic_term(u, k4)?;
    Ok((g / gw).powi(2) - q / ground.quartic())
}

/// Named scalars tagged with the configuration that produced them.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarReport {
    pub values: Vec<(String, f64)>,
    pub config_hash: String,
}

impl ScalarReport {
    pub fn new(config_hash: impl Into<String>) -> Self {
        Self { values: Vec::new(), config_hash: config_hash.into() }
    }

    pub fn push(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(HartreeError::NonFinite("scalar report"));
        }
        if self.config_hash.is_empty() {
            return Err(HartreeError::ConfigInvalid("empty configuration hash".into()));
        }
        self.values.push((name.to_string(), value));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// Rows `name,value,config_hash` with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,value,config_hash\n");
        for (n, v) in &self.values {
            s.push_str(&format!("{n},{v:.17e},{}\n", self.config_hash));
        }
        s
    }
}
