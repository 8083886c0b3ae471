use crate::error::{HartreeError, Result};
use crate::grid::RadialGrid;
use num_complex::Complex64;
use std::sync::Arc;

/// Complex samples of a radial function on a shared grid.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<RadialGrid>,
    values: Vec<Complex64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HartreeError::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HartreeError::NonFinite("field values"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_real(grid: Arc<RadialGrid>, re: &[f64]) -> Self {
        assert_eq!(re.len(), grid.len());
        Self { grid, values: re.iter().map(|x| Complex64::new(*x, 0.0)).collect() }
    }

    pub fn from_parts(grid: Arc<RadialGrid>, re: &[f64], im: &[f64]) -> Self {
        assert_eq!(re.len(), grid.len());
        assert_eq!(im.len(), grid.len());
        Self { grid, values: re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect() }
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|r| f(*r)).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|r| Complex64::new(f(*r), 0.0)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
    pub fn im(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }
    pub fn abs2(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn same_grid(&self, other: &RadialField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn check_grid(&self, other: &RadialField) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(HartreeError::GridMismatch)
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, c: Complex64) -> RadialField {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> RadialField {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn conj(&self) -> RadialField {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v.conj()).collect() }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &RadialField) -> RadialField {
        debug_assert!(self.same_grid(other));
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn add(&self, other: &RadialField) -> RadialField {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &RadialField) -> RadialField {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    /// Weighted L² norm.
    pub fn l2_norm(&self) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(v, w)| w * v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Δu with the grid's boundary closure.
    pub fn laplacian(&self) -> RadialField {
        let re = self.grid.laplacian_real(&self.re());
        let im = self.grid.laplacian_real(&self.im());
        Self::from_parts(self.grid.clone(), &re, &im)
    }
}

/// Radial Laplacian of a field (inner regularity, declared outer closure).
pub fn apply_laplacian(field: &RadialField) -> RadialField {
    field.laplacian()
}
