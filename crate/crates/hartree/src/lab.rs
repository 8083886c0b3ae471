//! The objects most computations start from, built once per grid.

use crate::eigen::{compute_eigenpair_with, EigenOptions, EigenPair};
use crate::error::Result;
use crate::ground_state::{calibrate_ground_state, GroundState};
use crate::grid::{GridSpec, RadialGrid};
use crate::kernel::{assemble_kernel, NonlocalKernelMatrix};
use crate::linearized::{assemble_linearized, LinearizedSystem};
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct Lab {
    pub grid: Arc<RadialGrid>,
    pub k4: Arc<NonlocalKernelMatrix>,
    pub ground: GroundState,
}

impl Lab {
    /// Grid, γ = 4 kernel and calibrated ground state.
    pub fn new(spec: GridSpec) -> Result<Self> {
        let grid = Arc::new(spec.build()?);
        let k4 = Arc::new(assemble_kernel(&grid, 4.0)?);
        let ground = calibrate_ground_state(&grid, &k4)?;
        Ok(Self { grid, k4, ground })
    }

    pub fn linearized(&self) -> Result<LinearizedSystem> {
        assemble_linearized(&self.ground, &self.k4)
    }

    /// Eigenpair with the symmetric oracle and refinement only.
    pub fn eigenpair_fast(&self, sys: &LinearizedSystem) -> Result<EigenPair> {
        let mut o = EigenOptions::for_size(self.grid.len());
        o.block = false;
        o.pencil = false;
        compute_eigenpair_with(sys, o)
    }
}
