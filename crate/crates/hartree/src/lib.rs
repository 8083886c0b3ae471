//! Numerical laboratory for the radial, focusing, energy-critical Hartree
//! equation `i∂ₜu + Δu + (|x|⁻⁴ * |u|²)u = 0` in dimension `d ≥ 5`.

pub mod angular;
pub mod band;
pub mod coercivity;
pub mod eigen;
pub mod error;
pub mod evolution;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod ground_state;
pub mod interp;
pub mod kernel;
pub mod lab;
pub mod linearized;
pub mod modulation;
pub mod quad;
pub mod special;
pub mod trial;

pub use error::{HartreeError, Result};
pub use field::{apply_laplacian, RadialField};
pub use functionals::{delta, energy, grad_norm_sq, h1_inner, hls_functional, quartic_term, ScalarReport};
pub use grid::{build_grid, Grading, GridSpec, OuterBoundary, RadialGrid};
pub use ground_state::{calibrate_ground_state, kelvin_transform, GroundState};
pub use kernel::{assemble_kernel, NonlocalKernelMatrix};
pub use linearized::{assemble_linearized, LinearizedSystem};
pub use coercivity::{coercivity_constant, decompose_perturbation, Decomposition, Subspace, SubspaceProjector};
pub use eigen::{compute_eigenpair, EigenPair};
pub use evolution::{
    classify_trajectory, evolve, step, virial_first, virial_second, virial_value, EvolutionConfig, EvolutionContext,
    Flag, TrajectoryRecord, VirialProfile,
};
pub use modulation::{fit_modulation, scale_phase_apply, ModulationFit};
pub use special::{build_expansion, evaluate_approximation, verify_threshold_convergence, wpm_initial_data, ExpansionSeries};
pub use lab::Lab;
