use thiserror::Error;

/// Failures raised by the numerical modules and the drivers.
///
/// Each variant maps to a module-qualified code (see [`HartreeError::code`]).
#[derive(Debug, Error)]
pub enum HartreeError {
    #[error("dimension d = {0} is not supported (need d >= 5)")]
    InvalidDimension(usize),
    #[error("degenerate radial range: r_min = {r_min}, r_max = {r_max}")]
    DegenerateRange { r_min: f64, r_max: f64 },
    #[error("grid too small: n = {0} (need n >= 16)")]
    TooFewNodes(usize),
    #[error("grid produced nonpositive quadrature weights")]
    DegenerateGrid,
    #[error("angular kernel is singular at rho = {0} for this (d, gamma)")]
    DiagonalSingularity(f64),
    #[error("unsupported kernel exponent gamma = {0}")]
    UnsupportedExponent(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("kernel exponent {found} where {expected} is required")]
    KernelMismatch { expected: f64, found: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("zero input to {0}")]
    ZeroInput(&'static str),
    #[error("elliptic residual {residual:.3e} exceeds {limit:.1e}; grid too coarse")]
    ResidualTooLarge { residual: f64, limit: f64 },
    #[error("inverted radii leave the resolvable region")]
    InsufficientSpan,
    #[error("tail of the field is not positive on the fitting window")]
    NonpositiveTail,
    #[error("no real eigenvalue found; discretization failure")]
    NoRealEigenvalue,
    #[error("found {0} positive real eigenvalues where one is expected")]
    SpuriousMultiplicity(usize),
    #[error("eigen solver failed: {0}")]
    EigenFailure(String),
    #[error("constraint basis is rank deficient")]
    ProjectionRankDeficient,
    #[error("eigenpair is not normalized: B(Y+, Y-) = {0}")]
    UnnormalizedPair(f64),
    #[error("scale mu = {0} is out of range")]
    ScaleOutOfRange(f64),
    #[error("modulation Newton iteration did not converge (residual {0:.3e})")]
    NoConvergence(f64),
    #[error("linear solve failed in {0}")]
    LinearSolveFailure(&'static str),
    #[error("resolvent near singular at order {order}: condition estimate {cond:.3e}")]
    ResolventNearSingular { order: usize, cond: f64 },
    #[error("t0 = {t0} is too small: residual bound {bound:.3e} exceeds {limit:.1e}")]
    T0TooSmall { t0: f64, bound: f64, limit: f64 },
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed field file: {0}")]
    BadFieldFile(String),
}

impl HartreeError {
    /// Stable, module-qualified code used in CLI diagnostics.
    pub fn code(&self) -> &'static str {
        use HartreeError::*;
        match self {
            InvalidDimension(_) => "radial-core/invalid-dimension",
            DegenerateRange { .. } => "radial-core/degenerate-range",
            TooFewNodes(_) => "radial-core/too-few-nodes",
            DegenerateGrid => "radial-core/degenerate-grid",
            DiagonalSingularity(_) => "radial-core/diagonal-singularity",
            UnsupportedExponent(_) => "radial-core/unsupported-exponent",
            GridMismatch => "radial-core/grid-mismatch",
            KernelMismatch { .. } => "radial-core/kernel-grid-mismatch",
            NonFinite(_) => "radial-core/non-finite",
            ZeroInput(_) => "radial-core/zero-input",
            ResidualTooLarge { .. } => "ground-state/residual-too-large",
            InsufficientSpan => "ground-state/insufficient-span",
            NonpositiveTail => "ground-state/nonpositive-tail",
            NoRealEigenvalue => "linearized/no-real-eigenvalue",
            SpuriousMultiplicity(_) => "linearized/spurious-multiplicity",
            EigenFailure(_) => "linearized/eigen-failure",
            ProjectionRankDeficient => "linearized/projection-rank-deficient",
            UnnormalizedPair(_) => "linearized/unnormalized-pair",
            ScaleOutOfRange(_) => "modulation/scale-out-of-range",
            NoConvergence(_) => "modulation/no-convergence",
            LinearSolveFailure(_) => "evolution/linear-solve-failure",
            ResolventNearSingular { .. } => "special-solutions/resolvent-near-singular",
            T0TooSmall { .. } => "special-solutions/t0-too-small",
            ConfigInvalid(_) => "cli-io/config-invalid",
            Io(_) => "cli-io/io",
            BadFieldFile(_) => "cli-io/bad-field-file",
        }
    }
}

pub type Result<T> = std::result::Result<T, HartreeError>;
