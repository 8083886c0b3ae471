//! Strang-split time integration, virial quantities and trajectory classification.

use crate::band::ComplexBandLu;
use crate::coercivity::{decompose_with, SubspaceProjector};
use crate::error::{HartreeError, Result};
use crate::field::RadialField;
use crate::functionals::grad_norm_sq;
use crate::ground_state::GroundState;
use crate::kernel::NonlocalKernelMatrix;
use crate::modulation::fit_modulation;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

// ---------------------------------------------------------------- stepping

/// One Strang step for a fixed dt: phase e^{iτK|u|²}, Crank–Nicolson for Δ.
#[derive(Debug, Clone)]
pub struct Propagator {
    k4: Arc<NonlocalKernelMatrix>,
    dt: f64,
    lu: ComplexBandLu,
}

impl Propagator {
    pub fn new(k4: &Arc<NonlocalKernelMatrix>, dt: f64) -> Result<Self> {
        k4.require_gamma(4.0)?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(HartreeError::ConfigInvalid(format!("dt = {dt}")));
        }
        let grid = k4.grid();
        let lu = ComplexBandLu::new(grid.weights(), Complex64::new(0.0, 0.5 * dt), grid.stiffness())
            .ok_or(HartreeError::LinearSolveFailure("Crank-Nicolson factorization"))?;
        Ok(Self { k4: k4.clone(), dt, lu })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn phase(&self, u: &mut [Complex64], tau: f64) {
        let a: Vec<f64> = u.iter().map(|z| z.norm_sqr()).collect();
        let p = self.k4.apply(&a);
        for (z, v) in u.iter_mut().zip(p) {
            *z *= Complex64::from_polar(1.0, tau * v);
        }
    }

    /// (M + i dt/2 S)u⁺ = (M - i dt/2 S)u.
    fn linear(&self, u: &mut [Complex64]) -> Result<()> {
        let grid = self.k4.grid();
        let mut su = vec![Complex64::new(0.0, 0.0); u.len()];
        grid.stiffness().matvec_c(u, &mut su);
        let c = Complex64::new(0.0, 0.5 * self.dt);
        for ((z, s), w) in u.iter_mut().zip(&su).zip(grid.weights()) {
            *z = *z * w - c * s;
        }
        self.lu.solve_in_place(u);
        if u.iter().any(|z| !z.is_finite()) {
            return Err(HartreeError::LinearSolveFailure("Crank-Nicolson step"));
        }
        Ok(())
    }

    /// `n` steps; the trailing and leading half phases of consecutive steps
    /// use the same |u| and are merged.
    pub fn advance(&self, u: &mut RadialField, n: usize) -> Result<()> {
        if n == 0 {
            return Ok(());
        }
        let v = u.values_mut();
        self.phase(v, 0.5 * self.dt);
        for k in 0..n {
            self.linear(v)?;
            self.phase(v, if k + 1 == n { 0.5 * self.dt } else { self.dt });
        }
        Ok(())
    }
}

/// A single Strang step.
pub fn step(u: &RadialField, dt: f64, k4: &Arc<NonlocalKernelMatrix>) -> Result<RadialField> {
    if !u.is_finite() {
        return Err(HartreeError::NonFinite("initial state"));
    }
    let p = Propagator::new(k4, dt)?;
    let mut v = u.clone();
    p.advance(&mut v, 1)?;
    Ok(v)
}

// ---------------------------------------------------------------- virial

/// φ and its first four derivatives: r² on [0,1], constant beyond 2. On
/// [1,2] φ'' is the sextic in x = r - 1 that matches C⁴ at both ends, has
/// ∫φ'' = -2 and stays ≤ 2.
pub fn cutoff_phi(r: f64) -> [f64; 5] {
    if r <= 1.0 {
        return [r * r, 2.0 * r, 2.0, 0.0, 0.0];
    }
    let x = (r - 1.0).min(1.0);
    let x2 = x * x;
    let x3 = x2 * x;
    let x4 = x3 * x;
    let x5 = x4 * x;
    let x6 = x5 * x;
    let phi = 1.0 + 2.0 * x + x2 - 22.0 * x5 + 43.0 * x6 - 212.0 / 7.0 * x6 * x + 7.5 * x6 * x2;
    if r >= 2.0 {
        return [phi, 0.0, 0.0, 0.0, 0.0];
    }
    let d1 = 2.0 + 2.0 * x - 110.0 * x4 + 258.0 * x5 - 212.0 * x6 + 60.0 * x6 * x;
    let d2 = 2.0 - 440.0 * x3 + 1290.0 * x4 - 1272.0 * x5 + 420.0 * x6;
    let d3 = -1320.0 * x2 + 5160.0 * x3 - 6360.0 * x4 + 2520.0 * x5;
    let d4 = -2640.0 * x + 15480.0 * x2 - 25440.0 * x3 + 12600.0 * x4;
    [phi, d1, d2, d3, d4]
}

/// φ_R(x) = R²φ(x/R) sampled on the grid.
#[derive(Debug, Clone)]
pub struct VirialProfile {
    pub radius: f64,
    /// φ_R.
    pub phi: Vec<f64>,
    /// ∂_r φ_R = Rφ'(r/R).
    pub dphi: Vec<f64>,
    /// φ''(r/R).
    pub d2phi: Vec<f64>,
    /// ΔΔφ_R.
    pub bilap: Vec<f64>,
}

impl VirialProfile {
    pub fn new(grid: &crate::grid::RadialGrid, radius: f64) -> Result<Self> {
        let rmax = *grid.nodes().last().unwrap();
        if !(radius > 0.0 && 2.0 * radius <= rmax) {
            return Err(HartreeError::ConfigInvalid(format!("virial radius {radius} outside (0, r_max/2]")));
        }
        let d = grid.d() as f64;
        let (mut phi, mut dphi, mut d2phi, mut bilap) = (vec![], vec![], vec![], vec![]);
        for &r in grid.nodes() {
            let [f, f1, f2, f3, f4] = cutoff_phi(r / radius);
            let (g1, g2, g3, g4) = (radius * f1, f2, f3 / radius, f4 / (radius * radius));
            phi.push(radius * radius * f);
            dphi.push(g1);
            d2phi.push(g2);
            let a = (d - 1.0) * (d - 3.0);
            bilap.push(g4 + 2.0 * (d - 1.0) / r * g3 + a / (r * r) * g2 - a / (r * r * r) * g1);
        }
        Ok(Self { radius, phi, dphi, d2phi, bilap })
    }
}

fn derivative(u: &RadialField) -> Vec<Complex64> {
    let g = u.grid();
    let a = g.radial_derivative(&u.re());
    let b = g.radial_derivative(&u.im());
    a.into_iter().zip(b).map(|(x, y)| Complex64::new(x, y)).collect()
}

/// V_R = ∫φ_R|u|².
pub fn virial_value(u: &RadialField, prof: &VirialProfile) -> f64 {
    u.grid().dot(&prof.phi, &u.abs2())
}

/// ∂ₜV_R = 2 Im ∫ ū ∇u·∇φ_R.
pub fn virial_first(u: &RadialField, prof: &VirialProfile) -> f64 {
    let du = derivative(u);
    let w = u.grid().weights();
    let mut s = 0.0;
    for i in 0..du.len() {
        s += w[i] * (u.values()[i].conj() * du[i]).im * prof.dphi[i];
    }
    2.0 * s
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VirialSecond {
    /// ∂²ₜV_R = 8∫|∇u|² - 8∬|u|²|u|²/|x-y|⁴ + A_R.
    pub d2: f64,
    pub a_r: f64,
    /// ∫(4φ''(r/R) - 8)|∇u|².
    pub gradient_term: f64,
    /// -∫ΔΔφ_R|u|².
    pub bilaplacian_term: f64,
    /// The two double integrals with the vector weight.
    pub nonlocal_term: f64,
}

impl VirialSecond {
    pub fn pair(&self) -> (f64, f64) {
        (self.d2, self.a_r)
    }
}

/// The double integrals of A_R equal 2∫|u|²∇φ_R·∇V + 8∬|u|²|u|²/|x-y|⁴ with
/// V = K₄|u|², so they are evaluated through the radial derivative of V.
pub fn virial_second(u: &RadialField, prof: &VirialProfile, k4: &NonlocalKernelMatrix) -> Result<VirialSecond> {
    k4.require_gamma(4.0)?;
    let grid = u.grid();
    let w = grid.weights();
    let a = u.abs2();
    let v = k4.apply(&a);
    let dv = grid.radial_derivative(&v);
    let du = derivative(u);
    let quartic = grid.dot(&v, &a);
    let mut gt = 0.0;
    let mut bt = 0.0;
    let mut nt = 0.0;
    for i in 0..a.len() {
        gt += w[i] * (4.0 * prof.d2phi[i] - 8.0) * du[i].norm_sqr();
        bt -= w[i] * prof.bilap[i] * a[i];
        nt += w[i] * 2.0 * a[i] * prof.dphi[i] * dv[i];
    }
    nt += 8.0 * quartic;
    if grid.spec().outer == crate::grid::OuterBoundary::Exterior {
        // harmonic tail beyond r_max, where φ'' = 0
        let n = a.len();
        let rn = grid.nodes()[n - 1];
        let p = grid.d() as f64 - 2.0;
        gt -= 8.0 * grid.sphere() * p * rn.powf(p) * a[n - 1];
    }
    let a_r = gt + bt + nt;
    let d2 = 8.0 * grad_norm_sq(u) - 8.0 * quartic + a_r;
    Ok(VirialSecond { d2, a_r, gradient_term: gt, bilaplacian_term: bt, nonlocal_term: nt })
}

// ---------------------------------------------------------------- trajectories

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    /// u(-t) = conj(v(t)) with v the forward evolution of conj(u₀).
    Backward,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between recorded samples.
    pub cadence: usize,
    pub virial_radii: Vec<f64>,
    /// Shrink dt with the square of the concentration radius.
    pub adaptive: bool,
    pub direction: Direction,
    /// Gradient growth factor for the blowup indicator.
    pub blowup_growth: f64,
    /// Allowed change of outer-region Ḣ¹ mass relative to the total.
    pub boundary_tol: f64,
    /// Run the modulation fit at each sample.
    pub modulation: bool,
    /// Relative band |‖∇u‖² - ‖∇W‖²| ≤ tol·‖∇W‖² flagged as trapped.
    pub trapped_tol: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            t_end: 1.0,
            cadence: 100,
            virial_radii: vec![10.0],
            adaptive: false,
            direction: Direction::Forward,
            blowup_growth: 5.0,
            boundary_tol: 1e-6,
            modulation: true,
            trapped_tol: 1e-4,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self, grid: &crate::grid::RadialGrid) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(HartreeError::ConfigInvalid(format!("dt = {}", self.dt)));
        }
        if !(self.t_end >= self.dt) {
            return Err(HartreeError::ConfigInvalid(format!("T = {} < dt", self.t_end)));
        }
        if self.cadence == 0 {
            return Err(HartreeError::ConfigInvalid("cadence = 0".into()));
        }
        let rmax = *grid.nodes().last().unwrap();
        for &r in &self.virial_radii {
            if !(r > 0.0 && r <= rmax / 2.0) {
                return Err(HartreeError::ConfigInvalid(format!("virial radius {r} outside (0, r_max/2]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    /// ‖∇u‖² within the trapped band around ‖∇W‖².
    Trapped,
    TrappedBelow,
    TrappedAbove,
    BlowupSuspected,
    Dispersing,
    Undetermined,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Flag::Trapped => "trapped",
            Flag::TrappedBelow => "trapped-below",
            Flag::TrappedAbove => "trapped-above",
            Flag::BlowupSuspected => "blowup-suspected",
            Flag::Dispersing => "dispersing",
            Flag::Undetermined => "undetermined",
        };
        f.write_str(s)
    }
}

impl Flag {
    pub fn is_terminal(&self) -> bool {
        matches!(self, Flag::BlowupSuspected | Flag::Dispersing)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub t: f64,
    pub energy: f64,
    pub mass: f64,
    pub grad_norm_sq: f64,
    pub delta: f64,
    pub theta: Option<f64>,
    pub mu: Option<f64>,
    pub alpha: Option<f64>,
    /// ‖u_{θ,μ} - W‖_{Ḣ¹} when the modulation fit converges.
    pub distance: Option<f64>,
    pub v_r: f64,
    pub dt_v_r: f64,
    pub d2t_v_r: f64,
    pub a_r: f64,
    pub alpha_plus: Option<f64>,
    pub alpha_minus: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    /// Ḣ¹ mass inside r ≤ 10.
    pub inner_mass: f64,
    /// Radius holding half of the Ḣ¹ mass.
    pub concentration: f64,
    pub flag: Flag,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRecord {
    pub samples: Vec<Sample>,
    pub status: Flag,
    /// Why integration stopped before T, if it did.
    pub halted: Option<String>,
    pub energy_drift: f64,
    pub mass_drift: f64,
    #[serde(skip)]
    pub final_state: Option<RadialField>,
}

pub const CSV_HEADER: &str =
    "t,E,mass,grad_norm_sq,delta,theta,mu,alpha,V_R,dtV_R,d2tV_R,A_R,alpha_plus,alpha_minus,beta,gamma,flag";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12e}")).unwrap_or_default()
}

impl TrajectoryRecord {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for p in &self.samples {
            s.push_str(&format!(
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{},{},{},{},{}\n",
                p.t,
                p.energy,
                p.mass,
                p.grad_norm_sq,
                p.delta,
                opt(p.theta),
                opt(p.mu),
                opt(p.alpha),
                p.v_r,
                p.dt_v_r,
                p.d2t_v_r,
                p.a_r,
                opt(p.alpha_plus),
                opt(p.alpha_minus),
                opt(p.beta),
                opt(p.gamma),
                p.flag
            ));
        }
        s
    }
}

/// Read-only inputs shared by all samples of a run.
#[derive(Clone)]
pub struct EvolutionContext {
    pub k4: Arc<NonlocalKernelMatrix>,
    pub ground: GroundState,
    /// G⊥ projector for the α±, β, γ coefficients of u - W.
    pub projector: Option<SubspaceProjector>,
}

const INNER_RADIUS: f64 = 10.0;
const OUTER_FRACTION: f64 = 0.8;

struct Monitor {
    g0: f64,
    inner0: f64,
    conc0: f64,
    outer0: f64,
    gw: f64,
}

/// (‖∇u‖² inside r ≤ 10, outside 0.8 r_max, half-mass radius) from the nodal derivative.
fn local_masses(u: &RadialField) -> (f64, f64, f64) {
    let g = u.grid();
    let du = derivative(u);
    let r = g.nodes();
    let w = g.weights();
    let rmax = r[r.len() - 1];
    let dens: Vec<f64> = du.iter().zip(w).map(|(z, w)| w * z.norm_sqr()).collect();
    let total: f64 = dens.iter().sum();
    let mut inner = 0.0;
    let mut outer = 0.0;
    let mut acc = 0.0;
    let mut half = rmax;
    let mut found = false;
    for i in 0..r.len() {
        if r[i] <= INNER_RADIUS {
            inner += dens[i];
        }
        if r[i] >= OUTER_FRACTION * rmax {
            outer += dens[i];
        }
        acc += dens[i];
        if !found && total > 0.0 && acc >= 0.5 * total {
            half = r[i];
            found = true;
        }
    }
    (inner, outer, half)
}

fn sample(
    u: &RadialField,
    t: f64,
    ctx: &EvolutionContext,
    cfg: &EvolutionConfig,
    prof: Option<&VirialProfile>,
    mon: &Monitor,
    inner_hist: &[f64],
) -> Result<(Sample, f64)> {
    let grid = u.grid();
    let a = u.abs2();
    let v = ctx.k4.apply(&a);
    let quartic = grid.dot(&v, &a);
    let g = grad_norm_sq(u);
    let energy = 0.5 * g - 0.25 * quartic;
    let mass = grid.sum(&a);
    let delta = (g - mon.gw).abs();
    let (theta, mu, alpha, distance) = match cfg.modulation.then(|| fit_modulation(u, &ctx.ground)) {
        Some(Ok(f)) => {
            let dist = grad_norm_sq(&f.h.axpy(Complex64::new(f.alpha, 0.0), ctx.ground.w())).sqrt();
            (Some(f.theta), Some(f.mu), Some(f.alpha), Some(dist))
        }
        _ => (None, None, None, None),
    };
    let (v_r, dt_v_r, d2, a_r) = match prof {
        Some(p) => {
            let s = virial_second(u, p, &ctx.k4)?;
            (virial_value(u, p), virial_first(u, p), s.d2, s.a_r)
        }
        None => (0.0, 0.0, 0.0, 0.0),
    };
    let (ap, am, be, ga) = match &ctx.projector {
        Some(p) => {
            let h = u.sub(ctx.ground.w());
            let dcm = decompose_with(&h, p)?;
            (Some(dcm.alpha_plus), Some(dcm.alpha_minus), Some(dcm.beta), Some(dcm.gamma))
        }
        None => (None, None, None, None),
    };
    let (inner, outer, conc) = local_masses(u);

    let blowup = mon.g0 > 0.0 && g >= cfg.blowup_growth * mon.g0 && conc <= 0.2 * mon.conc0;
    let falling = inner_hist.windows(2).rev().take(3).all(|w| w[1] <= w[0]) && inner_hist.last().map_or(true, |l| inner <= *l);
    let dispersing = mon.inner0 == 0.0 || (inner < 0.1 * mon.inner0 && falling);
    let flag = if !g.is_finite() || blowup {
        Flag::BlowupSuspected
    } else if dispersing {
        Flag::Dispersing
    } else if delta <= cfg.trapped_tol * mon.gw {
        Flag::Trapped
    } else if g < mon.gw {
        Flag::TrappedBelow
    } else {
        Flag::TrappedAbove
    };
    let s = Sample {
        t,
        energy,
        mass,
        grad_norm_sq: g,
        delta,
        theta,
        mu,
        alpha,
        distance,
        v_r,
        dt_v_r,
        d2t_v_r: d2,
        a_r,
        alpha_plus: ap,
        alpha_minus: am,
        beta: be,
        gamma: ga,
        inner_mass: inner,
        concentration: conc,
        flag,
    };
    let contamination = (outer - mon.outer0).abs() / g.max(f64::MIN_POSITIVE);
    Ok((s, contamination))
}

/// Integrate from u₀ and record diagnostics every `cadence` steps.
pub fn evolve(u0: &RadialField, cfg: &EvolutionConfig, ctx: &EvolutionContext) -> Result<TrajectoryRecord> {
    let grid = u0.grid().clone();
    cfg.validate(&grid)?;
    if !u0.is_finite() {
        return Err(HartreeError::NonFinite("initial state"));
    }
    u0.check_grid(ctx.ground.w())?;
    let prof = match cfg.virial_radii.first() {
        Some(&r) => Some(VirialProfile::new(&grid, r)?),
        None => None,
    };
    let back = cfg.direction == Direction::Backward;
    let sign = if back { -1.0 } else { 1.0 };
    let mut v = if back { u0.conj() } else { u0.clone() };
    let view = |v: &RadialField| if back { v.conj() } else { v.clone() };

    let (inner0, outer0, conc0) = local_masses(u0);
    let mon = Monitor { g0: grad_norm_sq(u0), inner0, conc0, outer0, gw: ctx.ground.grad_norm_sq() };
    let mut samples = Vec::new();
    let mut hist = Vec::new();
    let (s0, _) = sample(u0, 0.0, ctx, cfg, prof.as_ref(), &mon, &hist)?;
    hist.push(s0.inner_mass);
    let mut halted = None;
    let terminal0 = s0.flag.is_terminal();
    samples.push(s0);

    let mut t = 0.0;
    let mut dt = cfg.dt;
    let mut prop = Propagator::new(&ctx.k4, dt)?;
    if terminal0 {
        halted = Some("terminal flag at t = 0".to_string());
    }
    while halted.is_none() && t < cfg.t_end * (1.0 - 1e-12) {
        let remaining = ((cfg.t_end - t) / dt).round().max(1.0) as usize;
        let n = cfg.cadence.min(remaining);
        prop.advance(&mut v, n)?;
        t += n as f64 * dt;
        if !v.is_finite() {
            halted = Some("non-finite state".to_string());
            break;
        }
        let u = view(&v);
        let (s, contamination) = sample(&u, sign * t, ctx, cfg, prof.as_ref(), &mon, &hist)?;
        hist.push(s.inner_mass);
        let flag = s.flag;
        let conc = s.concentration;
        samples.push(s);
        if flag.is_terminal() {
            halted = Some(format!("{flag} at t = {:.6}", sign * t));
        } else if contamination > cfg.boundary_tol {
            halted = Some(format!("boundary-contamination at t = {:.6}", sign * t));
        } else if cfg.adaptive {
            let target = cfg.dt * (conc / mon.conc0).powi(2).min(1.0);
            // refactor only when dt must halve
            if target < 0.5 * dt {
                let mut nd = dt;
                while nd > target {
                    nd *= 0.5;
                }
                if nd < 1e-12 {
                    halted = Some("resolution exhausted".to_string());
                } else {
                    dt = nd;
                    prop = Propagator::new(&ctx.k4, dt)?;
                }
            }
        }
    }

    let e0 = samples[0].energy;
    let m0 = samples[0].mass;
    let energy_drift = samples.iter().map(|s| (s.energy - e0).abs()).fold(0.0, f64::max) / e0.abs().max(f64::MIN_POSITIVE);
    let mass_drift = samples.iter().map(|s| (s.mass - m0).abs()).fold(0.0, f64::max) / m0.max(f64::MIN_POSITIVE);
    let mut rec = TrajectoryRecord {
        samples,
        status: Flag::Undetermined,
        halted,
        energy_drift,
        mass_drift,
        final_state: Some(view(&v)),
    };
    rec.status = classify_trajectory(&rec);
    Ok(rec)
}

/// Terminal flags win; otherwise a run is trapped on one side if every sample is.
pub fn classify_trajectory(rec: &TrajectoryRecord) -> Flag {
    let f: Vec<Flag> = rec.samples.iter().map(|s| s.flag).collect();
    if f.contains(&Flag::BlowupSuspected) {
        return Flag::BlowupSuspected;
    }
    if f.contains(&Flag::Dispersing) {
        return Flag::Dispersing;
    }
    if f.is_empty() {
        return Flag::Undetermined;
    }
    if f.iter().all(|x| *x == Flag::Trapped) {
        return Flag::Trapped;
    }
    let below = f.iter().all(|x| matches!(x, Flag::TrappedBelow | Flag::Trapped));
    let above = f.iter().all(|x| matches!(x, Flag::TrappedAbove | Flag::Trapped));
    match (below, above) {
        (true, false) => Flag::TrappedBelow,
        (false, true) => Flag::TrappedAbove,
        _ => Flag::Undetermined,
    }
}
