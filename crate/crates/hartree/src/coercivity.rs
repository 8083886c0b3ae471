//! Constrained minimization of Φ(h)/‖h‖²_{Ḣ¹} and the perturbation decomposition.
//!
//! Both Φ and the Ḣ¹ norm split into a real block (h₁) and an imaginary
//! block (h₂), and so do the constraints defining H⊥ and G⊥:
//! B(h, 𝒴₊) ± B(h, 𝒴₋) separate into ⟨L₊𝒴₁, h₁⟩ and ⟨L₋𝒴₂, h₂⟩.

use crate::eigen::EigenPair;
use crate::error::{HartreeError, Result};
use crate::field::RadialField;
use crate::linearized::LinearizedSystem;
use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use serde::Serialize;

#[derive(Debug, Clone, Copy)]
pub enum Subspace<'a> {
    Unconstrained,
    /// Ḣ¹-orthogonal to W, iW, W̃.
    HPerp,
    /// Ḣ¹-orthogonal to iW, W̃ and B-orthogonal to 𝒴±.
    GPerp(&'a EigenPair),
}

fn matvec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let v = a * faer::Col::from_fn(x.len(), |i| x[i]);
    v.iter().copied().collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimum of xᵀAx / xᵀSx subject to cₖᵀx = 0.
fn constrained_min(a: &Mat<f64>, s: &Mat<f64>, cons: &[Vec<f64>]) -> Result<f64> {
    let n = a.nrows();
    let llt = s.llt(Side::Lower).map_err(|_| HartreeError::EigenFailure("stiffness not positive definite".into()))?;
    let l = llt.L();
    // Â = L⁻¹ A L⁻ᵀ
    let mut t = a.to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l, t.as_mut(), faer::Par::rayon(0));
    let mut tt = t.transpose().to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(l, tt.as_mut(), faer::Par::rayon(0));
    let mut ah = tt;
    // constraints cᵀx = (L⁻¹c)ᵀ y with y = Lᵀx; orthonormalize
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for c in cons {
        let mut u = Mat::from_fn(n, 1, |i, _| c[i]);
        faer::linalg::triangular_solve::solve_lower_triangular_in_place(l, u.as_mut(), faer::Par::Seq);
        let mut u: Vec<f64> = (0..n).map(|i| u[(i, 0)]).collect();
        let n0 = dot(&u, &u).sqrt();
        for _ in 0..2 {
            for b in &basis {
                let p = dot(&u, b);
                u.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n1 = dot(&u, &u).sqrt();
        if !(n1 > 1e-10 * n0) {
            return Err(HartreeError::ProjectionRankDeficient);
        }
        u.iter_mut().for_each(|x| *x /= n1);
        basis.push(u);
    }
    if !basis.is_empty() {
        // P Â P + σ U Uᵀ with σ above the spectrum of Â
        let au: Vec<Vec<f64>> = basis.iter().map(|u| matvec(&ah, u)).collect();
        let k = basis.len();
        let uau = Mat::from_fn(k, k, |i, j| dot(&basis[i], &au[j]));
        let sigma = 10.0;
        let pa = Mat::from_fn(n, n, |i, j| {
            let mut v = ah[(i, j)];
            for p in 0..k {
                v -= basis[p][i] * au[p][j] + au[p][i] * basis[p][j];
                for q in 0..k {
                    v += basis[p][i] * uau[(p, q)] * basis[q][j];
                }
                v += sigma * basis[p][i] * basis[p][j];
            }
            v
        });
        ah = pa;
    }
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (ah[(i, j)] + ah[(j, i)]));
    let ev = sym.self_adjoint_eigenvalues(Side::Lower).map_err(|e| HartreeError::EigenFailure(format!("{e:?}")))?;
    Ok(ev[0])
}

/// min Φ(h)/‖h‖²_{Ḣ¹} over the subspace.
pub fn coercivity_constant(sys: &LinearizedSystem, subspace: Subspace<'_>) -> Result<f64> {
    let grid = sys.grid();
    let s = grid.stiffness().to_dense();
    let s = Mat::from_fn(s.nrows(), s.ncols(), |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let half = |m: &Mat<f64>| Mat::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * m[(i, j)]);
    let ap = half(sys.weighted_plus());
    let am = half(sys.weighted_minus());
    let sw = matvec(&s, &sys.ground().w().re());
    let swt = matvec(&s, &sys.ground().wtilde().re());
    let (cr, ci) = match subspace {
        Subspace::Unconstrained => (vec![], vec![]),
        Subspace::HPerp => (vec![sw.clone(), swt], vec![sw]),
        Subspace::GPerp(pair) => {
            let by1 = matvec(sys.weighted_plus(), &pair.y1.re());
            let by2 = matvec(sys.weighted_minus(), &pair.y2.re());
            (vec![swt, by1], vec![sw, by2])
        }
    };
    let (re, im) = rayon::join(|| constrained_min(&ap, &s, &cr), || constrained_min(&am, &s, &ci));
    Ok(re?.min(im?))
}

/// Linear functional ℓ(v) = v₁·r₁ + v₂·r₂ on coefficient vectors.
#[derive(Debug, Clone)]
struct Representer {
    r1: Vec<f64>,
    r2: Vec<f64>,
}

impl Representer {
    fn eval(&self, v1: &[f64], v2: &[f64]) -> f64 {
        dot(v1, &self.r1) + dot(v2, &self.r2)
    }
    /// Σ|terms|, the scale against which cancellation is judged.
    fn magnitude(&self, v1: &[f64], v2: &[f64]) -> f64 {
        let a: f64 = v1.iter().zip(&self.r1).map(|(x, y)| (x * y).abs()).sum();
        let b: f64 = v2.iter().zip(&self.r2).map(|(x, y)| (x * y).abs()).sum();
        a + b
    }
}

/// Oblique projector v ↦ v - Σ aₖeₖ with ℓⱼ(v - Σ aₖeₖ) = 0.
#[derive(Debug, Clone)]
pub struct SubspaceProjector {
    directions: Vec<RadialField>,
    functionals: Vec<Representer>,
    gram: Mat<f64>,
}

impl SubspaceProjector {
    fn new(directions: Vec<RadialField>, functionals: Vec<Representer>) -> Result<Self> {
        let k = directions.len();
        let parts: Vec<(Vec<f64>, Vec<f64>)> = directions.iter().map(|e| (e.re(), e.im())).collect();
        let gram = Mat::from_fn(k, k, |j, i| functionals[j].eval(&parts[i].0, &parts[i].1));
        let sv = gram.singular_values().map_err(|e| HartreeError::EigenFailure(format!("{e:?}")))?;
        let (smax, smin) = (sv[0], sv[k - 1]);
        if !(smin > 1e-12 * smax) {
            return Err(HartreeError::ProjectionRankDeficient);
        }
        Ok(Self { directions, functionals, gram })
    }

    /// H⊥ = {h : ⟨h, W⟩ = ⟨h, iW⟩ = ⟨h, W̃⟩ = 0} in Ḣ¹.
    pub fn h_perp(sys: &LinearizedSystem) -> Result<Self> {
        let grid = sys.grid().clone();
        let g = sys.ground();
        let s = grid.stiffness();
        let n = grid.len();
        let mut sw = vec![0.0; n];
        s.matvec(&g.w().re(), &mut sw);
        let mut swt = vec![0.0; n];
        s.matvec(&g.wtilde().re(), &mut swt);
        let z = vec![0.0; n];
        let iw = RadialField::from_parts(grid.clone(), &z, &g.w().re());
        Self::new(
            vec![g.w().clone(), iw, g.wtilde().clone()],
            vec![
                Representer { r1: sw.clone(), r2: z.clone() },
                Representer { r1: z.clone(), r2: sw },
                Representer { r1: swt, r2: z },
            ],
        )
    }

    /// G⊥: directions (𝒴₊, 𝒴₋, iW, W̃) against (B(·,𝒴₋), B(·,𝒴₊), ⟨·,iW⟩, ⟨·,W̃⟩).
    pub fn g_perp(sys: &LinearizedSystem, pair: &EigenPair) -> Result<Self> {
        let grid = sys.grid().clone();
        let g = sys.ground();
        let n = grid.len();
        let s = grid.stiffness();
        let mut sw = vec![0.0; n];
        s.matvec(&g.w().re(), &mut sw);
        let mut swt = vec![0.0; n];
        s.matvec(&g.wtilde().re(), &mut swt);
        let z = vec![0.0; n];
        let a1: Vec<f64> = matvec(sys.weighted_plus(), &pair.y1.re()).iter().map(|x| 0.5 * x).collect();
        let a2: Vec<f64> = matvec(sys.weighted_minus(), &pair.y2.re()).iter().map(|x| 0.5 * x).collect();
        let neg1: Vec<f64> = a1.iter().map(|x| -x).collect();
        let iw = RadialField::from_parts(grid.clone(), &z, &g.w().re());
        Self::new(
            vec![pair.y_plus(), pair.y_minus(), iw, g.wtilde().clone()],
            vec![
                // B(v, 𝒴₋) with 𝒴₋ = -𝒴₁ + i𝒴₂
                Representer { r1: neg1, r2: a2.clone() },
                Representer { r1: a1, r2: a2 },
                Representer { r1: z.clone(), r2: sw },
                Representer { r1: swt, r2: z },
            ],
        )
    }

    pub fn directions(&self) -> &[RadialField] {
        &self.directions
    }

    /// Coefficients aₖ of v along the constrained directions.
    pub fn coefficients(&self, v: &RadialField) -> Vec<f64> {
        let (v1, v2) = (v.re(), v.im());
        let k = self.directions.len();
        let mut rhs = Mat::from_fn(k, 1, |j, _| self.functionals[j].eval(&v1, &v2));
        self.gram.partial_piv_lu().solve_in_place(&mut rhs);
        (0..k).map(|i| rhs[(i, 0)]).collect()
    }

    /// Projection with one refinement sweep against cancellation.
    pub fn project(&self, v: &RadialField) -> RadialField {
        let mut out = v.clone();
        for _ in 0..2 {
            let a = self.coefficients(&out);
            for (c, e) in a.iter().zip(&self.directions) {
                out = out.axpy(num_complex::Complex64::new(-c, 0.0), e);
            }
        }
        out
    }

    /// max_j |ℓⱼ(v)| / Σ|terms of ℓⱼ(v)|.
    pub fn constraint_residual(&self, v: &RadialField) -> f64 {
        let (v1, v2) = (v.re(), v.im());
        self.functionals
            .iter()
            .map(|f| {
                let m = f.magnitude(&v1, &v2);
                if m == 0.0 {
                    0.0
                } else {
                    f.eval(&v1, &v2).abs() / m
                }
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(skip)]
    pub perp: RadialField,
    /// ‖v - reconstruction‖ / ‖v‖ (weighted L²).
    pub reconstruction_residual: f64,
    pub constraint_residual: f64,
}

/// v = α₊𝒴₊ + α₋𝒴₋ + β iW + γ W̃ + v⊥ with v⊥ ∈ G⊥.
pub fn decompose_perturbation(v: &RadialField, pair: &EigenPair, sys: &LinearizedSystem) -> Result<Decomposition> {
    let b = sys.bilinear_b(&pair.y_plus(), &pair.y_minus())?;
    if (b - 1.0).abs() > 1e-8 {
        return Err(HartreeError::UnnormalizedPair(b));
    }
    decompose_with(v, &SubspaceProjector::g_perp(sys, pair)?)
}

pub fn decompose_with(v: &RadialField, proj: &SubspaceProjector) -> Result<Decomposition> {
    let a = proj.coefficients(v);
    let perp = proj.project(v);
    let mut rec = perp.clone();
    for (c, e) in a.iter().zip(proj.directions()) {
        rec = rec.axpy(num_complex::Complex64::new(*c, 0.0), e);
    }
    let nv = v.l2_norm();
    let rr = if nv > 0.0 { rec.sub(v).l2_norm() / nv } else { rec.l2_norm() };
    Ok(Decomposition {
        alpha_plus: a[0],
        alpha_minus: a[1],
        beta: a[2],
        gamma: a[3],
        constraint_residual: proj.constraint_residual(&perp),
        perp,
        reconstruction_residual: rr,
    })
}
