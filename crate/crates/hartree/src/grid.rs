//! Radial grids, quadrature weights and the discrete radial Laplacian.
//!
//! The Laplacian is built in flux form `-Δ = M⁻¹ S`, with `S` symmetric
//! positive definite and `M` the diagonal of quadrature weights, so the
//! operator is self-adjoint in the weighted inner product by construction.
//! The weights are not chosen independently: they are fixed by requiring
//! `Δ r² = 2d` exactly at every node away from the outer boundary.

use crate::band::BandMatrix;
use crate::error::{HartreeError, Result};
use serde::{Deserialize, Serialize};

/// Node spacing law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grading {
    /// Uniform in `ln r`.
    Geometric,
    /// Uniform in `r`.
    Uniform,
}

impl std::str::FromStr for Grading {
    type Err = HartreeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(Grading::Geometric),
            "uniform" => Ok(Grading::Uniform),
            other => Err(HartreeError::ConfigInvalid(format!("unknown grading '{other}'"))),
        }
    }
}

impl std::fmt::Display for Grading {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Grading::Geometric => "geometric",
            Grading::Uniform => "uniform",
        })
    }
}

/// Closure of the Laplacian beyond the last node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OuterBoundary {
    /// Harmonic continuation: the field is extended by `c r^{-(d-2)}`
    /// outside the grid. Self-adjoint, and exact on the decaying harmonic.
    Exterior,
    /// Homogeneous Dirichlet condition one step past the last node.
    Dirichlet,
}

impl std::str::FromStr for OuterBoundary {
    type Err = HartreeError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exterior" => Ok(OuterBoundary::Exterior),
            "dirichlet" => Ok(OuterBoundary::Dirichlet),
            other => Err(HartreeError::ConfigInvalid(format!("unknown outer boundary '{other}'"))),
        }
    }
}

impl std::fmt::Display for OuterBoundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OuterBoundary::Exterior => "exterior",
            OuterBoundary::Dirichlet => "dirichlet",
        })
    }
}

/// Order of the staggered derivative used in the flux form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StencilOrder {
    Second,
    Fourth,
}

/// Everything needed to rebuild a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    pub grading: Grading,
    pub outer: OuterBoundary,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            d: 5,
            r_min: 1e-3,
            r_max: 100.0,
            n: 1024,
            grading: Grading::Geometric,
            outer: OuterBoundary::Exterior,
        }
    }
}

impl GridSpec {
    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn build(&self) -> Result<RadialGrid> {
        RadialGrid::new(*self)
    }
}

/// Γ(m/2) for a positive integer m.
pub fn gamma_half(m: usize) -> f64 {
    assert!(m > 0);
    let mut x = if m % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut k = if m % 2 == 0 { 2 } else { 1 };
    while k < m {
        x *= k as f64 / 2.0;
        k += 2;
    }
    x
}

/// Surface area of the unit sphere S^{n} ⊂ ℝ^{n+1}.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf((n + 1) as f64 / 2.0) / gamma_half(n + 1)
}

/// Discrete radial mesh with quadrature weights and the stiffness matrix.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    spec: GridSpec,
    /// Coordinate step (in `ln r` or `r`).
    step: f64,
    xi0: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    stiffness: BandMatrix,
    order: StencilOrder,
    robin: f64,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

/// Validate inputs and build a grid with the default outer closure.
pub fn build_grid(d: usize, r_min: f64, r_max: f64, n: usize, grading: Grading) -> Result<RadialGrid> {
    GridSpec { d, r_min, r_max, n, grading, outer: OuterBoundary::Exterior }.build()
}

struct Geometry {
    grading: Grading,
    d: usize,
    xi0: f64,
    h: f64,
}

impl Geometry {
    fn r(&self, k: f64) -> f64 {
        let xi = self.xi0 + k * self.h;
        match self.grading {
            Grading::Geometric => xi.exp(),
            Grading::Uniform => xi,
        }
    }
    /// r^{d-1} dr / dξ at coordinate index k
    fn jac(&self, k: f64) -> f64 {
        let xi = self.xi0 + k * self.h;
        match self.grading {
            Grading::Geometric => ((self.d - 2) as f64 * xi).exp(),
            Grading::Uniform => xi.powi(self.d as i32 - 1),
        }
    }
}

fn stencil(order: StencilOrder, h: f64) -> (&'static [i64], Vec<f64>) {
    match order {
        StencilOrder::Second => (&[0, 1], vec![-1.0 / h, 1.0 / h]),
        StencilOrder::Fourth => {
            let c = 1.0 / (24.0 * h);
            (&[-1, 0, 1, 2], vec![c, -27.0 * c, 27.0 * c, -c])
        }
    }
}

impl RadialGrid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let GridSpec { d, r_min, r_max, n, grading, outer } = spec;
        if d < 5 {
            return Err(HartreeError::InvalidDimension(d));
        }
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(HartreeError::DegenerateRange { r_min, r_max });
        }
        if n < 16 {
            return Err(HartreeError::TooFewNodes(n));
        }
        let (xi0, xi1) = match grading {
            Grading::Geometric => (r_min.ln(), r_max.ln()),
            Grading::Uniform => (r_min, r_max),
        };
        let h = (xi1 - xi0) / (n - 1) as f64;
        let geo = Geometry { grading, d, xi0, h };
        let mut nodes: Vec<f64> = (0..n).map(|i| geo.r(i as f64)).collect();
        nodes[0] = r_min;
        nodes[n - 1] = r_max;

        let mut last = None;
        for order in [StencilOrder::Fourth, StencilOrder::Second] {
            let weights = Self::build_weights(&geo, &nodes, order);
            if weights.iter().all(|w| *w > 0.0 && w.is_finite()) {
                let (stiffness, robin) = Self::build_stiffness(&geo, &nodes, order, outer);
                last = Some((weights, stiffness, order, robin));
                break;
            }
        }
        let (weights, stiffness, order, robin) = last.ok_or(HartreeError::DegenerateGrid)?;
        Ok(Self { spec, step: h, xi0, nodes, weights, stiffness, order, robin })
    }

    /// Coefficient of the inner ghost model u_{-1} = (1-a) u_0 + a u_1,
    /// exact on span{1, r²}.
    fn inner_ghost(geo: &Geometry, nodes: &[f64]) -> f64 {
        let rm1 = geo.r(-1.0);
        (rm1 * rm1 - nodes[0] * nodes[0]) / (nodes[1] * nodes[1] - nodes[0] * nodes[0])
    }

    fn build_weights(geo: &Geometry, nodes: &[f64], order: StencilOrder) -> Vec<f64> {
        let n = nodes.len();
        let d = geo.d as f64;
        let area = sphere_area(geo.d - 1);
        let (offs, coef) = stencil(order, geo.h);
        let alpha = Self::inner_ghost(geo, nodes);
        let r2 = |j: i64| -> f64 {
            if j >= 0 && (j as usize) < n {
                nodes[j as usize].powi(2)
            } else {
                geo.r(j as f64).powi(2)
            }
        };
        let mut sr2 = vec![0.0; n];
        // faces f + 1/2 for f = 0..=n (one past the operator faces)
        for f in 0..=n as i64 {
            let flux: f64 = offs.iter().zip(&coef).map(|(o, c)| c * r2(f + o)).sum();
            let a = geo.h * area * geo.jac(f as f64 + 0.5) * flux;
            for (o, c) in offs.iter().zip(&coef) {
                let j = f + o;
                if j == -1 {
                    sr2[0] += a * c * (1.0 - alpha);
                    sr2[1] += a * c * alpha;
                } else if j >= 0 && (j as usize) < n {
                    sr2[j as usize] += a * c;
                }
            }
        }
        sr2.iter().map(|v| -v / (2.0 * d)).collect()
    }

    fn build_stiffness(geo: &Geometry, nodes: &[f64], order: StencilOrder, outer: OuterBoundary) -> (BandMatrix, f64) {
        let n = nodes.len();
        let p = (geo.d - 2) as i32;
        let area = sphere_area(geo.d - 1);
        let (offs, coef) = stencil(order, geo.h);
        let alpha = Self::inner_ghost(geo, nodes);
        let bw = match order {
            StencilOrder::Second => 1,
            StencilOrder::Fourth => 3,
        };
        let mut s = BandMatrix::zeros(n, bw);
        let resolve = |j: i64, row: &mut Vec<(usize, f64)>, c: f64| {
            if j == -1 {
                row.push((0, c * (1.0 - alpha)));
                row.push((1, c * alpha));
            } else if (j as usize) < n {
                row.push((j as usize, c));
            } else {
                match outer {
                    OuterBoundary::Exterior => {
                        let ratio = nodes[n - 1] / geo.r(j as f64);
                        row.push((n - 1, c * ratio.powi(p)));
                    }
                    OuterBoundary::Dirichlet => {
                        let m = 2 * n as i64 - j;
                        if j > n as i64 && m >= 0 {
                            row.push((m as usize, -c));
                        }
                    }
                }
            }
        };
        for f in 0..n as i64 {
            let mut row = Vec::with_capacity(8);
            for (o, c) in offs.iter().zip(&coef) {
                resolve(f + o, &mut row, *c);
            }
            let a = geo.h * area * geo.jac(f as f64 + 0.5);
            for &(i, ci) in &row {
                for &(j, cj) in &row {
                    s.add(i, j, a * ci * cj);
                }
            }
        }
        let mut robin = 0.0;
        if outer == OuterBoundary::Exterior {
            // calibrate so that r^{-(d-2)} is annihilated at the last node
            let u: Vec<f64> = nodes.iter().map(|r| r.powi(-p)).collect();
            let mut su = vec![0.0; n];
            s.matvec(&u, &mut su);
            robin = -su[n - 1] / u[n - 1];
            s.add(n - 1, n - 1, robin);
        }
        (s, robin)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }
    pub fn d(&self) -> usize {
        self.spec.d
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn grading(&self) -> Grading {
        self.spec.grading
    }
    pub fn outer(&self) -> OuterBoundary {
        self.spec.outer
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn order(&self) -> StencilOrder {
        self.order
    }
    /// Symmetric stiffness matrix `S` with `-Δ = M⁻¹ S`.
    pub fn stiffness(&self) -> &BandMatrix {
        &self.stiffness
    }
    /// Boundary coefficient of the exterior closure (0 for Dirichlet).
    pub fn robin(&self) -> f64 {
        self.robin
    }
    /// `|S^{d-1}|`.
    pub fn sphere(&self) -> f64 {
        sphere_area(self.spec.d - 1)
    }
    /// Coordinate `ξ` of node i (`ln r` or `r`).
    pub fn coord(&self, i: usize) -> f64 {
        self.xi0 + i as f64 * self.step
    }
    pub fn coord_origin(&self) -> f64 {
        self.xi0
    }

    /// Cell boundaries: node i owns [faces[i], faces[i+1]], faces[0] = 0.
    pub fn cell_faces(&self) -> Vec<f64> {
        let geo = Geometry { grading: self.spec.grading, d: self.spec.d, xi0: self.xi0, h: self.step };
        let mut f = Vec::with_capacity(self.len() + 1);
        f.push(0.0);
        for i in 0..self.len() {
            f.push(geo.r(i as f64 + 0.5));
        }
        f
    }

    /// Σ w_i f(r_i).
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(r, w)| w * f(*r)).sum()
    }

    /// Weighted sum Σ w_i a_i.
    pub fn sum(&self, a: &[f64]) -> f64 {
        a.iter().zip(&self.weights).map(|(x, w)| w * x).sum()
    }

    /// Weighted inner product Σ w_i a_i b_i.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.weights).map(|((x, y), w)| w * x * y).sum()
    }

    /// Weighted L² norm of a real array.
    pub fn l2(&self, a: &[f64]) -> f64 {
        self.dot(a, a).sqrt()
    }

    /// `Δu` for a real array.
    pub fn laplacian_real(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.stiffness.matvec(u, &mut out);
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o = -*o / w;
        }
        out
    }

    /// `uᵀ S v`, the discrete ∫∇u·∇v.
    pub fn stiffness_form(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut su = vec![0.0; u.len()];
        self.stiffness.matvec(u, &mut su);
        su.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Fourth-order (second at the ends) derivative du/dr on the nodes.
    pub fn radial_derivative(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let h = self.step;
        let mut du = vec![0.0; n];
        for i in 0..n {
            let dxi = if i >= 2 && i + 2 < n {
                (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) / (12.0 * h)
            } else if i == 0 {
                (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h)
            } else {
                (u[i + 1] - u[i - 1]) / (2.0 * h)
            };
            du[i] = match self.spec.grading {
                Grading::Geometric => dxi / self.nodes[i],
                Grading::Uniform => dxi,
            };
        }
        // the inner model is even in r
        if self.spec.grading == Grading::Geometric {
            let r0 = self.nodes[0];
            let r1 = self.nodes[1];
            let b = (u[1] - u[0]) / (r1 * r1 - r0 * r0);
            du[0] = 2.0 * b * r0;
        }
        du
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_half_values() {
        assert!((gamma_half(2) - 1.0).abs() < 1e-15);
        assert!((gamma_half(1) - std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half(10) - 24.0).abs() < 1e-12);
        assert!((gamma_half(7) - 15.0 / 8.0 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn sphere_area_s4() {
        let a = sphere_area(4);
        assert!((a - 8.0 * std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn stiffness_is_symmetric() {
        let g = GridSpec::default().with_n(128).build().unwrap();
        assert!(g.stiffness().asymmetry() < 1e-13);
    }

    #[test]
    fn coarse_grid_falls_back() {
        let g = build_grid(5, 1e-3, 100.0, 16, Grading::Geometric).unwrap();
        assert_eq!(g.order(), StencilOrder::Second);
        assert!(g.weights().iter().all(|w| *w > 0.0));
    }
}
