use hartree::angular::{angular_kernel, v5_gamma4};
use hartree::grid::{gamma_half, sphere_area};
use hartree::{
    apply_laplacian, assemble_kernel, delta, energy, grad_norm_sq, hls_functional, GridSpec, HartreeError, Lab,
    RadialField,
};
use std::f64::consts::PI;
use std::sync::Arc;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn grid_endpoints_and_monotone_nodes() {
    let g = GridSpec::default().build().unwrap();
    let r = g.nodes();
    assert!(rel(r[0], 1e-3) < 1e-14 && rel(r[r.len() - 1], 100.0) < 1e-14);
    assert!(r.windows(2).all(|w| w[1] > w[0]) && r[0] > 0.0);
    assert!(g.weights().iter().all(|&w| w > 0.0));
}

#[test]
fn grid_rejects_bad_specs() {
    assert!(matches!(GridSpec { d: 3, ..Default::default() }.build(), Err(HartreeError::InvalidDimension(3))));
    assert!(GridSpec { n: 8, ..Default::default() }.build().is_err());
    assert!(GridSpec { r_min: 2.0, r_max: 1.0, ..Default::default() }.build().is_err());
}

#[test]
fn quadrature_gamma_function() {
    let g = GridSpec::default().build().unwrap();
    let s = g.integrate(|r| (-r).exp());
    assert!(rel(s, 24.0 * sphere_area(4)) < 1e-6, "{s}");
}

#[test]
fn quadrature_ball_volume() {
    // the jump at r = 1 costs one cell, so the error is first order in h
    let exact = PI.powf(2.5) / gamma_half(7);
    let err: Vec<f64> = [512, 1024, 2048]
        .iter()
        .map(|&n| {
            let g = GridSpec::default().with_n(n).build().unwrap();
            rel(g.integrate(|r| if r <= 1.0 { 1.0 } else { 0.0 }), exact)
        })
        .collect();
    assert!(err[2] < 1e-2, "{err:?}");
    let g = GridSpec::default().with_n(2048).build().unwrap();
    assert!(err[2] <= 5.0 * g.step(), "{err:?}");
}

#[test]
fn angular_kernel_limits_and_inversion() {
    let a0 = angular_kernel(5, 4.0, 0.0).unwrap();
    assert!(rel(a0, sphere_area(4)) < 1e-12);
    let big = 1e4;
    assert!(rel(angular_kernel(5, 4.0, big).unwrap() * big.powi(4), sphere_area(4)) < 1e-3);
    let rho = 2.0f64;
    let lhs = angular_kernel(5, 4.0, 1.0 / rho).unwrap();
    let rhs = rho.powi(4) * angular_kernel(5, 4.0, rho).unwrap();
    assert!(rel(lhs, rhs) < 1e-10);
    assert!(matches!(angular_kernel(5, 4.0, 1.0), Err(HartreeError::DiagonalSingularity(_))));
    // quadrature against the closed form
    for t in [0.1, 0.5, 0.9, 1.3, 3.0] {
        assert!(rel(angular_kernel(5, 4.0, t).unwrap(), v5_gamma4(t)) < 1e-9, "t = {t}");
    }
}

#[test]
fn kernel_conformal_identity() {
    let g = Arc::new(GridSpec::default().build().unwrap());
    let k = assemble_kernel(&g, 4.0).unwrap();
    let f: Vec<f64> = g.nodes().iter().map(|r| (1.0 + r * r).powi(-3)).collect();
    let v = k.apply(&f);
    let c: Vec<f64> = v.iter().zip(g.nodes()).map(|(v, r)| v * (1.0 + r * r).powi(2)).collect();
    let i5 = PI.powi(3) / 2.0;
    // beyond r = 10 the missing input tail past r_max shows up at the 1e-4 level
    for (x, r) in c.iter().zip(g.nodes()) {
        if *r <= 10.0 {
            assert!(rel(*x, i5) < 1e-4, "r = {r}: {x} vs {i5}");
        }
    }
    assert!(k.asymmetry() <= 1e-12);
    assert!(k.min_entry() >= 0.0);
}

/// Kummer's M(a, b, z) by its power series.
fn kummer(a: f64, b: f64, z: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    for n in 0..400 {
        let n = n as f64;
        term *= (a + n) / (b + n) * z / (n + 1.0);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

#[test]
fn kernel_on_gaussian_matches_confluent_form() {
    // |x|^-4 * e^{-|x|²} in ℝ⁵ = (4/3)π^{5/2} e^{-r²} M(1/2, 5/2, r²)
    let g = Arc::new(GridSpec::default().build().unwrap());
    let k = assemble_kernel(&g, 4.0).unwrap();
    let f: Vec<f64> = g.nodes().iter().map(|r| (-r * r).exp()).collect();
    let v = k.apply(&f);
    let c = 4.0 / 3.0 * PI.powf(2.5);
    for (i, &r) in g.nodes().iter().enumerate() {
        if r > 4.0 {
            break;
        }
        let exact = c * (-r * r).exp() * kummer(0.5, 2.5, r * r);
        assert!(rel(v[i], exact) < 1e-4, "r = {r}: {} vs {exact}", v[i]);
    }
}

#[test]
fn laplacian_oracles() {
    let g = Arc::new(GridSpec::default().build().unwrap());
    let n = g.len();
    let q = apply_laplacian(&RadialField::from_real_fn(g.clone(), |r| r * r));
    for i in 4..n - 4 {
        if g.nodes()[i] > 5.0 {
            break;
        }
        assert!((q.values()[i].re - 10.0).abs() < 1e-8, "{}", q.values()[i].re);
    }
    let lap = apply_laplacian(&RadialField::from_real_fn(g.clone(), |r| (-r * r).exp()));
    let lw = apply_laplacian(&RadialField::from_real_fn(g.clone(), |r| (1.0 + r * r).powf(-1.5)));
    let mut err: f64 = 0.0;
    let mut err_w: f64 = 0.0;
    for (i, &r) in g.nodes().iter().enumerate() {
        err = err.max((lap.values()[i].re - (4.0 * r * r - 10.0) * (-r * r).exp()).abs());
        err_w = err_w.max((lw.values()[i].re + 15.0 * (1.0 + r * r).powf(-3.5)).abs());
    }
    assert!(err < 1e-4, "{err}");
    assert!(err_w < 1e-4, "{err_w}");
}

#[test]
fn functional_values() {
    let lab = Lab::new(GridSpec::default()).unwrap();
    let g = &lab.ground;
    let gw = g.grad_norm_sq();
    let zero = RadialField::zeros(lab.grid.clone());
    assert_eq!(energy(&zero, &lab.k4).unwrap(), 0.0);
    let e2 = energy(&g.w().scale_real(2.0), &lab.k4).unwrap();
    assert!(rel(e2, -2.0 * 225.0 / 16.0) < 1e-3, "{e2}");
    assert!(rel(delta(&zero, g).unwrap(), 225.0 / 16.0) < 1e-3);
    assert_eq!(delta(g.w(), g).unwrap(), 0.0);
    assert!(delta(&g.scaled(1.3, 2.0), g).unwrap().abs() < 1e-4 * gw);
    assert!(hls_functional(&g.scaled(0.7, 0.5), g, &lab.k4).unwrap().abs() < 1e-4);
    let gauss = RadialField::from_real_fn(lab.grid.clone(), |r| (-r * r).exp());
    assert!(hls_functional(&gauss, g, &lab.k4).unwrap() > 0.0);
    assert!(grad_norm_sq(&gauss) > 0.0);
}
