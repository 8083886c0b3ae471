use hartree::ground_state::{integral_system_residual, tail_asymptotics};
use hartree::{assemble_kernel, h1_inner, kelvin_transform, GridSpec, Lab, RadialField};
use std::f64::consts::PI;

fn lab(n: usize) -> Lab {
    Lab::new(GridSpec::default().with_n(n)).unwrap()
}

#[test]
fn calibration_constants() {
    let l = lab(1024);
    let g = &l.ground;
    assert!((g.c0() - (30.0 / PI.powi(3)).sqrt()).abs() < 1e-4);
    assert!((g.i_d() - PI.powi(3) / 2.0).abs() / (PI.powi(3) / 2.0) < 1e-4);
    assert!((g.grad_norm_sq() / (225.0 / 16.0) - 1.0).abs() < 1e-3);
    assert!(g.residual() < 1e-4);
}

#[test]
fn w_positive_decreasing_and_orthogonal_to_wtilde() {
    let l = lab(1024);
    let w = l.ground.w().re();
    assert!(w.iter().all(|&x| x > 0.0));
    assert!(w.windows(2).all(|p| p[1] < p[0]));
    let ip = h1_inner(l.ground.w(), l.ground.wtilde()).unwrap();
    assert!(ip.abs() < 1e-6 * l.ground.grad_norm_sq(), "{ip}");
}

#[test]
fn kelvin_involution_and_fixed_point() {
    let l = lab(1024);
    let w = l.ground.w();
    let kw = kelvin_transform(w).unwrap();
    let u = RadialField::from_real_fn(l.grid.clone(), |r| r.powi(2) * (-r).exp() + (1.0 + r).powi(-3));
    let kku = kelvin_transform(&kelvin_transform(&u).unwrap()).unwrap();
    for (i, &r) in l.grid.nodes().iter().enumerate() {
        if (0.1..=10.0).contains(&r) {
            assert!((kw.values()[i] - w.values()[i]).norm() < 1e-8);
            assert!((kku.values()[i] - u.values()[i]).norm() < 1e-8 * u.values()[i].norm().max(1e-3));
        }
    }
}

#[test]
fn integral_system() {
    let l = lab(1024);
    let w = l.ground.w();
    let kd2 = assemble_kernel(&l.grid, 3.0).unwrap();
    let w2: Vec<f64> = w.re().iter().map(|x| x * x).collect();
    let v = RadialField::from_real(l.grid.clone(), &l.k4.apply(&w2));
    let p = integral_system_residual(w, &v, &l.k4, &kd2).unwrap();
    assert!(p.first < 1e-4 && p.second < 1e-4, "{} {}", p.first, p.second);
    let z = RadialField::zeros(l.grid.clone());
    let p0 = integral_system_residual(&z, &z, &l.k4, &kd2).unwrap();
    assert_eq!(p0.residuals(), (0.0, 0.0));
}

#[test]
fn tail_constants() {
    let l = lab(1024);
    let t = tail_asymptotics(l.ground.w()).unwrap();
    assert!((t.omega_inf / l.ground.c0() - 1.0).abs() < 0.02);
    let h = tail_asymptotics(&RadialField::from_real_fn(l.grid.clone(), |r| r.powi(-3))).unwrap();
    assert!((h.omega_inf - 1.0).abs() < 1e-6);
    let gauss = tail_asymptotics(&RadialField::from_real_fn(l.grid.clone(), |r| (-r * r).exp())).unwrap();
    assert!(gauss.fast_decay && gauss.omega_inf.abs() < 1e-10);
}

#[test]
fn calibration_converges_under_refinement() {
    let r: Vec<f64> = [256, 512, 1024].iter().map(|&n| lab(n).ground.residual()).collect();
    assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
}
