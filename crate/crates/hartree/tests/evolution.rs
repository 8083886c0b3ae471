use hartree::evolution::{
    cutoff_phi, evolve, virial_first, virial_second, virial_value, Direction, EvolutionConfig, EvolutionContext, Flag,
    Propagator, VirialProfile,
};
use hartree::{grad_norm_sq, GridSpec, HartreeError, Lab, RadialField};
use num_complex::Complex64;

fn lab(n: usize) -> Lab {
    Lab::new(GridSpec::default().with_n(n)).unwrap()
}

fn ctx(l: &Lab) -> EvolutionContext {
    EvolutionContext { k4: l.k4.clone(), ground: l.ground.clone(), projector: None }
}

fn smooth(l: &Lab, c: Complex64) -> RadialField {
    l.ground.w().add(&RadialField::from_fn(l.grid.clone(), |r| c * (-0.5 * r * r).exp()))
}

#[test]
fn cutoff_profile() {
    let mut prev = cutoff_phi(1.0);
    assert_eq!(prev, [1.0, 2.0, 2.0, 0.0, 0.0]);
    let end = cutoff_phi(2.0 - 1e-12);
    assert!(end[1].abs() < 1e-9 && end[2].abs() < 1e-9 && end[3].abs() < 1e-8 && end[4].abs() < 1e-7, "{end:?}");
    for k in 1..=2000 {
        let r = 1.0 + k as f64 / 2000.0;
        let p = cutoff_phi(r);
        assert!(p[2] <= 2.0 + 1e-9);
        // derivatives integrate consistently
        let h = 0.5e-3;
        assert!((p[0] - prev[0] - h * 0.5 * (p[1] + prev[1])).abs() < 1e-6);
        prev = p;
    }
    assert_eq!(cutoff_phi(5.0)[1], 0.0);
}

#[test]
fn virial_radius_must_fit() {
    let l = lab(256);
    assert!(VirialProfile::new(&l.grid, 60.0).is_err());
    assert!(VirialProfile::new(&l.grid, 50.0).is_ok());
}

#[test]
fn stationary_w() {
    let l = lab(512);
    let cfg = EvolutionConfig { dt: 1e-4, t_end: 0.2, cadence: 200, modulation: false, ..Default::default() };
    let rec = evolve(l.ground.w(), &cfg, &ctx(&l)).unwrap();
    assert!(rec.samples.iter().all(|s| s.flag == Flag::Trapped));
    assert_eq!(rec.status, Flag::Trapped);
    assert!(rec.energy_drift < 1e-6 && rec.mass_drift < 1e-10);
    let d = grad_norm_sq(&rec.final_state.unwrap().sub(l.ground.w())).sqrt() / l.ground.grad_norm_sq().sqrt();
    assert!(d < 1e-4, "{d}");
    let t: Vec<f64> = rec.samples.iter().map(|s| s.t).collect();
    assert!(t.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn tiny_data_conserves_mass() {
    let l = lab(256);
    let u = RadialField::from_real_fn(l.grid.clone(), |r| (-r * r).exp());
    let u = u.scale_real(1e-6 / u.l2_norm());
    let p = Propagator::new(&l.k4, 1e-3).unwrap();
    let mut v = u.clone();
    p.advance(&mut v, 1000).unwrap();
    assert!((v.l2_norm() / u.l2_norm() - 1.0).abs() < 1e-10);
}

#[test]
fn zero_data_disperses() {
    let l = lab(256);
    let z = RadialField::zeros(l.grid.clone());
    let cfg = EvolutionConfig { t_end: 1e-3, dt: 1e-4, cadence: 5, ..Default::default() };
    assert_eq!(evolve(&z, &cfg, &ctx(&l)).unwrap().status, Flag::Dispersing);
}

#[test]
fn second_order_in_time() {
    let l = lab(512);
    let u0 = smooth(&l, Complex64::new(0.05, 0.03));
    let run = |dt: f64| {
        let p = Propagator::new(&l.k4, dt).unwrap();
        let mut v = u0.clone();
        p.advance(&mut v, (0.1 / dt).round() as usize).unwrap();
        v
    };
    let (a, b, c) = (run(4e-4), run(2e-4), run(1e-4));
    let ratio = grad_norm_sq(&a.sub(&b)).sqrt() / grad_norm_sq(&b.sub(&c)).sqrt();
    assert!((ratio / 4.0 - 1.0).abs() < 0.2, "{ratio}");
}

#[test]
fn forward_then_backward_returns() {
    let l = lab(256);
    let u0 = smooth(&l, Complex64::new(0.1, -0.05));
    let c = ctx(&l);
    let cfg = EvolutionConfig { dt: 1e-3, t_end: 0.05, cadence: 10, modulation: false, ..Default::default() };
    let u1 = evolve(&u0, &cfg, &c).unwrap().final_state.unwrap();
    let back = EvolutionConfig { direction: Direction::Backward, ..cfg };
    let rec = evolve(&u1, &back, &c).unwrap();
    assert!(rec.samples.last().unwrap().t < 0.0);
    let err = rec.final_state.unwrap().sub(&u0).l2_norm() / u0.l2_norm();
    assert!(err < 1e-10, "{err}");
}

#[test]
fn below_and_above_w() {
    let l = lab(512);
    let c = ctx(&l);
    let gw = l.ground.grad_norm_sq();
    let cfg = EvolutionConfig { dt: 2e-4, t_end: 0.5, cadence: 250, adaptive: true, modulation: false, ..Default::default() };
    let rec = evolve(&l.ground.w().scale_real(0.9), &cfg, &c).unwrap();
    assert!(rec.samples.iter().all(|s| s.grad_norm_sq < gw && s.delta > 0.1));
    assert_eq!(rec.status, Flag::TrappedBelow);
    let rec = evolve(&l.ground.w().scale_real(1.1), &EvolutionConfig { t_end: 1.0, ..cfg }, &c).unwrap();
    assert!(rec.samples.iter().all(|s| s.grad_norm_sq > gw));
    assert_eq!(rec.status, Flag::BlowupSuspected);
}

#[test]
fn virial_identities() {
    let l = lab(1024);
    let p = VirialProfile::new(&l.grid, 10.0).unwrap();
    assert_eq!(virial_first(l.ground.w(), &p), 0.0);
    let u0 = smooth(&l, Complex64::new(0.05, 0.03));
    let h = 1e-3;
    let prop = Propagator::new(&l.k4, 1e-5).unwrap();
    let mut st = vec![u0];
    for _ in 0..2 {
        let mut v = st.last().unwrap().clone();
        prop.advance(&mut v, 100).unwrap();
        st.push(v);
    }
    let v: Vec<f64> = st.iter().map(|u| virial_value(u, &p)).collect();
    let f: Vec<f64> = st.iter().map(|u| virial_first(u, &p)).collect();
    let s = virial_second(&st[1], &p, &l.k4).unwrap();
    assert!(((v[2] - v[0]) / (2.0 * h) / f[1] - 1.0).abs() < 1e-3);
    assert!(((f[2] - f[0]) / (2.0 * h) / s.d2 - 1.0).abs() < 1e-2);
    let a: Vec<f64> = [5.0, 10.0, 20.0]
        .iter()
        .map(|&r| virial_second(l.ground.w(), &VirialProfile::new(&l.grid, r).unwrap(), &l.k4).unwrap().a_r.abs())
        .collect();
    assert!(a[0] > a[1] && a[1] > a[2], "{a:?}");
}

#[test]
fn config_validation() {
    let l = lab(256);
    let c = ctx(&l);
    let bad = EvolutionConfig { dt: -1.0, ..Default::default() };
    assert!(matches!(evolve(l.ground.w(), &bad, &c), Err(HartreeError::ConfigInvalid(_))));
    let bad = EvolutionConfig { virial_radii: vec![80.0], ..Default::default() };
    assert!(evolve(l.ground.w(), &bad, &c).is_err());
}
