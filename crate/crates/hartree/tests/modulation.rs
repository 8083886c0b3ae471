use hartree::modulation::check_scale;
use hartree::{fit_modulation, grad_norm_sq, h1_inner, scale_phase_apply, GridSpec, HartreeError, Lab, RadialField};
use num_complex::Complex64;

fn lab() -> Lab {
    Lab::new(GridSpec::default().with_n(1024)).unwrap()
}

#[test]
fn identity_action() {
    let l = lab();
    let u = RadialField::from_fn(l.grid.clone(), |r| Complex64::new(1.0, -0.5) * (-r).exp());
    let v = scale_phase_apply(&u, 0.0, 1.0).unwrap();
    assert_eq!(u.values(), v.values());
}

#[test]
fn norm_invariance_and_group_law() {
    let l = lab();
    let u = RadialField::from_fn(l.grid.clone(), |r| Complex64::new(1.0, 0.3) * (-(r / 2.0).powi(2)).exp());
    let v = scale_phase_apply(&u, 2.1, 0.7).unwrap();
    assert!((grad_norm_sq(&v) / grad_norm_sq(&u) - 1.0).abs() < 1e-4);
    let two = scale_phase_apply(&scale_phase_apply(&u, 0.4, 1.3).unwrap(), 0.5, 0.8).unwrap();
    let one = scale_phase_apply(&u, 0.9, 1.04).unwrap();
    let err = grad_norm_sq(&two.sub(&one)).sqrt() / grad_norm_sq(&u).sqrt();
    assert!(err < 1e-6, "{err}");
}

#[test]
fn rejects_scales_outside_the_grid() {
    let l = lab();
    assert!(matches!(check_scale(&l.grid, 1e3), Err(HartreeError::ScaleOutOfRange(_))));
    assert!(scale_phase_apply(l.ground.w(), 0.0, -1.0).is_err());
}

#[test]
fn fit_of_w_is_trivial() {
    let l = lab();
    let f = fit_modulation(l.ground.w(), &l.ground).unwrap();
    assert!(f.theta.abs() < 1e-10 && (f.mu - 1.0).abs() < 1e-10 && f.alpha.abs() < 1e-10);
}

#[test]
fn recovers_group_parameters() {
    let l = lab();
    let (th, mu) = (0.9, 1.7);
    let f = fit_modulation(&l.ground.scaled(-th, 1.0 / mu), &l.ground).unwrap();
    assert!((f.theta - th).abs() < 1e-8 && (f.mu - mu).abs() < 1e-8, "{} {}", f.theta, f.mu);
}

#[test]
fn orthogonality_and_reconstruction() {
    let l = lab();
    let g = &l.ground;
    let bump = RadialField::from_fn(l.grid.clone(), |r| Complex64::new(0.02, 0.01) * (-r * r).exp());
    let u = scale_phase_apply(&g.w().add(&bump), 0.3, 1.2).unwrap();
    let f = fit_modulation(&u, g).unwrap();
    assert!(f.residual_phase <= 1e-8 && f.residual_scale <= 1e-8);
    assert!(f.reconstruction <= 1e-8);
    let alpha = {
        let v = scale_phase_apply(&u, f.theta, f.mu).unwrap();
        h1_inner(&v, g.w()).unwrap() / g.grad_norm_sq() - 1.0
    };
    assert!((alpha - f.alpha).abs() < 1e-8);
}

#[test]
fn alpha_tracks_delta() {
    let l = lab();
    let g = &l.ground;
    let sys = l.linearized().unwrap();
    let pair = l.eigenpair_fast(&sys).unwrap();
    let y1 = pair.y1.scale_real((g.grad_norm_sq() / grad_norm_sq(&pair.y1)).sqrt());
    for eps in [1e-4, 1e-3, 1e-2] {
        let u = scale_phase_apply(&g.w().add(&y1.scale_real(eps)), 0.3, 1.2).unwrap();
        let f = fit_modulation(&u, g).unwrap();
        let ratio = f.alpha.abs() / (f.delta.abs() / g.grad_norm_sq());
        assert!((0.2..=5.0).contains(&ratio), "eps {eps}: {ratio}");
    }
}
