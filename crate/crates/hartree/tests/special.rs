use hartree::evolution::{Direction, EvolutionConfig, EvolutionContext, Flag};
use hartree::special::{build_expansion, evaluate_approximation, verify_threshold_convergence, wpm_initial_data, WpmOptions};
use hartree::{energy, grad_norm_sq, GridSpec, Lab, LinearizedSystem};
use hartree::eigen::EigenPair;

fn setup() -> (Lab, LinearizedSystem, EigenPair) {
    let lab = Lab::new(GridSpec::default().with_n(512)).unwrap();
    let sys = lab.linearized().unwrap();
    let pair = lab.eigenpair_fast(&sys).unwrap();
    (lab, sys, pair)
}

fn h1(f: &hartree::RadialField) -> f64 {
    grad_norm_sq(f).sqrt()
}

#[test]
fn zero_amplitude_gives_zero_series() {
    let (_, sys, pair) = setup();
    let s = build_expansion(0.0, 3, &sys, &pair).unwrap();
    assert!(s.z.iter().all(|z| z.l2_norm() == 0.0));
    assert!(build_expansion(1.0, 0, &sys, &pair).is_err());
}

#[test]
fn first_order_is_the_eigen_relation() {
    let (lab, sys, pair) = setup();
    let s = build_expansion(1.0, 1, &sys, &pair).unwrap();
    assert!(s.residuals[0].relative <= 1e-6);
    let u = evaluate_approximation(&s, 0.0);
    let direct = lab.ground.w().add(&pair.y_plus());
    assert!(u.sub(&direct).l2_norm() <= 1e-14 * direct.l2_norm());
}

#[test]
fn residual_orders() {
    let (_, sys, pair) = setup();
    let s = build_expansion(1.0, 3, &sys, &pair).unwrap();
    let max_z = s.z.iter().map(|z| z.l2_norm()).fold(0.0, f64::max);
    for r in &s.residuals[..3] {
        assert!(r.norm <= 1e-6 * max_z, "order {}: {}", r.order, r.norm);
    }
    assert!(s.residuals[3].norm > 1e-3 * max_z);
}

#[test]
fn approaches_w_exponentially() {
    let (lab, sys, pair) = setup();
    let e0 = pair.e0;
    let s = build_expansion(1.0, 3, &sys, &pair).unwrap();
    let w = lab.ground.w();
    let far = evaluate_approximation(&s, 30.0 / e0).sub(w);
    assert!(h1(&far) < 1e-12);
    let y = pair.y_plus();
    let mut c: f64 = 0.0;
    for k in 1..=10 {
        let t = 0.5 * k as f64 / e0;
        let x = (-e0 * t).exp();
        let rest = evaluate_approximation(&s, t).sub(w).sub(&y.scale_real(x));
        c = c.max(h1(&rest) / (x * x));
    }
    assert!(c.is_finite() && c < 50.0, "{c}");
}

#[test]
fn threshold_data_signs_and_energy() {
    let (lab, sys, pair) = setup();
    for sign in [1.0, -1.0] {
        let d = wpm_initial_data(sign, &sys, &pair, WpmOptions::default()).unwrap();
        assert!((d.grad_norm_sq - d.grad_norm_sq_w) * sign > 0.0);
        assert!(d.energy_error() <= 1e-4, "{}", d.energy_error());
        let e = energy(&d.u0, &lab.k4).unwrap();
        assert!((e - d.energy).abs() < 1e-12 * e.abs());
    }
}

#[test]
fn tight_tail_limit_is_rejected() {
    let (_, sys, pair) = setup();
    let opts = WpmOptions { limit: 1e-6, ..Default::default() };
    assert!(wpm_initial_data(1.0, &sys, &pair, opts).is_err());
}

#[test]
fn w_minus_converges_forward() {
    let (lab, sys, pair) = setup();
    let d = wpm_initial_data(-1.0, &sys, &pair, WpmOptions::default()).unwrap();
    let ctx = EvolutionContext { k4: lab.k4.clone(), ground: lab.ground.clone(), projector: None };
    let cfg = EvolutionConfig { dt: 1e-4, cadence: 100, ..Default::default() };
    let r = verify_threshold_convergence(&d, 3.0 / pair.e0, Direction::Forward, &cfg, &ctx).unwrap();
    assert_eq!(r.status, Flag::TrappedBelow);
    assert!(r.rate_error().unwrap() < 0.15, "{:?}", r.rate_delta);
}
