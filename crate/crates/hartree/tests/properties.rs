use hartree::evolution::Propagator;
use hartree::trial::trial_fields;
use hartree::{
    energy, grad_norm_sq, h1_inner, hls_functional, kelvin_transform, scale_phase_apply, GridSpec, Lab, LinearizedSystem,
    RadialField,
};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn lab() -> &'static (Lab, LinearizedSystem) {
    static L: OnceLock<(Lab, LinearizedSystem)> = OnceLock::new();
    L.get_or_init(|| {
        let lab = Lab::new(GridSpec::default().with_n(256)).unwrap();
        let sys = lab.linearized().unwrap();
        (lab, sys)
    })
}

fn field(a: f64, b: f64, s: f64, p: f64) -> RadialField {
    let g = lab().0.grid.clone();
    RadialField::from_fn(g, |r| Complex64::new(a, b) * (-(r / s).powi(2)).exp() + Complex64::new(p, 0.0) * (1.0 + r * r).powf(-1.5))
}

fn coeffs() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (-2.0..2.0f64, -2.0..2.0f64, 0.3..4.0f64, -1.0..1.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn propagator_conserves_mass((a, b, s, p) in coeffs(), dt in 1e-4..5e-3f64) {
        let u = field(a, b, s, p);
        prop_assume!(u.l2_norm() > 1e-3);
        let prop = Propagator::new(&lab().0.k4, dt).unwrap();
        let mut v = u.clone();
        prop.advance(&mut v, 5).unwrap();
        prop_assert!((v.l2_norm() / u.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn propagator_commutes_with_phase((a, b, s, p) in coeffs(), th in 0.0..6.3f64) {
        let u = field(a, b, s, p);
        let prop = Propagator::new(&lab().0.k4, 1e-3).unwrap();
        let ph = Complex64::from_polar(1.0, th);
        let mut x = u.scale(ph);
        let mut y = u.clone();
        prop.advance(&mut x, 3).unwrap();
        prop.advance(&mut y, 3).unwrap();
        prop_assert!(x.sub(&y.scale(ph)).l2_norm() <= 1e-12 * u.l2_norm().max(1e-300));
    }

    #[test]
    fn sharp_constant_nonnegative(seed in any::<u64>()) {
        let (l, _) = lab();
        for u in trial_fields(&l.grid, &l.ground, seed, 4) {
            prop_assert!(hls_functional(&u, &l.ground, &l.k4).unwrap() >= -1e-6);
        }
    }

    #[test]
    fn h1_inner_symmetric_positive(x in coeffs(), y in coeffs()) {
        let (f, g) = (field(x.0, x.1, x.2, x.3), field(y.0, y.1, y.2, y.3));
        let (fg, gf) = (h1_inner(&f, &g).unwrap(), h1_inner(&g, &f).unwrap());
        prop_assert!((fg - gf).abs() <= 1e-12 * (grad_norm_sq(&f) * grad_norm_sq(&g)).sqrt().max(1e-300));
        if f.l2_norm() > 1e-6 {
            prop_assert!(grad_norm_sq(&f) > 0.0);
        }
    }

    #[test]
    fn energy_phase_invariant(x in coeffs(), th in 0.0..6.3f64) {
        let (l, _) = lab();
        let u = field(x.0, x.1, x.2, x.3);
        let e = energy(&u, &l.k4).unwrap();
        let e2 = energy(&u.scale(Complex64::from_polar(1.0, th)), &l.k4).unwrap();
        prop_assert!((e - e2).abs() <= 1e-12 * e.abs().max(1.0));
    }

    #[test]
    fn kelvin_is_an_involution(x in coeffs()) {
        let u = field(x.0, x.1, x.2, x.3);
        let kk = kelvin_transform(&kelvin_transform(&u).unwrap()).unwrap();
        for (i, &r) in u.grid().nodes().iter().enumerate() {
            if (0.1..=10.0).contains(&r) {
                prop_assert!((kk.values()[i] - u.values()[i]).norm() <= 1e-8 * (1.0 + u.values()[i].norm()));
            }
        }
    }

    #[test]
    fn generator_b_skew(x in coeffs(), y in coeffs()) {
        let (_, sys) = lab();
        let (f, g) = (field(x.0, x.1, x.2, x.3), field(y.0, y.1, y.2, y.3));
        let a = sys.bilinear_b(&sys.apply_block_field(&f).unwrap(), &g).unwrap();
        let b = sys.bilinear_b(&f, &sys.apply_block_field(&g).unwrap()).unwrap();
        prop_assert!((a + b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1e-12));
    }

    #[test]
    fn scaling_preserves_gradient_norm(x in coeffs(), th in -3.0..3.0f64, mu in 0.7..1.4f64) {
        let u = field(x.0, x.1, x.2, 0.0);
        prop_assume!(x.2 > 0.8);
        let v = scale_phase_apply(&u, th, mu).unwrap();
        prop_assert!((grad_norm_sq(&v) / grad_norm_sq(&u) - 1.0).abs() < 1e-3);
    }
}
