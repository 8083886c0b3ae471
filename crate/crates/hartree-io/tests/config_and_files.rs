use hartree::{GridSpec, RadialField};
use hartree_io::config::RunConfig;
use hartree_io::fieldio::{decode_field, encode_field};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::Arc;

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn config_text_is_a_fixed_point(
        n in 16usize..4096, dt in 1e-6..1e-2f64, k in 1usize..8, seed in 0..=i64::MAX as u64,
        back in any::<bool>(), radii in proptest::collection::vec(0.5..50.0f64, 0..4),
    ) {
        let mut c = RunConfig::default();
        c.grid.n = n;
        c.integrator.dt = dt;
        c.integrator.direction = if back { "backward".into() } else { "forward".into() };
        c.physics.k = k;
        c.physics.virial_radii = radii;
        c.seed = seed;
        let text = c.to_text();
        let again = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&again, &c);
        prop_assert_eq!(again.to_text(), text);
    }

    #[test]
    fn field_bytes_round_trip(n in 16usize..200, seed in any::<u64>(), uniform in any::<bool>()) {
        let spec = GridSpec {
            n,
            grading: if uniform { hartree::Grading::Uniform } else { hartree::Grading::Geometric },
            ..GridSpec::default()
        };
        let g = Arc::new(spec.build().unwrap());
        let s = (seed % 1000) as f64 / 100.0;
        let u = RadialField::from_fn(g.clone(), |r| Complex64::new((r + s).sin(), (r * s).cos()) / (1.0 + r));
        let v = decode_field(&encode_field(&u), None).unwrap();
        prop_assert_eq!(u.values(), v.values());
        prop_assert_eq!(v.grid().spec(), g.spec());
        let w = decode_field(&encode_field(&u), Some(&g)).unwrap();
        prop_assert!(Arc::ptr_eq(w.grid(), &g));
    }
}

#[test]
fn environment_overrides_and_rejections() {
    let env = [("HARTREE_INTEGRATOR__DT", "5e-4"), ("HARTREE_PHYSICS__INITIAL", "wpm"), ("HARTREE_SEED", "9")]
        .map(|(a, b)| (a.to_string(), b.to_string()));
    let c = RunConfig::parse_with_env("integrator.dt = 1e-4\n", env).unwrap();
    assert_eq!(c.integrator.dt, 5e-4);
    assert_eq!(c.physics.initial, "wpm");
    assert_eq!(c.seed, 9);
    let bad = [("HARTREE_GRID__BOGUS".to_string(), "1".to_string())];
    assert!(RunConfig::parse_with_env("", bad).is_err());
    assert!(RunConfig::parse("physics.initial = \"file\"").is_err());
    assert!(RunConfig::parse("integrator.direction = \"sideways\"").is_err());
    assert!(RunConfig::parse("physics.a = 0.5").is_err());
}

#[test]
fn oversized_seed_is_rejected() {
    let c = RunConfig { seed: u64::MAX, ..Default::default() };
    assert!(c.validate().is_err());
}

#[test]
fn grid_mismatch_is_reported() {
    let g1 = Arc::new(GridSpec::default().with_n(64).build().unwrap());
    let g2 = Arc::new(GridSpec::default().with_n(65).build().unwrap());
    let u = RadialField::from_real_fn(g1, |r| (-r).exp());
    assert!(matches!(decode_field(&encode_field(&u), Some(&g2)), Err(hartree::HartreeError::GridMismatch)));
}
