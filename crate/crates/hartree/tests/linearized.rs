use hartree::coercivity::{coercivity_constant, decompose_perturbation, Subspace, SubspaceProjector};
use hartree::eigen::{compute_eigenpair_with, EigenOptions};
use hartree::trial::trial_fields;
use hartree::{apply_laplacian, h1_inner, GridSpec, Lab, LinearizedSystem, RadialField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(n: usize) -> (Lab, LinearizedSystem) {
    let lab = Lab::new(GridSpec::default().with_n(n)).unwrap();
    let sys = lab.linearized().unwrap();
    (lab, sys)
}

fn random_field(lab: &Lab, rng: &mut ChaCha8Rng) -> RadialField {
    let (a, b, s1, s2): (f64, f64, f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0));
    RadialField::from_fn(lab.grid.clone(), |r| Complex64::new(a * (-(r / s1).powi(2)).exp(), b * (1.0 + (r / s2).powi(2)).powi(-3)))
}

/// ∂ₜu = i(Δu + (K₄|u|²)u)
fn hartree_rhs(lab: &Lab, u: &RadialField) -> RadialField {
    let v = lab.k4.apply(&u.abs2());
    let lap = apply_laplacian(u);
    let vals = lap.values().iter().zip(u.values()).zip(&v).map(|((l, x), p)| Complex64::i() * (l + x * p)).collect();
    RadialField::new(lab.grid.clone(), vals).unwrap()
}

#[test]
fn null_modes_and_refinement() {
    let (_, s1) = setup(512);
    let (_, s2) = setup(1024);
    let (a, b) = s2.null_residuals();
    assert!(a < 1e-3 && b < 1e-3);
    let (a1, b1) = s1.null_residuals();
    assert!(a1 / a >= 3.0 && b1 / b >= 3.0, "{a1} {a} {b1} {b}");
}

#[test]
fn lplus_w_is_twice_laplacian() {
    let (lab, sys) = setup(1024);
    let w = lab.ground.w().re();
    let lp = sys.apply_plus(&w);
    let lap = apply_laplacian(lab.ground.w()).re();
    let diff: Vec<f64> = lp.iter().zip(&lap).map(|(x, y)| x - 2.0 * y).collect();
    let twice: Vec<f64> = lap.iter().map(|x| 2.0 * x).collect();
    let r = lab.grid.l2(&diff) / lab.grid.l2(&twice);
    assert!(r < 1e-4, "{r}");
}

#[test]
fn operators_are_self_adjoint() {
    let (lab, sys) = setup(512);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let f = random_field(&lab, &mut rng).re();
        let g = random_field(&lab, &mut rng).re();
        for plus in [true, false] {
            let ap = |x: &[f64]| if plus { sys.apply_plus(x) } else { sys.apply_minus(x) };
            let (a, b) = (lab.grid.dot(&ap(&f), &g), lab.grid.dot(&f, &ap(&g)));
            assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()), "{a} {b}");
        }
    }
}

#[test]
fn phi_values() {
    let (lab, sys) = setup(1024);
    let g = &lab.ground;
    let pw = sys.phi(g.w()).unwrap();
    assert!((pw / -g.grad_norm_sq() - 1.0).abs() < 1e-3);
    let iw = g.w().scale(Complex64::i());
    assert!(sys.phi(&iw).unwrap().abs() < 1e-4);
    assert!(sys.phi(g.wtilde()).unwrap().abs() < 1e-4 * h1_inner(g.wtilde(), g.wtilde()).unwrap());
}

#[test]
fn generator_is_b_skew() {
    let (lab, sys) = setup(512);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let f = random_field(&lab, &mut rng);
        let g = random_field(&lab, &mut rng);
        let a = sys.bilinear_b(&sys.apply_block_field(&f).unwrap(), &g).unwrap();
        let b = sys.bilinear_b(&f, &sys.apply_block_field(&g).unwrap()).unwrap();
        assert!((a + b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1e-300), "{a} {b}");
    }
}

#[test]
fn linearization_matches_the_equation() {
    let (lab, sys) = setup(512);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = random_field(&lab, &mut rng);
    let f0 = hartree_rhs(&lab, lab.ground.w());
    let lh = sys.apply_block_field(&h).unwrap();
    let mut ratios = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let eh = h.scale_real(eps);
        let full = hartree_rhs(&lab, &lab.ground.w().add(&eh)).sub(&f0);
        let lin = lh.scale_real(-eps);
        // exact identity F(W+h) - F(W) = -𝓛h + R(h)
        let rem = sys.remainder_r(&eh).unwrap();
        let gap = full.sub(&lin).sub(&rem).l2_norm();
        assert!(gap <= 1e-6 * lin.l2_norm(), "eps {eps}: {gap}");
        ratios.push(rem.l2_norm() / (eps * eps));
    }
    assert!(sys.remainder_r(&RadialField::zeros(lab.grid.clone())).unwrap().l2_norm() == 0.0);
    assert!((ratios[1] / ratios[2] - 1.0).abs() < 0.01 && (ratios[0] / ratios[1] - 1.0).abs() < 0.1, "{ratios:?}");
}

#[test]
fn eigenpair_oracles_agree() {
    let (_, sys) = setup(512);
    let p = compute_eigenpair_with(&sys, EigenOptions::for_size(512)).unwrap();
    assert!(p.residual < 1e-6);
    let (b, q) = (p.oracles.block.unwrap(), p.oracles.pencil.unwrap());
    assert!((b - q).abs() / b < 1e-4);
    assert!((p.e0 - p.oracles.symmetric).abs() / p.e0 < 1e-4);
    assert_eq!(p.oracles.block_count, Some(1));
    assert_eq!(p.oracles.symmetric_count, 1);
    assert!(p.pre_normalization != 0.0);
    assert!((sys.bilinear_b(&p.y_plus(), &p.y_minus()).unwrap() - 1.0).abs() < 1e-12);
    assert!(p.tail_r2 > 0.99);
    assert!(h1_inner(sys.ground().w(), &p.y1).unwrap() > 0.0);
}

#[test]
fn coercivity_signs_and_stability() {
    let mut hp = Vec::new();
    for n in [512, 1024] {
        let (lab, sys) = setup(n);
        let pair = lab.eigenpair_fast(&sys).unwrap();
        assert!(coercivity_constant(&sys, Subspace::Unconstrained).unwrap() < 0.0);
        assert!(coercivity_constant(&sys, Subspace::GPerp(&pair)).unwrap() > 0.0);
        hp.push(coercivity_constant(&sys, Subspace::HPerp).unwrap());
    }
    assert!(hp[0] > 0.0 && ((hp[0] - hp[1]) / hp[1]).abs() < 0.2, "{hp:?}");
}

#[test]
fn decomposition_of_basis_directions() {
    let (lab, sys) = setup(512);
    let pair = lab.eigenpair_fast(&sys).unwrap();
    let d = decompose_perturbation(&pair.y_plus(), &pair, &sys).unwrap();
    let c = [d.alpha_plus, d.alpha_minus, d.beta, d.gamma];
    assert!((c[0] - 1.0).abs() < 1e-8 && c[1..].iter().all(|x| x.abs() < 1e-8), "{c:?}");
    let d = decompose_perturbation(&lab.ground.w().scale(Complex64::i()), &pair, &sys).unwrap();
    let c = [d.alpha_plus, d.alpha_minus, d.beta, d.gamma];
    assert!((c[2] - 1.0).abs() < 1e-8 && [c[0], c[1], c[3]].iter().all(|x| x.abs() < 1e-8), "{c:?}");

    let proj = SubspaceProjector::g_perp(&sys, &pair).unwrap();
    for v in trial_fields(&lab.grid, &lab.ground, 9, 10) {
        let p = proj.project(&v);
        let cr = proj.constraint_residual(&p);
        assert!(cr <= 1e-10, "{cr:e}");
        assert!(proj.project(&p).sub(&p).l2_norm() <= 1e-10 * p.l2_norm());
        assert!(sys.phi(&p).unwrap() >= 0.0);
    }
}
