mod common;

use std::f64::consts::PI;

use common::*;
use fracorlicz::orlicz::{
    dual_pairing, lebesgue_comparison_report, lebesgue_norm, luxemburg_norm, modular, verify_norm_modular,
    ConjugatePhi, DualPairRHS,
};
use fracorlicz::{DomainMask, Grid, GridField, PhiFunction, Spectral, SpatialParam, VectorGridField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> Grid {
    Grid::new(1, 128, 8.0).unwrap()
}

fn double_phase(g: Grid) -> PhiFunction {
    let alpha = GridField::from_fn(g, |x| 0.5 + 0.5 * (x[0]).sin().abs());
    PhiFunction::double_phase(2.0, 4.0, SpatialParam::field(alpha.into_data())).unwrap()
}

/// Random field with a random amplitude spanning several decades, so that
/// both the `p` and `q` branches of the bounds are exercised.
fn scaled_random(g: Grid, seed: u64) -> GridField {
    let amp = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed).gen_range(-6.0f64..6.0).exp2();
    random_field(g, seed).scaled(amp)
}

#[test]
fn modular_examples() {
    let g = grid();
    let u = GridField::from_fn(g, |x| if x[0].abs() < 1.0 { 1.0 } else { 0.0 });
    let m = u.data().iter().filter(|v| **v != 0.0).count() as f64 * g.cell_volume();
    let p3 = PhiFunction::power(3.0, 1.0).unwrap();
    assert!((modular(&u.scaled(2.0), &p3).unwrap() - 8.0 * m).abs() < 1e-12 * m);
    let dp = PhiFunction::double_phase(2.0, 4.0, SpatialParam::Constant(1.0)).unwrap();
    assert!((modular(&u, &dp).unwrap() - 2.0 * m).abs() < 1e-12 * m);
    assert_eq!(modular(&GridField::zeros(g), &dp).unwrap(), 0.0);
    assert_eq!(luxemburg_norm(&GridField::zeros(g), &dp).unwrap(), 0.0);
}

#[test]
fn vector_modular_uses_euclidean_magnitude() {
    let g = Grid::new(2, 16, 4.0).unwrap();
    let v = VectorGridField::from_components(vec![GridField::constant(g, 3.0), GridField::constant(g, 4.0)]).unwrap();
    let quad = PhiFunction::power(2.0, 1.0).unwrap();
    assert!((modular(&v, &quad).unwrap() - 25.0 * 16.0).abs() < 1e-10);
}

#[test]
fn power_norms_are_lebesgue_norms() {
    let g = grid();
    for p in [1.3, 2.0, 3.5] {
        for seed in 0..5 {
            let u = scaled_random(g, seed);
            let lp = lebesgue_norm(&u, p, None).unwrap();
            let plain = luxemburg_norm(&u, &PhiFunction::power(p, 1.0).unwrap()).unwrap();
            assert!((plain / lp - 1.0).abs() < 1e-10, "p={p}");
            let scaled = luxemburg_norm(&u, &PhiFunction::power(p, 1.0 / p).unwrap()).unwrap();
            assert!((scaled / (lp * p.powf(-1.0 / p)) - 1.0).abs() < 1e-10, "p={p}");
            let rep = verify_norm_modular(&u, &PhiFunction::power(p, 1.0).unwrap(), "u").unwrap();
            assert!((rep.norm - rep.j.powf(1.0 / p)).abs() < 1e-10 * rep.norm);
        }
    }
}

#[test]
fn unit_modular_point_is_tight() {
    let g = grid();
    let dp = double_phase(g);
    let u = random_field(g, 9);
    let n = luxemburg_norm(&u, &dp).unwrap();
    let rep = verify_norm_modular(&u.scaled(1.0 / n), &dp, "unit").unwrap();
    assert!((rep.j - 1.0).abs() < 1e-9 && (rep.norm - 1.0).abs() < 1e-12);
    assert!((rep.bounds.norm_lower - 1.0).abs() < 1e-9 && (rep.bounds.norm_upper - 1.0).abs() < 1e-9);
    assert!(rep.pass);
}

/// Both displays relating norm and modular, over 100 seeded fields.
#[test]
fn norm_modular_relations_on_random_suite() {
    let g = grid();
    let dp = double_phase(g);
    for seed in 0..100 {
        let u = scaled_random(g, seed);
        let rep = verify_norm_modular(&u, &dp, &format!("random-{seed}")).unwrap();
        assert!(rep.pass, "seed {seed}: {rep:?}");
        let unit = modular(&u.scaled(1.0 / rep.norm), &dp).unwrap();
        assert!((unit - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn report_serializes_with_expected_keys() {
    let g = grid();
    let rep = verify_norm_modular(&random_field(g, 1), &double_phase(g), "u").unwrap();
    let v = serde_json::to_value(&rep).unwrap();
    for key in ["phi", "field", "J", "norm", "bounds", "pass"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn conjugate_space_norm() {
    let g = grid();
    let u = random_field(g, 4);
    let p3 = PhiFunction::power(3.0, 1.0 / 3.0).unwrap();
    let star = luxemburg_norm(&u, &ConjugatePhi(&p3)).unwrap();
    let expected = lebesgue_norm(&u, 1.5, None).unwrap() * 1.5f64.powf(-1.0 / 1.5);
    assert!((star / expected - 1.0).abs() < 1e-9);
    let dp = double_phase(g);
    let rep = verify_norm_modular(&u, &ConjugatePhi(&dp), "u").unwrap();
    assert!(rep.pass);
}

#[test]
fn dual_pairing_examples() {
    let g = Grid::new(1, 64, 2.0 * PI).unwrap();
    let sp = Spectral::new(g);
    let full = DomainMask::full_torus(g);
    let sin = GridField::from_fn(g, |x| x[0].sin());
    let cos = VectorGridField::from_components(vec![GridField::from_fn(g, |x| x[0].cos())]).unwrap();
    for s in [0.0, 0.4, 1.0] {
        let rhs = DualPairRHS::new(GridField::zeros(g), cos.clone(), s, &full).unwrap();
        assert!((dual_pairing(&rhs, &sin, &sp).unwrap() - PI).abs() < 1e-12);
        assert_eq!(dual_pairing(&DualPairRHS::zero(g, s), &sin, &sp).unwrap(), 0.0);
        let g_field = random_field(g, 3);
        let self_rhs = DualPairRHS::new(GridField::zeros(g), sp.riesz_gradient(&g_field, s).unwrap(), s, &full).unwrap();
        assert!(dual_pairing(&self_rhs, &g_field, &sp).unwrap() >= 0.0);
    }
    let ball = DomainMask::ball(g, [0.0, 0.0], 1.0).unwrap();
    assert!(DualPairRHS::new(GridField::constant(g, 1.0), VectorGridField::zeros(g), 0.5, &ball).is_err());
}

#[test]
fn lebesgue_comparison() {
    let g = grid();
    let mask = DomainMask::ball(g, [0.0, 0.0], 1.8).unwrap();
    let u = random_field(g, 2);
    let p2 = PhiFunction::power(2.0, 1.0).unwrap();
    let rep = lebesgue_comparison_report(&u, &p2, &mask).unwrap();
    assert!((rep.ratio_p_a - 1.0).abs() < 1e-12 && rep.finite);
    let zero = lebesgue_comparison_report(&GridField::zeros(g), &p2, &mask).unwrap();
    assert_eq!((zero.lp, zero.la, zero.lq), (0.0, 0.0, 0.0));

    // ratios are stable under refinement for a smooth field
    let ratios: Vec<(f64, f64)> = [128, 256, 512]
        .into_iter()
        .map(|n| {
            let g = Grid::new(1, n, 8.0).unwrap();
            let u = GridField::from_fn(g, |x| 2.0 * (-(x[0] * x[0])).exp() * (3.0 * x[0]).cos());
            let mask = DomainMask::ball(g, [0.0, 0.0], 1.8).unwrap();
            let dp = PhiFunction::double_phase(2.0, 4.0, SpatialParam::Constant(1.0)).unwrap();
            let r = lebesgue_comparison_report(&u, &dp, &mask).unwrap();
            assert!(r.finite);
            (r.ratio_p_a, r.ratio_a_q)
        })
        .collect();
    for w in ratios.windows(2) {
        assert!((w[0].0 / w[1].0 - 1.0).abs() < 1e-3 && (w[0].1 / w[1].1 - 1.0).abs() < 1e-3, "{ratios:?}");
    }
}

#[test]
fn non_finite_samples_are_rejected() {
    let g = grid();
    let mut u = random_field(g, 0);
    u.data_mut()[3] = f64::NAN;
    assert!(luxemburg_norm(&u, &PhiFunction::power(2.0, 1.0).unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn homogeneity(seed in any::<u64>(), lambda in -40.0f64..40.0) {
        let g = grid();
        let dp = double_phase(g);
        let u = scaled_random(g, seed);
        let a = luxemburg_norm(&u.scaled(lambda), &dp).unwrap();
        let b = lambda.abs() * luxemburg_norm(&u, &dp).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * b.max(1e-300));
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>()) {
        let g = grid();
        let dp = double_phase(g);
        let (u, v) = (scaled_random(g, seed), scaled_random(g, seed.wrapping_add(7)));
        let lhs = luxemburg_norm(&u.add_scaled(1.0, &v), &dp).unwrap();
        let rhs = luxemburg_norm(&u, &dp).unwrap() + luxemburg_norm(&v, &dp).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-8));
    }
}
