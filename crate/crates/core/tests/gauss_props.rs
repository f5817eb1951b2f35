use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use thetanull::characteristics::{enumerate_odd, half_period, Characteristic};
use thetanull::gauss::{
    bordered_hessian, boundary_rank, cofactor_matrix, eta, hessian_form_f, is_gauss_ramification, GaussTolerances,
};
use thetanull::linalg::{determinant, CMatrix};
use thetanull::siegel::PeriodMatrix;
use thetanull::theta::EvalConfig;
use thetanull::verify::sampling::{case_rng, generic_genus_two, random_symmetric, random_theta_divisor_point};
use thetanull::verify::{bordered_identity_residual, HALF_PERIOD_EXCLUSION};
use thetanull::Error;
use thetanull_testkit::gauss_oracle;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cfg() -> EvalConfig {
    EvalConfig::default()
}

#[test]
fn bordered_hessian_examples() {
    let tau = PeriodMatrix::diagonal(&[c(0.1, 1.1)]).unwrap();
    let x = half_period(&tau, &Characteristic::from_bits(&[1], &[1]).unwrap()).unwrap();
    let bh = bordered_hessian(&tau, &x, &Characteristic::zero(1), &cfg()).unwrap();
    assert_eq!(bh.b.shape(), (2, 2));
    assert_eq!(bh.b[(1, 1)], c(0.0, 0.0));
    assert!(bh.df[0].norm() > 1e-2);
    assert_eq!(bh.b[(0, 1)], bh.df[0]);

    let tau = generic_genus_two();
    let bh = bordered_hessian(&tau, &[c(0.0, 0.0); 2], &Characteristic::zero(2), &cfg()).unwrap();
    assert!(bh.gradient_norm() < 1e-12);
    assert!(bh.rank_report(1e-6).numerical_rank < 3);

    let mut rng = case_rng(1, 0);
    let x = [c(rng.gen(), rng.gen()), c(rng.gen(), rng.gen())];
    let bh = bordered_hessian(&tau, &x, &Characteristic::zero(2), &cfg()).unwrap();
    assert_eq!(bh.b, bh.b.transpose());
}

#[test]
fn cofactor_times_transpose_is_determinant() {
    let mut rng = case_rng(2, 0);
    for _ in 0..10 {
        let m = CMatrix::from_fn(4, 4, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let lhs = &m * cofactor_matrix(&m).transpose();
        let rhs = CMatrix::identity(4, 4) * determinant(&m);
        assert!((lhs - rhs).iter().all(|v| v.norm() < 1e-10));
    }
}

#[test]
fn eta_at_odd_half_periods_and_generic_points() {
    let tau = generic_genus_two();
    let zero = Characteristic::zero(2);
    for ch in enumerate_odd(2) {
        let x = half_period(&tau, &ch).unwrap();
        let r = eta(&tau, &x, &zero, &cfg(), 1e-9).unwrap();
        assert!(r.on_divisor);
        assert!(r.relative() < 1e-8, "{ch}: {:e}", r.relative());
    }
    let mut rng = case_rng(3, 0);
    for _ in 0..10 {
        let p = random_theta_divisor_point(&mut rng, &tau, &zero, &cfg(), HALF_PERIOD_EXCLUSION).unwrap();
        let r = eta(&tau, &p.x, &zero, &cfg(), 1e-9).unwrap();
        assert!(r.relative() > 1e-4, "{:e}", r.relative());
    }
}

#[test]
fn off_divisor_eta_is_flagged() {
    let tau = generic_genus_two();
    let r = eta(&tau, &[c(0.1, 0.0), c(0.2, 0.0)], &Characteristic::zero(2), &cfg(), 1e-9).unwrap();
    assert!(!r.on_divisor);
    let err = is_gauss_ramification(&tau, &[c(0.1, 0.0), c(0.2, 0.0)], &Characteristic::zero(2), &cfg(), &GaussTolerances::default());
    assert!(matches!(err, Err(Error::NotOnDivisor { .. })));
}

#[test]
fn even_vanishing_half_period_is_singular() {
    let tau = PeriodMatrix::diagonal(&[c(0.0, 1.0), c(0.0, 2.0)]).unwrap();
    let x = half_period(&tau, &Characteristic::from_bits(&[1, 1], &[1, 1]).unwrap()).unwrap();
    let r = is_gauss_ramification(&tau, &x, &Characteristic::zero(2), &cfg(), &GaussTolerances::default());
    assert!(matches!(r, Err(Error::SingularPointOfTheta { .. })), "{r:?}");
}

#[test]
fn ramification_agrees_with_eta_and_oracle() {
    let tau = generic_genus_two();
    let zero = Characteristic::zero(2);
    let tol = GaussTolerances::default();
    let mut points: Vec<(Vec<Complex64>, bool)> =
        enumerate_odd(2).iter().map(|ch| (half_period(&tau, ch).unwrap(), true)).collect();
    let mut rng = case_rng(4, 0);
    for _ in 0..12 {
        points.push((random_theta_divisor_point(&mut rng, &tau, &zero, &cfg(), HALF_PERIOD_EXCLUSION).unwrap().x, false));
    }
    for (x, expected) in points {
        let r = is_gauss_ramification(&tau, &x, &zero, &cfg(), &tol).unwrap();
        assert_eq!(r.ramified, expected, "{:?}", r.rank.singular_values);
        assert_eq!(r.eta.vanishes(tol.rel_tol), r.ramified);
        assert_eq!(gauss_oracle(&tau, &x, &zero, &cfg()).unwrap().ramified, expected);
    }
}

#[test]
fn boundary_rank_is_bordered_rank_at_half_point() {
    let tau = generic_genus_two();
    let zero = Characteristic::zero(2);
    let tol = GaussTolerances::default();
    let mut rng = case_rng(5, 0);
    let p = random_theta_divisor_point(&mut rng, &tau, &zero, &cfg(), HALF_PERIOD_EXCLUSION).unwrap();
    let z: Vec<Complex64> = p.x.iter().map(|v| v * 2.0).collect();
    let direct = bordered_hessian(&tau, &p.x, &zero, &cfg()).unwrap().rank_report(tol.rel_tol);
    let wrapped = boundary_rank(&tau, &z, &cfg(), &tol).unwrap();
    assert_eq!(direct, wrapped);
    assert_eq!(wrapped.numerical_rank, 3);
    let odd = half_period(&tau, &enumerate_odd(2)[0]).unwrap();
    let z: Vec<Complex64> = odd.iter().map(|v| v * 2.0).collect();
    assert!(boundary_rank(&tau, &z, &cfg(), &tol).unwrap().numerical_rank <= 2);
    assert!(matches!(
        boundary_rank(&tau, &[c(0.1, 0.0), c(0.0, 0.0)], &cfg(), &tol),
        Err(Error::NotOnDivisor { .. })
    ));
}

#[test]
fn hessian_form_examples() {
    let tau = PeriodMatrix::diagonal(&[c(0.0, 1.0)]).unwrap();
    assert!(hessian_form_f(&tau, &Characteristic::from_bits(&[1], &[1]).unwrap(), &cfg()).unwrap().norm() < 1e-12);
    let tau = PeriodMatrix::diagonal(&[c(0.0, 1.0), c(0.0, 2.0)]).unwrap();
    assert!(hessian_form_f(&tau, &Characteristic::from_bits(&[1, 1], &[1, 1]).unwrap(), &cfg()).unwrap().norm() > 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bordered_determinant_identity(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = case_rng(seed, 0);
        let h = random_symmetric(&mut rng, n);
        let df: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        prop_assert!(bordered_identity_residual(&h, &df) < 1e-10);
    }

    #[test]
    fn cofactor_of_symmetric_is_symmetric(seed in any::<u64>(), n in 1usize..=5) {
        let h = random_symmetric(&mut case_rng(seed, 1), n);
        let cof = cofactor_matrix(&h);
        prop_assert!((cof.clone() - cof.transpose()).iter().all(|v| v.norm() < 1e-12));
    }
}
