use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use thetanull::characteristics::{enumerate_even, enumerate_odd, half_period, Characteristic};
use thetanull::siegel::{direct_sum, Direction, PeriodMatrix};
use thetanull::sing_scheme::{
    order_four_diagnostic, sing_s_jacobian, sing_s_jacobian_at_half_period, sing_s_rank_test, sing_s_rank_test_at,
    snull_jacobian, Frame, SchemeJacobian, Which, DEFAULT_SCHEME_TOL,
};
use thetanull::strata::{classify_stratum, RankReport, StrataTolerances, DEFAULT_RANK_REL_TOL};
use thetanull::theta::{eval_jet, theta_constant, EvalConfig};
use thetanull::verify::sampling::{case_rng, random_period, random_z};
use thetanull::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cfg() -> EvalConfig {
    EvalConfig::default()
}

fn odd1() -> Characteristic {
    Characteristic::from_bits(&[1], &[1]).unwrap()
}

fn random_genus_one(rng: &mut impl Rng) -> PeriodMatrix {
    PeriodMatrix::diagonal(&[c(rng.gen_range(-0.5..0.5), rng.gen_range(0.8..1.6))]).unwrap()
}

/// Decomposable points with an even characteristic whose constant vanishes
/// structurally.
fn constructed(rng: &mut impl Rng, kind: usize) -> (PeriodMatrix, Characteristic) {
    match kind {
        0 => {
            let tau = direct_sum(&random_genus_one(rng), &random_genus_one(rng));
            (tau, odd1().direct_sum(&odd1()))
        }
        1 => {
            let t2 = random_period(rng, 2);
            let odd = enumerate_odd(2)[rng.gen_range(0..6)];
            (direct_sum(&random_genus_one(rng), &t2), odd1().direct_sum(&odd))
        }
        _ => {
            let mut tau = random_genus_one(rng);
            let mut ch = odd1();
            for _ in 0..3 {
                tau = direct_sum(&tau, &random_genus_one(rng));
                ch = ch.direct_sum(&odd1());
            }
            (tau, ch)
        }
    }
}

fn max_abs(m: &thetanull::linalg::CMatrix) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[test]
fn dimensions() {
    let mut rng = case_rng(1, 0);
    for g in 1..=3 {
        let tau = random_period(&mut rng, g);
        let j = sing_s_jacobian(&tau, &random_z(&mut rng, g), &cfg()).unwrap();
        assert_eq!((j.rows(), j.cols()), (g + 1, g * (g + 1) / 2 + g));
        let s = snull_jacobian(&tau, &Characteristic::zero(g), &cfg()).unwrap();
        assert_eq!((s.rows(), s.cols()), (g + 1, g * (g + 1) / 2 + g));
        assert_eq!(s.which, Which::SNull);
    }
}

#[test]
fn forced_blocks_vanish_at_even_half_periods() {
    let mut rng = case_rng(2, 0);
    for kind in 0..3 {
        let (tau, ch) = constructed(&mut rng, kind);
        let g = tau.genus();
        let j = sing_s_jacobian_at_half_period(&tau, &ch, &cfg()).unwrap();
        assert_eq!(j.frame, Frame::HalfPeriod);
        let bound = 10.0 * j.entry_error;
        assert!(max_abs(&j.z_block(0..1)) < bound);
        assert!(max_abs(&j.tau_block(1..g + 1)) < bound);
        let s = snull_jacobian(&tau, &ch, &cfg()).unwrap();
        assert!(max_abs(&s.z_block(0..1)) < 10.0 * s.entry_error);
    }
}

#[test]
fn frames_agree_on_rank() {
    let tau = PeriodMatrix::diagonal(&[c(0.0, 1.0), c(0.0, 2.0)]).unwrap();
    let ch = odd1().direct_sum(&odd1());
    let x = half_period(&tau, &ch).unwrap();
    let abs = sing_s_jacobian(&tau, &x, &cfg()).unwrap();
    let rel = sing_s_jacobian_at_half_period(&tau, &ch, &cfg()).unwrap();
    assert!(max_abs(&abs.z_block(0..1)) < 1e-10);
    assert_eq!(abs.rank_report(1e-6).numerical_rank, 3);
    assert_eq!(rel.rank_report(1e-6).numerical_rank, 3);
    let rep = sing_s_rank_test_at(&tau, &x, &cfg()).unwrap();
    assert!(!rep.in_sing_s);
    let snull = snull_jacobian(&tau, &ch, &cfg()).unwrap();
    assert_eq!(snull.rank_report(1e-6).numerical_rank, 3);
}

#[test]
fn off_scheme_point_is_reported() {
    let tau = PeriodMatrix::diagonal(&[c(0.0, 1.0), c(0.0, 2.0)]).unwrap();
    let r = sing_s_rank_test_at(&tau, &[c(0.1, 0.05), c(0.2, 0.0)], &cfg());
    assert!(matches!(r, Err(Error::NotOnSingularityScheme { .. })));
}

/// `(all ∂θ/∂τ_jk ≈ 0, rank Hess_z)` from central τ-differences of the
/// theta constant and an independent order-2 jet.
fn branches(tau: &PeriodMatrix, ch: &Characteristic) -> (bool, usize) {
    let g = tau.genus();
    let h = 1e-5;
    let mut tau_max = 0.0f64;
    for j in 0..g {
        for k in j..g {
            let e = Direction::elementary(g, j, k);
            let p = theta_constant(&tau.shifted(e.matrix(), c(h, 0.0)).unwrap(), ch, &cfg()).unwrap();
            let m = theta_constant(&tau.shifted(e.matrix(), c(-h, 0.0)).unwrap(), ch, &cfg()).unwrap();
            tau_max = tau_max.max(((p - m) / (2.0 * h)).norm());
        }
    }
    let hess = eval_jet(tau, &vec![c(0.0, 0.0); g], ch, 2, &cfg()).unwrap().hessian();
    (tau_max < 1e-6, RankReport::new(&hess, 1e-6, 1e-10, None).numerical_rank)
}

#[test]
fn rank_dichotomy_on_constructed_points() {
    let mut rng = case_rng(3, 0);
    for i in 0..6 {
        let (tau, ch) = constructed(&mut rng, i % 3);
        let g = tau.genus();
        let jac = sing_s_jacobian_at_half_period(&tau, &ch, &cfg()).unwrap();
        let rep = sing_s_rank_test(&jac, DEFAULT_SCHEME_TOL, DEFAULT_RANK_REL_TOL).unwrap();
        let (flat, hess_rank) = branches(&tau, &ch);
        assert_eq!(rep.in_sing_s, flat || hess_rank <= g - 1, "g={g}");
        assert_eq!(rep.in_sing_s, i % 3 != 0);
    }
}

#[test]
fn sing_s_matches_classification() {
    let tau = PeriodMatrix::diagonal(&[c(0.0, 1.0), c(0.0, 2.0)]).unwrap();
    let cls = classify_stratum(&tau, &cfg(), &StrataTolerances::default()).unwrap();
    for v in &cls.vanishing {
        let jac = sing_s_jacobian_at_half_period(&tau, &v.characteristic, &cfg()).unwrap();
        let rep = sing_s_rank_test(&jac, DEFAULT_SCHEME_TOL, DEFAULT_RANK_REL_TOL).unwrap();
        assert_eq!(!rep.in_sing_s, v.rank.numerical_rank == 2);
    }
}

#[test]
fn snull_deficiency_is_order_four() {
    let mut rng = case_rng(4, 0);
    for i in 0..6 {
        let (tau, ch) = constructed(&mut rng, i % 3);
        let g = tau.genus();
        let s = snull_jacobian(&tau, &ch, &cfg()).unwrap();
        let deficient = s.rank_report(DEFAULT_RANK_REL_TOL).numerical_rank < g + 1;
        let four = order_four_diagnostic(&tau, &ch, &cfg(), DEFAULT_SCHEME_TOL).unwrap();
        assert_eq!(deficient, four.order_four, "g={g}");
        assert_eq!(four.order_four, g == 4);
        assert!(four.odd_partial_max < 1e-11);
    }
}

#[test]
fn genus_four_product_vanishes_to_order_four() {
    let tau = PeriodMatrix::diagonal(&[c(0.0, 1.0), c(0.1, 1.2), c(-0.2, 0.9), c(0.0, 1.4)]).unwrap();
    let ch = (0..3).fold(odd1(), |acc, _| acc.direct_sum(&odd1()));
    let r = order_four_diagnostic(&tau, &ch, &cfg(), DEFAULT_SCHEME_TOL).unwrap();
    assert!(r.order_four);
    let jet = eval_jet(&tau, &[c(0.0, 0.0); 4], &ch, 4, &cfg()).unwrap();
    assert!(jet.partial(&[0, 1, 2, 3]).norm() > 1e-2);
}

#[test]
fn order_four_examples() {
    let i = PeriodMatrix::diagonal(&[c(0.0, 1.0)]).unwrap();
    for ch in enumerate_even(1) {
        assert!(!order_four_diagnostic(&i, &ch, &cfg(), DEFAULT_SCHEME_TOL).unwrap().order_four);
    }
    let tau = PeriodMatrix::diagonal(&[c(0.0, 1.0), c(0.0, 2.0)]).unwrap();
    let r = order_four_diagnostic(&tau, &odd1().direct_sum(&odd1()), &cfg(), DEFAULT_SCHEME_TOL).unwrap();
    assert!(!r.order_four);
    let mut rng = case_rng(5, 0);
    let tau = random_period(&mut rng, 2);
    for ch in enumerate_even(2) {
        assert!(order_four_diagnostic(&tau, &ch, &cfg(), DEFAULT_SCHEME_TOL).unwrap().odd_partial_max < 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>(), g in 1usize..=3, null in any::<bool>()) {
        let mut rng = case_rng(seed, 0);
        let tau = random_period(&mut rng, g);
        let j = if null {
            let evens = enumerate_even(g);
            snull_jacobian(&tau, &evens[rng.gen_range(0..evens.len())], &cfg()).unwrap()
        } else {
            sing_s_jacobian(&tau, &random_z(&mut rng, g), &cfg()).unwrap()
        };
        let text = thetanull::json::to_string(&j);
        let back: SchemeJacobian = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &j);
        prop_assert_eq!(thetanull::json::to_string(&back), text);
    }
}
