use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use thetanull::characteristics::{enumerate_all, half_period};
use thetanull::siegel::{act, act_char, in_gamma, in_gamma_n_2n, IntMatrix, SymplecticElement};
use thetanull::verify::sampling::{case_rng, gamma48_generators, random_gamma48_word, random_period};

fn elementary_generators(g: usize) -> Vec<SymplecticElement> {
    let mut out = vec![SymplecticElement::involution(g)];
    for j in 0..g {
        for k in j..g {
            let mut s = IntMatrix::zeros(g, g);
            s[(j, k)] = 1;
            s[(k, j)] = 1;
            out.push(SymplecticElement::translation(&s).unwrap());
            out.push(SymplecticElement::lower_translation(&s).unwrap());
            if j != k {
                let mut a = IntMatrix::identity(g, g);
                a[(j, k)] = 1;
                let mut d = IntMatrix::identity(g, g);
                d[(k, j)] = -1;
                out.push(SymplecticElement::block_diagonal(&a, &d).unwrap());
            }
        }
    }
    out
}

fn random_word(rng: &mut impl Rng, g: usize, len: usize) -> SymplecticElement {
    let gens = elementary_generators(g);
    let mut w = SymplecticElement::identity(g);
    for _ in 0..len {
        let mut s = gens[rng.gen_range(0..gens.len())].clone();
        if rng.gen_bool(0.5) {
            s = s.inverse();
        }
        w = w.compose(&s).unwrap();
    }
    w
}

fn max_entry(s: &SymplecticElement) -> i64 {
    s.matrix().iter().map(|v| v.abs()).max().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_composes(seed in any::<u64>(), g in 1usize..=3) {
        let mut rng = case_rng(seed, 0);
        let s1 = random_word(&mut rng, g, 3);
        let s2 = random_word(&mut rng, g, 3);
        prop_assume!(max_entry(&s1) <= 3 && max_entry(&s2) <= 3);
        let tau = random_period(&mut rng, g);
        let lhs = act(&s1.compose(&s2).unwrap(), &tau).unwrap();
        let rhs = act(&s1, &act(&s2, &tau).unwrap()).unwrap();
        let diff = (lhs.matrix() - rhs.matrix()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-10, "difference {diff:e}");
    }

    #[test]
    fn characteristic_action_composes(seed in any::<u64>(), g in 1usize..=3) {
        let mut rng = case_rng(seed, 1);
        let s1 = random_word(&mut rng, g, 4);
        let s2 = random_word(&mut rng, g, 4);
        let s12 = s1.compose(&s2).unwrap();
        for ch in enumerate_all(g) {
            let lhs = act_char(&s12, &ch).unwrap();
            let rhs = act_char(&s1, &act_char(&s2, &ch).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn membership_is_monotone(seed in any::<u64>(), g in 1usize..=2) {
        let mut rng = case_rng(seed, 2);
        let deep = random_gamma48_word(&mut rng, g, 3);
        prop_assert!(in_gamma_n_2n(&deep, 4));
        prop_assert!(in_gamma(&deep, 4));
        let mut w = SymplecticElement::identity(g);
        let gens = elementary_generators(g);
        for _ in 0..3 {
            let s = &gens[rng.gen_range(0..gens.len())];
            let four = (0..4).try_fold(SymplecticElement::identity(g), |acc, _| acc.compose(s)).unwrap();
            w = w.compose(&four).unwrap();
        }
        if in_gamma(&w, 4) {
            prop_assert!(in_gamma(&w, 2));
        }
        if in_gamma_n_2n(&w, 4) {
            prop_assert!(in_gamma(&w, 4));
        }
    }
}

#[test]
fn characteristic_action_preserves_parity() {
    for g in 1..=3 {
        let mut sigmas = elementary_generators(g);
        let mut rng = case_rng(5, g);
        sigmas.extend((0..10).map(|_| random_word(&mut rng, g, 5)));
        for s in &sigmas {
            for ch in enumerate_all(g) {
                assert_eq!(act_char(s, &ch).unwrap().parity(), ch.parity());
            }
        }
    }
}

#[test]
fn gamma48_fixes_every_characteristic() {
    for g in 1..=2 {
        for s in gamma48_generators(g) {
            for ch in enumerate_all(g) {
                assert_eq!(act_char(&s, &ch).unwrap(), ch);
            }
        }
    }
}

#[test]
fn half_periods_are_distinct() {
    for g in 1..=3 {
        let tau = random_period(&mut case_rng(9, g), g);
        let pts: Vec<Vec<Complex64>> = enumerate_all(g).iter().map(|ch| half_period(&tau, ch).unwrap()).collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(d > 1e-3, "half-periods {i} and {j} coincide");
            }
        }
    }
}
