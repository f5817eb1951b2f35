//! Reproducible random inputs.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::characteristics::{enumerate_all, enumerate_even, Characteristic};
use crate::error::{Error, Result};
use crate::gauss::{project_to_theta_divisor, ThetaDivisorPoint};
use crate::linalg::{CMatrix, RMatrix};
use crate::siegel::{IntMatrix, PeriodMatrix, SymplecticElement};
use crate::theta::EvalConfig;

/// Generator for case `index` of a run seeded with `seed`.
pub fn case_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// `X + iY` with `X` symmetric, entries in `[−½, ½]`, and
/// `Y = AAᵀ + cI`, `A` entries in `[−0.3, 0.3]`, `c ∈ [0.8, 1.2]`.
pub fn random_period(rng: &mut impl Rng, g: usize) -> PeriodMatrix {
    let a = RMatrix::from_fn(g, g, |_, _| rng.gen_range(-0.3..0.3));
    let y = &a * a.transpose() + RMatrix::identity(g, g) * rng.gen_range(0.8..1.2);
    let x = RMatrix::from_fn(g, g, |_, _| rng.gen_range(-0.5..0.5));
    let x = (&x + x.transpose()) * 0.5;
    PeriodMatrix::from_parts(&x, &y).expect("AAᵀ + cI is positive definite")
}

pub fn random_z(rng: &mut impl Rng, g: usize) -> Vec<Complex64> {
    (0..g).map(|_| Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.3..0.3))).collect()
}

pub fn random_characteristic(rng: &mut impl Rng, g: usize) -> Characteristic {
    let all = enumerate_all(g);
    all[rng.gen_range(0..all.len())]
}

pub fn random_even_characteristic(rng: &mut impl Rng, g: usize) -> Characteristic {
    let all = enumerate_even(g);
    all[rng.gen_range(0..all.len())]
}

/// Random complex symmetric matrix with entries in the unit square.
pub fn random_symmetric(rng: &mut impl Rng, n: usize) -> CMatrix {
    let m = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&m + m.transpose()) * Complex64::new(0.5, 0.0)
}

/// A fixed indecomposable genus-2 period matrix whose theta divisor is a
/// smooth curve.
pub fn generic_genus_two() -> PeriodMatrix {
    let x = RMatrix::from_row_slice(2, 2, &[0.1, 0.25, 0.25, -0.15]);
    let y = RMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.2]);
    PeriodMatrix::from_parts(&x, &y).expect("positive definite")
}

/// Generators of `Γ_g(4,8)`: translations by `S` and `(I 0; S I)` for the
/// symmetric `S` equal to `8e_jj` or `4(e_jk + e_kj)`, and for `g ≥ 2` the
/// elements `(A 0; 0 A^{-T})` with `A = I + 4e_jk`.
pub fn gamma48_generators(g: usize) -> Vec<SymplecticElement> {
    let mut out = Vec::new();
    let mut symmetric = Vec::new();
    for j in 0..g {
        for k in j..g {
            let mut s = IntMatrix::zeros(g, g);
            if j == k {
                s[(j, j)] = 8;
            } else {
                s[(j, k)] = 4;
                s[(k, j)] = 4;
            }
            symmetric.push(s);
        }
    }
    for s in &symmetric {
        out.push(SymplecticElement::translation(s).expect("symmetric"));
    }
    for s in &symmetric {
        out.push(SymplecticElement::lower_translation(s).expect("symmetric"));
    }
    for j in 0..g {
        for k in 0..g {
            if j != k {
                let mut a = IntMatrix::identity(g, g);
                a[(j, k)] = 4;
                let mut d = IntMatrix::identity(g, g);
                d[(k, j)] = -4;
                out.push(SymplecticElement::block_diagonal(&a, &d).expect("A^{-T} pairs with A"));
            }
        }
    }
    out
}

/// Product of `1..=max_len` random generators or their inverses.
pub fn random_gamma48_word(rng: &mut impl Rng, g: usize, max_len: usize) -> SymplecticElement {
    let gens = gamma48_generators(g);
    let len = rng.gen_range(1..=max_len.max(1));
    let mut w = SymplecticElement::identity(g);
    for _ in 0..len {
        let mut s = gens[rng.gen_range(0..gens.len())].clone();
        if rng.gen_bool(0.5) {
            s = s.inverse();
        }
        w = w.compose(&s).expect("short words do not overflow");
    }
    w
}

/// Newton-projected point of `{θ[ch](τ, ·) = 0}` from a uniformly random
/// start in the fundamental parallelogram, at lattice distance more than
/// `exclusion` from every half-period.
pub fn random_theta_divisor_point(
    rng: &mut impl Rng,
    tau: &PeriodMatrix,
    ch: &Characteristic,
    cfg: &EvalConfig,
    exclusion: f64,
) -> Result<ThetaDivisorPoint> {
    let g = tau.genus();
    let m = tau.matrix();
    let half_periods = enumerate_all(g);
    let mut last = Error::NoConvergence { iterations: 0, residual: f64::INFINITY };
    for _ in 0..100 {
        let a: Vec<f64> = (0..g).map(|_| rng.gen_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..g).map(|_| rng.gen_range(0.0..1.0)).collect();
        let x0: Vec<Complex64> = (0..g)
            .map(|i| (0..g).map(|j| m[(i, j)] * a[j]).sum::<Complex64>() + b[i])
            .collect();
        match project_to_theta_divisor(tau, &x0, ch, cfg, 1e-12, 60) {
            Ok(p) => {
                if half_periods.iter().all(|hp| tau.torus_distance_to_half_period(&p.x, hp) > exclusion) {
                    return Ok(p);
                }
            }
            Err(e @ Error::NoConvergence { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}
