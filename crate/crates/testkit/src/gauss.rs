//! Finite-difference detection of Gauss-map ramification.
//!
//! Near a smooth point `x` of `{θ = 0}` pick the coordinate `b` with the
//! largest `|∂_bθ|`. The divisor is a graph over the other coordinates, and
//! the Gauss map in the affine chart `∂_bθ ≠ 0` is `c ↦ ∂_cθ/∂_bθ`. The
//! differential of that map along the divisor is estimated by central
//! differences, each stencil point being pulled back onto the divisor by
//! Newton steps in the `e_b` direction.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thetanull::theta::{eval_jet, EvalConfig};
use thetanull::{Characteristic, PeriodMatrix, Result};

#[derive(Debug, Clone)]
pub struct GaussOracleReport {
    /// Singular values of the `(g−1)×(g−1)` differential, descending.
    pub singular_values: Vec<f64>,
    /// Scale the singular values are compared against.
    pub scale: f64,
    pub ramified: bool,
}

const STEP: f64 = 1e-4;
const REL_TOL: f64 = 1e-5;

fn gradient(tau: &PeriodMatrix, p: &[Complex64], ch: &Characteristic, cfg: &EvalConfig) -> Result<(Complex64, Vec<Complex64>)> {
    let jet = eval_jet(tau, p, ch, 1, cfg)?;
    Ok((jet.value(), jet.gradient()))
}

fn project(tau: &PeriodMatrix, p: &mut [Complex64], b: usize, ch: &Characteristic, cfg: &EvalConfig) -> Result<Vec<Complex64>> {
    for _ in 0..30 {
        let (v, grad) = gradient(tau, p, ch, cfg)?;
        let step = v / grad[b];
        p[b] -= step;
        if step.norm() < 1e-15 {
            break;
        }
    }
    Ok(gradient(tau, p, ch, cfg)?.1)
}

pub fn gauss_oracle(tau: &PeriodMatrix, x: &[Complex64], ch: &Characteristic, cfg: &EvalConfig) -> Result<GaussOracleReport> {
    let g = tau.genus();
    let (_, grad) = gradient(tau, x, ch, cfg)?;
    let b = (0..g).max_by(|&i, &j| grad[i].norm().total_cmp(&grad[j].norm())).expect("genus ≥ 1");
    let others: Vec<usize> = (0..g).filter(|&i| i != b).collect();
    let chart = |gr: &[Complex64]| -> Vec<Complex64> { others.iter().map(|&c| gr[c] / gr[b]).collect() };
    let center = chart(&grad);

    let n = others.len();
    let mut jac = DMatrix::<Complex64>::zeros(n, n);
    for (col, &a) in others.iter().enumerate() {
        let mut samples = Vec::with_capacity(2);
        for sign in [1.0, -1.0] {
            let mut p = x.to_vec();
            p[a] += STEP * sign;
            p[b] -= grad[a] / grad[b] * (STEP * sign);
            let gr = project(tau, &mut p, b, ch, cfg)?;
            samples.push(chart(&gr));
        }
        for row in 0..n {
            jac[(row, col)] = (samples[0][row] - samples[1][row]) / (2.0 * STEP);
        }
    }
    let mut singular_values: Vec<f64> = if n == 0 {
        Vec::new()
    } else {
        jac.svd(false, false).singular_values.iter().copied().collect()
    };
    singular_values.sort_by(|p, q| q.total_cmp(p));
    let scale = 1.0 + center.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let ramified = singular_values.last().is_some_and(|&s| s < REL_TOL * scale);
    Ok(GaussOracleReport { singular_values, scale, ramified })
}
