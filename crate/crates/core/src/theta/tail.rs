//! Rigorous bounds for the terms omitted by a truncated theta series.
//!
//! Write `u = T(n + Y⁻¹y)` for the lattice point attached to `n = m + ε/2`,
//! where `π·Y = TᵀT`. A term of the series has modulus
//! `exp(π yᵀY⁻¹y)·exp(−‖u‖²)` and a derivative weight at most
//! `(a + b‖u‖)^k` with `a = 1 + 2π‖Y⁻¹y‖`, `b = 2π/ρ` and `ρ` the smallest
//! singular value of `T`. Balls of radius `r = ρ/2` around the points `u`
//! are disjoint, so the omitted sum is dominated by a radial integral over
//! the shell `‖v‖ ≥ R − r`.

use statrs::function::erf::erfc;

use crate::siegel::PeriodMatrix;
use num_complex::Complex64;

/// Data of the bound that depends on `(τ, z, order)` but not on the radius.
#[derive(Debug, Clone)]
pub struct TailModel {
    genus: usize,
    order: usize,
    log_prefactor: f64,
    r: f64,
    a: f64,
    b: f64,
}

impl TailModel {
    pub fn new(tau: &PeriodMatrix, z_imag: &[f64], order: usize) -> Self {
        let g = tau.genus();
        let y = nalgebra::DVector::from_column_slice(z_imag);
        let w = tau.imag_inverse() * &y;
        let rho = tau.min_lattice_scale();
        let (a, b) = if order == 0 {
            (1.0, 0.0)
        } else {
            (1.0 + 2.0 * std::f64::consts::PI * w.norm(), 2.0 * std::f64::consts::PI / rho)
        };
        TailModel {
            genus: g,
            order,
            log_prefactor: std::f64::consts::PI * y.dot(&w),
            r: rho / 2.0,
            a,
            b,
        }
    }

    pub fn from_point(tau: &PeriodMatrix, z: &[Complex64], order: usize) -> Self {
        let y: Vec<f64> = z.iter().map(|v| v.im).collect();
        Self::new(tau, &y, order)
    }

    /// Radius below which the bound is vacuous.
    pub fn shift_margin(&self) -> f64 {
        2.0 * self.r
    }

    /// Bound on `Σ_{‖u‖ > R} |weight|·|term|` for every multi-index of size
    /// at most `order`. Infinite for `R ≤ 2r`.
    pub fn bound(&self, radius: f64) -> f64 {
        let l = radius - 2.0 * self.r;
        if !(l > 0.0) {
            return f64::INFINITY;
        }
        let x = l * l;
        let poly = self.shell_polynomial();
        let scaled = scaled_half_gammas(poly.len(), x);
        let s: f64 = poly.iter().zip(&scaled).map(|(p, gj)| p * gj / 2.0).sum();
        let g = self.genus as f64;
        let log = self.log_prefactor - x + g.ln() - g * self.r.ln() + s.ln();
        log.exp()
    }

    /// Coefficients of `(A + b s)^k (s + r)^{g−1}` in increasing degree.
    fn shell_polynomial(&self) -> Vec<f64> {
        let big_a = self.a + 2.0 * self.b * self.r;
        let mut p = vec![1.0];
        for _ in 0..self.order {
            p = mul_linear(&p, big_a, self.b);
        }
        for _ in 1..self.genus {
            p = mul_linear(&p, self.r, 1.0);
        }
        p
    }

    /// Smallest radius (to a relative resolution of 1e-9) whose bound is at
    /// most `target`. Returns `Err(estimate)` when it exceeds `cap`.
    pub fn radius_for(&self, target: f64, cap: f64) -> Result<f64, f64> {
        let mut hi = self.shift_margin() + 1.0;
        while self.bound(hi) > target {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(f64::INFINITY);
            }
        }
        let mut lo = self.shift_margin();
        while hi - lo > 1e-9 * hi {
            let mid = 0.5 * (lo + hi);
            if self.bound(mid) <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if hi > cap {
            Err(hi)
        } else {
            Ok(hi)
        }
    }
}

fn mul_linear(p: &[f64], c0: f64, c1: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 1];
    for (i, &v) in p.iter().enumerate() {
        out[i] += v * c0;
        out[i + 1] += v * c1;
    }
    out
}

/// `e^x·Γ((j+1)/2, x)` for `j = 0..n`.
fn scaled_half_gammas(n: usize, x: f64) -> Vec<f64> {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let sx = x.sqrt();
    // e^x·Γ(1/2, x) = √π·erfcx(√x); erfcx(t) ≤ 1/(√π t) once erfc underflows
    let half = if x < 700.0 { sqrt_pi * erfc(sx) * x.exp() } else { 1.0 / sx };
    let mut out = Vec::with_capacity(n);
    let mut even = half; // a = 1/2, 3/2, ...
    let mut odd = 1.0; // a = 1, 2, ...
    let mut a_even = 0.5;
    let mut a_odd = 1.0;
    for j in 0..n {
        if j % 2 == 0 {
            out.push(even);
            even = a_even * even + x.powf(a_even);
            a_even += 1.0;
        } else {
            out.push(odd);
            odd = a_odd * odd + x.powf(a_odd);
            a_odd += 1.0;
        }
    }
    out
}

/// Bound on the omitted terms of the series for `θ[·](τ, z)` and its
/// z-derivatives of order at most `order`, when summing over `‖u‖ ≤ radius`.
pub fn tail_bound(tau: &PeriodMatrix, z: &[Complex64], order: usize, radius: f64) -> f64 {
    TailModel::from_point(tau, z, order).bound(radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_gammas_match_closed_forms() {
        let x: f64 = 3.0;
        let v = scaled_half_gammas(4, x);
        let sp = std::f64::consts::PI.sqrt();
        assert!((v[0] - sp * erfc(x.sqrt()) * x.exp()).abs() < 1e-14);
        assert!((v[1] - 1.0).abs() < 1e-15);
        assert!((v[2] - (0.5 * v[0] + x.sqrt())).abs() < 1e-14);
        // Γ(2, x) = (1 + x) e^{-x}
        assert!((v[3] - (1.0 + x)).abs() < 1e-14);
    }

    #[test]
    fn genus_one_bound_dominates_tail() {
        let tau = PeriodMatrix::imaginary_identity(1);
        let r = 3.0 * std::f64::consts::PI.sqrt();
        let omitted: f64 = (4..40).map(|m| 2.0 * (-std::f64::consts::PI * (m * m) as f64).exp()).sum();
        let b = tail_bound(&tau, &[Complex64::new(0.0, 0.0)], 0, r);
        assert!(omitted <= b, "{omitted} > {b}");
    }

    #[test]
    fn decreasing_and_vanishing() {
        let tau = PeriodMatrix::imaginary_identity(2);
        let z = [Complex64::new(0.1, 0.3), Complex64::new(-0.2, 0.1)];
        let model = TailModel::from_point(&tau, &z, 3);
        let (b5, b10, b20) = (model.bound(5.0), model.bound(10.0), model.bound(20.0));
        assert!(b10 < b5 && b20 < b10);
        assert!(b10 < 1e-8 && b20 < 1e-30);
        assert_eq!(model.bound(model.shift_margin()), f64::INFINITY);
    }

    #[test]
    fn radius_search_meets_target() {
        let tau = PeriodMatrix::imaginary_identity(3);
        let model = TailModel::from_point(&tau, &[Complex64::new(0.0, 0.2); 3], 4);
        let r = model.radius_for(1e-12, 15.0).unwrap();
        assert!(model.bound(r) <= 1e-12);
        assert!(model.bound(r * (1.0 - 1e-6)) > 1e-12);
        assert!(model.radius_for(1e-12, 1.0).is_err());
    }
}
