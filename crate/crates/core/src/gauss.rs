//! Bordered Hessians, the form `η`, Gauss-map ramification, the boundary
//! matrix and the Hessian form `F(τ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characteristics::Characteristic;
use crate::error::{Error, Result};
use crate::json::{complex_vec, ComplexJson, ComplexMatrixJson};
use crate::linalg::{self, CMatrix};
use crate::siegel::PeriodMatrix;
use crate::strata::{d_matrix, RankReport, FLOOR_FACTOR};
use crate::theta::{eval_jet, EvalConfig};

pub const DEFAULT_ETA_REL_TOL: f64 = 1e-6;
pub const DEFAULT_DIVISOR_TOL: f64 = 1e-9;
pub const DEFAULT_GRADIENT_TOL: f64 = 1e-8;
/// Relative disagreement between `det B` and `−η` treated as an internal error.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussTolerances {
    /// `|θ|` above this is off the divisor.
    pub divisor_tol: f64,
    /// `‖dF‖` at or below this is a singular point of the divisor.
    pub gradient_tol: f64,
    /// Relative threshold for `η` and for the rank of `B`.
    pub rel_tol: f64,
}

impl Default for GaussTolerances {
    fn default() -> Self {
        GaussTolerances { divisor_tol: DEFAULT_DIVISOR_TOL, gradient_tol: DEFAULT_GRADIENT_TOL, rel_tol: DEFAULT_ETA_REL_TOL }
    }
}

/// `B = (H, dF; dFᵀ, 0)` at a point, with the value of `θ` there.
#[derive(Debug, Clone, PartialEq)]
pub struct BorderedHessian {
    pub h: CMatrix,
    pub df: Vec<Complex64>,
    pub b: CMatrix,
    pub theta: Complex64,
    pub tail_bound: f64,
}

impl BorderedHessian {
    pub fn from_parts(h: CMatrix, df: Vec<Complex64>, theta: Complex64, tail_bound: f64) -> Self {
        let n = h.nrows();
        assert_eq!(df.len(), n);
        let mut b = CMatrix::zeros(n + 1, n + 1);
        b.view_mut((0, 0), (n, n)).copy_from(&h);
        for i in 0..n {
            b[(i, n)] = df[i];
            b[(n, i)] = df[i];
        }
        BorderedHessian { h, df, b, theta, tail_bound }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn gradient_norm(&self) -> f64 {
        self.df.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `10 ×` the summed certified errors of the entries of `B`.
    pub fn abs_floor(&self) -> f64 {
        let n = self.dim() + 1;
        FLOOR_FACTOR * ((n * n - 1) as f64) * self.tail_bound
    }

    pub fn rank_report(&self, rel_tol: f64) -> RankReport {
        RankReport::new(&self.b, rel_tol, self.abs_floor(), None)
    }
}

#[derive(Serialize)]
struct BorderedHessianJson {
    h: ComplexMatrixJson,
    df: Vec<ComplexJson>,
    b: ComplexMatrixJson,
    theta: ComplexJson,
    tail_bound: f64,
}

impl Serialize for BorderedHessian {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BorderedHessianJson {
            h: (&self.h).into(),
            df: complex_vec(&self.df),
            b: (&self.b).into(),
            theta: self.theta.into(),
            tail_bound: self.tail_bound,
        }
        .serialize(s)
    }
}

pub fn bordered_hessian(tau: &PeriodMatrix, x: &[Complex64], ch: &Characteristic, cfg: &EvalConfig) -> Result<BorderedHessian> {
    let jet = eval_jet(tau, x, ch, 2, cfg)?;
    Ok(BorderedHessian::from_parts(jet.hessian(), jet.gradient(), jet.value(), jet.tail_bound_used))
}

/// `cof(M)_jk = (−1)^{j+k} det M^{(j,k)}`, so `M·cof(M)ᵀ = det(M)·I`.
pub fn cofactor_matrix(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "cofactors need a square matrix");
    CMatrix::from_fn(n, n, |j, k| {
        let minor = m.clone().remove_row(j).remove_column(k);
        let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
        linalg::determinant(&minor) * sign
    })
}

/// `dFᵀ·cof(H)·dF`.
pub fn eta_form(h: &CMatrix, df: &[Complex64]) -> Complex64 {
    let cof = cofactor_matrix(h);
    let n = df.len();
    (0..n).flat_map(|j| (0..n).map(move |k| (j, k))).map(|(j, k)| df[j] * cof[(j, k)] * df[k]).sum()
}

/// `‖dF‖²·‖H‖^{n−1}`, the natural size of `η` and of `det B`.
pub fn eta_scale(h: &CMatrix, df: &[Complex64]) -> f64 {
    let n = h.nrows();
    let g2: f64 = df.iter().map(|v| v.norm_sqr()).sum();
    g2 * linalg::spectral_norm(h).powi(n as i32 - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaReport {
    pub eta: ComplexJson,
    pub det_b: ComplexJson,
    pub scale: f64,
    pub theta_abs: f64,
    pub on_divisor: bool,
    pub divisor_tol: f64,
}

impl EtaReport {
    pub fn eta(&self) -> Complex64 {
        self.eta.into()
    }

    /// `|η| ≤ rel_tol·‖dF‖²·‖H‖^{n−1}`.
    pub fn vanishes(&self, rel_tol: f64) -> bool {
        self.eta().norm() <= rel_tol * self.scale
    }

    pub fn relative(&self) -> f64 {
        self.eta().norm() / self.scale
    }
}

/// `η` and `det B` from one bordered Hessian, with the identity
/// `det B = −η` enforced.
pub fn eta_from_bordered(bh: &BorderedHessian, divisor_tol: f64) -> Result<EtaReport> {
    let eta = eta_form(&bh.h, &bh.df);
    let det_b = linalg::determinant(&bh.b);
    let scale = eta_scale(&bh.h, &bh.df);
    if (det_b + eta).norm() > IDENTITY_TOL * scale.max(eta.norm()).max(f64::MIN_POSITIVE) {
        return Err(Error::IdentityMismatch { det_b: det_b.to_string(), neg_eta: (-eta).to_string() });
    }
    let theta_abs = bh.theta.norm();
    Ok(EtaReport {
        eta: eta.into(),
        det_b: det_b.into(),
        scale,
        theta_abs,
        on_divisor: theta_abs <= divisor_tol,
        divisor_tol,
    })
}

pub fn eta(tau: &PeriodMatrix, x: &[Complex64], ch: &Characteristic, cfg: &EvalConfig, divisor_tol: f64) -> Result<EtaReport> {
    eta_from_bordered(&bordered_hessian(tau, x, ch, cfg)?, divisor_tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamificationReport {
    pub ramified: bool,
    pub rank: RankReport,
    pub eta: EtaReport,
}

/// Whether `x ∈ {θ[ch](τ,·) = 0}` is a ramification point of the Gauss map:
/// the bordered Hessian has numerical rank below `g + 1`.
pub fn is_gauss_ramification(
    tau: &PeriodMatrix,
    x: &[Complex64],
    ch: &Characteristic,
    cfg: &EvalConfig,
    tol: &GaussTolerances,
) -> Result<RamificationReport> {
    let bh = bordered_hessian(tau, x, ch, cfg)?;
    let theta = bh.theta.norm();
    if theta > tol.divisor_tol {
        return Err(Error::NotOnDivisor { residual: theta, tolerance: tol.divisor_tol });
    }
    let grad = bh.gradient_norm();
    if grad <= tol.gradient_tol {
        return Err(Error::SingularPointOfTheta { gradient: grad, tolerance: tol.gradient_tol });
    }
    let rank = bh.rank_report(tol.rel_tol);
    let eta = eta_from_bordered(&bh, tol.divisor_tol)?;
    Ok(RamificationReport { ramified: rank.numerical_rank < bh.dim() + 1, rank, eta })
}

/// Rank of the boundary matrix: the bordered Hessian of `θ(τ′, ·)` at `z/2`.
pub fn boundary_rank(tau_prime: &PeriodMatrix, z: &[Complex64], cfg: &EvalConfig, tol: &GaussTolerances) -> Result<RankReport> {
    let half: Vec<Complex64> = z.iter().map(|v| v * 0.5).collect();
    let bh = bordered_hessian(tau_prime, &half, &Characteristic::zero(tau_prime.genus()), cfg)?;
    let theta = bh.theta.norm();
    if theta > tol.divisor_tol {
        return Err(Error::NotOnDivisor { residual: theta, tolerance: tol.divisor_tol });
    }
    Ok(bh.rank_report(tol.rel_tol))
}

/// `F(τ) = det D θ[ch](τ)`, equal to `det Hess_z θ[ch](τ,0)/(4πi)^g`.
pub fn hessian_form_f(tau: &PeriodMatrix, ch: &Characteristic, cfg: &EvalConfig) -> Result<Complex64> {
    Ok(linalg::determinant(&d_matrix(tau, ch, cfg)?.matrix))
}

#[derive(Debug, Clone)]
pub struct ThetaDivisorPoint {
    pub x: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Newton iteration for `θ[ch](τ, x) = 0` from `x0`, using the
/// minimum-norm step `−θ·conj(∇θ)/‖∇θ‖²`.
pub fn project_to_theta_divisor(
    tau: &PeriodMatrix,
    x0: &[Complex64],
    ch: &Characteristic,
    cfg: &EvalConfig,
    tol: f64,
    max_iter: usize,
) -> Result<ThetaDivisorPoint> {
    let mut x = x0.to_vec();
    let mut jet = eval_jet(tau, &x, ch, 1, cfg)?;
    for iter in 0..=max_iter {
        let f = jet.value();
        if f.norm() <= tol {
            return Ok(ThetaDivisorPoint { x, residual: f.norm(), iterations: iter });
        }
        if iter == max_iter {
            break;
        }
        let grad = jet.gradient();
        let g2: f64 = grad.iter().map(|v| v.norm_sqr()).sum();
        if !(g2 > 0.0) {
            return Err(Error::NoConvergence { iterations: iter, residual: f.norm() });
        }
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<Complex64> = x.iter().zip(&grad).map(|(xi, gi)| xi - f * gi.conj() / g2 * scale).collect();
            let cand_jet = eval_jet(tau, &cand, ch, 1, cfg)?;
            if cand_jet.value().norm() < f.norm() {
                x = cand;
                jet = cand_jet;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence { iterations: iter + 1, residual: f.norm() });
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: jet.value().norm() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(rows: usize, v: &[f64]) -> CMatrix {
        CMatrix::from_row_slice(rows, rows, &v.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn cofactor_examples() {
        assert_eq!(cofactor_matrix(&real(2, &[1.0, 0.0, 0.0, 1.0])), real(2, &[1.0, 0.0, 0.0, 1.0]));
        assert_eq!(cofactor_matrix(&real(2, &[1.0, 2.0, 3.0, 4.0])), real(2, &[4.0, -3.0, -2.0, 1.0]));
    }

    #[test]
    fn eta_sign_on_integer_example() {
        let bh = BorderedHessian::from_parts(real(2, &[1.0, 0.0, 0.0, 1.0]), vec![c(1.0, 0.0), c(2.0, 0.0)], c(0.0, 0.0), 0.0);
        let r = eta_from_bordered(&bh, 1e-9).unwrap();
        assert!((r.eta() - c(5.0, 0.0)).norm() < 1e-14);
        assert!((Complex64::from(r.det_b) - c(-5.0, 0.0)).norm() < 1e-14);
        assert_eq!(bh.b[(2, 2)], c(0.0, 0.0));
        assert_eq!(bh.b.transpose(), bh.b);
    }

    #[test]
    fn odd_form_f_vanishes_in_genus_one() {
        let tau = PeriodMatrix::imaginary_identity(1);
        let odd = Characteristic::from_bits(&[1], &[1]).unwrap();
        assert!(hessian_form_f(&tau, &odd, &EvalConfig::default()).unwrap().norm() < 1e-12);
    }
}
