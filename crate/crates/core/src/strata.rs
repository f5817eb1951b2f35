//! The operator `D`, the rank stratification of the theta-null divisor,
//! theta-constant vectors, Newton projection onto theta-null divisors and
//! the squared modular transformation check.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characteristics::{enumerate_even, Characteristic};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::siegel::{act, automorphy_matrix, in_gamma_n_2n, Direction, PeriodMatrix, SymplecticElement};
use crate::theta::{directional_from_jet, eval_jet, theta_constant, EvalConfig, ThetaJet};

pub const DEFAULT_RANK_REL_TOL: f64 = 1e-6;
pub const DEFAULT_VANISH_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 50;
/// Multiple of the summed certified errors used as the absolute rank floor.
pub const FLOOR_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub matrix_dim: (usize, usize),
    pub singular_values: Vec<f64>,
    pub numerical_rank: usize,
    pub rel_tol_used: f64,
    pub abs_floor_used: f64,
    pub witness: Option<Characteristic>,
}

impl RankReport {
    /// `σ_k` counts iff `σ_k > max(rel_tol·σ_1, abs_floor)`.
    pub fn new(m: &CMatrix, rel_tol: f64, abs_floor: f64, witness: Option<Characteristic>) -> Self {
        let singular_values = linalg::singular_values(m);
        let mut report = RankReport {
            matrix_dim: m.shape(),
            singular_values,
            numerical_rank: 0,
            rel_tol_used: rel_tol,
            abs_floor_used: abs_floor,
            witness,
        };
        let t = report.threshold();
        report.numerical_rank = report.singular_values.iter().filter(|&&s| s > t).count();
        report
    }

    pub fn threshold(&self) -> f64 {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        (self.rel_tol_used * top).max(self.abs_floor_used)
    }

    pub fn is_full_rank(&self) -> bool {
        self.numerical_rank == self.matrix_dim.0.min(self.matrix_dim.1)
    }

    /// Distance in decades between the threshold and the nearest singular
    /// value. Infinite when there are no singular values, or when every
    /// singular value is exactly zero.
    pub fn separation_decades(&self) -> f64 {
        let t = self.threshold();
        self.singular_values
            .iter()
            .map(|&s| if s == 0.0 && t == 0.0 { f64::INFINITY } else { (s / t).log10().abs() })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Tolerances of the classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrataTolerances {
    pub vanish_tol: f64,
    pub rank_rel_tol: f64,
}

impl Default for StrataTolerances {
    fn default() -> Self {
        StrataTolerances { vanish_tol: DEFAULT_VANISH_TOL, rank_rel_tol: DEFAULT_RANK_REL_TOL }
    }
}

impl StrataTolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.vanish_tol > 0.0) || !(self.rank_rel_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// The matrix `D θ[ch](τ)` with its certified entrywise error.
#[derive(Debug, Clone, PartialEq)]
pub struct DMatrixValue {
    pub matrix: CMatrix,
    pub entry_error: f64,
    pub jet: ThetaJet,
}

impl DMatrixValue {
    /// Absolute rank floor: `FLOOR_FACTOR` times the summed entry errors.
    pub fn abs_floor(&self) -> f64 {
        let g = self.matrix.nrows() as f64;
        FLOOR_FACTOR * g * g * self.entry_error
    }
}

/// `D` from the Hessian of a theta jet at `z = 0`: diagonal entries
/// `∂θ/∂τ_jj`, off-diagonal entries `½·∂θ/∂τ_jk`. Both equal
/// `Hess_z θ/(4πi)`; the two are computed separately and compared.
pub fn d_matrix_from_jet(jet: &ThetaJet) -> Result<CMatrix> {
    let g = jet.genus();
    let from_tau = CMatrix::from_fn(g, g, |j, k| {
        let d = jet.tau_partial(j, k);
        if j == k {
            d
        } else {
            d * 0.5
        }
    });
    let from_hess = jet.hessian() / Complex64::new(0.0, 4.0 * PI);
    let diff = (&from_tau - &from_hess).iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = from_hess.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if diff > 1e-12 * scale + 1e-300 {
        return Err(Error::IdentityMismatch { det_b: format!("{from_tau}"), neg_eta: format!("{from_hess}") });
    }
    Ok(from_tau)
}

pub fn d_matrix(tau: &PeriodMatrix, ch: &Characteristic, cfg: &EvalConfig) -> Result<DMatrixValue> {
    let jet = eval_jet(tau, &vec![Complex64::new(0.0, 0.0); tau.genus()], ch, 2, cfg)?;
    let matrix = d_matrix_from_jet(&jet)?;
    Ok(DMatrixValue { matrix, entry_error: jet.tail_bound_used / (4.0 * PI), jet })
}

/// Even theta constants `θ[ch](τ, 0)` in canonical characteristic order.
pub fn theta_constant_vector(tau: &PeriodMatrix, cfg: &EvalConfig) -> Result<Vec<(Characteristic, Complex64)>> {
    enumerate_even(tau.genus())
        .into_par_iter()
        .map(|ch| Ok((ch, theta_constant(tau, &ch, cfg)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingConstant {
    pub characteristic: Characteristic,
    pub abs_value: f64,
    pub rank: RankReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumClassification {
    pub genus: usize,
    pub vanishing: Vec<VanishingConstant>,
    pub min_h: Option<usize>,
    pub in_theta_null: bool,
    pub tolerances: StrataTolerances,
    /// Largest modulus among the even theta constants.
    pub scale: f64,
    /// Smallest modulus among the constants not declared vanishing.
    pub smallest_nonvanishing: Option<f64>,
}

pub fn classify_stratum(tau: &PeriodMatrix, cfg: &EvalConfig, tol: &StrataTolerances) -> Result<StratumClassification> {
    tol.validate()?;
    let constants = theta_constant_vector(tau, cfg)?;
    let scale = constants.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    let cut = tol.vanish_tol * scale;
    let (zero, nonzero): (Vec<_>, Vec<_>) = constants.iter().partition(|(_, v)| v.norm() <= cut);
    let vanishing = zero
        .par_iter()
        .map(|(ch, v)| {
            let d = d_matrix(tau, ch, cfg)?;
            let rank = RankReport::new(&d.matrix, tol.rank_rel_tol, d.abs_floor(), Some(*ch));
            Ok(VanishingConstant { characteristic: *ch, abs_value: v.norm(), rank })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_h = vanishing.iter().map(|v| v.rank.numerical_rank).min();
    Ok(StratumClassification {
        genus: tau.genus(),
        in_theta_null: !vanishing.is_empty(),
        vanishing,
        min_h,
        tolerances: *tol,
        scale,
        smallest_nonvanishing: nonzero.iter().map(|(_, v)| v.norm()).reduce(f64::min),
    })
}

#[derive(Debug, Clone)]
pub struct DivisorPoint {
    pub s: Complex64,
    pub tau: PeriodMatrix,
    pub residual: f64,
    pub iterations: usize,
}

const MAX_HALVINGS: usize = 40;

/// Newton iteration for `θ[ch](τ0 + sE, 0) = 0` in the complex parameter `s`.
pub fn find_on_divisor(
    tau0: &PeriodMatrix,
    direction: &Direction,
    ch: &Characteristic,
    cfg: &EvalConfig,
    newton_tol: f64,
    max_iter: usize,
) -> Result<DivisorPoint> {
    if !ch.is_even() {
        return Err(Error::CharacteristicParity { expected: "even" });
    }
    if direction.matrix().nrows() != tau0.genus() {
        return Err(Error::GenusMismatch { expected: tau0.genus(), got: direction.matrix().nrows() });
    }
    let zero = vec![Complex64::new(0.0, 0.0); tau0.genus()];
    let jet_at = |tau: &PeriodMatrix| eval_jet(tau, &zero, ch, 2, cfg);

    let mut s = Complex64::new(0.0, 0.0);
    let mut tau = tau0.clone();
    let mut jet = jet_at(&tau)?;
    for iter in 0..=max_iter {
        let f = jet.value();
        if f.norm() <= newton_tol {
            return Ok(DivisorPoint { s, tau, residual: f.norm(), iterations: iter });
        }
        if iter == max_iter {
            return Err(Error::NoConvergence { iterations: max_iter, residual: f.norm() });
        }
        let df = directional_from_jet(&jet, direction)?;
        if df.norm() == 0.0 || !df.re.is_finite() {
            return Err(Error::NoConvergence { iterations: iter, residual: f.norm() });
        }
        let mut step = f / df;
        let mut accepted = None;
        let mut left_space = false;
        for _ in 0..MAX_HALVINGS {
            let cand_s = s - step;
            match tau0.shifted(direction.matrix(), cand_s) {
                Ok(cand) => {
                    left_space = false;
                    let cand_jet = jet_at(&cand)?;
                    if cand_jet.value().norm() < f.norm() {
                        accepted = Some((cand_s, cand, cand_jet));
                        break;
                    }
                }
                Err(Error::ImagNotPositiveDefinite { .. }) => left_space = true,
                Err(e) => return Err(e),
            }
            step *= 0.5;
        }
        match accepted {
            Some((cs, ct, cj)) => {
                s = cs;
                tau = ct;
                jet = cj;
            }
            None if left_space => return Err(Error::LeftSiegelSpace),
            None => return Err(Error::NoConvergence { iterations: iter + 1, residual: f.norm() }),
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// `|θ[ch](σ·τ, 0)² − det(cτ + d)·θ[ch](τ, 0)²|` for `σ ∈ Γ_g(4,8)`.
pub fn modular_weight_check_squared(
    sigma: &SymplecticElement,
    tau: &PeriodMatrix,
    ch: &Characteristic,
    cfg: &EvalConfig,
) -> Result<f64> {
    if sigma.genus() != tau.genus() {
        return Err(Error::GenusMismatch { expected: tau.genus(), got: sigma.genus() });
    }
    if !in_gamma_n_2n(sigma, 4) {
        return Err(Error::NotInGamma48);
    }
    let moved = act(sigma, tau)?;
    let lhs = theta_constant(&moved, ch, cfg)?;
    let rhs = theta_constant(tau, ch, cfg)?;
    let det = linalg::determinant(&automorphy_matrix(sigma, tau)?);
    Ok((lhs * lhs - det * rhs * rhs).norm())
}
