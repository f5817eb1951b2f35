//! Jacobians of the singularity scheme `S = {θ = 0, ∂θ/∂z_i = 0}` and of
//! `S_null = {θ = 0, z = (τε + δ)/2}`.
//!
//! Columns are `τ_jk` for `j ≤ k` (upper triangle, row-major) followed by
//! `z_1, …, z_g`. All `τ`-derivatives are symmetric-coordinate derivatives
//! obtained from z-jets through the heat equation.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::characteristics::{half_period, Characteristic};
use crate::error::{Error, Result};
use crate::json::ComplexMatrixJson;
use crate::linalg::CMatrix;
use crate::siegel::PeriodMatrix;
use crate::strata::{RankReport, DEFAULT_RANK_REL_TOL, FLOOR_FACTOR};
use crate::theta::{eval_jet, EvalConfig, ThetaJet};

pub const DEFAULT_SCHEME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    #[serde(rename = "S")]
    S,
    #[serde(rename = "S_null")]
    SNull,
}

/// Meaning of the z-columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// `θ[0](τ, z)` differentiated in `(τ, z)`.
    Absolute,
    /// `θ[ch](τ, v)` at `v = 0`, differentiated in `(τ, v)` with
    /// `z = v + (τε + δ)/2`.
    HalfPeriod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeJacobian {
    pub which: Which,
    pub frame: Frame,
    pub genus: usize,
    pub characteristic: Characteristic,
    pub point: Vec<Complex64>,
    pub columns: Vec<String>,
    pub entries: CMatrix,
    /// Certified bound on the error of every entry.
    pub entry_error: f64,
    pub theta_abs: f64,
    pub gradient_max: f64,
}

pub fn tau_pairs(g: usize) -> Vec<(usize, usize)> {
    (0..g).flat_map(|j| (j..g).map(move |k| (j, k))).collect()
}

pub fn column_names(g: usize) -> Vec<String> {
    tau_pairs(g)
        .into_iter()
        .map(|(j, k)| format!("tau_{}{}", j + 1, k + 1))
        .chain((0..g).map(|i| format!("z_{}", i + 1)))
        .collect()
}

impl SchemeJacobian {
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn tau_block(&self, rows: std::ops::Range<usize>) -> CMatrix {
        let t = self.genus * (self.genus + 1) / 2;
        self.entries.view((rows.start, 0), (rows.len(), t)).into_owned()
    }

    pub fn z_block(&self, rows: std::ops::Range<usize>) -> CMatrix {
        let t = self.genus * (self.genus + 1) / 2;
        self.entries.view((rows.start, t), (rows.len(), self.genus)).into_owned()
    }

    /// `10 ×` the summed certified entry errors.
    pub fn abs_floor(&self) -> f64 {
        FLOOR_FACTOR * (self.rows() * self.cols()) as f64 * self.entry_error
    }

    pub fn rank_report(&self, rel_tol: f64) -> RankReport {
        RankReport::new(&self.entries, rel_tol, self.abs_floor(), Some(self.characteristic))
    }
}

#[derive(Serialize, Deserialize)]
struct SchemeJacobianJson {
    which: Which,
    frame: Frame,
    genus: usize,
    characteristic: Characteristic,
    point: ComplexMatrixJson,
    rows: usize,
    cols: usize,
    columns: Vec<String>,
    entries: ComplexMatrixJson,
    entry_error: f64,
    theta_abs: f64,
    gradient_max: f64,
}

impl Serialize for SchemeJacobian {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SchemeJacobianJson {
            which: self.which,
            frame: self.frame,
            genus: self.genus,
            characteristic: self.characteristic,
            point: (&CMatrix::from_row_slice(1, self.point.len(), &self.point)).into(),
            rows: self.rows(),
            cols: self.cols(),
            columns: self.columns.clone(),
            entries: (&self.entries).into(),
            entry_error: self.entry_error,
            theta_abs: self.theta_abs,
            gradient_max: self.gradient_max,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SchemeJacobian {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SchemeJacobianJson::deserialize(d)?;
        let g = raw.genus;
        let entries = raw.entries.to_matrix().map_err(D::Error::custom)?;
        let point = raw.point.to_matrix().map_err(D::Error::custom)?;
        if entries.shape() != (g + 1, g * (g + 1) / 2 + g) || (raw.rows, raw.cols) != entries.shape() {
            return Err(D::Error::custom("jacobian dimensions do not match the genus"));
        }
        if raw.columns != column_names(g) || point.len() != g {
            return Err(D::Error::custom("unexpected column layout"));
        }
        Ok(SchemeJacobian {
            which: raw.which,
            frame: raw.frame,
            genus: g,
            characteristic: raw.characteristic,
            point: point.iter().copied().collect(),
            columns: raw.columns,
            entries,
            entry_error: raw.entry_error,
            theta_abs: raw.theta_abs,
            gradient_max: raw.gradient_max,
        })
    }
}

/// Gradients of `θ` and of the `∂θ/∂z_i` from an order-3 jet.
fn s_rows(jet: &ThetaJet) -> CMatrix {
    let g = jet.genus();
    let pairs = tau_pairs(g);
    let t = pairs.len();
    let mut m = CMatrix::zeros(g + 1, t + g);
    for (c, &(j, k)) in pairs.iter().enumerate() {
        m[(0, c)] = jet.tau_partial(j, k);
        for i in 0..g {
            m[(i + 1, c)] = jet.mixed_tau_partial(i, j, k);
        }
    }
    for l in 0..g {
        m[(0, t + l)] = jet.partial(&[l]);
        for i in 0..g {
            m[(i + 1, t + l)] = jet.partial(&[i, l]);
        }
    }
    m
}

fn build(which: Which, frame: Frame, ch: Characteristic, point: Vec<Complex64>, jet: &ThetaJet, entries: CMatrix) -> SchemeJacobian {
    let g = jet.genus();
    SchemeJacobian {
        which,
        frame,
        genus: g,
        characteristic: ch,
        point,
        columns: column_names(g),
        entries,
        // τ-columns divide the z-partials by at least 2π
        entry_error: jet.tail_bound_used,
        theta_abs: jet.value().norm(),
        gradient_max: jet.gradient().iter().map(|v| v.norm()).fold(0.0, f64::max),
    }
}

/// Jacobian of `(θ, ∂θ/∂z_1, …, ∂θ/∂z_g)` for `θ = θ[0](τ, z)`.
pub fn sing_s_jacobian(tau: &PeriodMatrix, z: &[Complex64], cfg: &EvalConfig) -> Result<SchemeJacobian> {
    let ch = Characteristic::zero(tau.genus());
    let jet = eval_jet(tau, z, &ch, 3, cfg)?;
    let entries = s_rows(&jet);
    Ok(build(Which::S, Frame::Absolute, ch, z.to_vec(), &jet, entries))
}

/// The same Jacobian at the half-period of `ch`, written in the coordinates
/// `(τ, v)` with `z = v + (τε + δ)/2` and `θ[0](τ, z) = κ·θ[ch](τ, v)` for a
/// nowhere-vanishing `κ`. At `v = 0` the odd z-partials of `θ[ch]` vanish
/// for even `ch`, which forces the z-block of row 0 and the τ-block of the
/// other rows to zero.
pub fn sing_s_jacobian_at_half_period(tau: &PeriodMatrix, ch: &Characteristic, cfg: &EvalConfig) -> Result<SchemeJacobian> {
    let x = half_period(tau, ch)?;
    let jet = eval_jet(tau, &vec![Complex64::new(0.0, 0.0); tau.genus()], ch, 3, cfg)?;
    let entries = s_rows(&jet);
    Ok(build(Which::S, Frame::HalfPeriod, *ch, x, &jet, entries))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingSReport {
    pub rank: RankReport,
    pub in_sing_s: bool,
    pub theta_abs: f64,
    pub gradient_max: f64,
    pub scheme_tol: f64,
}

/// Rank test for `(τ, z) ∈ Sing S`: the Jacobian has rank at most `g`.
pub fn sing_s_rank_test(jac: &SchemeJacobian, scheme_tol: f64, rel_tol: f64) -> Result<SingSReport> {
    if jac.which != Which::S {
        return Err(Error::InvalidConfig("rank test needs the Jacobian of S".into()));
    }
    if jac.theta_abs > scheme_tol || jac.gradient_max > scheme_tol {
        return Err(Error::NotOnSingularityScheme {
            theta: jac.theta_abs,
            gradient: jac.gradient_max,
            tolerance: scheme_tol,
        });
    }
    let rank = jac.rank_report(rel_tol);
    Ok(SingSReport {
        in_sing_s: rank.numerical_rank <= jac.genus,
        rank,
        theta_abs: jac.theta_abs,
        gradient_max: jac.gradient_max,
        scheme_tol,
    })
}

pub fn sing_s_rank_test_at(tau: &PeriodMatrix, z: &[Complex64], cfg: &EvalConfig) -> Result<SingSReport> {
    sing_s_rank_test(&sing_s_jacobian(tau, z, cfg)?, DEFAULT_SCHEME_TOL, DEFAULT_RANK_REL_TOL)
}

/// `∂x_i/∂τ_jk` for `x = (τε + δ)/2` in symmetric coordinates.
fn half_period_tau_gradient(ch: &Characteristic, i: usize, (j, k): (usize, usize)) -> f64 {
    let e = |l: usize| ch.eps_bit(l) as f64;
    if j == k {
        if i == j {
            e(j) / 2.0
        } else {
            0.0
        }
    } else {
        let mut v = 0.0;
        if i == j {
            v += e(k);
        }
        if i == k {
            v += e(j);
        }
        v / 2.0
    }
}

/// Jacobian of `(F, z − (τε + δ)/2)` at the half-period of `ch`, where
/// `F(τ, z) = θ[ch](τ, z − (τε + δ)/2)` cuts out the same divisor as
/// `θ[0](τ, z)`.
pub fn snull_jacobian(tau: &PeriodMatrix, ch: &Characteristic, cfg: &EvalConfig) -> Result<SchemeJacobian> {
    if !ch.is_even() {
        return Err(Error::CharacteristicParity { expected: "even" });
    }
    let g = tau.genus();
    let x = half_period(tau, ch)?;
    let jet = eval_jet(tau, &vec![Complex64::new(0.0, 0.0); g], ch, 2, cfg)?;
    let grad = jet.gradient();
    let pairs = tau_pairs(g);
    let t = pairs.len();
    let mut m = CMatrix::zeros(g + 1, t + g);
    for (c, &jk) in pairs.iter().enumerate() {
        let chain: Complex64 = (0..g).map(|i| grad[i] * half_period_tau_gradient(ch, i, jk)).sum();
        m[(0, c)] = jet.tau_partial(jk.0, jk.1) - chain;
        for i in 0..g {
            m[(i + 1, c)] = Complex64::new(-half_period_tau_gradient(ch, i, jk), 0.0);
        }
    }
    for i in 0..g {
        m[(0, t + i)] = grad[i];
        m[(i + 1, t + i)] = Complex64::new(1.0, 0.0);
    }
    Ok(build(Which::SNull, Frame::Absolute, *ch, x, &jet, m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFourReport {
    pub order_four: bool,
    pub value_abs: f64,
    /// Largest `|∂θ/∂τ_jk|` at `z = 0`.
    pub tau_gradient_max: f64,
    /// Largest first or third z-partial, zero by parity.
    pub odd_partial_max: f64,
    pub tol: f64,
}

/// Whether `θ[ch](τ, ·)` vanishes to order at least four at `z = 0`: the
/// value and every second z-partial vanish (odd partials vanish by parity).
pub fn order_four_diagnostic(tau: &PeriodMatrix, ch: &Characteristic, cfg: &EvalConfig, tol: f64) -> Result<OrderFourReport> {
    if !ch.is_even() {
        return Err(Error::CharacteristicParity { expected: "even" });
    }
    let g = tau.genus();
    let jet = eval_jet(tau, &vec![Complex64::new(0.0, 0.0); g], ch, 4, cfg)?;
    let tau_gradient_max = tau_pairs(g).into_iter().map(|(j, k)| jet.tau_partial(j, k).norm()).fold(0.0, f64::max);
    let odd_partial_max = jet.entries().filter(|(k, _)| k.len() % 2 == 1).map(|(_, v)| v.norm()).fold(0.0, f64::max);
    let value_abs = jet.value().norm();
    Ok(OrderFourReport {
        order_four: value_abs <= tol && tau_gradient_max <= tol,
        value_abs,
        tau_gradient_max,
        odd_partial_max,
        tol,
    })
}
