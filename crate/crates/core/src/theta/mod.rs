//! Truncated evaluation of `θ[ε,δ](τ, z)` and its z-derivatives with a
//! certified bound on the omitted terms.

pub mod lattice;
pub mod tail;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::characteristics::Characteristic;
use crate::error::{Error, Result};
use crate::json::ComplexJson;
use crate::linalg::{CMatrix, CompensatedSum};
use crate::siegel::{Direction, PeriodMatrix};

pub use tail::{tail_bound, TailModel};

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub target_abs_error: f64,
    pub max_radius: f64,
    pub max_derivative_order: usize,
    pub max_points: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { target_abs_error: 1e-12, max_radius: 15.0, max_derivative_order: MAX_ORDER, max_points: 10_000_000 }
    }
}

impl EvalConfig {
    pub fn with_target(mut self, target: f64) -> Self {
        self.target_abs_error = target;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_abs_error > 0.0) {
            return Err(Error::InvalidConfig("target_abs_error must be positive".into()));
        }
        if !(self.max_radius > 0.0) {
            return Err(Error::InvalidConfig("max_radius must be positive".into()));
        }
        if self.max_derivative_order > MAX_ORDER {
            return Err(Error::InvalidConfig(format!("derivative order is capped at {MAX_ORDER}")));
        }
        if self.max_points == 0 {
            return Err(Error::InvalidConfig("max_points must be positive".into()));
        }
        Ok(())
    }
}

/// Multi-indices written as nondecreasing coordinate lists, so `[0, 0, 1]`
/// stands for `∂³/∂z₁²∂z₂`. Graded, then lexicographic.
pub fn multi_indices(genus: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..order {
        let mut next = Vec::new();
        for idx in &layer {
            let start = idx.last().copied().unwrap_or(0);
            for j in start..genus {
                let mut v = idx.clone();
                v.push(j);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Value and z-partials of a theta function at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaJet {
    genus: usize,
    characteristic: Characteristic,
    order: usize,
    indices: Vec<Vec<usize>>,
    values: Vec<Complex64>,
    lookup: BTreeMap<Vec<usize>, usize>,
    pub tail_bound_used: f64,
    pub radius_used: f64,
    pub terms_summed: usize,
}

impl ThetaJet {
    fn new(
        characteristic: Characteristic,
        order: usize,
        values: Vec<Complex64>,
        tail_bound_used: f64,
        radius_used: f64,
        terms_summed: usize,
    ) -> Self {
        let genus = characteristic.genus();
        let indices = multi_indices(genus, order);
        assert_eq!(indices.len(), values.len());
        let lookup = indices.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        ThetaJet { genus, characteristic, order, indices, values, lookup, tail_bound_used, radius_used, terms_summed }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn characteristic(&self) -> &Characteristic {
        &self.characteristic
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `∂θ/∂z_{c₁}⋯∂z_{c_k}` for coordinates `c` in any order.
    pub fn partial(&self, coords: &[usize]) -> Complex64 {
        let mut key = coords.to_vec();
        key.sort_unstable();
        match self.lookup.get(&key) {
            Some(&i) => self.values[i],
            None => panic!("partial {coords:?} not in a genus-{} jet of order {}", self.genus, self.order),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[usize], Complex64)> {
        self.indices.iter().map(Vec::as_slice).zip(self.values.iter().copied())
    }

    pub fn value(&self) -> Complex64 {
        self.values[0]
    }

    pub fn gradient(&self) -> Vec<Complex64> {
        (0..self.genus).map(|j| self.partial(&[j])).collect()
    }

    pub fn hessian(&self) -> CMatrix {
        CMatrix::from_fn(self.genus, self.genus, |j, k| self.partial(&[j, k]))
    }

    /// `∂θ/∂τ_jk` in symmetric coordinates, from the heat equation
    /// `∂²θ/∂z_j∂z_k = 2πi(1 + δ_jk)·∂θ/∂τ_jk`.
    pub fn tau_partial(&self, j: usize, k: usize) -> Complex64 {
        self.partial(&[j, k]) / heat_constant(j, k)
    }

    /// `∂²θ/∂z_i∂τ_jk` via the heat equation.
    pub fn mixed_tau_partial(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.partial(&[i, j, k]) / heat_constant(j, k)
    }

    /// Sum of the tail bounds of the partials. Every partial carries the
    /// same bound, so this is `count × tail_bound_used`.
    pub fn error_bound(&self, count: usize) -> f64 {
        count as f64 * self.tail_bound_used
    }
}

/// `2πi(1 + δ_jk)`.
pub fn heat_constant(j: usize, k: usize) -> Complex64 {
    let f = if j == k { 2.0 } else { 1.0 };
    Complex64::new(0.0, 2.0 * PI * f)
}

#[derive(Serialize, Deserialize)]
struct PartialJson {
    alpha: Vec<usize>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct ThetaJetJson {
    genus: usize,
    characteristic: Characteristic,
    order: usize,
    value: ComplexJson,
    partials: Vec<PartialJson>,
    tail_bound_used: f64,
    radius_used: f64,
    terms_summed: usize,
}

fn exponents(genus: usize, coords: &[usize]) -> Vec<usize> {
    let mut e = vec![0; genus];
    for &c in coords {
        e[c] += 1;
    }
    e
}

impl Serialize for ThetaJet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ThetaJetJson {
            genus: self.genus,
            characteristic: self.characteristic,
            order: self.order,
            value: self.value().into(),
            partials: self
                .entries()
                .map(|(k, v)| PartialJson { alpha: exponents(self.genus, k), re: v.re, im: v.im })
                .collect(),
            tail_bound_used: self.tail_bound_used,
            radius_used: self.radius_used,
            terms_summed: self.terms_summed,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ThetaJet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ThetaJetJson::deserialize(d)?;
        if raw.characteristic.genus() != raw.genus || raw.order > MAX_ORDER {
            return Err(D::Error::custom("inconsistent jet header"));
        }
        let expected = multi_indices(raw.genus, raw.order);
        if raw.partials.len() != expected.len() {
            return Err(D::Error::custom("jet must list every multi-index up to its order"));
        }
        let mut values = Vec::with_capacity(expected.len());
        for (idx, p) in expected.iter().zip(&raw.partials) {
            if p.alpha != exponents(raw.genus, idx) {
                return Err(D::Error::custom("jet partials out of canonical order"));
            }
            values.push(Complex64::new(p.re, p.im));
        }
        Ok(ThetaJet::new(raw.characteristic, raw.order, values, raw.tail_bound_used, raw.radius_used, raw.terms_summed))
    }
}

fn check_point(tau: &PeriodMatrix, z: &[Complex64], ch: &Characteristic) -> Result<()> {
    let g = tau.genus();
    if z.len() != g {
        return Err(Error::GenusMismatch { expected: g, got: z.len() });
    }
    if ch.genus() != g {
        return Err(Error::GenusMismatch { expected: g, got: ch.genus() });
    }
    if z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Schema("z has non-finite entries".into()));
    }
    Ok(())
}

/// Evaluate all z-partials of `θ[ch](τ, ·)` at `z` up to `order`.
pub fn eval_jet(
    tau: &PeriodMatrix,
    z: &[Complex64],
    ch: &Characteristic,
    order: usize,
    cfg: &EvalConfig,
) -> Result<ThetaJet> {
    cfg.validate()?;
    check_point(tau, z, ch)?;
    if order > cfg.max_derivative_order {
        return Err(Error::InvalidConfig(format!(
            "order {order} exceeds max_derivative_order {}",
            cfg.max_derivative_order
        )));
    }
    let g = tau.genus();
    let model = TailModel::from_point(tau, z, order);
    let radius = model
        .radius_for(cfg.target_abs_error, cfg.max_radius)
        .map_err(|required| Error::RadiusCapExceeded { required, cap: cfg.max_radius })?;
    let tail = model.bound(radius);

    let y = nalgebra::DVector::from_iterator(g, z.iter().map(|v| v.im));
    let w = tau.imag_inverse() * &y;
    let log_shift = PI * y.dot(&w);
    let eps = ch.eps_f64();
    let center: Vec<f64> = (0..g).map(|i| eps[i] / 2.0 + w[i]).collect();
    let t = tau.gram_factor();

    let mut min_norm = f64::INFINITY;
    let count = lattice::for_each_point(t, &center, radius, cfg.max_points, |_, n2| {
        min_norm = min_norm.min(n2);
    })
    .map_err(|_| Error::PointCapExceeded { cap: cfg.max_points })?;

    let indices = multi_indices(g, order);
    let parents: Vec<(usize, usize)> = {
        let pos: BTreeMap<&[usize], usize> = indices.iter().enumerate().map(|(i, k)| (k.as_slice(), i)).collect();
        indices
            .iter()
            .map(|k| match k.split_last() {
                Some((&j, rest)) => (pos[rest], j),
                None => (0, 0),
            })
            .collect()
    };
    let x = tau.re();
    let shift: Vec<f64> = (0..g).map(|i| z[i].re + ch.delta_bit(i) as f64 / 2.0).collect();
    let mut sums = vec![CompensatedSum::default(); indices.len()];
    let mut weights = vec![Complex64::new(0.0, 0.0); indices.len()];
    let mut n = vec![0.0f64; g];
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);

    if count > 0 {
        lattice::for_each_point(t, &center, radius, usize::MAX, |m, n2| {
            for i in 0..g {
                n[i] = m[i] as f64 + eps[i] / 2.0;
            }
            let mut quad = 0.0;
            for i in 0..g {
                let mut row = 0.0;
                for j in 0..g {
                    row += x[(i, j)] * n[j];
                }
                quad += n[i] * (row + 2.0 * shift[i]);
            }
            let base = Complex64::from_polar((min_norm - n2).exp(), PI * quad);
            weights[0] = base;
            sums[0].add(base);
            for (idx, &(p, j)) in parents.iter().enumerate().skip(1) {
                weights[idx] = weights[p] * (two_pi_i * n[j]);
                sums[idx].add(weights[idx]);
            }
        })
        .expect("second pass visits the same points");
    }
    let scale = if count > 0 { (log_shift - min_norm).exp() } else { 0.0 };
    let values = sums.iter().map(|s| s.value() * scale).collect();
    Ok(ThetaJet::new(*ch, order, values, tail, radius, count))
}

pub fn eval_value(tau: &PeriodMatrix, z: &[Complex64], ch: &Characteristic, cfg: &EvalConfig) -> Result<Complex64> {
    Ok(eval_jet(tau, z, ch, 0, cfg)?.value())
}

/// Theta constant `θ[ch](τ, 0)`.
pub fn theta_constant(tau: &PeriodMatrix, ch: &Characteristic, cfg: &EvalConfig) -> Result<Complex64> {
    eval_value(tau, &vec![Complex64::new(0.0, 0.0); tau.genus()], ch, cfg)
}

/// `∂θ[ch]/∂τ_jk(τ, z)` in symmetric coordinates, from one order-2 jet.
pub fn tau_derivative(
    tau: &PeriodMatrix,
    z: &[Complex64],
    ch: &Characteristic,
    (j, k): (usize, usize),
    cfg: &EvalConfig,
) -> Result<Complex64> {
    let g = tau.genus();
    if j >= g || k >= g {
        return Err(Error::InvalidConfig(format!("index ({j},{k}) out of range for genus {g}")));
    }
    Ok(eval_jet(tau, z, ch, 2, cfg)?.tau_partial(j, k))
}

/// `d/ds θ[ch](τ + sE, 0)` at `s = 0`, equal to `tr(E·Hess_z θ)/(4πi)`.
pub fn directional_tau_derivative(
    tau: &PeriodMatrix,
    direction: &Direction,
    ch: &Characteristic,
    cfg: &EvalConfig,
) -> Result<Complex64> {
    let jet = eval_jet(tau, &vec![Complex64::new(0.0, 0.0); tau.genus()], ch, 2, cfg)?;
    directional_from_jet(&jet, direction)
}

pub(crate) fn directional_from_jet(jet: &ThetaJet, direction: &Direction) -> Result<Complex64> {
    let e = direction.matrix();
    let g = jet.genus();
    if e.nrows() != g {
        return Err(Error::GenusMismatch { expected: g, got: e.nrows() });
    }
    let h = jet.hessian();
    let tr: Complex64 = (0..g).flat_map(|j| (0..g).map(move |k| (j, k))).map(|(j, k)| e[(j, k)] * h[(k, j)]).sum();
    Ok(tr / Complex64::new(0.0, 4.0 * PI))
}

/// `κ = exp πi(−εᵀτε/4 − εᵀ(z + δ/2))`, the factor with
/// `θ[0](τ, z + τε/2 + δ/2) = κ·θ[ε,δ](τ, z)`.
pub fn shift_prefactor(tau: &PeriodMatrix, z: &[Complex64], ch: &Characteristic) -> Complex64 {
    let g = tau.genus();
    let m = tau.matrix();
    let eps = ch.eps_f64();
    let mut quad = Complex64::new(0.0, 0.0);
    let mut lin = Complex64::new(0.0, 0.0);
    for i in 0..g {
        for j in 0..g {
            quad += eps[i] * m[(i, j)] * eps[j];
        }
        lin += eps[i] * (z[i] + ch.delta_bit(i) as f64 / 2.0);
    }
    (Complex64::new(0.0, PI) * (-quad / 4.0 - lin)).exp()
}

/// `|θ[0](τ, z + τε/2 + δ/2) − κ·θ[ε,δ](τ, z)|`.
pub fn shift_identity_residual(
    tau: &PeriodMatrix,
    z: &[Complex64],
    ch: &Characteristic,
    cfg: &EvalConfig,
) -> Result<f64> {
    check_point(tau, z, ch)?;
    let hp = crate::characteristics::half_period(tau, ch)?;
    let shifted: Vec<Complex64> = z.iter().zip(&hp).map(|(a, b)| a + b).collect();
    let lhs = eval_value(tau, &shifted, &Characteristic::zero(tau.genus()), cfg)?;
    let rhs = shift_prefactor(tau, z, ch) * eval_value(tau, z, ch, cfg)?;
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ch(e: &[u8], d: &[u8]) -> Characteristic {
        Characteristic::from_bits(e, d).unwrap()
    }

    #[test]
    fn multi_index_counts() {
        // C(g + k, k)
        assert_eq!(multi_indices(2, 4).len(), 15);
        assert_eq!(multi_indices(3, 3).len(), 20);
        assert_eq!(multi_indices(1, 0), vec![Vec::<usize>::new()]);
        assert_eq!(multi_indices(2, 2)[3..], [vec![0, 0], vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn odd_constant_vanishes() {
        let tau = PeriodMatrix::imaginary_identity(1);
        let v = eval_value(&tau, &[c(0.0, 0.0)], &ch(&[1], &[1]), &EvalConfig::default()).unwrap();
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn jet_metadata_respects_target() {
        let tau = PeriodMatrix::imaginary_identity(2);
        let cfg = EvalConfig::default();
        let jet = eval_jet(&tau, &[c(0.2, 0.1), c(-0.3, 0.4)], &ch(&[0, 1], &[1, 1]), 4, &cfg).unwrap();
        assert!(jet.tail_bound_used <= cfg.target_abs_error);
        assert!(jet.radius_used <= cfg.max_radius);
        assert!(jet.terms_summed > 0);
        assert_eq!(jet.entries().count(), 15);
        assert_eq!(jet.partial(&[1, 0]), jet.partial(&[0, 1]));
    }

    #[test]
    fn order_above_cap_is_rejected() {
        let tau = PeriodMatrix::imaginary_identity(1);
        let cfg = EvalConfig { max_derivative_order: 2, ..EvalConfig::default() };
        let err = eval_jet(&tau, &[c(0.0, 0.0)], &Characteristic::zero(1), 3, &cfg).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
        let bad = EvalConfig { max_derivative_order: 5, ..EvalConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn radius_cap_is_enforced() {
        let tau = PeriodMatrix::imaginary_identity(1);
        let cfg = EvalConfig { max_radius: 2.0, ..EvalConfig::default() };
        let err = eval_jet(&tau, &[c(0.0, 0.0)], &Characteristic::zero(1), 0, &cfg).unwrap_err();
        assert!(matches!(err, Error::RadiusCapExceeded { .. }));
    }

    #[test]
    fn point_cap_is_enforced() {
        let tau = PeriodMatrix::new(CMatrix::identity(3, 3) * c(0.0, 0.05)).unwrap();
        let cfg = EvalConfig { max_radius: 50.0, max_points: 1000, ..EvalConfig::default() };
        let err = eval_jet(&tau, &[c(0.0, 0.0); 3], &Characteristic::zero(3), 0, &cfg).unwrap_err();
        assert_eq!(err, Error::PointCapExceeded { cap: 1000 });
    }

    #[test]
    fn directional_derivative_of_zero_direction() {
        let tau = PeriodMatrix::imaginary_identity(2);
        let e = Direction(CMatrix::zeros(2, 2));
        let d = directional_tau_derivative(&tau, &e, &Characteristic::zero(2), &EvalConfig::default()).unwrap();
        assert_eq!(d, c(0.0, 0.0));
    }

    #[test]
    fn shift_prefactor_is_one_for_zero_characteristic() {
        let tau = PeriodMatrix::imaginary_identity(2);
        let z = [c(0.3, 0.1), c(0.2, -0.1)];
        let zero = Characteristic::zero(2);
        assert_eq!(shift_prefactor(&tau, &z, &zero), c(1.0, 0.0));
        assert_eq!(shift_identity_residual(&tau, &z, &zero, &EvalConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn jet_json_round_trip() {
        let tau = PeriodMatrix::imaginary_identity(2);
        let jet = eval_jet(&tau, &[c(0.1, 0.0), c(0.0, 0.2)], &ch(&[1, 0], &[0, 1]), 2, &EvalConfig::default()).unwrap();
        let txt = crate::json::to_string(&jet);
        let back: ThetaJet = serde_json::from_str(&txt).unwrap();
        assert_eq!(back, jet);
    }
}
