//! Period matrices on the Siegel upper half-space and the integral
//! symplectic group acting on them.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::characteristics::Characteristic;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix};

pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-9;

/// Relative pivot floor for the positive-definiteness test of `Im τ`.
pub const PIVOT_FLOOR_REL: f64 = 1e-12;

/// Largest condition number of `cτ + d` accepted by [`act`].
pub const MAX_ACTION_CONDITION: f64 = 1e12;

/// A validated point of `H_g`. Carries the factorization of `Im τ` used by
/// the lattice enumerator.
#[derive(Debug, Clone)]
pub struct PeriodMatrix {
    tau: CMatrix,
    y_inv: RMatrix,
    // π·Im τ = tᵀ·t, t lower triangular
    gram: RMatrix,
    // smallest singular value of `gram`
    rho: f64,
}

impl PeriodMatrix {
    pub fn new(raw: CMatrix) -> Result<Self> {
        validate_period(&raw, DEFAULT_SYMMETRY_TOL)
    }

    pub fn from_parts(re: &RMatrix, im: &RMatrix) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::Schema("re and im have different shapes".into()));
        }
        Self::new(CMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
            Complex64::new(re[(i, j)], im[(i, j)])
        }))
    }

    pub fn diagonal(entries: &[Complex64]) -> Result<Self> {
        Self::new(CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries)))
    }

    /// `i·I_g`.
    pub fn imaginary_identity(g: usize) -> Self {
        Self::new(CMatrix::identity(g, g) * Complex64::i()).expect("i*I is in H_g")
    }

    pub fn genus(&self) -> usize {
        self.tau.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.tau
    }

    pub fn re(&self) -> RMatrix {
        self.tau.map(|z| z.re)
    }

    pub fn im(&self) -> RMatrix {
        self.tau.map(|z| z.im)
    }

    pub fn imag_inverse(&self) -> &RMatrix {
        &self.y_inv
    }

    /// Lower-triangular `t` with `π·Im τ = tᵀ·t`.
    pub fn gram_factor(&self) -> &RMatrix {
        &self.gram
    }

    /// Smallest singular value of [`Self::gram_factor`]; a lower bound for
    /// the length of every nonzero vector of the lattice `t·ℤ^g`.
    pub fn min_lattice_scale(&self) -> f64 {
        self.rho
    }

    /// `τ + s·E`, re-validated.
    pub fn shifted(&self, direction: &CMatrix, s: Complex64) -> Result<Self> {
        if direction.shape() != self.tau.shape() {
            return Err(Error::GenusMismatch { expected: self.genus(), got: direction.nrows() });
        }
        PeriodMatrix::new(&self.tau + direction * s)
    }

    /// Real coordinates `(a, b)` with `x = τ·a + b`.
    pub fn lattice_coordinates(&self, x: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let g = self.genus();
        let im: nalgebra::DVector<f64> = nalgebra::DVector::from_iterator(g, x.iter().map(|z| z.im));
        let a = &self.y_inv * im;
        let re_tau = self.re();
        let b: Vec<f64> = (0..g)
            .map(|i| x[i].re - (0..g).map(|j| re_tau[(i, j)] * a[j]).sum::<f64>())
            .collect();
        (a.iter().copied().collect(), b)
    }

    /// Distance from `x` to `τ·(ε/2) + δ/2` modulo the period lattice,
    /// measured in lattice coordinates (sup norm).
    pub fn torus_distance_to_half_period(&self, x: &[Complex64], ch: &Characteristic) -> f64 {
        let (a, b) = self.lattice_coordinates(x);
        let wrap = |t: f64| {
            let r = t - t.round();
            r.abs()
        };
        (0..self.genus())
            .map(|i| {
                wrap(a[i] - ch.eps_bit(i) as f64 / 2.0).max(wrap(b[i] - ch.delta_bit(i) as f64 / 2.0))
            })
            .fold(0.0, f64::max)
    }
}

/// Symmetrize `raw` and check that it lies in `H_g`.
pub fn validate_period(raw: &CMatrix, symmetry_tol: f64) -> Result<PeriodMatrix> {
    let (rows, cols) = raw.shape();
    if rows != cols || rows == 0 {
        return Err(Error::NotSquare { rows, cols });
    }
    if !(symmetry_tol >= 0.0) {
        return Err(Error::InvalidConfig("symmetry tolerance must be nonnegative".into()));
    }
    if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Schema("period matrix has non-finite entries".into()));
    }
    let scale = raw.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    let asym = linalg::max_abs_asymmetry(raw);
    let allowed = symmetry_tol * scale;
    if asym > allowed {
        return Err(Error::NotSymmetric { asymmetry: asym, tolerance: allowed });
    }
    let tau = (raw + raw.transpose()) * Complex64::new(0.5, 0.0);
    let y = tau.map(|z| z.im);
    let g = rows;
    let floor = PIVOT_FLOOR_REL * y.trace() / g as f64;
    if !(floor > 0.0) {
        return Err(Error::ImagNotPositiveDefinite { pivot: y.trace() / g as f64, floor: 0.0 });
    }
    let t = linalg::lower_gram_factor(&y, floor)?;
    let gram = t * PI.sqrt();
    let y_inv = y.clone().try_inverse().ok_or(Error::ImagNotPositiveDefinite { pivot: 0.0, floor })?;
    let lambda_min = SymmetricEigen::new(y).eigenvalues.min();
    if !(lambda_min > 0.0) {
        return Err(Error::ImagNotPositiveDefinite { pivot: lambda_min, floor });
    }
    Ok(PeriodMatrix { tau, y_inv, gram, rho: (PI * lambda_min).sqrt() })
}

/// Block-diagonal period matrix `τ1 ⊕ τ2`.
pub fn direct_sum(tau1: &PeriodMatrix, tau2: &PeriodMatrix) -> PeriodMatrix {
    let (g1, g2) = (tau1.genus(), tau2.genus());
    let mut m = CMatrix::zeros(g1 + g2, g1 + g2);
    m.view_mut((0, 0), (g1, g1)).copy_from(tau1.matrix());
    m.view_mut((g1, g1), (g2, g2)).copy_from(tau2.matrix());
    PeriodMatrix::new(m).expect("direct sum of points of H_g is in H_g")
}

#[derive(Serialize, Deserialize)]
struct PeriodMatrixJson {
    g: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

pub(crate) fn rows_to_matrix(g: usize, rows: &[Vec<f64>], what: &str) -> Result<RMatrix> {
    if rows.len() != g || rows.iter().any(|r| r.len() != g) {
        return Err(Error::Schema(format!("{what} must be a {g}x{g} array")));
    }
    Ok(RMatrix::from_fn(g, g, |i, j| rows[i][j]))
}

pub(crate) fn matrix_rows<T: Copy>(m: &DMatrix<T>) -> Vec<Vec<T>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

impl Serialize for PeriodMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PeriodMatrixJson { g: self.genus(), re: matrix_rows(&self.re()), im: matrix_rows(&self.im()) }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PeriodMatrixJson::deserialize(d)?;
        let build = || -> Result<PeriodMatrix> {
            let re = rows_to_matrix(raw.g, &raw.re, "re")?;
            let im = rows_to_matrix(raw.g, &raw.im, "im")?;
            PeriodMatrix::from_parts(&re, &im)
        };
        build().map_err(serde::de::Error::custom)
    }
}

/// A complex symmetric direction in the tangent space of `H_g`.
/// Shares the period-matrix JSON schema but carries no positivity condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(pub CMatrix);

impl Direction {
    pub fn new(m: CMatrix, symmetry_tol: f64) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        if linalg::max_abs_asymmetry(&m) > symmetry_tol * scale {
            return Err(Error::DirectionNotSymmetric);
        }
        Ok(Direction((&m + m.transpose()) * Complex64::new(0.5, 0.0)))
    }

    /// `e_jk + e_kj` (or `e_jj`).
    pub fn elementary(g: usize, j: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(g, g);
        m[(j, k)] = Complex64::new(1.0, 0.0);
        m[(k, j)] = Complex64::new(1.0, 0.0);
        Direction(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PeriodMatrixJson {
            g: self.0.nrows(),
            re: matrix_rows(&self.0.map(|z| z.re)),
            im: matrix_rows(&self.0.map(|z| z.im)),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PeriodMatrixJson::deserialize(d)?;
        let build = || -> Result<Direction> {
            let re = rows_to_matrix(raw.g, &raw.re, "re")?;
            let im = rows_to_matrix(raw.g, &raw.im, "im")?;
            let m = CMatrix::from_fn(raw.g, raw.g, |i, j| Complex64::new(re[(i, j)], im[(i, j)]));
            Direction::new(m, DEFAULT_SYMMETRY_TOL)
        };
        build().map_err(serde::de::Error::custom)
    }
}

pub type IntMatrix = DMatrix<i64>;

fn checked_mul(x: &IntMatrix, y: &IntMatrix) -> Result<IntMatrix> {
    let (n, k, m) = (x.nrows(), x.ncols(), y.ncols());
    let mut out = IntMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let mut acc: i64 = 0;
            for l in 0..k {
                let p = x[(i, l)].checked_mul(y[(l, j)]).ok_or(Error::IntegerOverflow)?;
                acc = acc.checked_add(p).ok_or(Error::IntegerOverflow)?;
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// `σ = (a b; c d) ∈ Sp(2g, ℤ)` stored as a `2g×2g` integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticElement {
    g: usize,
    m: IntMatrix,
}

impl SymplecticElement {
    pub fn identity(g: usize) -> Self {
        SymplecticElement { g, m: IntMatrix::identity(2 * g, 2 * g) }
    }

    /// `J = (0 I; -I 0)`.
    pub fn involution(g: usize) -> Self {
        let mut m = IntMatrix::zeros(2 * g, 2 * g);
        for i in 0..g {
            m[(i, g + i)] = 1;
            m[(g + i, i)] = -1;
        }
        SymplecticElement { g, m }
    }

    pub fn from_matrix(m: IntMatrix) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols || rows % 2 != 0 || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        let s = SymplecticElement { g: rows / 2, m };
        if !s.is_symplectic()? {
            return Err(Error::NotSymplectic);
        }
        Ok(s)
    }

    pub fn from_blocks(a: &IntMatrix, b: &IntMatrix, c: &IntMatrix, d: &IntMatrix) -> Result<Self> {
        let g = a.nrows();
        for blk in [a, b, c, d] {
            if blk.shape() != (g, g) {
                return Err(Error::Schema("symplectic blocks must all be g x g".into()));
            }
        }
        let mut m = IntMatrix::zeros(2 * g, 2 * g);
        m.view_mut((0, 0), (g, g)).copy_from(a);
        m.view_mut((0, g), (g, g)).copy_from(b);
        m.view_mut((g, 0), (g, g)).copy_from(c);
        m.view_mut((g, g), (g, g)).copy_from(d);
        Self::from_matrix(m)
    }

    /// `(I S; 0 I)` for symmetric `S`: `τ ↦ τ + S`.
    pub fn translation(s: &IntMatrix) -> Result<Self> {
        let g = s.nrows();
        Self::from_blocks(&IntMatrix::identity(g, g), s, &IntMatrix::zeros(g, g), &IntMatrix::identity(g, g))
    }

    /// `(I 0; S I)` for symmetric `S`.
    pub fn lower_translation(s: &IntMatrix) -> Result<Self> {
        let g = s.nrows();
        Self::from_blocks(&IntMatrix::identity(g, g), &IntMatrix::zeros(g, g), s, &IntMatrix::identity(g, g))
    }

    /// `(A 0; 0 D)`; symplectic iff `D = A^{-T}`.
    pub fn block_diagonal(a: &IntMatrix, d: &IntMatrix) -> Result<Self> {
        let g = a.nrows();
        Self::from_blocks(a, &IntMatrix::zeros(g, g), &IntMatrix::zeros(g, g), d)
    }

    /// `σ1 ⊕ σ2`, acting blockwise on `τ1 ⊕ τ2`.
    pub fn direct_sum(&self, other: &SymplecticElement) -> SymplecticElement {
        let (g1, g2) = (self.g, other.g);
        let g = g1 + g2;
        let place = |x: &IntMatrix, y: &IntMatrix| {
            let mut out = IntMatrix::zeros(g, g);
            out.view_mut((0, 0), (g1, g1)).copy_from(x);
            out.view_mut((g1, g1), (g2, g2)).copy_from(y);
            out
        };
        Self::from_blocks(
            &place(&self.a(), &other.a()),
            &place(&self.b(), &other.b()),
            &place(&self.c(), &other.c()),
            &place(&self.d(), &other.d()),
        )
        .expect("direct sum of symplectic matrices is symplectic")
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.m
    }

    fn block(&self, r: usize, c: usize) -> IntMatrix {
        self.m.view((r * self.g, c * self.g), (self.g, self.g)).into_owned()
    }

    pub fn a(&self) -> IntMatrix {
        self.block(0, 0)
    }
    pub fn b(&self) -> IntMatrix {
        self.block(0, 1)
    }
    pub fn c(&self) -> IntMatrix {
        self.block(1, 0)
    }
    pub fn d(&self) -> IntMatrix {
        self.block(1, 1)
    }

    fn is_symplectic(&self) -> Result<bool> {
        let j = Self::involution(self.g).m;
        let lhs = checked_mul(&checked_mul(&self.m.transpose(), &j)?, &self.m)?;
        Ok(lhs == j)
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &SymplecticElement) -> Result<SymplecticElement> {
        if self.g != other.g {
            return Err(Error::GenusMismatch { expected: self.g, got: other.g });
        }
        Ok(SymplecticElement { g: self.g, m: checked_mul(&self.m, &other.m)? })
    }

    /// `σ^{-1} = (dᵀ -bᵀ; -cᵀ aᵀ)`.
    pub fn inverse(&self) -> SymplecticElement {
        let neg = |x: IntMatrix| x.map(|v| -v);
        let g = self.g;
        let mut m = IntMatrix::zeros(2 * g, 2 * g);
        m.view_mut((0, 0), (g, g)).copy_from(&self.d().transpose());
        m.view_mut((0, g), (g, g)).copy_from(&neg(self.b().transpose()));
        m.view_mut((g, 0), (g, g)).copy_from(&neg(self.c().transpose()));
        m.view_mut((g, g), (g, g)).copy_from(&self.a().transpose());
        SymplecticElement { g, m }
    }

    /// `diag(a·bᵀ)` and `diag(c·dᵀ)`.
    fn diagonal_terms(&self) -> Result<(Vec<i64>, Vec<i64>)> {
        let ab = checked_mul(&self.a(), &self.b().transpose())?;
        let cd = checked_mul(&self.c(), &self.d().transpose())?;
        Ok(((0..self.g).map(|i| ab[(i, i)]).collect(), (0..self.g).map(|i| cd[(i, i)]).collect()))
    }
}

#[derive(Serialize, Deserialize)]
struct SymplecticJson {
    g: usize,
    a: Vec<Vec<i64>>,
    b: Vec<Vec<i64>>,
    c: Vec<Vec<i64>>,
    d: Vec<Vec<i64>>,
}

impl Serialize for SymplecticElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SymplecticJson {
            g: self.g,
            a: matrix_rows(&self.a()),
            b: matrix_rows(&self.b()),
            c: matrix_rows(&self.c()),
            d: matrix_rows(&self.d()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymplecticElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SymplecticJson::deserialize(d)?;
        let g = raw.g;
        let blk = |rows: &Vec<Vec<i64>>| -> std::result::Result<IntMatrix, D::Error> {
            if rows.len() != g || rows.iter().any(|r| r.len() != g) {
                return Err(serde::de::Error::custom(format!("blocks must be {g}x{g}")));
            }
            Ok(IntMatrix::from_fn(g, g, |i, j| rows[i][j]))
        };
        SymplecticElement::from_blocks(&blk(&raw.a)?, &blk(&raw.b)?, &blk(&raw.c)?, &blk(&raw.d)?)
            .map_err(serde::de::Error::custom)
    }
}

fn to_complex(m: &IntMatrix) -> CMatrix {
    m.map(|v| Complex64::new(v as f64, 0.0))
}

/// `cτ + d` as a complex matrix.
pub fn automorphy_matrix(sigma: &SymplecticElement, tau: &PeriodMatrix) -> Result<CMatrix> {
    if sigma.genus() != tau.genus() {
        return Err(Error::GenusMismatch { expected: tau.genus(), got: sigma.genus() });
    }
    Ok(to_complex(&sigma.c()) * tau.matrix() + to_complex(&sigma.d()))
}

/// `σ·τ = (aτ + b)(cτ + d)^{-1}`.
pub fn act(sigma: &SymplecticElement, tau: &PeriodMatrix) -> Result<PeriodMatrix> {
    let den = automorphy_matrix(sigma, tau)?;
    let num = to_complex(&sigma.a()) * tau.matrix() + to_complex(&sigma.b());
    let sv = linalg::singular_values(&den);
    let condition = sv.first().copied().unwrap_or(0.0) / sv.last().copied().unwrap_or(0.0);
    if !(condition <= MAX_ACTION_CONDITION) {
        return Err(Error::NumericallySingular { condition });
    }
    // num·den⁻¹ = (den⁻ᵀ·numᵀ)ᵀ
    let lu = den.transpose().lu();
    let xt = lu.solve(&num.transpose()).ok_or(Error::NumericallySingular { condition })?;
    validate_period(&xt.transpose(), DEFAULT_SYMMETRY_TOL).map_err(|e| match e {
        Error::NotSymmetric { .. } => Error::NumericallySingular { condition },
        other => other,
    })
}

/// Membership in the principal congruence subgroup `Γ_g(n)`: `σ ≡ I mod n`.
pub fn in_gamma(sigma: &SymplecticElement, n: i64) -> bool {
    assert!(n > 0, "level must be positive");
    let id = IntMatrix::identity(2 * sigma.g, 2 * sigma.g);
    sigma.m.iter().zip(id.iter()).all(|(x, i)| (x - i).rem_euclid(n) == 0)
}

/// Membership in `Γ_g(n, 2n)`: `Γ_g(n)` plus `diag(a·bᵀ) ≡ diag(c·dᵀ) ≡ 0 mod 2n`.
pub fn in_gamma_n_2n(sigma: &SymplecticElement, n: i64) -> bool {
    if !in_gamma(sigma, n) {
        return false;
    }
    match sigma.diagonal_terms() {
        Ok((ab, cd)) => ab.iter().chain(&cd).all(|v| v.rem_euclid(2 * n) == 0),
        Err(_) => false,
    }
}

/// `σ(ε;δ) = (d −c; −b a)(ε;δ) + (diag(c·dᵀ); diag(a·bᵀ))` reduced mod 2.
pub fn act_char(sigma: &SymplecticElement, ch: &Characteristic) -> Result<Characteristic> {
    let g = sigma.genus();
    if ch.genus() != g {
        return Err(Error::GenusMismatch { expected: g, got: ch.genus() });
    }
    let (a, b, c, d) = (sigma.a(), sigma.b(), sigma.c(), sigma.d());
    let (ab, cd) = sigma.diagonal_terms()?;
    let eps: Vec<i64> = ch.eps().iter().map(|&v| v as i64).collect();
    let delta: Vec<i64> = ch.delta().iter().map(|&v| v as i64).collect();
    let mut new_eps = vec![0i64; g];
    let mut new_delta = vec![0i64; g];
    for i in 0..g {
        let mut e = cd[i].rem_euclid(2);
        let mut dl = ab[i].rem_euclid(2);
        for j in 0..g {
            e += d[(i, j)].rem_euclid(2) * eps[j] + c[(i, j)].rem_euclid(2) * delta[j];
            dl += b[(i, j)].rem_euclid(2) * eps[j] + a[(i, j)].rem_euclid(2) * delta[j];
        }
        new_eps[i] = e;
        new_delta[i] = dl;
    }
    Characteristic::from_components(&new_eps, &new_delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristics::{enumerate_all, Characteristic};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn g1(a: i64, b: i64, cc: i64, d: i64) -> SymplecticElement {
        SymplecticElement::from_matrix(IntMatrix::from_row_slice(2, 2, &[a, b, cc, d])).unwrap()
    }

    #[test]
    fn validate_examples() {
        let t = validate_period(&(CMatrix::identity(2, 2) * Complex64::i()), 1e-12).unwrap();
        assert_eq!(t.genus(), 2);

        let raw = CMatrix::from_row_slice(2, 2, &[c(0., 1.), c(2., 0.), c(2.000001, 0.), c(0., 1.)]);
        assert!(matches!(validate_period(&raw, 1e-12), Err(Error::NotSymmetric { .. })));

        let raw = CMatrix::from_row_slice(1, 1, &[c(0., -1.)]);
        assert!(matches!(validate_period(&raw, 1.0), Err(Error::ImagNotPositiveDefinite { .. })));

        let raw = CMatrix::zeros(2, 3);
        assert!(matches!(validate_period(&raw, 1.0), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn small_asymmetry_is_symmetrized() {
        let raw = CMatrix::from_row_slice(2, 2, &[c(0., 1.), c(0.3, 0.1), c(0.3 + 1e-12, 0.1), c(0., 2.)]);
        let t = validate_period(&raw, 1e-9).unwrap();
        assert_eq!(t.matrix()[(0, 1)], t.matrix()[(1, 0)]);
    }

    #[test]
    fn gram_factor_matches_imaginary_part() {
        let raw = CMatrix::from_row_slice(2, 2, &[c(0.1, 2.), c(0.3, 1.), c(0.3, 1.), c(-0.2, 2.)]);
        let t = PeriodMatrix::new(raw).unwrap();
        let f = t.gram_factor();
        assert_eq!(f[(0, 1)], 0.0);
        let back = f.transpose() * f;
        assert!((back - t.im() * PI).abs().max() < 1e-13);
        // eigenvalues of Im τ are 1 and 3
        assert!((t.min_lattice_scale() - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn direct_sum_blocks() {
        let t1 = PeriodMatrix::diagonal(&[c(0., 1.)]).unwrap();
        let t2 = PeriodMatrix::diagonal(&[c(0., 2.)]).unwrap();
        let s = direct_sum(&t1, &t2);
        assert_eq!(s.genus(), 2);
        assert_eq!(s.matrix()[(0, 0)], c(0., 1.));
        assert_eq!(s.matrix()[(1, 1)], c(0., 2.));
        assert_eq!(s.matrix()[(0, 1)], c(0., 0.));
    }

    #[test]
    fn action_examples() {
        let tau = PeriodMatrix::diagonal(&[c(0., 1.)]).unwrap();
        let same = act(&SymplecticElement::identity(1), &tau).unwrap();
        assert!((same.matrix()[(0, 0)] - c(0., 1.)).norm() < 1e-15);
        let inv = act(&g1(0, 1, -1, 0), &tau).unwrap();
        assert!((inv.matrix()[(0, 0)] - c(0., 1.)).norm() < 1e-15);
        let tr = act(&g1(1, 8, 0, 1), &tau).unwrap();
        assert!((tr.matrix()[(0, 0)] - c(8., 1.)).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_symplectic() {
        let m = IntMatrix::from_row_slice(2, 2, &[1, 1, 1, 1]);
        assert_eq!(SymplecticElement::from_matrix(m), Err(Error::NotSymplectic));
    }

    #[test]
    fn overflow_is_an_error() {
        let big = i64::MAX / 2;
        let s = SymplecticElement::translation(&IntMatrix::from_row_slice(1, 1, &[big])).unwrap();
        let lower = SymplecticElement::lower_translation(&IntMatrix::from_row_slice(1, 1, &[big])).unwrap();
        assert_eq!(s.compose(&lower), Err(Error::IntegerOverflow));
    }

    #[test]
    fn congruence_examples() {
        let id = SymplecticElement::identity(2);
        assert!(in_gamma(&id, 4) && in_gamma_n_2n(&id, 4));
        let s = g1(1, 4, 0, 1);
        assert!(in_gamma(&s, 4));
        assert!(!in_gamma_n_2n(&s, 4));
        let s = g1(1, 8, 0, 1);
        assert!(in_gamma(&s, 4) && in_gamma_n_2n(&s, 4));
        assert!(!in_gamma(&g1(0, 1, -1, 0), 4));
    }

    #[test]
    fn act_char_examples() {
        let ch = |e: u8, d: u8| Characteristic::from_bits(&[e], &[d]).unwrap();
        for x in enumerate_all(2) {
            assert_eq!(act_char(&SymplecticElement::identity(2), &x).unwrap(), x);
        }
        assert_eq!(act_char(&g1(0, 1, -1, 0), &ch(0, 1)).unwrap(), ch(1, 0));
        // τ → τ+1 exchanges θ[0,0] and θ[0,1]
        assert_eq!(act_char(&g1(1, 1, 0, 1), &ch(0, 0)).unwrap(), ch(0, 1));
        assert_eq!(act_char(&g1(1, 1, 0, 1), &ch(0, 1)).unwrap(), ch(0, 0));
        assert_eq!(act_char(&g1(1, 1, 0, 1), &ch(1, 0)).unwrap(), ch(1, 0));
    }

    #[test]
    fn inverse_composes_to_identity() {
        let s = g1(2, 1, 1, 1).compose(&g1(1, 3, 0, 1)).unwrap();
        assert_eq!(s.compose(&s.inverse()).unwrap(), SymplecticElement::identity(1));
    }

    #[test]
    fn json_round_trip() {
        let s = g1(1, 8, 0, 1);
        let txt = serde_json::to_string(&s).unwrap();
        assert_eq!(txt, r#"{"g":1,"a":[[1]],"b":[[8]],"c":[[0]],"d":[[1]]}"#);
        let back: SymplecticElement = serde_json::from_str(&txt).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"g":1,"a":[[1]],"b":[[1]],"c":[[1]],"d":[[1]]}"#;
        assert!(serde_json::from_str::<SymplecticElement>(bad).is_err());

        let tau: PeriodMatrix = serde_json::from_str(r#"{"g":1,"re":[[0.5]],"im":[[2.0]]}"#).unwrap();
        assert_eq!(tau.matrix()[(0, 0)], c(0.5, 2.0));
        assert!(serde_json::from_str::<PeriodMatrix>(r#"{"g":1,"re":[[0.5]],"im":[[-2.0]]}"#).is_err());
    }

    #[test]
    fn lattice_coordinates_recover_half_periods() {
        let raw = CMatrix::from_row_slice(2, 2, &[c(0.1, 1.2), c(0.3, 0.4), c(0.3, 0.4), c(-0.2, 0.9)]);
        let tau = PeriodMatrix::new(raw).unwrap();
        let ch = Characteristic::from_bits(&[1, 0], &[1, 1]).unwrap();
        let x = crate::characteristics::half_period(&tau, &ch).unwrap();
        assert!(tau.torus_distance_to_half_period(&x, &ch) < 1e-14);
        let shifted: Vec<Complex64> =
            x.iter().enumerate().map(|(i, z)| z + tau.matrix()[(i, 0)] + 1.0).collect();
        assert!(tau.torus_distance_to_half_period(&shifted, &ch) < 1e-13);
        let other = Characteristic::from_bits(&[0, 0], &[1, 1]).unwrap();
        assert!(tau.torus_distance_to_half_period(&x, &other) > 0.4);
    }
}
