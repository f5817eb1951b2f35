//! Small dense helpers shared by the numerical modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Factor a symmetric positive definite `y` as `y = tᵀ·t` with `t` lower
/// triangular.
///
/// A pivot at or below `floor` rejects the matrix. The factor is obtained
/// from an ordinary Cholesky factorization of the index-reversed matrix.
pub fn lower_gram_factor(y: &RMatrix, floor: f64) -> Result<RMatrix> {
    let n = y.nrows();
    let rev = |i: usize| n - 1 - i;
    let mut l = RMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = y[(rev(j), rev(j))];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return Err(Error::ImagNotPositiveDefinite { pivot: d, floor });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = y[(rev(i), rev(j))];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    // reversed L is y' = L Lᵀ; undoing the reversal gives t = P Lᵀ P (lower)
    let mut t = RMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            t[(i, j)] = l[(rev(j), rev(i))];
        }
    }
    Ok(t)
}

/// Singular values sorted in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn determinant(m: &CMatrix) -> Complex64 {
    if m.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn max_abs_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in (j + 1)..n {
            worst = worst.max((m[(j, k)] - m[(k, j)]).norm());
        }
    }
    worst
}

/// Neumaier-compensated accumulator for complex sums. Summation order is
/// the caller's; the result is deterministic for a fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}
