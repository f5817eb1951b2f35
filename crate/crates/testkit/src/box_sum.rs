//! Naive summation of `Σ_m Π(2πi n_j)^{α_j} exp πi[nᵀτn + 2nᵀ(z + δ/2)]`,
//! `n = m + ε/2`, over the box `|m_i| ≤ bound` in extended precision.

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use nalgebra::DMatrix;
use num_complex::Complex64;

const RM: RoundingMode = RoundingMode::ToEven;

/// Terms whose modulus is below `e^{-SKIP_EXPONENT}` (about 1e-61) are not
/// summed.
const SKIP_EXPONENT: f64 = 140.0;

#[derive(Debug, Clone, Copy)]
pub struct BoxOracle {
    /// Working precision in bits.
    pub precision: usize,
    /// Half-width of the summation box.
    pub bound: i64,
}

impl Default for BoxOracle {
    fn default() -> Self {
        // 192 bits is 57 decimal digits
        BoxOracle { precision: 192, bound: 20 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleValue {
    pub value: Complex64,
    pub terms_summed: usize,
}

struct Ctx {
    p: usize,
    cc: Consts,
    pi: BigFloat,
}

impl Ctx {
    fn new(p: usize) -> Self {
        let mut cc = Consts::new().expect("constant cache");
        let pi = cc.pi(p, RM);
        Ctx { p, cc, pi }
    }

    fn f(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.p, RM)
    }

    fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.p, RM)
    }

    fn to_f64(&mut self, x: &BigFloat) -> f64 {
        if x.is_zero() {
            return 0.0;
        }
        let s = x.format(Radix::Dec, RM, &mut self.cc).expect("decimal formatting");
        s.parse::<f64>().unwrap_or_else(|_| panic!("unparseable oracle output {s}"))
    }
}

impl BoxOracle {
    /// `∂^α θ[ε,δ](τ, z)` where `alpha` lists differentiation coordinates.
    pub fn partial(
        &self,
        tau: &DMatrix<Complex64>,
        z: &[Complex64],
        eps: &[u8],
        delta: &[u8],
        alpha: &[usize],
    ) -> OracleValue {
        let g = tau.nrows();
        assert!(tau.ncols() == g && z.len() == g && eps.len() == g && delta.len() == g);
        let mut ctx = Ctx::new(self.precision);

        let tre: Vec<Vec<BigFloat>> = (0..g).map(|i| (0..g).map(|j| ctx.f(tau[(i, j)].re)).collect()).collect();
        let tim: Vec<Vec<BigFloat>> = (0..g).map(|i| (0..g).map(|j| ctx.f(tau[(i, j)].im)).collect()).collect();
        // z + δ/2
        let sre: Vec<BigFloat> = (0..g).map(|i| ctx.add(&ctx.f(z[i].re), &ctx.f(delta[i] as f64 / 2.0))).collect();
        let sim: Vec<BigFloat> = (0..g).map(|i| ctx.f(z[i].im)).collect();
        let two = ctx.f(2.0);
        let two_pi = ctx.mul(&two, &ctx.pi);
        let k = alpha.len();
        let weight_scale = (0..k).fold(ctx.f(1.0), |acc, _| ctx.mul(&acc, &two_pi));

        let mut acc_re = ctx.f(0.0);
        let mut acc_im = ctx.f(0.0);
        let mut terms = 0usize;
        let width = (2 * self.bound + 1) as usize;
        let total = width.pow(g as u32);
        let mut m = vec![0i64; g];
        for flat in 0..total {
            let mut r = flat;
            for slot in m.iter_mut() {
                *slot = (r % width) as i64 - self.bound;
                r /= width;
            }
            let n: Vec<f64> = (0..g).map(|i| m[i] as f64 + eps[i] as f64 / 2.0).collect();

            // cheap magnitude screen in double precision
            let mut im_part = 0.0;
            for i in 0..g {
                for j in 0..g {
                    im_part += n[i] * tau[(i, j)].im * n[j];
                }
                im_part += 2.0 * n[i] * z[i].im;
            }
            let log_weight: f64 = alpha.iter().map(|&j| (2.0 * std::f64::consts::PI * n[j].abs()).max(1e-300).ln()).sum();
            if -std::f64::consts::PI * im_part + log_weight < -SKIP_EXPONENT {
                continue;
            }
            if alpha.iter().any(|&j| n[j] == 0.0) {
                continue;
            }

            let nb: Vec<BigFloat> = n.iter().map(|&v| ctx.f(v)).collect();
            let mut q_re = ctx.f(0.0);
            let mut q_im = ctx.f(0.0);
            for i in 0..g {
                for j in 0..g {
                    let nn = ctx.mul(&nb[i], &nb[j]);
                    q_re = ctx.add(&q_re, &ctx.mul(&nn, &tre[i][j]));
                    q_im = ctx.add(&q_im, &ctx.mul(&nn, &tim[i][j]));
                }
                let two_n = ctx.mul(&two, &nb[i]);
                q_re = ctx.add(&q_re, &ctx.mul(&two_n, &sre[i]));
                q_im = ctx.add(&q_im, &ctx.mul(&two_n, &sim[i]));
            }
            // exp(πi q) = exp(−π q_im)·cis(π q_re)
            let modulus = ctx.mul(&ctx.pi, &q_im).neg().exp(ctx.p, RM, &mut ctx.cc);
            let angle = ctx.mul(&ctx.pi, &q_re);
            let c = angle.cos(ctx.p, RM, &mut ctx.cc);
            let s = angle.sin(ctx.p, RM, &mut ctx.cc);
            let mut w = ctx.mul(&modulus, &weight_scale);
            for &j in alpha {
                w = ctx.mul(&w, &nb[j]);
            }
            // multiply by i^k
            let (mut re, mut im) = (ctx.mul(&w, &c), ctx.mul(&w, &s));
            for _ in 0..k {
                let t = re;
                re = im.neg();
                im = t;
            }
            acc_re = ctx.add(&acc_re, &re);
            acc_im = ctx.add(&acc_im, &im);
            terms += 1;
        }
        let value = Complex64::new(ctx.to_f64(&acc_re), ctx.to_f64(&acc_im));
        OracleValue { value, terms_summed: terms }
    }

    pub fn value(&self, tau: &DMatrix<Complex64>, z: &[Complex64], eps: &[u8], delta: &[u8]) -> Complex64 {
        self.partial(tau, z, eps, delta, &[]).value
    }
}
