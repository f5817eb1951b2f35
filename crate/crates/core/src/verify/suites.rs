use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::sampling::*;
use super::{CaseOutcome, CaseRecord, SuiteContext, VerificationSuite};
use crate::characteristics::{enumerate_all, enumerate_even, enumerate_odd, half_period, Characteristic};
use crate::error::Result;
use crate::gauss::{boundary_rank, eta_form, eta_scale, BorderedHessian};
use crate::linalg::{self, CMatrix};
use crate::siegel::{direct_sum, Direction, PeriodMatrix};
use crate::strata::modular_weight_check_squared;
use crate::theta::{eval_jet, eval_value, heat_constant, shift_identity_residual, theta_constant, EvalConfig};

pub const HEAT_STEP: f64 = 1e-5;

/// The z-Hessian of `θ[ch]` at `(τ, z)` next to central differences of
/// `θ[ch]` in each symmetric coordinate `τ_jk`.
#[derive(Debug, Clone)]
pub struct HeatCheck {
    pub hessian: CMatrix,
    pub tau_fd: CMatrix,
}

impl HeatCheck {
    /// `max_jk |Hess_jk − c_jk·FD_jk| / max_jk |Hess_jk|` for the constant
    /// `c_jk = factor·πi(1 + δ_jk)`.
    pub fn relative_residual(&self, factor: f64) -> f64 {
        let g = self.hessian.nrows();
        let scale = self.hessian.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for j in 0..g {
            for k in j..g {
                let c = heat_constant(j, k) * (factor / 2.0);
                worst = worst.max((self.hessian[(j, k)] - c * self.tau_fd[(j, k)]).norm());
            }
        }
        worst / scale
    }
}

pub fn heat_check(tau: &PeriodMatrix, z: &[Complex64], ch: &Characteristic, cfg: &EvalConfig, h: f64) -> Result<HeatCheck> {
    let g = tau.genus();
    let hessian = eval_jet(tau, z, ch, 2, cfg)?.hessian();
    let mut tau_fd = CMatrix::zeros(g, g);
    for j in 0..g {
        for k in j..g {
            let e = Direction::elementary(g, j, k);
            let plus = tau.shifted(e.matrix(), Complex64::new(h, 0.0))?;
            let minus = tau.shifted(e.matrix(), Complex64::new(-h, 0.0))?;
            let d = (eval_value(&plus, z, ch, cfg)? - eval_value(&minus, z, ch, cfg)?) / (2.0 * h);
            tau_fd[(j, k)] = d;
            tau_fd[(k, j)] = d;
        }
    }
    Ok(HeatCheck { hessian, tau_fd })
}

pub struct HeatSuite;

impl VerificationSuite for HeatSuite {
    fn name(&self) -> &'static str {
        "heat"
    }
    fn description(&self) -> &'static str {
        "z-Hessian against 2πi(1+δ_jk) times central τ-differences, genus 1-3"
    }
    fn tolerance(&self) -> f64 {
        1e-7
    }
    fn run_case(&self, ctx: &SuiteContext, index: usize, rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
        let g = 1 + index % 3;
        let tau = random_period(rng, g);
        let z = random_z(rng, g);
        let chars = if g <= 2 { enumerate_even(g) } else { vec![random_even_characteristic(rng, g)] };
        let mut worst = 0.0f64;
        for ch in &chars {
            worst = worst.max(heat_check(&tau, &z, ch, &ctx.cfg, HEAT_STEP)?.relative_residual(2.0));
        }
        Ok(CaseOutcome::against(format!("g={g}, {} characteristics", chars.len()), worst, self.tolerance()))
    }
}

pub struct ShiftSuite;

impl VerificationSuite for ShiftSuite {
    fn name(&self) -> &'static str {
        "shift"
    }
    fn description(&self) -> &'static str {
        "θ(τ, z + (τε+δ)/2) against κ·θ[ε,δ](τ, z)"
    }
    fn tolerance(&self) -> f64 {
        1e-10
    }
    fn run_case(&self, ctx: &SuiteContext, index: usize, rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
        let g = 1 + index % 3;
        let tau = random_period(rng, g);
        let z = random_z(rng, g);
        let ch = random_characteristic(rng, g);
        let r = shift_identity_residual(&tau, &z, &ch, &ctx.cfg)?;
        Ok(CaseOutcome::against(format!("g={g}, {ch}"), r, self.tolerance()))
    }
}

pub struct FactorizationSuite;

impl VerificationSuite for FactorizationSuite {
    fn name(&self) -> &'static str {
        "factorization"
    }
    fn description(&self) -> &'static str {
        "θ[ch1⊕ch2](τ1⊕τ2, (z1,z2)) against θ[ch1](τ1,z1)·θ[ch2](τ2,z2)"
    }
    fn tolerance(&self) -> f64 {
        1e-11
    }
    fn run_case(&self, ctx: &SuiteContext, _index: usize, rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
        let (t1, t2) = (random_period(rng, 1), random_period(rng, 1));
        let (z1, z2) = (random_z(rng, 1), random_z(rng, 1));
        let (c1, c2) = (random_characteristic(rng, 1), random_characteristic(rng, 1));
        let z: Vec<Complex64> = z1.iter().chain(&z2).copied().collect();
        let joint = eval_value(&direct_sum(&t1, &t2), &z, &c1.direct_sum(&c2), &ctx.cfg)?;
        let split = eval_value(&t1, &z1, &c1, &ctx.cfg)? * eval_value(&t2, &z2, &c2, &ctx.cfg)?;
        Ok(CaseOutcome::against(format!("{}", c1.direct_sum(&c2)), (joint - split).norm(), self.tolerance()))
    }
}

/// `θ[0,0]⁴ − θ[0,1]⁴ − θ[1,0]⁴` at `τ`.
pub fn jacobi_residual(tau: &PeriodMatrix, cfg: &EvalConfig) -> Result<f64> {
    let ch = |e: u8, d: u8| Characteristic::from_bits(&[e], &[d]).expect("bits");
    let t00 = theta_constant(tau, &ch(0, 0), cfg)?;
    let t01 = theta_constant(tau, &ch(0, 1), cfg)?;
    let t10 = theta_constant(tau, &ch(1, 0), cfg)?;
    Ok((t00.powi(4) - t01.powi(4) - t10.powi(4)).norm())
}

pub struct JacobiSuite;

impl VerificationSuite for JacobiSuite {
    fn name(&self) -> &'static str {
        "jacobi"
    }
    fn description(&self) -> &'static str {
        "θ[0,0]⁴ = θ[0,1]⁴ + θ[1,0]⁴ in genus 1"
    }
    fn tolerance(&self) -> f64 {
        1e-10
    }
    fn run_case(&self, ctx: &SuiteContext, _index: usize, rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
        let tau = PeriodMatrix::diagonal(&[Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.6..1.6))])?;
        let t = tau.matrix()[(0, 0)];
        Ok(CaseOutcome::against(format!("tau={t}"), jacobi_residual(&tau, &ctx.cfg)?, self.tolerance()))
    }
}

pub struct ModularSuite;

impl VerificationSuite for ModularSuite {
    fn name(&self) -> &'static str {
        "modular"
    }
    fn description(&self) -> &'static str {
        "θ[ch](σ·τ)² = det(cτ+d)·θ[ch](τ)² for words of length ≤ 3 in Γ_g(4,8) generators, g ≤ 2"
    }
    fn tolerance(&self) -> f64 {
        1e-9
    }
    fn run_case(&self, ctx: &SuiteContext, index: usize, rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
        let g = 1 + index % 2;
        let sigma = random_gamma48_word(rng, g, 3);
        let tau = random_period(rng, g);
        let mut worst = 0.0f64;
        for ch in enumerate_even(g) {
            worst = worst.max(modular_weight_check_squared(&sigma, &tau, &ch, &ctx.cfg)?);
        }
        Ok(CaseOutcome::against(format!("g={g}"), worst, self.tolerance()))
    }
}

/// `|det B + η| / max(|η|, |det B|)` for the bordered matrix of `(H, dF)`.
pub fn bordered_identity_residual(h: &CMatrix, df: &[Complex64]) -> f64 {
    let bh = BorderedHessian::from_parts(h.clone(), df.to_vec(), Complex64::new(0.0, 0.0), 0.0);
    let eta = eta_form(h, df);
    let det_b = linalg::determinant(&bh.b);
    (det_b + eta).norm() / eta.norm().max(det_b.norm()).max(f64::MIN_POSITIVE)
}

pub struct EtaIdentitySuite;

impl VerificationSuite for EtaIdentitySuite {
    fn name(&self) -> &'static str {
        "eta-identity"
    }
    fn description(&self) -> &'static str {
        "det(H, dF; dFᵀ, 0) = −dFᵀ·cof(H)·dF on random complex symmetric H, n ≤ 5"
    }
    fn tolerance(&self) -> f64 {
        1e-10
    }
    fn run_case(&self, _ctx: &SuiteContext, index: usize, rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
        if index == 0 {
            let h = CMatrix::identity(2, 2);
            let df = [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
            return Ok(CaseOutcome::against("H=I2, dF=(1,2)", bordered_identity_residual(&h, &df), self.tolerance()));
        }
        let n = rng.gen_range(1..=5);
        let h = random_symmetric(rng, n);
        let df: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        Ok(CaseOutcome::against(format!("n={n}"), bordered_identity_residual(&h, &df), self.tolerance()))
    }
}

pub struct ParitySuite;

impl VerificationSuite for ParitySuite {
    fn name(&self) -> &'static str {
        "parity"
    }
    fn description(&self) -> &'static str {
        "θ[ch](τ,−z) = ±θ[ch](τ,z) by parity and odd theta constants vanish, all characteristics, g ≤ 3"
    }
    fn tolerance(&self) -> f64 {
        1e-11
    }
    fn run_case(&self, ctx: &SuiteContext, index: usize, rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
        let g = 1 + index % 3;
        let tau = random_period(rng, g);
        let z = random_z(rng, g);
        let minus: Vec<Complex64> = z.iter().map(|v| -v).collect();
        let mut worst = 0.0f64;
        for ch in enumerate_all(g) {
            let sign = if ch.is_even() { 1.0 } else { -1.0 };
            let r = eval_value(&tau, &minus, &ch, &ctx.cfg)? - eval_value(&tau, &z, &ch, &ctx.cfg)? * sign;
            worst = worst.max(r.norm());
        }
        for ch in enumerate_odd(g) {
            worst = worst.max(theta_constant(&tau, &ch, &ctx.cfg)?.norm());
        }
        Ok(CaseOutcome::against(format!("g={g}"), worst, self.tolerance()))
    }
}

/// Minimum lattice distance between sampled divisor points and half-periods.
pub const HALF_PERIOD_EXCLUSION: f64 = 0.05;

pub struct BoundarySuite;

impl BoundarySuite {
    /// Fraction of generic divisor points that must give a nonsingular
    /// boundary matrix.
    pub const GENERIC_PASS_FRACTION: f64 = 0.975;
}

impl VerificationSuite for BoundarySuite {
    fn name(&self) -> &'static str {
        "boundary"
    }
    fn description(&self) -> &'static str {
        "boundary matrix of a smooth genus-2 τ′: singular at the 6 odd half-periods (cases 0-5), nonsingular at generic divisor points"
    }
    fn tolerance(&self) -> f64 {
        crate::gauss::DEFAULT_ETA_REL_TOL
    }
    fn run_case(&self, ctx: &SuiteContext, index: usize, rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
        let tau = generic_genus_two();
        let zero = Characteristic::zero(2);
        let odd = enumerate_odd(2);
        let (x, label, expect_singular) = if index < odd.len() {
            (half_period(&tau, &odd[index])?, format!("odd half-period {}", odd[index]), true)
        } else {
            let p = random_theta_divisor_point(rng, &tau, &zero, &ctx.cfg, HALF_PERIOD_EXCLUSION)?;
            (p.x, "generic divisor point".to_string(), false)
        };
        let z: Vec<Complex64> = x.iter().map(|v| v * 2.0).collect();
        let rank = boundary_rank(&tau, &z, &ctx.cfg, &ctx.gauss)?;
        let jet = eval_jet(&tau, &x, &zero, 2, &ctx.cfg)?;
        let (h, df) = (jet.hessian(), jet.gradient());
        let relative_det = eta_form(&h, &df).norm() / eta_scale(&h, &df);
        let singular = rank.numerical_rank < 3;
        Ok(CaseOutcome { label: format!("{label}: rank {}", rank.numerical_rank), residual: relative_det, passed: singular == expect_singular })
    }
    fn verdict(&self, cases: &[CaseRecord]) -> bool {
        let (special, generic): (Vec<_>, Vec<_>) = cases.iter().partition(|c| c.index < 6);
        let good = generic.iter().filter(|c| c.outcome.passed).count();
        special.iter().all(|c| c.outcome.passed) && good as f64 >= Self::GENERIC_PASS_FRACTION * generic.len() as f64
    }
}
