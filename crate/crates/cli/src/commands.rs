use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thetanull::gauss::{eta, EtaReport};
use thetanull::json::{complex_vec, ComplexJson};
use thetanull::sing_scheme::{
    order_four_diagnostic, sing_s_jacobian, sing_s_jacobian_at_half_period, sing_s_rank_test, snull_jacobian,
    OrderFourReport, SchemeJacobian, SingSReport, DEFAULT_SCHEME_TOL,
};
use thetanull::strata::{classify_stratum, theta_constant_vector, RankReport, StratumClassification};
use thetanull::theta::EvalConfig;
use thetanull::verify::sampling::{case_rng, random_theta_divisor_point};
use thetanull::verify::{run_suite, SuiteContext, SuiteRegistry, HALF_PERIOD_EXCLUSION};
use thetanull::{eval_jet, Characteristic, Direction, Error, PeriodMatrix, ThetaJet};

use crate::input;
use crate::{Failure, ScanMode, WhichArg};

fn emit(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    writeln!(out, "{}", thetanull::json::to_string_pretty(value))?;
    Ok(())
}

fn emit_line(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    writeln!(out, "{}", thetanull::json::to_string(value))?;
    Ok(())
}

#[derive(Serialize)]
struct EvalOutput {
    config: EvalConfig,
    jet: ThetaJet,
}

pub fn eval(
    ctx: &SuiteContext,
    period: &str,
    characteristic: Option<&str>,
    z: Option<&str>,
    order: usize,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let tau = input::period(period)?;
    let g = tau.genus();
    let ch = characteristic.map(input::characteristic).transpose()?.unwrap_or_else(|| Characteristic::zero(g));
    let z = z.map(input::point).transpose()?.unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); g]);
    let jet = eval_jet(&tau, &z, &ch, order, &ctx.cfg)?;
    emit(out, &EvalOutput { config: ctx.cfg, jet })
}

#[derive(Serialize)]
struct ClassifyOutput {
    config: EvalConfig,
    classification: StratumClassification,
}

pub fn classify(ctx: &SuiteContext, period: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let tau = input::period(period)?;
    let classification = classify_stratum(&tau, &ctx.cfg, &ctx.strata)?;
    emit(out, &ClassifyOutput { config: ctx.cfg, classification })
}

pub fn verify(ctx: &SuiteContext, suite: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let registry = SuiteRegistry::builtin();
    let s = registry
        .get(suite)
        .ok_or_else(|| Failure::Usage(format!("unknown suite {suite:?}; available: {}", registry.names().join(", "))))?;
    let report = run_suite(s, ctx)?;
    emit(out, &report)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

pub struct ScanSpec {
    pub mode: ScanMode,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub eta_points: usize,
}

impl ScanSpec {
    fn axis(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        (0..self.steps).map(|i| self.from + (self.to - self.from) * i as f64 / (self.steps - 1) as f64).collect()
    }
}

#[derive(Serialize)]
struct ConstantMagnitude {
    characteristic: Characteristic,
    abs: f64,
}

#[derive(Serialize)]
struct EtaSample {
    x: Vec<ComplexJson>,
    residual: f64,
    relative: f64,
    vanishes: bool,
    report: EtaReport,
}

#[derive(Serialize)]
struct ScanRecord {
    index: usize,
    s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    period: PeriodMatrix,
    theta_constants: Vec<ConstantMagnitude>,
    in_theta_null: bool,
    min_h: Option<usize>,
    classification: StratumClassification,
    eta: Vec<EtaSample>,
}

#[derive(Serialize)]
struct ScanFailure {
    index: usize,
    error: &'static str,
    message: String,
}

fn scan_sample(
    ctx: &SuiteContext,
    spec: &ScanSpec,
    index: usize,
    tau: &PeriodMatrix,
    (s, t): (f64, Option<f64>),
) -> Result<ScanRecord, Error> {
    let g = tau.genus();
    let constants = theta_constant_vector(tau, &ctx.cfg)?;
    let classification = classify_stratum(tau, &ctx.cfg, &ctx.strata)?;
    let mut rng = case_rng(ctx.seed, index);
    let zero = Characteristic::zero(g);
    let eta = (0..spec.eta_points)
        .map(|_| {
            let p = random_theta_divisor_point(&mut rng, tau, &zero, &ctx.cfg, HALF_PERIOD_EXCLUSION)?;
            let report = eta(tau, &p.x, &zero, &ctx.cfg, ctx.gauss.divisor_tol)?;
            Ok(EtaSample {
                x: complex_vec(&p.x),
                residual: p.residual,
                relative: report.relative(),
                vanishes: report.vanishes(ctx.gauss.rel_tol),
                report,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(ScanRecord {
        index,
        s,
        t,
        period: tau.clone(),
        theta_constants: constants.into_iter().map(|(characteristic, v)| ConstantMagnitude { characteristic, abs: v.norm() }).collect(),
        in_theta_null: classification.in_theta_null,
        min_h: classification.min_h,
        classification,
        eta,
    })
}

pub fn scan(
    ctx: &SuiteContext,
    spec: &ScanSpec,
    period: &str,
    direction: &str,
    direction2: Option<&str>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let tau = input::period(period)?;
    let e1: Direction = input::json_arg(direction, "direction")?;
    let g = tau.genus();
    if e1.matrix().nrows() != g {
        return Err(Error::GenusMismatch { expected: g, got: e1.matrix().nrows() }.into());
    }
    if spec.steps == 0 {
        return Err(Failure::Usage("--steps must be at least 1".into()));
    }
    let axis = spec.axis();
    let (coords, e2): (Vec<(f64, Option<f64>)>, Option<Direction>) = match spec.mode {
        ScanMode::Line => {
            if direction2.is_some() {
                return Err(Failure::Usage("--direction2 applies to grid scans only".into()));
            }
            (axis.iter().map(|&s| (s, None)).collect(), None)
        }
        ScanMode::Grid => {
            let d2 = direction2.ok_or_else(|| Failure::Usage("grid scans need --direction2".into()))?;
            let e2: Direction = input::json_arg(d2, "direction")?;
            if e2.matrix().nrows() != g {
                return Err(Error::GenusMismatch { expected: g, got: e2.matrix().nrows() }.into());
            }
            (axis.iter().flat_map(|&s| axis.iter().map(move |&t| (s, Some(t)))).collect(), Some(e2))
        }
    };
    let results: Vec<Result<ScanRecord, Error>> = coords
        .par_iter()
        .enumerate()
        .map(|(index, &(s, t))| {
            let mut point = tau.shifted(e1.matrix(), Complex64::new(s, 0.0))?;
            if let (Some(t), Some(e2)) = (t, &e2) {
                point = point.shifted(e2.matrix(), Complex64::new(t, 0.0))?;
            }
            scan_sample(ctx, spec, index, &point, (s, t))
        })
        .collect();
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(record) => emit_line(out, &record)?,
            Err(e) => {
                emit_line(out, &ScanFailure { index, error: e.kind(), message: e.to_string() })?;
                return Err(Failure::Sample(e));
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SBlock {
    jacobian: SchemeJacobian,
    report: SingSReport,
}

#[derive(Serialize)]
struct NullBlock {
    jacobian: SchemeJacobian,
    rank: RankReport,
    smooth: bool,
    order_four: OrderFourReport,
}

#[derive(Serialize)]
struct SingOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    s: Option<SBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_null: Option<NullBlock>,
}

pub fn sing(
    ctx: &SuiteContext,
    period: &str,
    characteristic: Option<&str>,
    z: Option<&str>,
    which: Option<WhichArg>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let tau = input::period(period)?;
    let rel = ctx.strata.rank_rel_tol;
    let want_s = which != Some(WhichArg::Snull);
    let want_null = which != Some(WhichArg::S);
    let output = match (characteristic, z) {
        (Some(_), Some(_)) => return Err(Failure::Usage("give either --char or --z, not both".into())),
        (None, None) => return Err(Failure::Usage("sing needs --char or --z".into())),
        (None, Some(z)) => {
            if which == Some(WhichArg::Snull) {
                return Err(Failure::Usage("the S_null Jacobian is based at a half-period; use --char".into()));
            }
            let jacobian = sing_s_jacobian(&tau, &input::point(z)?, &ctx.cfg)?;
            let report = sing_s_rank_test(&jacobian, DEFAULT_SCHEME_TOL, rel)?;
            SingOutput { s: Some(SBlock { jacobian, report }), s_null: None }
        }
        (Some(c), None) => {
            let ch = input::characteristic(c)?;
            if !ch.is_even() {
                return Err(Error::CharacteristicParity { expected: "even" }.into());
            }
            let s = if want_s {
                let jacobian = sing_s_jacobian_at_half_period(&tau, &ch, &ctx.cfg)?;
                let report = sing_s_rank_test(&jacobian, DEFAULT_SCHEME_TOL, rel)?;
                Some(SBlock { jacobian, report })
            } else {
                None
            };
            let s_null = if want_null {
                let jacobian = snull_jacobian(&tau, &ch, &ctx.cfg)?;
                let rank = jacobian.rank_report(rel);
                let order_four = order_four_diagnostic(&tau, &ch, &ctx.cfg, DEFAULT_SCHEME_TOL)?;
                Some(NullBlock { smooth: rank.numerical_rank == tau.genus() + 1, jacobian, rank, order_four })
            } else {
                None
            };
            SingOutput { s, s_null }
        }
    };
    emit(out, &output)
}
