//! Property suites that check the identities of the library on sampled
//! inputs, and a registry that looks them up by name.

pub mod sampling;
mod suites;

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss::GaussTolerances;
use crate::strata::StrataTolerances;
use crate::theta::EvalConfig;

pub use suites::{
    bordered_identity_residual, heat_check, jacobi_residual, BoundarySuite, EtaIdentitySuite, FactorizationSuite,
    HeatCheck, HeatSuite, JacobiSuite, ModularSuite, ParitySuite, ShiftSuite, HALF_PERIOD_EXCLUSION, HEAT_STEP,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteContext {
    pub cfg: EvalConfig,
    pub strata: StrataTolerances,
    pub gauss: GaussTolerances,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SuiteContext {
    fn default() -> Self {
        SuiteContext {
            cfg: EvalConfig::default(),
            strata: StrataTolerances::default(),
            gauss: GaussTolerances::default(),
            samples: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub label: String,
    pub residual: f64,
    pub passed: bool,
}

impl CaseOutcome {
    pub fn against(label: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        CaseOutcome { label: label.into(), residual, passed: residual < tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub index: usize,
    #[serde(flatten)]
    pub outcome: CaseOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub description: String,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_residual: f64,
    pub failures: usize,
    pub passed: bool,
    pub cases: Vec<CaseRecord>,
}

pub trait VerificationSuite: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn tolerance(&self) -> f64;

    /// Case `index` of the run. `rng` is seeded from the run seed and the
    /// case index only, so cases are independent of scheduling.
    fn run_case(&self, ctx: &SuiteContext, index: usize, rng: &mut ChaCha8Rng) -> Result<CaseOutcome>;

    fn verdict(&self, cases: &[CaseRecord]) -> bool {
        cases.iter().all(|c| c.outcome.passed)
    }
}

pub fn run_suite(suite: &dyn VerificationSuite, ctx: &SuiteContext) -> Result<SuiteReport> {
    ctx.cfg.validate()?;
    ctx.strata.validate()?;
    let cases = (0..ctx.samples)
        .into_par_iter()
        .map(|index| {
            let mut rng = sampling::case_rng(ctx.seed, index);
            suite.run_case(ctx, index, &mut rng).map(|outcome| CaseRecord { index, outcome })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = cases.iter().map(|c| c.outcome.residual).fold(0.0, f64::max);
    Ok(SuiteReport {
        suite: suite.name().to_string(),
        description: suite.description().to_string(),
        samples: ctx.samples,
        seed: ctx.seed,
        tolerance: suite.tolerance(),
        max_residual,
        failures: cases.iter().filter(|c| !c.outcome.passed).count(),
        passed: suite.verdict(&cases),
        cases,
    })
}

#[derive(Default)]
pub struct SuiteRegistry {
    suites: BTreeMap<&'static str, Box<dyn VerificationSuite>>,
}

impl SuiteRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn builtin() -> Self {
        let mut r = Self::new();
        let all: Vec<Box<dyn VerificationSuite>> = vec![
            Box::new(HeatSuite),
            Box::new(ShiftSuite),
            Box::new(FactorizationSuite),
            Box::new(JacobiSuite),
            Box::new(ModularSuite),
            Box::new(EtaIdentitySuite),
            Box::new(ParitySuite),
            Box::new(BoundarySuite),
        ];
        for s in all {
            r.register(s).expect("builtin suite names are distinct");
        }
        r
    }

    pub fn register(&mut self, suite: Box<dyn VerificationSuite>) -> Result<()> {
        let name = suite.name();
        if self.suites.contains_key(name) {
            return Err(Error::InvalidConfig(format!("suite {name} is already registered")));
        }
        self.suites.insert(name, suite);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&dyn VerificationSuite> {
        self.suites.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.keys().copied().collect()
    }
}
