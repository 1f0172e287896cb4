//! Model counting oracles and the confidence budget.

mod brute;
mod dimacs;
mod exact;
mod external;
mod ledger;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::fol::{GroundError, GroundProblem};
use crate::{Lit, Var};

pub use brute::{wmc_bruteforce, wmc_bruteforce_with, BRUTE_FORCE_MAX_ATOMS};
pub use dimacs::{read_dimacs, write_dimacs, write_dimacs_raw, DimacsInstance};
pub use exact::{count_projected, CounterLimits};
pub use external::{count_external, parse_counter_output, ExternalOracle};
pub use ledger::{ln_upper, DeltaLedger, DeltaSchedule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("counter exited with {status}: {stderr}")]
    SubprocessFailed { status: String, stderr: String },
    #[error("could not parse counter output: {0}")]
    UnparsableOutput(String),
    #[error("counter timed out after {0:?}")]
    Timeout(Duration),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("confidence budget exhausted: {consumed} consumed of {total}, next grant {requested}")]
    BudgetExhausted {
        consumed: String,
        total: String,
        requested: String,
    },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Ground(#[from] GroundError),
}

impl From<std::io::Error> for OracleError {
    fn from(e: std::io::Error) -> Self {
        OracleError::Io(e.to_string())
    }
}

/// One counting query: the grounding, extra clauses over fresh variables,
/// and the projection set.
#[derive(Clone, Copy, Debug)]
pub struct CountRequest<'a> {
    pub problem: &'a GroundProblem,
    pub extra_clauses: &'a [Vec<Lit>],
    /// Largest variable id in use across `problem` and `extra_clauses`.
    pub num_vars: u32,
    pub sampling_set: &'a [Var],
}

impl<'a> CountRequest<'a> {
    pub fn plain(problem: &'a GroundProblem) -> Self {
        CountRequest {
            problem,
            extra_clauses: &[],
            num_vars: problem.num_vars,
            sampling_set: &problem.sampling_set,
        }
    }

    pub fn clauses(&self) -> impl Iterator<Item = &'a Vec<Lit>> {
        self.problem.clauses.iter().chain(self.extra_clauses.iter())
    }

    pub fn num_clauses(&self) -> usize {
        self.problem.clauses.len() + self.extra_clauses.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub count: BigUint,
    pub exact: bool,
    pub epsilon_used: Option<BigRational>,
    pub delta_consumed: Option<BigRational>,
    pub call_index: u64,
    pub wall_time: Duration,
}

pub trait FomcOracle {
    fn count(&mut self, request: &CountRequest<'_>) -> Result<OracleResult, OracleError>;

    /// Multiplicative tolerance of each answer, `None` for exact oracles.
    fn epsilon(&self) -> Option<BigRational> {
        None
    }

    /// Total confidence budget spent so far.
    fn delta_consumed(&self) -> Option<BigRational> {
        None
    }

    fn calls(&self) -> u64;
}

impl<T: FomcOracle + ?Sized> FomcOracle for Box<T> {
    fn count(&mut self, request: &CountRequest<'_>) -> Result<OracleResult, OracleError> {
        (**self).count(request)
    }
    fn epsilon(&self) -> Option<BigRational> {
        (**self).epsilon()
    }
    fn delta_consumed(&self) -> Option<BigRational> {
        (**self).delta_consumed()
    }
    fn calls(&self) -> u64 {
        (**self).calls()
    }
}

/// Exact projected count of a request.
pub fn count_exact(request: &CountRequest<'_>, limits: &CounterLimits) -> Result<OracleResult, OracleError> {
    let start = Instant::now();
    let clauses: Vec<Vec<Lit>> = request.clauses().cloned().collect();
    let count = count_projected(request.num_vars, &clauses, request.sampling_set, limits)?;
    Ok(OracleResult {
        count,
        exact: true,
        epsilon_used: None,
        delta_consumed: None,
        call_index: 0,
        wall_time: start.elapsed(),
    })
}

/// The built-in exact counter.
#[derive(Clone, Debug, Default)]
pub struct ExactOracle {
    pub limits: CounterLimits,
    calls: u64,
}

impl ExactOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_limits(limits: CounterLimits) -> Self {
        ExactOracle { limits, calls: 0 }
    }
}

impl FomcOracle for ExactOracle {
    fn count(&mut self, request: &CountRequest<'_>) -> Result<OracleResult, OracleError> {
        let mut result = count_exact(request, &self.limits)?;
        self.calls += 1;
        result.call_index = self.calls;
        Ok(result)
    }

    fn calls(&self) -> u64 {
        self.calls
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    Exact,
    External,
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub mode: OracleMode,
    pub epsilon: Option<BigRational>,
    pub delta: Option<BigRational>,
    pub schedule: DeltaSchedule,
    pub external_counter_path: Option<PathBuf>,
    pub seed: u64,
    /// Per-call wall-clock limit.
    pub timeout: Option<Duration>,
    pub max_decisions: Option<u64>,
}

impl OracleConfig {
    pub fn exact() -> Self {
        OracleConfig {
            mode: OracleMode::Exact,
            epsilon: None,
            delta: None,
            schedule: DeltaSchedule::Uniform,
            external_counter_path: None,
            seed: 0,
            timeout: None,
            max_decisions: None,
        }
    }

    pub fn external(path: impl Into<PathBuf>, epsilon: BigRational, delta: BigRational, schedule: DeltaSchedule) -> Self {
        OracleConfig {
            mode: OracleMode::External,
            epsilon: Some(epsilon),
            delta: Some(delta),
            schedule,
            external_counter_path: Some(path.into()),
            seed: 0,
            timeout: None,
            max_decisions: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.mode {
            OracleMode::Exact => {
                if self.epsilon.is_some() || self.delta.is_some() {
                    return Err("epsilon and delta apply only to the external oracle".into());
                }
            }
            OracleMode::External => {
                let eps = self.epsilon.as_ref().ok_or("external oracle needs epsilon")?;
                let delta = self.delta.as_ref().ok_or("external oracle needs delta")?;
                if !eps.is_positive() {
                    return Err("epsilon must be positive".into());
                }
                if !delta.is_positive() || *delta > BigRational::from_integer(1.into()) {
                    return Err("delta must lie in (0, 1]".into());
                }
                if self.external_counter_path.is_none() {
                    return Err("external oracle needs a counter path".into());
                }
            }
        }
        Ok(())
    }

    /// Builds the oracle. `m_max` bounds the number of calls the run can
    /// make and sizes the confidence budget.
    pub fn build(&self, m_max: BigUint) -> Result<Box<dyn FomcOracle>, String> {
        self.validate()?;
        match self.mode {
            OracleMode::Exact => Ok(Box::new(ExactOracle::with_limits(CounterLimits {
                max_decisions: self.max_decisions,
                time_limit: self.timeout,
            }))),
            OracleMode::External => {
                let delta = self.delta.clone().expect("validated");
                if m_max.is_zero() {
                    return Err("maximum call count must be positive".into());
                }
                let ledger = DeltaLedger::new(self.schedule, delta, m_max);
                let mut oracle = ExternalOracle::new(
                    self.external_counter_path.clone().expect("validated"),
                    self.epsilon.clone().expect("validated"),
                    ledger,
                );
                oracle.seed = self.seed;
                oracle.timeout = self.timeout;
                Ok(Box::new(oracle))
            }
        }
    }
}
