use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{pac_adjust, region_weight_bounds, split_box, EngineError};
use crate::cardenc::{encode_box, CardinalityBox, VarAllocator};
use crate::fol::{ground_with, GroundConfig, GroundProblem, Sentence};
use crate::oracle::{CountRequest, FomcOracle, OracleError, OracleResult};
use crate::rational::{exact_string, format_decimal, from_biguint};

#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Stop once `ub < lb * (1 + tau)`.
    pub tau: BigRational,
    pub ground: GroundConfig,
    /// Stop after this many splits.
    pub max_splits: Option<u64>,
}

impl EngineConfig {
    pub fn new(tau: BigRational) -> Self {
        EngineConfig {
            tau,
            ground: GroundConfig::default(),
            max_splits: None,
        }
    }
}

/// A queued search region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub bbox: CardinalityBox,
    pub count: BigUint,
    pub lb: BigRational,
    pub ub: BigRational,
    pub insertion_index: u64,
}

impl Region {
    pub fn gap(&self) -> BigRational {
        &self.ub - &self.lb
    }
}

#[derive(Debug)]
struct Queued {
    gap: BigRational,
    region: Region,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // Largest gap first, then earliest insertion.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gap
            .cmp(&other.gap)
            .then_with(|| Reverse(self.region.insertion_index).cmp(&Reverse(other.region.insertion_index)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ToleranceMet,
    QueueExhausted,
    BudgetExhausted,
    ResourceLimit,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ToleranceMet => "tolerance_met",
            Termination::QueueExhausted => "queue_exhausted",
            Termination::BudgetExhausted => "budget_exhausted",
            Termination::ResourceLimit => "resource_limit",
        }
    }
}

/// Snapshot of the bounds after initialization (`iter = 0`) and after each
/// split.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProgressRecord {
    pub iter: u64,
    pub lb: String,
    pub ub: String,
    pub lb_exact: String,
    pub ub_exact: String,
    /// `None` when the lower bound is zero.
    pub ratio: Option<String>,
    pub oracle_calls: u64,
    pub delta_consumed: Option<String>,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub lb: BigRational,
    pub ub: BigRational,
    /// Equal to `lb`/`ub` for exact oracles.
    pub pac_lb: BigRational,
    pub pac_ub: BigRational,
    pub ratio: Option<BigRational>,
    pub epsilon: Option<BigRational>,
    pub oracle_calls: u64,
    pub delta_consumed: Option<BigRational>,
    pub splits: u64,
    pub terminated_by: Termination,
    /// Why the run stopped early, for budget and resource terminations.
    pub detail: Option<String>,
}

pub(crate) fn ratio(lb: &BigRational, ub: &BigRational) -> Option<BigRational> {
    if lb.is_zero() {
        None
    } else {
        Some(ub / lb)
    }
}

/// State of the anytime search.
pub struct AnytimeSearch<'s, O: FomcOracle> {
    sentence: &'s Sentence,
    d: u32,
    gp: GroundProblem,
    oracle: O,
    config: EngineConfig,
    lb: BigRational,
    ub: BigRational,
    queue: BinaryHeap<Queued>,
    /// Popped regions that could not be split further.
    settled: Vec<Region>,
    next_index: u64,
    splits: u64,
    trace: Vec<ProgressRecord>,
    started: Instant,
    finished: Option<(Termination, Option<String>)>,
}

impl<'s, O: FomcOracle> AnytimeSearch<'s, O> {
    /// Grounds the sentence, counts its models once and queues the full box.
    pub fn new(sentence: &'s Sentence, d: u32, oracle: O, config: EngineConfig) -> Result<Self, EngineError> {
        if config.tau <= BigRational::zero() {
            return Err(EngineError::InvalidTolerance);
        }
        let started = Instant::now();
        let gp = ground_with(sentence, d, &config.ground)?;
        let mut search = AnytimeSearch {
            sentence,
            d,
            gp,
            oracle,
            config,
            lb: BigRational::zero(),
            ub: BigRational::zero(),
            queue: BinaryHeap::new(),
            settled: Vec::new(),
            next_index: 0,
            splits: 0,
            trace: Vec::new(),
            started,
            finished: None,
        };
        let full = CardinalityBox::full(sentence, d);
        let result = search.count_box(&full)?;
        if let Some(region) = search.make_region(full, result.count) {
            search.lb = region.lb.clone();
            search.ub = region.ub.clone();
            search.push(region);
        }
        search.record();
        Ok(search)
    }

    fn count_box(&mut self, b: &CardinalityBox) -> Result<OracleResult, OracleError> {
        let mut alloc = VarAllocator::after(self.gp.max_var());
        let enc = encode_box(&self.gp, b, &mut alloc);
        let request = CountRequest {
            problem: &self.gp,
            extra_clauses: &enc.clauses,
            num_vars: alloc.max_var(),
            sampling_set: &self.gp.sampling_set,
        };
        self.oracle.count(&request)
    }

    fn make_region(&mut self, bbox: CardinalityBox, count: BigUint) -> Option<Region> {
        if count.is_zero() {
            return None;
        }
        let (t_min, t_max) = region_weight_bounds(self.sentence, &bbox, self.d);
        let mc = from_biguint(&count);
        let insertion_index = self.next_index;
        self.next_index += 1;
        Some(Region {
            bbox,
            count,
            lb: t_min * &mc,
            ub: t_max * mc,
            insertion_index,
        })
    }

    fn push(&mut self, region: Region) {
        self.queue.push(Queued {
            gap: region.gap(),
            region,
        });
    }

    fn record(&mut self) {
        let rec = ProgressRecord {
            iter: self.splits,
            lb: format_decimal(&self.lb, 12),
            ub: format_decimal(&self.ub, 12),
            lb_exact: exact_string(&self.lb),
            ub_exact: exact_string(&self.ub),
            ratio: ratio(&self.lb, &self.ub).map(|r| format_decimal(&r, 12)),
            oracle_calls: self.oracle.calls(),
            delta_consumed: self.oracle.delta_consumed().map(|d| format_decimal(&d, 12)),
            elapsed_ms: self.started.elapsed().as_millis() as u64,
        };
        self.trace.push(rec);
    }

    pub fn lower(&self) -> &BigRational {
        &self.lb
    }

    pub fn upper(&self) -> &BigRational {
        &self.ub
    }

    pub fn trace(&self) -> &[ProgressRecord] {
        &self.trace
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    pub fn ground_problem(&self) -> &GroundProblem {
        &self.gp
    }

    /// Queued regions, in no particular order.
    pub fn queued(&self) -> impl Iterator<Item = &Region> {
        self.queue.iter().map(|q| &q.region)
    }

    pub fn settled(&self) -> &[Region] {
        &self.settled
    }

    fn tolerance_met(&self) -> bool {
        !self.lb.is_zero() && self.ub < &self.lb * (BigRational::one() + &self.config.tau)
    }

    /// Performs one split. Returns the termination reason once the search
    /// is over; further calls return the same reason.
    pub fn step(&mut self) -> Option<Termination> {
        if let Some((t, _)) = &self.finished {
            return Some(*t);
        }
        let done = |s: &mut Self, t: Termination, detail: Option<String>| {
            s.finished = Some((t, detail));
            Some(t)
        };
        loop {
            if self.tolerance_met() {
                return done(self, Termination::ToleranceMet, None);
            }
            if let Some(max) = self.config.max_splits {
                if self.splits >= max {
                    return done(self, Termination::ResourceLimit, Some(format!("split limit of {max} reached")));
                }
            }
            let Some(Queued { region, .. }) = self.queue.pop() else {
                return done(self, Termination::QueueExhausted, None);
            };
            let children = split_box(&region.bbox);
            if children.is_empty() {
                // Exact weight already known; it stays in both bounds.
                self.settled.push(region);
                continue;
            }
            let mut counted = Vec::with_capacity(children.len());
            for child in children {
                match self.count_box(&child) {
                    Ok(r) => counted.push((child, r.count)),
                    Err(e) => {
                        let t = match e {
                            OracleError::BudgetExhausted { .. } => Termination::BudgetExhausted,
                            _ => Termination::ResourceLimit,
                        };
                        self.push(region);
                        return done(self, t, Some(e.to_string()));
                    }
                }
            }
            let mut lb = &self.lb - &region.lb;
            let mut ub = &self.ub - &region.ub;
            for (child, count) in counted {
                if let Some(r) = self.make_region(child, count) {
                    lb += &r.lb;
                    ub += &r.ub;
                    self.push(r);
                }
            }
            self.lb = lb;
            self.ub = ub;
            self.splits += 1;
            self.record();
            return None;
        }
    }

    /// Runs to termination, handing each new progress record to `sink`.
    pub fn run_with(&mut self, mut sink: impl FnMut(&ProgressRecord)) -> BoundsReport {
        for rec in &self.trace {
            sink(rec);
        }
        loop {
            let seen = self.trace.len();
            let stop = self.step();
            for rec in &self.trace[seen..] {
                sink(rec);
            }
            if stop.is_some() {
                return self.report();
            }
        }
    }

    pub fn run(&mut self) -> BoundsReport {
        self.run_with(|_| {})
    }

    pub fn report(&self) -> BoundsReport {
        let epsilon = self.oracle.epsilon();
        let (pac_lb, pac_ub) = match &epsilon {
            Some(eps) => pac_adjust(&self.lb, &self.ub, eps),
            None => (self.lb.clone(), self.ub.clone()),
        };
        let (terminated_by, detail) = self
            .finished
            .clone()
            .unwrap_or((Termination::ResourceLimit, Some("search still running".into())));
        BoundsReport {
            lb: self.lb.clone(),
            ub: self.ub.clone(),
            pac_lb,
            pac_ub,
            ratio: ratio(&self.lb, &self.ub),
            epsilon,
            oracle_calls: self.oracle.calls(),
            delta_consumed: self.oracle.delta_consumed(),
            splits: self.splits,
            terminated_by,
            detail,
        }
    }
}

/// Convenience wrapper: initialize and run to termination.
pub fn run<O: FomcOracle>(sentence: &Sentence, d: u32, oracle: O, config: EngineConfig) -> Result<BoundsReport, EngineError> {
    let mut search = AnytimeSearch::new(sentence, d, oracle, config)?;
    Ok(search.run())
}

/// Bounds on `P(q) = Z(q) / Z` from runs on the query-conditioned and
/// unconditioned sentences, using the PAC-adjusted bounds of each.
pub fn conditional_bounds(numerator: &BoundsReport, denominator: &BoundsReport) -> (BigRational, BigRational) {
    let one = BigRational::one();
    let lo = if denominator.pac_ub.is_zero() {
        BigRational::zero()
    } else {
        &numerator.pac_lb / &denominator.pac_ub
    };
    let hi = if denominator.pac_lb.is_zero() {
        one.clone()
    } else {
        (&numerator.pac_ub / &denominator.pac_lb).min(one.clone())
    };
    (lo.min(one), hi)
}
