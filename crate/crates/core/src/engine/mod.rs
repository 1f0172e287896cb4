//! Anytime bounds search over cardinality boxes and the exact
//! decomposition into per-count unweighted model counts.

mod regions;
mod search;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::cardenc::{encode_box, CardinalityBox, Interval, VarAllocator};
use crate::fol::{ground_count, ground_with, GroundConfig, GroundError, Sentence};
use crate::oracle::{CountRequest, FomcOracle, OracleError};
use crate::rational::from_biguint;

pub use regions::{grounding_weight, max_oracle_calls, pac_adjust, region_weight_bounds, split_box, term_count};
pub use search::{
    conditional_bounds, run, AnytimeSearch, BoundsReport, EngineConfig, ProgressRecord, Region, Termination,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("decomposition needs {terms} terms, above the cap of {cap}")]
    TermCap { terms: BigUint, cap: BigUint },
    #[error("tolerance must be positive")]
    InvalidTolerance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub value: BigRational,
    pub terms: BigUint,
    pub oracle_calls: u64,
}

/// Weighted count as a sum over exact per-predicate true-grounding counts
/// of weight times unweighted count. Exact when the oracle is.
pub fn decompose_exact<O: FomcOracle>(
    sentence: &Sentence,
    d: u32,
    oracle: &mut O,
    term_cap: &BigUint,
    ground: &GroundConfig,
) -> Result<Decomposition, EngineError> {
    let terms = term_count(sentence, d);
    if &terms > term_cap {
        return Err(EngineError::TermCap {
            terms,
            cap: term_cap.clone(),
        });
    }
    let gp = ground_with(sentence, d, ground)?;
    let preds = sentence.weighted_predicates();
    let xis: Vec<u64> = preds
        .iter()
        .map(|&p| ground_count(sentence.predicate(p), d).to_u64().expect("grounded"))
        .collect();
    let calls_before = oracle.calls();
    let mut value = BigRational::zero();
    let mut tuple = vec![0u64; preds.len()];
    loop {
        let b = CardinalityBox::new(preds.iter().zip(&tuple).map(|(&p, &n)| (p, Interval::new(n, n))).collect());
        let mut alloc = VarAllocator::after(gp.max_var());
        let enc = encode_box(&gp, &b, &mut alloc);
        let request = CountRequest {
            problem: &gp,
            extra_clauses: &enc.clauses,
            num_vars: alloc.max_var(),
            sampling_set: &gp.sampling_set,
        };
        let count = oracle.count(&request)?.count;
        if !count.is_zero() {
            let (w, _) = region_weight_bounds(sentence, &b, d);
            value += w * from_biguint(&count);
        }
        // Odometer, last predicate fastest.
        let mut i = tuple.len();
        loop {
            if i == 0 {
                return Ok(Decomposition {
                    value,
                    terms,
                    oracle_calls: oracle.calls() - calls_before,
                });
            }
            i -= 1;
            if tuple[i] < xis[i] {
                tuple[i] += 1;
                break;
            }
            tuple[i] = 0;
        }
    }
}
