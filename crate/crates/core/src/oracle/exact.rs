//! Exact projected model counting.
//!
//! DPLL over the sampling variables with unit propagation, connected
//! component decomposition and a component cache. Components that contain
//! no sampling variable contribute a factor of 0 or 1 depending on
//! satisfiability.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::OracleError;
use crate::{Lit, Var};

#[derive(Clone, Debug, Default)]
pub struct CounterLimits {
    /// Maximum number of branching decisions.
    pub max_decisions: Option<u64>,
    pub time_limit: Option<Duration>,
}

type Formula = Vec<Vec<Lit>>;

/// Number of distinct restrictions to `sampling_set` of the models of
/// `clauses` over variables `1..=num_vars`.
pub fn count_projected(
    num_vars: u32,
    clauses: &[Vec<Lit>],
    sampling_set: &[Var],
    limits: &CounterLimits,
) -> Result<BigUint, OracleError> {
    let mut proj = vec![false; num_vars as usize + 1];
    for &v in sampling_set {
        if v == 0 || v > num_vars {
            return Err(OracleError::InvalidInstance(format!("sampling variable {v} outside 1..{num_vars}")));
        }
        proj[v as usize] = true;
    }
    let mut formula: Formula = Vec::with_capacity(clauses.len());
    for c in clauses {
        let mut c = c.clone();
        if let Some(&bad) = c.iter().find(|l| **l == 0 || l.unsigned_abs() > num_vars) {
            return Err(OracleError::InvalidInstance(format!("literal {bad} outside 1..{num_vars}")));
        }
        c.sort_by_key(|l| (l.unsigned_abs(), *l));
        c.dedup();
        if c.windows(2).any(|w| w[0] == -w[1]) {
            continue;
        }
        formula.push(c);
    }
    let scope = proj.iter().filter(|&&p| p).count();
    let mut search = Search {
        proj,
        cache: HashMap::new(),
        sat_cache: HashMap::new(),
        decisions: 0,
        limits: limits.clone(),
        started: Instant::now(),
    };
    search.count(formula, scope)
}

struct Search {
    proj: Vec<bool>,
    cache: HashMap<Formula, BigUint>,
    sat_cache: HashMap<Formula, bool>,
    decisions: u64,
    limits: CounterLimits,
    started: Instant,
}

impl Search {
    fn tick(&mut self) -> Result<(), OracleError> {
        self.decisions += 1;
        if let Some(max) = self.limits.max_decisions {
            if self.decisions > max {
                return Err(OracleError::ResourceLimit(format!("exceeded {max} decisions")));
            }
        }
        if let Some(limit) = self.limits.time_limit {
            if self.decisions.is_multiple_of(256) && self.started.elapsed() > limit {
                return Err(OracleError::ResourceLimit(format!("exceeded time limit of {limit:?}")));
            }
        }
        Ok(())
    }

    /// Projected count of `formula` where `scope` sampling variables are
    /// unassigned (including those that no longer occur in any clause).
    fn count(&mut self, formula: Formula, scope: usize) -> Result<BigUint, OracleError> {
        let Some((residual, assigned_proj)) = propagate(formula, &self.proj) else {
            return Ok(BigUint::zero());
        };
        let components = components(residual);
        let mut remaining = 0;
        for comp in &components {
            remaining += proj_vars(comp, &self.proj).len();
        }
        let free = scope - assigned_proj - remaining;
        let mut total = BigUint::one() << free;
        for comp in components {
            let c = self.count_component(comp)?;
            if c.is_zero() {
                return Ok(c);
            }
            total *= c;
        }
        Ok(total)
    }

    fn count_component(&mut self, comp: Formula) -> Result<BigUint, OracleError> {
        if let Some(hit) = self.cache.get(&comp) {
            return Ok(hit.clone());
        }
        let vars = proj_vars(&comp, &self.proj);
        let result = if vars.is_empty() {
            if self.satisfiable(comp.clone())? {
                BigUint::one()
            } else {
                BigUint::zero()
            }
        } else {
            self.tick()?;
            let pivot = *vars
                .iter()
                .max_by_key(|(v, occ)| (*occ, std::cmp::Reverse(*v)))
                .map(|(v, _)| v)
                .expect("non-empty");
            let scope = vars.len() - 1;
            let pos = self.count(assign(&comp, pivot as Lit), scope)?;
            let neg = self.count(assign(&comp, -(pivot as Lit)), scope)?;
            pos + neg
        };
        self.cache.insert(comp, result.clone());
        Ok(result)
    }

    fn satisfiable(&mut self, formula: Formula) -> Result<bool, OracleError> {
        let Some((residual, _)) = propagate(formula, &self.proj) else {
            return Ok(false);
        };
        if residual.is_empty() {
            return Ok(true);
        }
        if let Some(&hit) = self.sat_cache.get(&residual) {
            return Ok(hit);
        }
        self.tick()?;
        let pivot = residual[0][0].unsigned_abs() as Lit;
        let sat = self.satisfiable(assign(&residual, pivot))? || self.satisfiable(assign(&residual, -pivot))?;
        self.sat_cache.insert(residual, sat);
        Ok(sat)
    }
}

/// Sampling variables occurring in `formula` with occurrence counts.
fn proj_vars(formula: &Formula, proj: &[bool]) -> Vec<(Var, usize)> {
    let mut occ: BTreeMap<Var, usize> = BTreeMap::new();
    for c in formula {
        for &l in c {
            let v = l.unsigned_abs();
            if proj[v as usize] {
                *occ.entry(v).or_default() += 1;
            }
        }
    }
    occ.into_iter().collect()
}

/// Applies a literal: drops satisfied clauses and falsified literals.
fn assign(formula: &Formula, lit: Lit) -> Formula {
    let mut out = Vec::with_capacity(formula.len());
    for c in formula {
        if c.contains(&lit) {
            continue;
        }
        if c.contains(&-lit) {
            out.push(c.iter().copied().filter(|&l| l != -lit).collect());
        } else {
            out.push(c.clone());
        }
    }
    out
}

/// Exhaustive unit propagation. Returns `None` on conflict, otherwise the
/// residual formula and the number of sampling variables that were fixed.
fn propagate(mut formula: Formula, proj: &[bool]) -> Option<(Formula, usize)> {
    let mut fixed_proj = 0;
    loop {
        let mut units: HashMap<Var, bool> = HashMap::new();
        for c in &formula {
            match c.len() {
                0 => return None,
                1 => {
                    let l = c[0];
                    if let Some(prev) = units.insert(l.unsigned_abs(), l > 0) {
                        if prev != (l > 0) {
                            return None;
                        }
                    }
                }
                _ => {}
            }
        }
        if units.is_empty() {
            return Some((formula, fixed_proj));
        }
        fixed_proj += units.keys().filter(|&&v| proj[v as usize]).count();
        let mut next = Vec::with_capacity(formula.len());
        for c in formula {
            let mut satisfied = false;
            let mut kept = Vec::with_capacity(c.len());
            for &l in &c {
                match units.get(&l.unsigned_abs()) {
                    Some(&val) if val == (l > 0) => {
                        satisfied = true;
                        break;
                    }
                    Some(_) => {}
                    None => kept.push(l),
                }
            }
            if !satisfied {
                next.push(kept);
            }
        }
        formula = next;
    }
}

/// Splits into variable-disjoint components, each sorted so that equal
/// components produce equal cache keys.
fn components(formula: Formula) -> Vec<Formula> {
    if formula.is_empty() {
        return Vec::new();
    }
    let mut index: HashMap<Var, usize> = HashMap::new();
    let mut parent: Vec<usize> = Vec::new();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for c in &formula {
        let mut first: Option<usize> = None;
        for &l in c {
            let v = l.unsigned_abs();
            let id = *index.entry(v).or_insert_with(|| {
                parent.push(parent.len());
                parent.len() - 1
            });
            match first {
                None => first = Some(id),
                Some(f) => {
                    let (a, b) = (find(&mut parent, f), find(&mut parent, id));
                    if a != b {
                        parent[b] = a;
                    }
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Formula> = BTreeMap::new();
    for c in formula {
        let root = find(&mut parent, index[&c[0].unsigned_abs()]);
        groups.entry(root).or_default().push(c);
    }
    let mut comps: Vec<Formula> = groups
        .into_values()
        .map(|mut g| {
            g.sort();
            g.dedup();
            g
        })
        .collect();
    comps.sort();
    comps
}
