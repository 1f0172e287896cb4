use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use super::syntax::{Literal, PredId, Predicate, Role, Sentence, Term};
use super::GroundError;
use crate::{Lit, Var};

/// `d^arity(p)`, the number of groundings of `p`.
pub fn ground_count(p: &Predicate, d: u32) -> BigUint {
    BigUint::from(d).pow(p.arity as u32)
}

#[derive(Clone, Debug)]
pub struct GroundConfig {
    /// Refuse to generate more ground clauses than this (counted before
    /// deduplication).
    pub max_clauses: usize,
    /// Emit the ground witness clauses attached to Skolemized sentences.
    pub witness_clauses: bool,
}

impl Default for GroundConfig {
    fn default() -> Self {
        GroundConfig {
            max_clauses: 5_000_000,
            witness_clauses: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct AtomBlock {
    offset: Var,
    count: u32,
    arity: usize,
}

/// Bijection between ground atoms and propositional variables.
///
/// Variables are numbered by predicate registration order, then by argument
/// tuple in row-major order over `{1..d}`, starting at 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomTable {
    domain: u32,
    blocks: Vec<AtomBlock>,
}

impl AtomTable {
    fn new(sentence: &Sentence, d: u32) -> Result<Self, GroundError> {
        let mut blocks = Vec::with_capacity(sentence.predicates().len());
        let mut next: u64 = 1;
        for p in sentence.predicates() {
            let count = ground_count(p, d)
                .to_u32()
                .filter(|&c| next + c as u64 <= i32::MAX as u64)
                .ok_or(GroundError::TooManyAtoms)?;
            blocks.push(AtomBlock {
                offset: next as Var,
                count,
                arity: p.arity,
            });
            next += count as u64;
        }
        Ok(AtomTable { domain: d, blocks })
    }

    pub fn domain(&self) -> u32 {
        self.domain
    }

    /// Total number of ground atoms.
    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Variable of `pred(args)`; arguments are 1-based domain elements.
    pub fn var(&self, pred: PredId, args: &[u32]) -> Var {
        let block = &self.blocks[pred.0];
        debug_assert_eq!(args.len(), block.arity);
        let mut index: u32 = 0;
        for &a in args {
            debug_assert!(a >= 1 && a <= self.domain);
            index = index * self.domain + (a - 1);
        }
        block.offset + index
    }

    /// Inverse of [`AtomTable::var`].
    pub fn decode(&self, var: Var) -> Option<(PredId, Vec<u32>)> {
        let (pid, block) = self
            .blocks
            .iter()
            .enumerate()
            .find(|(_, b)| var >= b.offset && var < b.offset + b.count)?;
        let mut index = var - block.offset;
        let mut args = vec![0; block.arity];
        for slot in args.iter_mut().rev() {
            *slot = index % self.domain + 1;
            index /= self.domain;
        }
        Some((PredId(pid), args))
    }

    /// Variables of all groundings of `pred`, in row-major order.
    pub fn vars_of(&self, pred: PredId) -> std::ops::Range<Var> {
        let b = &self.blocks[pred.0];
        b.offset..b.offset + b.count
    }
}

/// Propositional image of a sentence over `{1..d}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundProblem {
    pub num_vars: u32,
    /// Clauses over DIMACS-style signed variable ids.
    pub clauses: Vec<Vec<Lit>>,
    pub atom_table: AtomTable,
    /// Ground atoms of ordinary predicates, ascending.
    pub sampling_set: Vec<Var>,
}

pub fn ground(sentence: &Sentence, d: u32) -> Result<GroundProblem, GroundError> {
    ground_with(sentence, d, &GroundConfig::default())
}

pub fn ground_with(sentence: &Sentence, d: u32, config: &GroundConfig) -> Result<GroundProblem, GroundError> {
    if d == 0 {
        return Err(GroundError::EmptyDomain);
    }
    let atom_table = AtomTable::new(sentence, d)?;
    let num_vars = atom_table.len() as u32;

    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut seen: HashSet<Vec<Lit>> = HashSet::new();
    let mut generated: usize = 0;
    let mut push = |clause: Option<Vec<Lit>>, generated: &mut usize| -> Result<(), GroundError> {
        *generated += 1;
        if *generated > config.max_clauses {
            return Err(GroundError::ClauseLimit(config.max_clauses));
        }
        if let Some(c) = clause {
            if seen.insert(c.clone()) {
                clauses.push(c);
            }
        }
        Ok(())
    };

    for clause in sentence.clauses() {
        let vars = clause.variables();
        check_budget(d, vars.len(), generated, config.max_clauses)?;
        for binding in Bindings::new(vars.len(), d) {
            let ground = clause
                .literals()
                .iter()
                .map(|lit| ground_literal(&atom_table, lit, &vars, &binding))
                .collect::<Result<Vec<_>, _>>()?;
            push(normalize(ground), &mut generated)?;
        }
    }

    if config.witness_clauses {
        for w in sentence.witnesses() {
            let universal = w.universal_variables();
            check_budget(d, universal.len(), generated, config.max_clauses)?;
            let mut all_vars = universal.clone();
            all_vars.extend(w.exists.iter().cloned());
            for outer in Bindings::new(universal.len(), d) {
                let mut ground = vec![-ground_literal(&atom_table, &w.head, &universal, &outer)?];
                for inner in Bindings::new(w.exists.len(), d) {
                    let mut binding = outer.clone();
                    binding.extend(inner);
                    ground.push(ground_literal(&atom_table, &w.body, &all_vars, &binding)?);
                }
                push(normalize(ground), &mut generated)?;
            }
        }
    }

    let sampling_set = sentence
        .predicate_ids()
        .filter(|&id| sentence.predicate(id).role == Role::Ordinary)
        .flat_map(|id| atom_table.vars_of(id))
        .collect();

    Ok(GroundProblem {
        num_vars,
        clauses,
        atom_table,
        sampling_set,
    })
}

fn check_budget(d: u32, nvars: usize, generated: usize, cap: usize) -> Result<(), GroundError> {
    let per_clause = BigUint::from(d).pow(nvars as u32);
    if per_clause + BigUint::from(generated) > BigUint::from(cap) {
        return Err(GroundError::ClauseLimit(cap));
    }
    Ok(())
}

fn ground_literal(table: &AtomTable, lit: &Literal, vars: &[String], binding: &[u32]) -> Result<Lit, GroundError> {
    let mut args = Vec::with_capacity(lit.args.len());
    for t in &lit.args {
        let value = match t {
            Term::Const(c) => *c,
            Term::Var(v) => {
                let pos = vars
                    .iter()
                    .position(|x| x == v)
                    .ok_or_else(|| GroundError::UnboundVariable(v.clone()))?;
                binding[pos]
            }
        };
        if value == 0 || value > table.domain() {
            return Err(GroundError::ConstantOutOfDomain {
                constant: value,
                domain: table.domain(),
            });
        }
        args.push(value);
    }
    let var = table.var(lit.pred, &args) as Lit;
    Ok(if lit.positive { var } else { -var })
}

/// Sorts by variable and removes duplicates; `None` for tautologies.
fn normalize(mut clause: Vec<Lit>) -> Option<Vec<Lit>> {
    clause.sort_by_key(|l| (l.unsigned_abs(), *l));
    clause.dedup();
    if clause.windows(2).any(|w| w[0] == -w[1]) {
        None
    } else {
        Some(clause)
    }
}

/// Row-major enumeration of `{1..d}^k`.
struct Bindings {
    current: Option<Vec<u32>>,
    d: u32,
}

impl Bindings {
    fn new(k: usize, d: u32) -> Self {
        Bindings {
            current: Some(vec![1; k]),
            d,
        }
    }
}

impl Iterator for Bindings {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        let mut i = next.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if next[i] < self.d {
                next[i] += 1;
                self.current = Some(next);
                break;
            }
            next[i] = 1;
        }
        Some(out)
    }
}

impl GroundProblem {
    /// Number of true groundings of each predicate under a full assignment
    /// (`assignment[v]` for variable `v`; index 0 unused).
    pub fn true_counts(&self, sentence: &Sentence, assignment: &[bool]) -> Vec<u64> {
        sentence
            .predicate_ids()
            .map(|id| self.atom_table.vars_of(id).filter(|&v| assignment[v as usize]).count() as u64)
            .collect()
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| assignment[l.unsigned_abs() as usize] == (l > 0))
        })
    }

    pub fn max_var(&self) -> Var {
        self.num_vars
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::parse_sentence;

    const COIN: &str = "\
predicate Heads/1 w=0.5 wbar=1
predicate Tails/1 w=0.1 wbar=1
clause Heads(X) Tails(X)
clause !Heads(X) !Tails(X)
";

    #[test]
    fn coin_grounding_shape() {
        let s = parse_sentence(COIN).unwrap();
        let gp = ground(&s, 6).unwrap();
        assert_eq!(gp.num_vars, 12);
        assert_eq!(gp.clauses.len(), 12);
        assert_eq!(gp.sampling_set, (1..=12).collect::<Vec<_>>());
        assert_eq!(gp.clauses[0], vec![1, 7]);
        assert_eq!(gp.clauses[6], vec![-1, -7]);
    }

    #[test]
    fn singleton_domain_maps_everything_to_one() {
        let s = parse_sentence("predicate F/2\npredicate G/1\nclause F(X,Y) G(Y)\nclause !F(X,X)\n").unwrap();
        let gp = ground(&s, 1).unwrap();
        assert_eq!(gp.num_vars, 2);
        assert_eq!(gp.clauses, vec![vec![1, 2], vec![-1]]);
    }

    #[test]
    fn binary_predicate_has_d_squared_atoms() {
        let s = parse_sentence("predicate F/2\n").unwrap();
        let gp = ground(&s, 3).unwrap();
        assert_eq!(gp.atom_table.vars_of(PredId(0)).len(), 9);
        assert_eq!(gp.atom_table.var(PredId(0), &[2, 3]), 6);
        assert_eq!(gp.atom_table.decode(6), Some((PredId(0), vec![2, 3])));
    }

    #[test]
    fn ground_count_examples() {
        assert_eq!(ground_count(&Predicate::new("Heads", 1), 6), BigUint::from(6u32));
        assert_eq!(ground_count(&Predicate::new("F", 2), 3), BigUint::from(9u32));
        assert_eq!(ground_count(&Predicate::new("Zero", 0), 5), BigUint::from(1u32));
        assert_eq!(
            ground_count(&Predicate::new("Big", 5), 1000),
            BigUint::from(10u32).pow(15)
        );
    }

    #[test]
    fn tautologies_and_duplicates_are_dropped() {
        let s = parse_sentence("predicate P/1\nclause P(X) !P(Y)\nclause P(X) P(X)\n").unwrap();
        let gp = ground(&s, 2).unwrap();
        // P(X) v !P(Y): (1,1) and (2,2) are tautologies; (1,2), (2,1) remain.
        // P(X) v P(X) collapses to the units P(1), P(2).
        assert_eq!(gp.clauses, vec![vec![1, -2], vec![-1, 2], vec![1], vec![2]]);
    }

    #[test]
    fn clause_cap_is_an_explicit_refusal() {
        let s = parse_sentence("predicate F/3\nclause F(X,Y,Z)\n").unwrap();
        let cfg = GroundConfig {
            max_clauses: 26,
            ..GroundConfig::default()
        };
        assert_eq!(ground_with(&s, 3, &cfg), Err(GroundError::ClauseLimit(26)));
        let cfg = GroundConfig {
            max_clauses: 27,
            ..GroundConfig::default()
        };
        assert_eq!(ground_with(&s, 3, &cfg).unwrap().clauses.len(), 27);
    }

    #[test]
    fn constants_outside_domain_are_rejected() {
        let s = parse_sentence("predicate P/1\nclause P(3)\n").unwrap();
        assert!(matches!(ground(&s, 2), Err(GroundError::ConstantOutOfDomain { .. })));
    }

    #[test]
    fn witness_clauses_expand_existential_block() {
        let text = "predicate Z/1 role=auxiliary\npredicate F/2\nwitness Z(X) exists Y F(X,Y)\n";
        let s = parse_sentence(text).unwrap();
        let gp = ground(&s, 2).unwrap();
        // Z = 1..2, F = 3..6
        assert_eq!(gp.clauses, vec![vec![-1, 3, 4], vec![-2, 5, 6]]);
        assert_eq!(gp.sampling_set, vec![3, 4, 5, 6]);
        let off = ground_with(&s, 2, &GroundConfig { witness_clauses: false, ..GroundConfig::default() }).unwrap();
        assert!(off.clauses.is_empty());
    }

    #[test]
    fn grounding_is_deterministic() {
        let s = parse_sentence(COIN).unwrap();
        assert_eq!(ground(&s, 4).unwrap(), ground(&s, 4).unwrap());
    }
}
