//! Reference evaluators and generators shared by the integration tests.
//!
//! The evaluators here enumerate interpretations directly and do not go
//! through the library's grounder, counter or weight bookkeeping.

#![allow(dead_code)]

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use wfomc_bounds::encoders::problog::{Atom, ProblogProgram};
use wfomc_bounds::encoders::{ExistsBlock, Formula, MlnProgram, QuantifiedClause, QuantifiedSentence, RuleWeight};
use wfomc_bounds::fol::{Clause, Literal, PredId, Predicate, Sentence, Term};
use wfomc_bounds::oracle::{count_exact, CountRequest, CounterLimits, FomcOracle, OracleError, OracleResult};
use wfomc_bounds::rational::parse_rational;

pub const COIN: &str = "\
predicate Heads/1 w=0.5 wbar=1
predicate Tails/1 w=0.1 wbar=1
clause Heads(X) Tails(X)
clause !Heads(X) !Tails(X)
";

pub fn q(s: &str) -> BigRational {
    parse_rational(s).unwrap_or_else(|| panic!("bad rational {s}"))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

fn rpow(b: &BigRational, e: u32) -> BigRational {
    let mut r = BigRational::one();
    for _ in 0..e {
        r *= b;
    }
    r
}

/// Dense atom numbering, predicate by predicate, arguments in mixed radix.
pub struct Atoms {
    offsets: Vec<usize>,
    sizes: Vec<usize>,
    d: u32,
    pub len: usize,
}

impl Atoms {
    pub fn new(preds: &[Predicate], d: u32) -> Self {
        let mut offsets = Vec::new();
        let mut sizes = Vec::new();
        let mut len = 0;
        for p in preds {
            let n = (d as usize).pow(p.arity as u32);
            offsets.push(len);
            sizes.push(n);
            len += n;
        }
        Atoms { offsets, sizes, d, len }
    }

    pub fn index(&self, p: PredId, args: &[u32]) -> usize {
        let mut i = 0usize;
        for &a in args {
            assert!(a >= 1 && a <= self.d);
            i = i * self.d as usize + (a - 1) as usize;
        }
        self.offsets[p.0] + i
    }

    pub fn true_count(&self, p: usize, world: u64) -> u32 {
        let mask = if self.sizes[p] == 64 { u64::MAX } else { (1u64 << self.sizes[p]) - 1 };
        ((world >> self.offsets[p]) & mask).count_ones()
    }
}

/// All maps from `vars` to `1..=d`.
pub fn envs(vars: &[String], d: u32) -> Vec<HashMap<String, u32>> {
    let mut out = vec![HashMap::new()];
    for v in vars {
        let mut next = Vec::new();
        for env in &out {
            for c in 1..=d {
                let mut e = env.clone();
                e.insert(v.clone(), c);
                next.push(e);
            }
        }
        out = next;
    }
    out
}

fn args_of(lit: &Literal, env: &HashMap<String, u32>) -> Vec<u32> {
    lit.args
        .iter()
        .map(|t| match t {
            Term::Var(v) => *env.get(v).unwrap_or_else(|| panic!("unbound {v}")),
            Term::Const(c) => *c,
        })
        .collect()
}

fn lit_bit(atoms: &Atoms, lit: &Literal, env: &HashMap<String, u32>) -> u64 {
    1u64 << atoms.index(lit.pred, &args_of(lit, env))
}

fn vars_in<'a>(lits: impl IntoIterator<Item = &'a Literal>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for l in lits {
        for t in &l.args {
            if let Term::Var(v) = t {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
    }
    out
}

/// A ground disjunction as `(positive atoms, negative atoms)` bitmasks.
fn ground_clause(atoms: &Atoms, lits: &[Literal], env: &HashMap<String, u32>) -> (u64, u64) {
    let (mut pos, mut neg) = (0u64, 0u64);
    for l in lits {
        if l.positive {
            pos |= lit_bit(atoms, l, env);
        } else {
            neg |= lit_bit(atoms, l, env);
        }
    }
    (pos, neg)
}

fn clause_holds(world: u64, (pos, neg): (u64, u64)) -> bool {
    world & pos != 0 || !world & neg != 0
}

/// Sums `count * prod w^k wbar^(n-k)` over a histogram of per-predicate
/// true counts.
fn weigh(preds: &[Predicate], atoms: &Atoms, hist: HashMap<Vec<u32>, u64>) -> BigRational {
    let mut total = BigRational::zero();
    for (counts, n) in hist {
        let mut w = int(n as i64);
        for (i, p) in preds.iter().enumerate() {
            let size = atoms.sizes[i] as u32;
            w *= rpow(&p.w, counts[i]) * rpow(&p.wbar, size - counts[i]);
        }
        total += w;
    }
    total
}

/// Signed WFOMC of the universal clauses of `s`, by enumerating every
/// interpretation of every predicate. Witness lines are ignored.
pub fn reference_wfomc(s: &Sentence, d: u32) -> BigRational {
    let preds = s.predicates();
    let atoms = Atoms::new(preds, d);
    assert!(atoms.len <= 22, "{} atoms is too many to enumerate", atoms.len);
    let mut ground = Vec::new();
    for c in s.clauses() {
        let vars = vars_in(c.literals());
        for env in envs(&vars, d) {
            ground.push(ground_clause(&atoms, c.literals(), &env));
        }
    }
    let mut hist: HashMap<Vec<u32>, u64> = HashMap::new();
    for world in 0..(1u64 << atoms.len) {
        if ground.iter().all(|&c| clause_holds(world, c)) {
            let key = (0..preds.len()).map(|i| atoms.true_count(i, world)).collect();
            *hist.entry(key).or_default() += 1;
        }
    }
    weigh(preds, &atoms, hist)
}

/// WFOMC of a sentence with existential blocks, evaluating the quantifiers
/// directly.
pub fn reference_forall_exists(qs: &QuantifiedSentence, d: u32) -> BigRational {
    let preds = qs.base.predicates();
    let atoms = Atoms::new(preds, d);
    assert!(atoms.len <= 22);
    let mut plain = Vec::new();
    for c in qs.base.clauses() {
        for env in envs(&vars_in(c.literals()), d) {
            plain.push(ground_clause(&atoms, c.literals(), &env));
        }
    }
    // Per universal instance: the literal part and, per block, the list of
    // (must be true, must be false) conjunctions over witness choices.
    type Conj = (u64, u64);
    type Instance = ((u64, u64), Vec<Vec<Conj>>);
    let mut quantified: Vec<Instance> = Vec::new();
    for c in &qs.clauses {
        let mut universal = vars_in(&c.literals);
        for b in &c.blocks {
            for v in vars_in(&b.body) {
                if !b.vars.contains(&v) && !universal.contains(&v) {
                    universal.push(v);
                }
            }
        }
        for env in envs(&universal, d) {
            let lits = ground_clause(&atoms, &c.literals, &env);
            let mut blocks = Vec::new();
            for b in &c.blocks {
                let mut conjs = Vec::new();
                for wenv in envs(&b.vars, d) {
                    let mut full = env.clone();
                    full.extend(wenv);
                    let (mut t, mut f) = (0u64, 0u64);
                    for l in &b.body {
                        if l.positive {
                            t |= lit_bit(&atoms, l, &full);
                        } else {
                            f |= lit_bit(&atoms, l, &full);
                        }
                    }
                    conjs.push((t, f));
                }
                blocks.push(conjs);
            }
            quantified.push((lits, blocks));
        }
    }
    let mut hist: HashMap<Vec<u32>, u64> = HashMap::new();
    for world in 0..(1u64 << atoms.len) {
        let ok = plain.iter().all(|&c| clause_holds(world, c))
            && quantified.iter().all(|(lits, blocks)| {
                clause_holds(world, *lits)
                    || blocks
                        .iter()
                        .any(|conjs| conjs.iter().any(|&(t, f)| world & t == t && world & f == 0))
            });
        if ok {
            let key = (0..preds.len()).map(|i| atoms.true_count(i, world)).collect();
            *hist.entry(key).or_default() += 1;
        }
    }
    weigh(preds, &atoms, hist)
}

fn eval(f: &Formula, atoms: &Atoms, env: &HashMap<String, u32>, world: u64) -> bool {
    match f {
        Formula::Lit(l) => (world & lit_bit(atoms, l, env) != 0) == l.positive,
        Formula::Not(g) => !eval(g, atoms, env, world),
        Formula::And(gs) => gs.iter().all(|g| eval(g, atoms, env, world)),
        Formula::Or(gs) => gs.iter().any(|g| eval(g, atoms, env, world)),
        Formula::Implies(a, b) => !eval(a, atoms, env, world) || eval(b, atoms, env, world),
        Formula::Iff(a, b) => eval(a, atoms, env, world) == eval(b, atoms, env, world),
    }
}

/// Partition function of an MLN under its direct semantics: the sum over
/// worlds of `prod_i f_i^(true groundings of rule i)`, hard rules as
/// constraints. Rules must carry rational factors.
pub fn mln_partition(prog: &MlnProgram, d: u32) -> BigRational {
    let preds = prog.sentence.predicates();
    let atoms = Atoms::new(preds, d);
    assert!(atoms.len <= 22);
    let grounded: Vec<Vec<HashMap<String, u32>>> = prog.rules.iter().map(|r| envs(&r.formula.variables(), d)).collect();
    let mut hist: HashMap<Vec<u32>, u64> = HashMap::new();
    'world: for world in 0..(1u64 << atoms.len) {
        let mut key = Vec::new();
        for (r, es) in prog.rules.iter().zip(&grounded) {
            let n = es.iter().filter(|e| eval(&r.formula, &atoms, e, world)).count() as u32;
            if r.weight == RuleWeight::Hard {
                if n as usize != es.len() {
                    continue 'world;
                }
                key.push(0);
            } else {
                key.push(n);
            }
        }
        *hist.entry(key).or_default() += 1;
    }
    let mut total = BigRational::zero();
    for (key, n) in hist {
        let mut w = int(n as i64);
        for (r, k) in prog.rules.iter().zip(key) {
            match &r.weight {
                RuleWeight::Factor(f) => w *= rpow(f, k),
                RuleWeight::Hard => {}
                RuleWeight::Log(_) => panic!("reference needs rational factors"),
            }
        }
        total += w;
    }
    total
}

fn ground_atom(a: &Atom, env: &HashMap<String, u32>) -> (String, Vec<u32>) {
    let args = a
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => env[v],
            Term::Const(c) => *c,
        })
        .collect();
    (a.name.clone(), args)
}

struct World<'a> {
    prog: &'a ProblogProgram,
    d: u32,
    facts: &'a HashMap<(String, Vec<u32>), bool>,
    memo: HashMap<(String, Vec<u32>), bool>,
}

impl World<'_> {
    fn holds(&mut self, atom: &(String, Vec<u32>)) -> bool {
        if let Some(&v) = self.facts.get(atom) {
            return v;
        }
        if let Some(&v) = self.memo.get(atom) {
            return v;
        }
        let mut value = false;
        'rules: for r in &self.prog.rules {
            if r.head.name != atom.0 || r.head.args.len() != atom.1.len() {
                continue;
            }
            let mut env = HashMap::new();
            for (t, &c) in r.head.args.iter().zip(&atom.1) {
                match t {
                    Term::Const(k) if *k != c => continue 'rules,
                    Term::Const(_) => {}
                    Term::Var(v) => {
                        if *env.entry(v.clone()).or_insert(c) != c {
                            continue 'rules;
                        }
                    }
                }
            }
            let mut free: Vec<String> = Vec::new();
            for (a, _) in &r.body {
                for t in &a.args {
                    if let Term::Var(v) = t {
                        if !env.contains_key(v) && !free.contains(v) {
                            free.push(v.clone());
                        }
                    }
                }
            }
            for extra in envs(&free, self.d) {
                let mut full = env.clone();
                full.extend(extra);
                if r.body.iter().all(|(a, pos)| self.holds(&ground_atom(a, &full)) == *pos) {
                    value = true;
                    break 'rules;
                }
            }
        }
        self.memo.insert(atom.clone(), value);
        value
    }
}

/// Success probability of a ground query by enumerating the truth values of
/// all probabilistic fact groundings. Rules must not be recursive.
pub fn problog_probability(prog: &ProblogProgram, d: u32, query: &Atom) -> BigRational {
    let mut choices: Vec<((String, Vec<u32>), BigRational)> = Vec::new();
    for f in &prog.facts {
        let vars: Vec<String> = f
            .atom
            .args
            .iter()
            .filter_map(|t| match t {
                Term::Var(v) => Some(v.clone()),
                Term::Const(_) => None,
            })
            .collect();
        for env in envs(&vars, d) {
            choices.push((ground_atom(&f.atom, &env), f.prob.clone()));
        }
    }
    assert!(choices.len() <= 20);
    let target = ground_atom(query, &HashMap::new());
    let mut total = BigRational::zero();
    for mask in 0..(1u64 << choices.len()) {
        let mut facts = HashMap::new();
        let mut p = BigRational::one();
        for (i, (atom, prob)) in choices.iter().enumerate() {
            let on = mask >> i & 1 == 1;
            // A fact listed twice is true if either choice is.
            let e = facts.entry(atom.clone()).or_insert(false);
            *e |= on;
            p *= if on { prob.clone() } else { BigRational::one() - prob };
        }
        let mut w = World {
            prog,
            d,
            facts: &facts,
            memo: HashMap::new(),
        };
        if w.holds(&target) {
            total += p;
        }
    }
    total
}

const WEIGHTS: &[&str] = &["1/2", "2", "3/2", "1/3", "5", "7/4", "1", "3", "2/5", "9/2"];

fn random_weight(rng: &mut ChaCha8Rng) -> BigRational {
    q(WEIGHTS.choose(rng).unwrap())
}

fn random_args(rng: &mut ChaCha8Rng, arity: usize, vars: &[&str], d: u32) -> Vec<Term> {
    (0..arity)
        .map(|_| {
            if rng.gen_bool(0.1) {
                Term::Const(rng.gen_range(1..=d))
            } else {
                Term::var(*vars.choose(rng).unwrap())
            }
        })
        .collect()
}

fn atoms_at(arities: &[usize], d: u32) -> usize {
    arities.iter().map(|&a| (d as usize).pow(a as u32)).sum()
}

/// A random universal sentence with one or two weighted predicates of arity
/// at most two, possibly one neutral predicate, and at most `max_atoms`
/// ground atoms at the returned domain size (at most 3).
pub fn random_sentence(rng: &mut ChaCha8Rng, max_atoms: usize) -> (Sentence, u32) {
    let mut s = Sentence::new();
    let mut arities = Vec::new();
    let weighted = rng.gen_range(1..=2);
    for i in 0..weighted {
        let arity = rng.gen_range(0..=2);
        let mut w = random_weight(rng);
        let wbar = random_weight(rng);
        if w.is_one() && wbar.is_one() {
            w = int(2);
        }
        s.add_predicate(Predicate::weighted(format!("P{i}"), arity, w, wbar)).unwrap();
        arities.push(arity);
    }
    if rng.gen_bool(0.5) {
        let arity = rng.gen_range(0..=1);
        s.add_predicate(Predicate::new("N", arity)).unwrap();
        arities.push(arity);
    }
    let dmax = (1..=3).rev().find(|&d| atoms_at(&arities, d) <= max_atoms).unwrap_or(1);
    let d = rng.gen_range(1..=dmax);
    let vars = ["X", "Y"];
    for _ in 0..rng.gen_range(1..=3) {
        let len = rng.gen_range(1..=3);
        let lits = (0..len)
            .map(|_| {
                let p = PredId(rng.gen_range(0..arities.len()));
                Literal::new(p, random_args(rng, arities[p.0], &vars, d), rng.gen_bool(0.5))
            })
            .collect();
        s.add_clause(Clause::new(lits)).unwrap();
    }
    (s, d)
}

/// A random sentence with existential blocks `exists Y. body(X, Y)` whose
/// Skolemization stays within `max_atoms` ground atoms.
pub fn random_forall_exists(rng: &mut ChaCha8Rng, max_atoms: usize) -> (QuantifiedSentence, u32) {
    loop {
        let mut base = Sentence::new();
        let mut arities = Vec::new();
        for i in 0..rng.gen_range(1..=2) {
            let arity = rng.gen_range(1..=2);
            base.add_predicate(Predicate::weighted(format!("P{i}"), arity, random_weight(rng), random_weight(rng)))
                .unwrap();
            arities.push(arity);
        }
        let d = rng.gen_range(1..=3);
        let mut clauses = Vec::new();
        let mut extra = 0usize;
        for _ in 0..rng.gen_range(1..=2) {
            let lits: Vec<Literal> = (0..rng.gen_range(0..=1))
                .map(|_| {
                    let p = PredId(rng.gen_range(0..arities.len()));
                    Literal::new(p, random_args(rng, arities[p.0], &["X"], d), rng.gen_bool(0.5))
                })
                .collect();
            let body: Vec<Literal> = (0..rng.gen_range(1..=2))
                .map(|_| {
                    let p = PredId(rng.gen_range(0..arities.len()));
                    Literal::new(p, random_args(rng, arities[p.0], &["X", "Y"], d), rng.gen_bool(0.5))
                })
                .collect();
            let uses_x = lits.iter().chain(&body).any(|l| l.args.contains(&Term::var("X")));
            let k = if uses_x { d as usize } else { 1 };
            // Z and S per universal instance, plus B(X, Y) for longer bodies.
            extra += 2 * k + if body.len() > 1 { k * d as usize } else { 0 };
            clauses.push(QuantifiedClause {
                literals: lits,
                blocks: vec![ExistsBlock {
                    vars: vec!["Y".into()],
                    body,
                }],
            });
        }
        if rng.gen_bool(0.3) {
            let p = PredId(rng.gen_range(0..arities.len()));
            base.add_clause(Clause::new(vec![Literal::new(
                p,
                random_args(rng, arities[p.0], &["X"], d),
                rng.gen_bool(0.5),
            )]))
            .unwrap();
        }
        if atoms_at(&arities, d) + extra <= max_atoms {
            return (QuantifiedSentence { base, clauses }, d);
        }
    }
}

/// An oracle returning the exact projected count scaled by a factor in
/// `[1/(1+eps), 1+eps]`, half the time at an endpoint. Scaled counts are
/// rounded toward the exact one so the tolerance still holds.
pub struct PerturbingOracle {
    pub epsilon: BigRational,
    rng: ChaCha8Rng,
    calls: u64,
}

impl PerturbingOracle {
    pub fn new(epsilon: BigRational, rng: ChaCha8Rng) -> Self {
        PerturbingOracle { epsilon, rng, calls: 0 }
    }

    fn factor(&mut self) -> BigRational {
        let hi = BigRational::one() + &self.epsilon;
        let lo = BigRational::one() / &hi;
        match self.rng.gen_range(0..4) {
            0 => lo,
            1 => hi,
            _ => {
                let t = BigRational::new(BigInt::from(self.rng.gen_range(0..=1000)), BigInt::from(1000));
                &lo + (&hi - &lo) * t
            }
        }
    }
}

impl FomcOracle for PerturbingOracle {
    fn count(&mut self, request: &CountRequest<'_>) -> Result<OracleResult, OracleError> {
        let mut r = count_exact(request, &CounterLimits::default())?;
        let f = self.factor();
        let scaled = BigRational::from_integer(BigInt::from(r.count.clone())) * &f;
        let rounded = if f >= BigRational::one() { scaled.floor() } else { scaled.ceil() };
        r.count = rounded.to_integer().to_biguint().expect("non-negative");
        self.calls += 1;
        r.call_index = self.calls;
        r.exact = false;
        r.epsilon_used = Some(self.epsilon.clone());
        Ok(r)
    }

    fn epsilon(&self) -> Option<BigRational> {
        Some(self.epsilon.clone())
    }

    fn calls(&self) -> u64 {
        self.calls
    }
}

/// Every interpretation of all predicates of `s` satisfying its universal
/// clauses, as bitmasks over `Atoms::new(s.predicates(), d)`.
pub fn satisfying_worlds(s: &Sentence, d: u32) -> (Atoms, Vec<u64>) {
    let atoms = Atoms::new(s.predicates(), d);
    assert!(atoms.len <= 24);
    let mut ground = Vec::new();
    for c in s.clauses() {
        for env in envs(&vars_in(c.literals()), d) {
            ground.push(ground_clause(&atoms, c.literals(), &env));
        }
    }
    let worlds = (0..(1u64 << atoms.len))
        .filter(|&w| ground.iter().all(|&c| clause_holds(w, c)))
        .collect();
    (atoms, worlds)
}

impl Atoms {
    /// Bits of all groundings of predicate `p`.
    pub fn mask_of(&self, p: PredId) -> u64 {
        let n = self.sizes[p.0];
        let block = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        block << self.offsets[p.0]
    }
}
