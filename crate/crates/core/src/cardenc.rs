//! Cardinality constraints on predicate groundings: a totalizer that counts
//! true inputs in unary, and a comparator that clamps the count to an
//! interval.
//!
//! The totalizer is a balanced binary merge tree over the inputs in
//! ascending variable order. Every internal node carries both the upward and
//! downward clauses, so each output is fully determined by the inputs and
//! the auxiliary variables form a dependent support.

use std::fmt;
use std::ops::Range;

use num_traits::ToPrimitive;

use crate::fol::{ground_count, GroundProblem, PredId, Sentence};
use crate::{Lit, Var};

/// Hands out fresh propositional variables above a starting point.
#[derive(Clone, Debug)]
pub struct VarAllocator {
    next: Var,
}

impl VarAllocator {
    /// First fresh variable will be `max_used + 1`.
    pub fn after(max_used: Var) -> Self {
        VarAllocator { next: max_used + 1 }
    }

    pub fn fresh(&mut self) -> Var {
        let v = self.next;
        self.next += 1;
        v
    }

    /// Reserves a contiguous block of `n` variables.
    pub fn reserve(&mut self, n: u32) -> Range<Var> {
        let start = self.next;
        self.next += n;
        start..self.next
    }

    /// Largest variable handed out so far.
    pub fn max_var(&self) -> Var {
        self.next - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalizerEncoding {
    pub clauses: Vec<Vec<Lit>>,
    pub aux_vars: Vec<Var>,
    /// `counter_outputs[k-1]` is true iff at least `k` inputs are true.
    pub counter_outputs: Vec<Var>,
}

pub fn encode_totalizer(inputs: &[Var], alloc: &mut VarAllocator) -> TotalizerEncoding {
    assert!(!inputs.is_empty(), "totalizer needs at least one input");
    let mut sorted = inputs.to_vec();
    sorted.sort_unstable();
    debug_assert!(sorted.windows(2).all(|w| w[0] != w[1]), "inputs must be distinct");

    let block = alloc.reserve(aux_needed(sorted.len()));
    let mut state = Builder {
        next: block.start,
        clauses: Vec::new(),
    };
    let counter_outputs = state.node(&sorted);
    debug_assert_eq!(state.next, block.end);
    TotalizerEncoding {
        clauses: state.clauses,
        aux_vars: block.collect(),
        counter_outputs,
    }
}

fn aux_needed(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        let left = n / 2;
        n as u32 + aux_needed(left) + aux_needed(n - left)
    }
}

struct Builder {
    next: Var,
    clauses: Vec<Vec<Lit>>,
}

impl Builder {
    fn node(&mut self, inputs: &[Var]) -> Vec<Var> {
        if inputs.len() == 1 {
            return inputs.to_vec();
        }
        let (l, r) = inputs.split_at(inputs.len() / 2);
        let a = self.node(l);
        let b = self.node(r);
        let out: Vec<Var> = (0..inputs.len())
            .map(|_| {
                let v = self.next;
                self.next += 1;
                v
            })
            .collect();
        let (p, q) = (a.len(), b.len());
        // a_i & b_j -> out_{i+j}, with a_0 = b_0 = true.
        for i in 0..=p {
            for j in 0..=q {
                if i + j == 0 {
                    continue;
                }
                let mut c = Vec::with_capacity(3);
                if i > 0 {
                    c.push(-(a[i - 1] as Lit));
                }
                if j > 0 {
                    c.push(-(b[j - 1] as Lit));
                }
                c.push(out[i + j - 1] as Lit);
                self.clauses.push(c);
            }
        }
        // !a_{i+1} & !b_{j+1} -> !out_{i+j+1}, with a_{p+1} = b_{q+1} = false.
        for i in 0..=p {
            for j in 0..=q {
                if i + j == p + q {
                    continue;
                }
                let mut c = Vec::with_capacity(3);
                if i < p {
                    c.push(a[i] as Lit);
                }
                if j < q {
                    c.push(b[j] as Lit);
                }
                c.push(-(out[i + j] as Lit));
                self.clauses.push(c);
            }
        }
        out
    }
}

/// Unit clauses forcing `lo <= count <= hi` on a unary counter.
pub fn encode_comparator(counter_outputs: &[Var], lo: usize, hi: usize) -> Vec<Vec<Lit>> {
    let n = counter_outputs.len();
    assert!(lo <= hi && hi <= n, "comparator bounds must satisfy 0 <= lo <= hi <= n");
    let mut clauses = Vec::new();
    if lo >= 1 {
        clauses.push(vec![counter_outputs[lo - 1] as Lit]);
    }
    if hi < n {
        clauses.push(vec![-(counter_outputs[hi] as Lit)]);
    }
    clauses
}

/// Closed interval on the number of true groundings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: u64,
    pub hi: u64,
}

impl Interval {
    pub fn new(lo: u64, hi: u64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }
}

/// Per-predicate intervals on true-grounding counts, in predicate
/// registration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CardinalityBox {
    bounds: Vec<(PredId, Interval)>,
}

impl CardinalityBox {
    pub fn new(mut bounds: Vec<(PredId, Interval)>) -> Self {
        bounds.sort_by_key(|(p, _)| *p);
        CardinalityBox { bounds }
    }

    /// `{P -> (0, d^arity(P))}` for every weighted predicate.
    pub fn full(sentence: &Sentence, d: u32) -> Self {
        CardinalityBox::new(
            sentence
                .weighted_predicates()
                .into_iter()
                .map(|p| (p, Interval::new(0, grounding_count(sentence, p, d))))
                .collect(),
        )
    }

    pub fn bounds(&self) -> &[(PredId, Interval)] {
        &self.bounds
    }

    pub fn get(&self, pred: PredId) -> Option<Interval> {
        self.bounds.iter().find(|(p, _)| *p == pred).map(|(_, i)| *i)
    }

    pub fn is_all_singleton(&self) -> bool {
        self.bounds.iter().all(|(_, i)| i.is_singleton())
    }

    pub fn display<'a>(&'a self, sentence: &'a Sentence) -> impl fmt::Display + 'a {
        BoxDisplay { b: self, sentence }
    }
}

struct BoxDisplay<'a> {
    b: &'a CardinalityBox,
    sentence: &'a Sentence,
}

impl fmt::Display for BoxDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (p, iv)) in self.b.bounds.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} -> ({}, {})", self.sentence.predicate(*p).name, iv.lo, iv.hi)?;
        }
        f.write_str("}")
    }
}

pub(crate) fn grounding_count(sentence: &Sentence, p: PredId, d: u32) -> u64 {
    ground_count(sentence.predicate(p), d)
        .to_u64()
        .expect("grounding count fits in 64 bits once grounded")
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoxEncoding {
    pub clauses: Vec<Vec<Lit>>,
    pub aux_vars: Vec<Var>,
}

/// Clauses restricting the models of `gp` to the box. Intervals that span
/// the whole range are left unencoded.
pub fn encode_box(gp: &GroundProblem, b: &CardinalityBox, alloc: &mut VarAllocator) -> BoxEncoding {
    let mut out = BoxEncoding::default();
    for (pred, iv) in b.bounds() {
        let inputs: Vec<Var> = gp.atom_table.vars_of(*pred).collect();
        let n = inputs.len() as u64;
        assert!(iv.hi <= n, "interval exceeds the number of groundings");
        if iv.lo == 0 && iv.hi == n {
            continue;
        }
        let tot = encode_totalizer(&inputs, alloc);
        out.clauses.extend(tot.clauses);
        out.clauses
            .extend(encode_comparator(&tot.counter_outputs, iv.lo as usize, iv.hi as usize));
        out.aux_vars.extend(tot.aux_vars);
    }
    out
}
