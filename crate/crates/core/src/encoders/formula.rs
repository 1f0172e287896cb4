use crate::fol::{Clause, FolError, Literal, Predicate, Role, Sentence, Term};

/// Quantifier-free first-order formula; free variables are read as
/// universally quantified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Lit(Literal),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn negation(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Free variables in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Formula::Lit(l) => {
                for v in l.variables() {
                    if !out.iter().any(|o| o == v) {
                        out.push(v.to_string());
                    }
                }
            }
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_vars(out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Negation normal form using only literals, `And` and `Or`, with nested
    /// connectives of the same kind flattened.
    pub fn nnf(&self) -> Formula {
        self.nnf_signed(true)
    }

    fn nnf_signed(&self, positive: bool) -> Formula {
        match self {
            Formula::Lit(l) => Formula::Lit(if positive { l.clone() } else { l.negated() }),
            Formula::Not(f) => f.nnf_signed(!positive),
            Formula::And(fs) => junction(!positive, fs.iter().map(|f| f.nnf_signed(positive)).collect()),
            Formula::Or(fs) => junction(positive, fs.iter().map(|f| f.nnf_signed(positive)).collect()),
            Formula::Implies(a, b) => {
                if positive {
                    junction(true, vec![a.nnf_signed(false), b.nnf_signed(true)])
                } else {
                    junction(false, vec![a.nnf_signed(true), b.nnf_signed(false)])
                }
            }
            Formula::Iff(a, b) => {
                // (a -> b) & (b -> a), or its negation (a & !b) | (!a & b).
                if positive {
                    junction(
                        false,
                        vec![
                            junction(true, vec![a.nnf_signed(false), b.nnf_signed(true)]),
                            junction(true, vec![a.nnf_signed(true), b.nnf_signed(false)]),
                        ],
                    )
                } else {
                    junction(
                        true,
                        vec![
                            junction(false, vec![a.nnf_signed(true), b.nnf_signed(false)]),
                            junction(false, vec![a.nnf_signed(false), b.nnf_signed(true)]),
                        ],
                    )
                }
            }
        }
    }
}

// Builds a flattened Or (`or = true`) or And.
fn junction(or: bool, parts: Vec<Formula>) -> Formula {
    let mut flat = Vec::with_capacity(parts.len());
    for p in parts {
        match p {
            Formula::Or(inner) if or => flat.extend(inner),
            Formula::And(inner) if !or => flat.extend(inner),
            other => flat.push(other),
        }
    }
    if flat.len() == 1 {
        return flat.pop().expect("one element");
    }
    if or { Formula::Or(flat) } else { Formula::And(flat) }
}

/// Number of clauses plain distribution would produce from an NNF formula,
/// saturating.
pub fn cnf_size(nnf: &Formula) -> u64 {
    match nnf {
        Formula::Lit(_) => 1,
        Formula::And(fs) => fs.iter().map(cnf_size).fold(0u64, u64::saturating_add),
        Formula::Or(fs) => fs.iter().map(cnf_size).fold(1u64, u64::saturating_mul),
        _ => panic!("cnf_size expects negation normal form"),
    }
}

/// CNF of an NNF formula by distribution.
pub fn distribute(nnf: &Formula) -> Vec<Vec<Literal>> {
    match nnf {
        Formula::Lit(l) => vec![vec![l.clone()]],
        Formula::And(fs) => fs.iter().flat_map(distribute).collect(),
        Formula::Or(fs) => {
            let mut acc: Vec<Vec<Literal>> = vec![Vec::new()];
            for f in fs {
                let part = distribute(f);
                let mut next = Vec::with_capacity(acc.len() * part.len());
                for a in &acc {
                    for p in &part {
                        let mut c = a.clone();
                        for l in p {
                            if !c.contains(l) {
                                c.push(l.clone());
                            }
                        }
                        next.push(c);
                    }
                }
                acc = next;
            }
            acc
        }
        _ => panic!("distribute expects negation normal form"),
    }
}

/// Converts formulas to clauses, defining subformulas with fresh auxiliary
/// predicates when distribution would exceed `budget` clauses.
///
/// Definitions are full equivalences, so every auxiliary atom is a function
/// of the original atoms and projected counts are unchanged.
pub struct CnfBuilder<'a> {
    pub sentence: &'a mut Sentence,
    pub budget: u64,
    /// Name stem for auxiliary predicates.
    pub stem: String,
    pub introduced: Vec<crate::fol::PredId>,
}

impl<'a> CnfBuilder<'a> {
    pub fn new(sentence: &'a mut Sentence, budget: u64, stem: impl Into<String>) -> Self {
        CnfBuilder {
            sentence,
            budget,
            stem: stem.into(),
            introduced: Vec::new(),
        }
    }

    /// Clauses equivalent to `f` (over the original atoms) and adds them to
    /// the sentence.
    pub fn add(&mut self, f: &Formula) -> Result<(), FolError> {
        let clauses = self.clauses(&f.nnf())?;
        for c in clauses {
            self.sentence.add_clause(Clause::new(c))?;
        }
        Ok(())
    }

    fn clauses(&mut self, nnf: &Formula) -> Result<Vec<Vec<Literal>>, FolError> {
        if cnf_size(nnf) <= self.budget {
            return Ok(distribute(nnf));
        }
        match nnf {
            Formula::And(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    out.extend(self.clauses(f)?);
                }
                Ok(out)
            }
            Formula::Or(fs) => {
                let mut clause = Vec::with_capacity(fs.len());
                for f in fs {
                    clause.push(self.define(f)?);
                }
                Ok(vec![clause])
            }
            Formula::Lit(l) => Ok(vec![vec![l.clone()]]),
            _ => unreachable!("negation normal form"),
        }
    }

    /// A literal equivalent to `nnf`, introducing a definition if needed.
    fn define(&mut self, nnf: &Formula) -> Result<Literal, FolError> {
        let (or, parts) = match nnf {
            Formula::Lit(l) => return Ok(l.clone()),
            Formula::And(fs) => (false, fs),
            Formula::Or(fs) => (true, fs),
            _ => unreachable!("negation normal form"),
        };
        let mut lits = Vec::with_capacity(parts.len());
        for p in parts {
            lits.push(self.define(p)?);
        }
        let vars = nnf.variables();
        let id = self.sentence.add_fresh_predicate(
            &self.stem,
            Predicate::new(self.stem.clone(), vars.len()).with_role(Role::Auxiliary),
        )?;
        self.introduced.push(id);
        let t = Literal::pos(id, vars.into_iter().map(Term::Var).collect());
        // or:  T <-> l1 v .. v lk     and:  T <-> l1 & .. & lk
        let (big, small_sign) = if or { (t.negated(), t.clone()) } else { (t.clone(), t.negated()) };
        let mut wide = vec![big];
        for l in &lits {
            let lit = if or { l.clone() } else { l.negated() };
            wide.push(lit);
            let short = if or { vec![small_sign.clone(), l.negated()] } else { vec![small_sign.clone(), l.clone()] };
            self.sentence.add_clause(Clause::new(short))?;
        }
        self.sentence.add_clause(Clause::new(wide))?;
        Ok(t)
    }
}
