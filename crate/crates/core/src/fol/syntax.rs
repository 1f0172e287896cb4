use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::FolError;
use crate::rational::format_decimal;

/// Index of a predicate in its sentence's registry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Ordinary,
    /// Introduced by an encoder (rule indicators, Tseitin definitions).
    /// Excluded from the sampling set.
    Auxiliary,
    /// Skolem predicate with weights `(1, -1)`. Always neutral for bound
    /// computation and excluded from the sampling set.
    Skolem,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Ordinary => "ordinary",
            Role::Auxiliary => "auxiliary",
            Role::Skolem => "skolem",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    pub arity: usize,
    /// Weight of a true grounding.
    pub w: BigRational,
    /// Weight of a false grounding.
    pub wbar: BigRational,
    pub role: Role,
}

impl Predicate {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Predicate {
            name: name.into(),
            arity,
            w: BigRational::one(),
            wbar: BigRational::one(),
            role: Role::Ordinary,
        }
    }

    pub fn weighted(name: impl Into<String>, arity: usize, w: BigRational, wbar: BigRational) -> Self {
        Predicate {
            w,
            wbar,
            ..Predicate::new(name, arity)
        }
    }

    pub fn skolem(name: impl Into<String>, arity: usize) -> Self {
        Predicate {
            wbar: -BigRational::one(),
            role: Role::Skolem,
            ..Predicate::new(name, arity)
        }
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// Neutral predicates take no part in the cardinality search.
    pub fn is_neutral(&self) -> bool {
        self.role == Role::Skolem || (self.w.is_one() && self.wbar.is_one())
    }

    fn validate(&self) -> Result<(), FolError> {
        let invalid = |reason: &str| FolError::InvalidWeight {
            predicate: self.name.clone(),
            reason: reason.to_string(),
        };
        match self.role {
            Role::Skolem => {
                if !self.w.is_one() || self.wbar != -BigRational::one() {
                    return Err(invalid("skolem predicates must have w=1 wbar=-1"));
                }
            }
            _ => {
                if self.w.is_negative() || self.wbar.is_negative() {
                    return Err(invalid("negative weights are only allowed on skolem predicates"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// Domain element, 1-based.
    Const(u32),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub pred: PredId,
    pub args: Vec<Term>,
    pub positive: bool,
}

impl Literal {
    pub fn new(pred: PredId, args: Vec<Term>, positive: bool) -> Self {
        Literal { pred, args, positive }
    }

    pub fn pos(pred: PredId, args: Vec<Term>) -> Self {
        Literal::new(pred, args, true)
    }

    pub fn neg(pred: PredId, args: Vec<Term>) -> Self {
        Literal::new(pred, args, false)
    }

    pub fn negated(&self) -> Self {
        Literal {
            positive: !self.positive,
            ..self.clone()
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }
}

/// Disjunction of literals; all variables are implicitly universally
/// quantified.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause(pub Vec<Literal>);

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Self {
        Clause(literals)
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    /// Distinct variables in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        let mut vars: Vec<String> = Vec::new();
        for lit in &self.0 {
            for v in lit.variables() {
                if !vars.iter().any(|x| x == v) {
                    vars.push(v.to_string());
                }
            }
        }
        vars
    }
}

/// Ground-level restriction `head(x) -> OR_y body(x, y)` produced by
/// Skolemization. It removes exactly the model pairs whose signed weights
/// cancel, so the weighted count is unchanged while every auxiliary atom
/// becomes a function of the ordinary ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub head: Literal,
    pub exists: Vec<String>,
    pub body: Literal,
}

impl Witness {
    /// Universally quantified variables: those of head and body not bound by
    /// the existential block, in order of first appearance.
    pub fn universal_variables(&self) -> Vec<String> {
        let mut vars: Vec<String> = Vec::new();
        for v in self.head.variables().chain(self.body.variables()) {
            if !self.exists.iter().any(|e| e == v) && !vars.iter().any(|x| x == v) {
                vars.push(v.to_string());
            }
        }
        vars
    }
}

/// A universally quantified first-order CNF with its predicate registry and
/// symmetric weighting.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    predicates: Vec<Predicate>,
    by_name: HashMap<String, PredId>,
    clauses: Vec<Clause>,
    witnesses: Vec<Witness>,
}

impl Sentence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_predicate(&mut self, predicate: Predicate) -> Result<PredId, FolError> {
        if self.by_name.contains_key(&predicate.name) {
            return Err(FolError::DuplicatePredicate(predicate.name));
        }
        predicate.validate()?;
        let id = PredId(self.predicates.len());
        self.by_name.insert(predicate.name.clone(), id);
        self.predicates.push(predicate);
        Ok(id)
    }

    /// Registers a predicate under a name derived from `base` that does not
    /// collide with any existing one.
    pub fn add_fresh_predicate(&mut self, base: &str, mut predicate: Predicate) -> Result<PredId, FolError> {
        let mut name = base.to_string();
        let mut suffix = 1;
        while self.by_name.contains_key(&name) {
            name = format!("{base}_{suffix}");
            suffix += 1;
        }
        predicate.name = name;
        self.add_predicate(predicate)
    }

    pub fn add_clause(&mut self, clause: Clause) -> Result<(), FolError> {
        for lit in clause.literals() {
            self.check_literal(lit)?;
        }
        self.clauses.push(clause);
        Ok(())
    }

    pub fn add_witness(&mut self, witness: Witness) -> Result<(), FolError> {
        self.check_literal(&witness.head)?;
        self.check_literal(&witness.body)?;
        self.witnesses.push(witness);
        Ok(())
    }

    fn check_literal(&self, lit: &Literal) -> Result<(), FolError> {
        let pred = self
            .predicates
            .get(lit.pred.0)
            .ok_or_else(|| FolError::UnknownPredicate(format!("#{}", lit.pred.0)))?;
        if pred.arity != lit.args.len() {
            return Err(FolError::ArityMismatch {
                predicate: pred.name.clone(),
                expected: pred.arity,
                found: lit.args.len(),
            });
        }
        Ok(())
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    pub fn predicate(&self, id: PredId) -> &Predicate {
        &self.predicates[id.0]
    }

    pub fn predicate_mut_weights(&mut self, id: PredId, w: BigRational, wbar: BigRational) -> Result<(), FolError> {
        let mut updated = self.predicates[id.0].clone();
        updated.w = w;
        updated.wbar = wbar;
        updated.validate()?;
        self.predicates[id.0] = updated;
        Ok(())
    }

    pub fn find(&self, name: &str) -> Option<PredId> {
        self.by_name.get(name).copied()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn witnesses(&self) -> &[Witness] {
        &self.witnesses
    }

    pub fn predicate_ids(&self) -> impl Iterator<Item = PredId> {
        (0..self.predicates.len()).map(PredId)
    }

    /// Non-neutral predicates in registration order.
    pub fn weighted_predicates(&self) -> Vec<PredId> {
        self.predicate_ids()
            .filter(|&id| !self.predicate(id).is_neutral())
            .collect()
    }

    pub fn display_literal(&self, lit: &Literal) -> String {
        let pred = self.predicate(lit.pred);
        let sign = if lit.positive { "" } else { "!" };
        if lit.args.is_empty() {
            format!("{sign}{}", pred.name)
        } else {
            let args: Vec<String> = lit.args.iter().map(Term::to_string).collect();
            format!("{sign}{}({})", pred.name, args.join(","))
        }
    }

    /// Serializes into the native model format; `parse_model` reads it back.
    pub fn to_native(&self, domain: Option<u32>) -> String {
        let mut out = String::new();
        if let Some(d) = domain {
            out.push_str(&format!("domain {d}\n"));
        }
        for p in &self.predicates {
            out.push_str(&format!("predicate {}/{}", p.name, p.arity));
            if !(p.w.is_one() && p.wbar.is_one()) {
                out.push_str(&format!(
                    " w={} wbar={}",
                    native_weight(&p.w),
                    native_weight(&p.wbar)
                ));
            }
            if p.role != Role::Ordinary {
                out.push_str(&format!(" role={}", p.role.as_str()));
            }
            out.push('\n');
        }
        for c in &self.clauses {
            let lits: Vec<String> = c.literals().iter().map(|l| self.display_literal(l)).collect();
            out.push_str(&format!("clause {}\n", lits.join(" ")));
        }
        for w in &self.witnesses {
            out.push_str(&format!(
                "witness {} exists {} {}\n",
                self.display_literal(&w.head),
                w.exists.join(","),
                self.display_literal(&w.body)
            ));
        }
        out
    }
}

fn native_weight(r: &BigRational) -> String {
    let decimal = format_decimal(r, 40);
    match crate::rational::parse_rational(&decimal) {
        Some(back) if &back == r => decimal,
        _ => format!("{}/{}", r.numer(), r.denom()),
    }
}
