use crate::fol::{Clause, Literal, Predicate, Role, Sentence, Term, Witness};

use super::EncodeError;

/// `exists vars . l1 & .. & lk`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExistsBlock {
    pub vars: Vec<String>,
    pub body: Vec<Literal>,
}

/// Universally quantified disjunction of literals and existential blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantifiedClause {
    pub literals: Vec<Literal>,
    pub blocks: Vec<ExistsBlock>,
}

/// A sentence whose clauses may contain existential blocks. `base` holds
/// the predicates and any purely universal clauses.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QuantifiedSentence {
    pub base: Sentence,
    pub clauses: Vec<QuantifiedClause>,
}

fn vars_of<'a>(lits: impl IntoIterator<Item = &'a Literal>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for l in lits {
        for v in l.variables() {
            if !out.iter().any(|o| o == v) {
                out.push(v.to_string());
            }
        }
    }
    out
}

/// Removes existential blocks while preserving the weighted count.
///
/// Each block `exists y. B(x, y)` becomes a fresh auxiliary atom `Z(x)` with
/// `B(x,y) -> Z(x)`, `Z(x) v S(x)` and `B(x,y) -> S(x)`, where `S` is a
/// Skolem predicate weighted `(1, -1)`. Interpretations in which `Z(x)`
/// holds without a witness cancel in pairs over `S(x)`. A witness line
/// `Z(x) -> exists y. B(x,y)` is recorded as well; it removes exactly those
/// cancelling interpretations, so the unweighted projected count agrees.
/// Bodies with several literals are first defined by an auxiliary atom.
pub fn skolemize(input: QuantifiedSentence) -> Result<Sentence, EncodeError> {
    let QuantifiedSentence { mut base, clauses } = input;
    for qc in clauses {
        let outer = vars_of(&qc.literals);
        let mut literals = qc.literals;
        for block in qc.blocks {
            if block.body.is_empty() {
                return Err(EncodeError::Unsupported("existential block with an empty body".into()));
            }
            if let Some(v) = block.vars.iter().find(|v| outer.contains(v)) {
                return Err(EncodeError::Unsupported(format!(
                    "existential variable {v} also occurs free in the clause"
                )));
            }
            let body_vars = vars_of(&block.body);
            let bound: Vec<String> = block.vars.iter().filter(|v| body_vars.contains(v)).cloned().collect();
            let free: Vec<String> = body_vars.iter().filter(|v| !bound.contains(v)).cloned().collect();
            let body = if block.body.len() == 1 {
                block.body.into_iter().next().expect("one literal")
            } else {
                define_conjunction(&mut base, &block.body, &body_vars)?
            };
            if bound.is_empty() {
                literals.push(body);
                continue;
            }
            let free_terms: Vec<Term> = free.iter().cloned().map(Term::Var).collect();
            let z_id = base.add_fresh_predicate("Z", Predicate::new("Z", free.len()).with_role(Role::Auxiliary))?;
            let s_id = base.add_fresh_predicate("S", Predicate::skolem("S", free.len()))?;
            let z = Literal::pos(z_id, free_terms.clone());
            let s = Literal::pos(s_id, free_terms);
            base.add_clause(Clause::new(vec![body.negated(), z.clone()]))?;
            base.add_clause(Clause::new(vec![z.clone(), s.clone()]))?;
            base.add_clause(Clause::new(vec![body.negated(), s]))?;
            base.add_witness(Witness {
                head: z.clone(),
                exists: bound,
                body,
            })?;
            literals.push(z);
        }
        base.add_clause(Clause::new(literals))?;
    }
    Ok(base)
}

/// Fresh auxiliary `B(vars) <-> l1 & .. & lk`.
fn define_conjunction(base: &mut Sentence, body: &[Literal], vars: &[String]) -> Result<Literal, EncodeError> {
    let id = base.add_fresh_predicate("B", Predicate::new("B", vars.len()).with_role(Role::Auxiliary))?;
    let b = Literal::pos(id, vars.iter().cloned().map(Term::Var).collect());
    let mut wide = vec![b.clone()];
    for l in body {
        base.add_clause(Clause::new(vec![b.negated(), l.clone()]))?;
        wide.push(l.negated());
    }
    base.add_clause(Clause::new(wide))?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::{ground, PredId};
    use crate::oracle::{count_exact, wmc_bruteforce, CountRequest, CounterLimits};
    use crate::rational::from_u64;

    fn friends() -> (QuantifiedSentence, PredId) {
        let mut base = Sentence::new();
        let f = base.add_predicate(Predicate::new("friends", 2)).unwrap();
        let qs = QuantifiedSentence {
            base,
            clauses: vec![QuantifiedClause {
                literals: vec![],
                blocks: vec![ExistsBlock {
                    vars: vec!["Y".into()],
                    body: vec![Literal::pos(f, vec![Term::var("X"), Term::var("Y")])],
                }],
            }],
        };
        (qs, f)
    }

    #[test]
    fn every_x_has_a_friend() {
        let (qs, _) = friends();
        let s = skolemize(qs).unwrap();
        assert_eq!(wmc_bruteforce(&s, 2).unwrap(), from_u64(9));
        assert_eq!(s.weighted_predicates(), vec![]);
        let gp = ground(&s, 2).unwrap();
        assert_eq!(gp.sampling_set.len(), 4);
        let c = count_exact(&CountRequest::plain(&gp), &CounterLimits::default()).unwrap();
        assert_eq!(c.count, 9u32.into());
    }

    #[test]
    fn no_blocks_is_identity() {
        let mut base = Sentence::new();
        let p = base.add_predicate(Predicate::new("P", 1)).unwrap();
        let qc = QuantifiedClause {
            literals: vec![Literal::pos(p, vec![Term::var("X")])],
            blocks: vec![],
        };
        let mut expected = base.clone();
        expected.add_clause(Clause::new(qc.literals.clone())).unwrap();
        let out = skolemize(QuantifiedSentence { base, clauses: vec![qc] }).unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn conjunctive_body_and_outer_literal() {
        // forall X: !P(X) v exists Y (F(X,Y) & !P(Y))
        let mut base = Sentence::new();
        let p = base.add_predicate(Predicate::new("P", 1)).unwrap();
        let f = base.add_predicate(Predicate::new("F", 2)).unwrap();
        let qs = QuantifiedSentence {
            base,
            clauses: vec![QuantifiedClause {
                literals: vec![Literal::neg(p, vec![Term::var("X")])],
                blocks: vec![ExistsBlock {
                    vars: vec!["Y".into()],
                    body: vec![
                        Literal::pos(f, vec![Term::var("X"), Term::var("Y")]),
                        Literal::neg(p, vec![Term::var("Y")]),
                    ],
                }],
            }],
        };
        let s = skolemize(qs).unwrap();
        // Enumerate directly over P (2 atoms) and F (4 atoms).
        let mut expected = 0u64;
        for m in 0u32..64 {
            let pv = |x: u32| m >> x & 1 == 1;
            let fv = |x: u32, y: u32| m >> (2 + 2 * x + y) & 1 == 1;
            if (0..2).all(|x| !pv(x) || (0..2).any(|y| fv(x, y) && !pv(y))) {
                expected += 1;
            }
        }
        assert_eq!(wmc_bruteforce(&s, 2).unwrap(), from_u64(expected));
        let gp = ground(&s, 2).unwrap();
        let c = count_exact(&CountRequest::plain(&gp), &CounterLimits::default()).unwrap();
        assert_eq!(c.count, expected.into());
    }

    #[test]
    fn shadowing_is_rejected() {
        let (mut qs, f) = friends();
        qs.clauses[0].literals.push(Literal::pos(f, vec![Term::var("Y"), Term::var("Y")]));
        assert!(matches!(skolemize(qs), Err(EncodeError::Unsupported(_))));
    }
}
