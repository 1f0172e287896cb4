//! Tight, function-free ProbLog programs.
//!
//! ```text
//! % comment
//! 0.1::Attends(X).
//! 0.3::ToSeries(X).
//! Series :- Attends(X), ToSeries(X).
//! query(Series).
//! ```
//!
//! Probabilistic facts must be schematic (distinct variables as arguments)
//! so every grounding shares one probability. Negation is `\+`.

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::skolem::{skolemize, ExistsBlock, QuantifiedClause, QuantifiedSentence};
use super::EncodeError;
use crate::fol::{Clause, Literal, ParseError, PredId, Predicate, Sentence, Term};
use crate::rational::parse_rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub name: String,
    pub args: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbFact {
    pub prob: BigRational,
    pub atom: Atom,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub head: Atom,
    /// `(atom, positive)`
    pub body: Vec<(Atom, bool)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProblogProgram {
    pub facts: Vec<ProbFact>,
    pub rules: Vec<Rule>,
    pub queries: Vec<Atom>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblogEncoding {
    pub sentence: Sentence,
    pub fact_predicates: Vec<PredId>,
    pub derived_predicates: Vec<PredId>,
    /// Ground query atoms as literals.
    pub queries: Vec<Literal>,
}

impl ProblogEncoding {
    /// The encoding conjoined with the query literal.
    pub fn with_evidence(&self, query: &Literal) -> Sentence {
        let mut s = self.sentence.clone();
        s.add_clause(Clause::new(vec![query.clone()])).expect("query literal is well formed");
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    ProbSep,
    Naf,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let src = match raw.find('%') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let b = src.as_bytes();
        let mut i = 0;
        while i < b.len() {
            let c = b[i] as char;
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let rest = &src[i..];
            let (tok, len) = if rest.starts_with(":-") {
                (Tok::Neck, 2)
            } else if rest.starts_with("::") {
                (Tok::ProbSep, 2)
            } else if rest.starts_with("\\+") {
                (Tok::Naf, 2)
            } else if c.is_ascii_digit() {
                let mut len = rest.bytes().take_while(u8::is_ascii_digit).count();
                if rest[len..].starts_with('.') && rest[len + 1..].starts_with(|ch: char| ch.is_ascii_digit()) {
                    len += 1 + rest[len + 1..].bytes().take_while(u8::is_ascii_digit).count();
                }
                if rest[len..].starts_with(['e', 'E']) {
                    let tail = &rest[len + 1..];
                    let sign = usize::from(tail.starts_with(['+', '-']));
                    let digits = tail[sign..].bytes().take_while(u8::is_ascii_digit).count();
                    if digits > 0 {
                        len += 1 + sign + digits;
                    }
                }
                (Tok::Number(rest[..len].to_string()), len)
            } else if c.is_ascii_alphabetic() || c == '_' {
                let len = rest.bytes().take_while(|x| x.is_ascii_alphanumeric() || *x == b'_').count();
                (Tok::Ident(rest[..len].to_string()), len)
            } else {
                match c {
                    '(' => (Tok::LParen, 1),
                    ')' => (Tok::RParen, 1),
                    ',' => (Tok::Comma, 1),
                    '.' => (Tok::Dot, 1),
                    _ => return Err(ParseError::new(line, col, format!("unexpected character '{c}'"))),
                }
            };
            out.push((tok, line, col));
            i += len;
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = match self.toks.get(self.pos) {
            Some((_, l, c)) => (*l, *c),
            None => self.toks.last().map(|(_, l, c)| (*l, *c + 1)).unwrap_or((1, 1)),
        };
        ParseError::new(line, col, msg.into())
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let Some(Tok::Ident(name)) = self.peek().cloned() else {
            return Err(self.error("expected an atom"));
        };
        self.pos += 1;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            loop {
                let term = match self.peek().cloned() {
                    Some(Tok::Ident(v)) if v.starts_with(|c: char| c.is_ascii_uppercase() || c == '_') => Term::Var(v),
                    Some(Tok::Number(n)) => match n.parse::<u32>() {
                        Ok(c) if c >= 1 => Term::Const(c),
                        _ => return Err(self.error("constants are integers from 1")),
                    },
                    Some(Tok::Ident(_)) => {
                        return Err(self.error("symbolic constants are not supported; use integers 1..d"))
                    }
                    _ => return Err(self.error("expected a term")),
                };
                self.pos += 1;
                args.push(term);
                match self.peek() {
                    Some(Tok::Comma) => self.pos += 1,
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.error("expected ',' or ')'")),
                }
            }
        }
        Ok(Atom { name, args })
    }
}

pub fn parse_problog(text: &str) -> Result<ProblogProgram, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let mut prog = ProblogProgram::default();
    while p.peek().is_some() {
        if let Some(Tok::Number(n)) = p.peek().cloned() {
            let prob = parse_rational(&n).ok_or_else(|| p.error("bad probability"))?;
            if prob.is_negative() || prob > BigRational::one() {
                return Err(p.error("probability must lie in [0, 1]"));
            }
            p.pos += 1;
            p.expect(Tok::ProbSep, "'::'")?;
            let atom = p.atom()?;
            p.expect(Tok::Dot, "'.'")?;
            prog.facts.push(ProbFact { prob, atom });
            continue;
        }
        if p.peek() == Some(&Tok::Ident("query".into())) && p.toks.get(p.pos + 1).map(|t| &t.0) == Some(&Tok::LParen) {
            p.pos += 2;
            let q = p.atom()?;
            p.expect(Tok::RParen, "')'")?;
            p.expect(Tok::Dot, "'.'")?;
            prog.queries.push(q);
            continue;
        }
        let head = p.atom()?;
        match p.peek() {
            Some(Tok::Dot) => {
                p.pos += 1;
                prog.facts.push(ProbFact {
                    prob: BigRational::one(),
                    atom: head,
                });
            }
            Some(Tok::Neck) => {
                p.pos += 1;
                let mut body = Vec::new();
                loop {
                    let positive = if p.peek() == Some(&Tok::Naf) {
                        p.pos += 1;
                        false
                    } else {
                        true
                    };
                    body.push((p.atom()?, positive));
                    match p.peek() {
                        Some(Tok::Comma) => p.pos += 1,
                        Some(Tok::Dot) => {
                            p.pos += 1;
                            break;
                        }
                        _ => return Err(p.error("expected ',' or '.'")),
                    }
                }
                prog.rules.push(Rule { head, body });
            }
            _ => return Err(p.error("expected '.' or ':-'")),
        }
    }
    Ok(prog)
}

fn distinct_vars(args: &[Term]) -> Option<Vec<String>> {
    let mut out = Vec::with_capacity(args.len());
    for a in args {
        match a {
            Term::Var(v) if !out.contains(v) => out.push(v.clone()),
            _ => return None,
        }
    }
    Some(out)
}

/// Clark completion of the rules, Skolemized; fact predicates weighted
/// `(p, 1 - p)`, everything else neutral.
pub fn encode_problog(prog: &ProblogProgram) -> Result<ProblogEncoding, EncodeError> {
    // Predicates in order of first appearance.
    let mut arity: Vec<(String, usize)> = Vec::new();
    let mut note = |a: &Atom| -> Result<(), EncodeError> {
        match arity.iter().find(|(n, _)| *n == a.name) {
            Some((_, k)) if *k != a.args.len() => Err(EncodeError::Unsupported(format!(
                "predicate {} used with arities {} and {}",
                a.name,
                k,
                a.args.len()
            ))),
            Some(_) => Ok(()),
            None => {
                arity.push((a.name.clone(), a.args.len()));
                Ok(())
            }
        }
    };
    for f in &prog.facts {
        note(&f.atom)?;
    }
    for r in &prog.rules {
        note(&r.head)?;
        for (a, _) in &r.body {
            note(a)?;
        }
    }
    for q in &prog.queries {
        note(q)?;
    }

    let mut prob: HashMap<String, BigRational> = HashMap::new();
    for f in &prog.facts {
        if distinct_vars(&f.atom.args).is_none() {
            return Err(EncodeError::Unsupported(format!(
                "fact {} must have distinct variables as arguments",
                f.atom.name
            )));
        }
        if prob.insert(f.atom.name.clone(), f.prob.clone()).is_some() {
            return Err(EncodeError::Unsupported(format!("predicate {} has several facts", f.atom.name)));
        }
    }
    for r in &prog.rules {
        if prob.contains_key(&r.head.name) {
            return Err(EncodeError::FactHead(r.head.name.clone()));
        }
        if distinct_vars(&r.head.args).is_none() {
            return Err(EncodeError::Unsupported(format!(
                "rule head {} must have distinct variables as arguments",
                r.head.name
            )));
        }
    }
    check_tight(prog, &prob)?;

    let mut base = Sentence::new();
    let mut ids: HashMap<String, PredId> = HashMap::new();
    let mut fact_predicates = Vec::new();
    let mut derived_predicates = Vec::new();
    for (name, k) in &arity {
        let pred = match prob.get(name) {
            Some(p) => Predicate::weighted(name.clone(), *k, p.clone(), BigRational::one() - p),
            None => Predicate::new(name.clone(), *k),
        };
        let id = base.add_predicate(pred)?;
        ids.insert(name.clone(), id);
        if prob.contains_key(name) {
            fact_predicates.push(id);
        } else {
            derived_predicates.push(id);
        }
    }

    let mut clauses = Vec::new();
    for &h in &derived_predicates {
        let name = base.predicate(h).name.clone();
        let k = base.predicate(h).arity;
        let head_vars: Vec<String> = (1..=k).map(|i| format!("X{i}")).collect();
        let head = Literal::pos(h, head_vars.iter().cloned().map(Term::Var).collect());
        let mut blocks = Vec::new();
        let mut plain = Vec::new();
        for r in prog.rules.iter().filter(|r| r.head.name == name) {
            let original = distinct_vars(&r.head.args).expect("checked");
            let mut rename: HashMap<String, String> = original.iter().cloned().zip(head_vars.iter().cloned()).collect();
            let mut exists = Vec::new();
            let mut body = Vec::new();
            for (a, positive) in &r.body {
                let args = a
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Var(v) => {
                            let n = rename.len() - original.len() + 1;
                            let fresh = rename.entry(v.clone()).or_insert_with(|| {
                                let y = format!("Y{n}");
                                exists.push(y.clone());
                                y
                            });
                            Term::Var(fresh.clone())
                        }
                        c => c.clone(),
                    })
                    .collect();
                body.push(Literal::new(ids[&a.name], args, *positive));
            }
            // body -> head
            let mut support: Vec<Literal> = body.iter().map(Literal::negated).collect();
            support.push(head.clone());
            clauses.push(QuantifiedClause {
                literals: support,
                blocks: vec![],
            });
            if exists.is_empty() && body.len() == 1 {
                plain.push(body.pop().expect("one"));
            } else {
                blocks.push(ExistsBlock { vars: exists, body });
            }
        }
        // head -> some body
        let mut literals = vec![head.negated()];
        literals.extend(plain);
        clauses.push(QuantifiedClause { literals, blocks });
    }
    let sentence = skolemize(QuantifiedSentence { base, clauses })?;

    let mut queries = Vec::new();
    for q in &prog.queries {
        if q.args.iter().any(|t| matches!(t, Term::Var(_))) {
            return Err(EncodeError::Unsupported(format!("query {} must be ground", q.name)));
        }
        queries.push(Literal::pos(ids[&q.name], q.args.clone()));
    }
    Ok(ProblogEncoding {
        sentence,
        fact_predicates,
        derived_predicates,
        queries,
    })
}

fn check_tight(prog: &ProblogProgram, facts: &HashMap<String, BigRational>) -> Result<(), EncodeError> {
    let mut edges: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for r in &prog.rules {
        for (a, _) in &r.body {
            if !facts.contains_key(&a.name) {
                edges.entry(r.head.name.as_str()).or_default().insert(a.name.as_str());
            }
        }
    }
    // 0 unvisited, 1 on stack, 2 done.
    fn visit<'a>(
        n: &'a str,
        edges: &HashMap<&'a str, BTreeSet<&'a str>>,
        state: &mut HashMap<&'a str, u8>,
    ) -> Result<(), String> {
        match state.get(n).copied().unwrap_or(0) {
            1 => return Err(n.to_string()),
            2 => return Ok(()),
            _ => {}
        }
        state.insert(n, 1);
        if let Some(next) = edges.get(n) {
            for m in next {
                visit(m, edges, state)?;
            }
        }
        state.insert(n, 2);
        Ok(())
    }
    let mut state = HashMap::new();
    let mut heads: Vec<&str> = edges.keys().copied().collect();
    heads.sort();
    for h in heads {
        visit(h, &edges, &mut state).map_err(|p| EncodeError::NotTight(format!("cycle through {p}")))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::Role;
    use crate::oracle::wmc_bruteforce;

    const CONFERENCE: &str = "\
% conference
0.1::Attends(X).
0.3::ToSeries(X).
Series :- Attends(X), ToSeries(X).
query(Series).
";

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_conference() {
        let p = parse_problog(CONFERENCE).unwrap();
        assert_eq!(p.facts.len(), 2);
        assert_eq!(p.facts[0].prob, q("0.1"));
        assert_eq!(p.rules.len(), 1);
        assert_eq!(p.rules[0].body.len(), 2);
        assert_eq!(p.queries, vec![Atom { name: "Series".into(), args: vec![] }]);
    }

    #[test]
    fn conference_query_probability() {
        let enc = encode_problog(&parse_problog(CONFERENCE).unwrap()).unwrap();
        let s = &enc.sentence;
        let roles: Vec<Role> = s.predicates().iter().map(|p| p.role).collect();
        assert!(roles.contains(&Role::Skolem));
        let names: Vec<&str> = s.weighted_predicates().iter().map(|&id| s.predicate(id).name.as_str()).collect();
        assert_eq!(names, vec!["Attends", "ToSeries"]);
        for (d, expected) in [(1u32, "0.03"), (2, "0.0591")] {
            let z = wmc_bruteforce(s, d).unwrap();
            assert_eq!(z, q("1"));
            let zq = wmc_bruteforce(&enc.with_evidence(&enc.queries[0]), d).unwrap();
            assert_eq!(zq / z, q(expected));
        }
    }

    #[test]
    fn negation_and_deterministic_facts() {
        let text = "1.0::a.\n0.25::b(X).\nc(X) :- \\+ b(X).\nd :- a, c(1).\nquery(d).\n";
        let enc = encode_problog(&parse_problog(text).unwrap()).unwrap();
        let s = &enc.sentence;
        let a = s.predicate(s.find("a").unwrap());
        assert_eq!((a.w.clone(), a.wbar.clone()), (q("1"), q("0")));
        let z = wmc_bruteforce(s, 2).unwrap();
        let zq = wmc_bruteforce(&enc.with_evidence(&enc.queries[0]), 2).unwrap();
        assert_eq!(zq / z, q("0.75"));
    }

    #[test]
    fn several_rules_for_one_head() {
        let text = "0.5::e(X,Y).\n0.2::s(X).\nr(X) :- s(X).\nr(X) :- e(X,Y), s(Y).\n";
        let enc = encode_problog(&parse_problog(text).unwrap()).unwrap();
        // Completion fixes r; the weighted count over facts is 1.
        assert_eq!(wmc_bruteforce(&enc.sentence, 2).unwrap(), q("1"));
    }

    #[test]
    fn rejections() {
        let cyclic = "0.5::e(X).\np(X) :- q(X).\nq(X) :- p(X).\n";
        assert!(matches!(
            encode_problog(&parse_problog(cyclic).unwrap()),
            Err(EncodeError::NotTight(_))
        ));
        let fact_head = "0.5::e(X).\ne(X) :- e(X).\n";
        assert!(matches!(
            encode_problog(&parse_problog(fact_head).unwrap()),
            Err(EncodeError::FactHead(_))
        ));
        assert!(parse_problog("1.5::e(X).\n").is_err());
        assert!(parse_problog("0.5::e(bob).\n").is_err());
        let e = parse_problog("0.5::e(X)\np :- e(1).").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
    }
}
