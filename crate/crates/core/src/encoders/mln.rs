//! Markov logic networks in a small Alchemy-like syntax.
//!
//! ```text
//! // declarations: one implicit type of size d
//! smokes(person)
//! friends(person, person)
//! 1.22  stress(x) => smokes(x)         // log-space weight
//! =3/2  friends(x,y) ^ smokes(x) => smokes(y)   // factor given directly
//! friends(x,x).                        // hard formula
//! ```
//!
//! Connectives by increasing precedence: `<=>`, `=>`, `v` or `|`, `^` or
//! `&`, `!`. Arguments are variables (any identifier) or integer constants.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::formula::{CnfBuilder, Formula};
use super::EncodeError;
use crate::fol::{Literal, ParseError, PredId, Predicate, Role, Sentence, Term};
use crate::rational::{format_decimal, parse_rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleWeight {
    /// `w` with factor `e^w`.
    Log(BigRational),
    /// The factor itself.
    Factor(BigRational),
    Hard,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlnRule {
    pub weight: RuleWeight,
    pub formula: Formula,
    pub line: usize,
}

/// Declared predicates (all neutral) and the weighted formulas over them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MlnProgram {
    pub sentence: Sentence,
    pub rules: Vec<MlnRule>,
}

#[derive(Clone, Debug)]
pub struct MlnOptions {
    /// Significant digits kept when converting `e^w` to a rational.
    pub precision: usize,
    /// Clause count above which subformulas get auxiliary definitions.
    pub tseitin_budget: u64,
}

impl Default for MlnOptions {
    fn default() -> Self {
        MlnOptions {
            precision: 12,
            tseitin_budget: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedRule {
    /// Auxiliary predicate carrying the factor; `None` for hard formulas.
    pub aux: Option<PredId>,
    pub factor: Option<BigRational>,
    /// `|factor - e^w|` when the factor was converted from a log weight.
    pub approximation_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlnEncoding {
    pub sentence: Sentence,
    pub rules: Vec<EncodedRule>,
}

/// `e^w` rounded to `sig` significant digits, and the absolute rounding
/// error.
pub fn exp_rational(w: &BigRational, sig: usize) -> (BigRational, f64) {
    if w.is_zero() {
        return (BigRational::from_integer(1.into()), 0.0);
    }
    let guard = sig as u32 + 30;
    let scale = BigInt::from(10).pow(guard);
    // Halve until |w| / 2^k <= 1/2.
    let mut k = 0u32;
    let half = BigRational::new(1.into(), 2.into());
    let mut x = w.clone();
    while x.abs() > half {
        x /= BigRational::from_integer(2.into());
        k += 1;
    }
    let fixed = (x * BigRational::from_integer(scale.clone())).round().to_integer();
    let mut sum = scale.clone();
    let mut term = scale.clone();
    let mut n = 1u32;
    loop {
        term = &term * &fixed / (&scale * BigInt::from(n));
        if term.is_zero() {
            break;
        }
        sum += &term;
        n += 1;
    }
    for _ in 0..k {
        sum = &sum * &sum / &scale;
    }
    let precise = BigRational::new(sum, scale);
    let rounded = parse_rational(&format_decimal(&precise, sig)).expect("decimal output parses");
    let err = (&rounded - &precise).abs().to_f64().unwrap_or(f64::INFINITY);
    (rounded, err)
}

pub fn parse_mln(text: &str) -> Result<MlnProgram, ParseError> {
    let mut sentence = Sentence::new();
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find("//") {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed = line.trim_end();
        let indent = trimmed.len() - trimmed.trim_start().len();
        let body = trimmed.trim_start();
        if body.is_empty() {
            continue;
        }
        let err = |col: usize, msg: String| ParseError::new(line_no, col, msg);
        if let Some(rest) = body.strip_prefix('=') {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            let value = parse_rational(&rest[..end])
                .ok_or_else(|| err(indent + 2, format!("bad factor '{}'", &rest[..end])))?;
            if value.is_negative() {
                return Err(err(indent + 2, "factor must be non-negative".into()));
            }
            let col = indent + 2 + end;
            let formula = parse_formula(&rest[end..], &sentence, line_no, col)?;
            rules.push(MlnRule {
                weight: RuleWeight::Factor(value),
                formula,
                line: line_no,
            });
            continue;
        }
        let first = body.split_whitespace().next().unwrap_or("");
        if let Some(w) = parse_rational(first) {
            let col = indent + first.len() + 1;
            let formula = parse_formula(&body[first.len()..], &sentence, line_no, col)?;
            rules.push(MlnRule {
                weight: RuleWeight::Log(w),
                formula,
                line: line_no,
            });
            continue;
        }
        if let Some(stripped) = body.strip_suffix('.') {
            let formula = parse_formula(stripped, &sentence, line_no, indent + 1)?;
            rules.push(MlnRule {
                weight: RuleWeight::Hard,
                formula,
                line: line_no,
            });
            continue;
        }
        let (name, arity) = parse_declaration(body).map_err(|m| err(indent + 1, m))?;
        sentence
            .add_predicate(Predicate::new(name, arity))
            .map_err(|e| err(indent + 1, e.to_string()))?;
    }
    Ok(MlnProgram { sentence, rules })
}

fn parse_declaration(text: &str) -> Result<(String, usize), String> {
    let text = text.trim();
    let (name, rest) = match text.find('(') {
        Some(p) => (text[..p].trim(), Some(&text[p + 1..])),
        None => (text, None),
    };
    if !crate::fol::is_identifier(name) {
        return Err(format!("expected a declaration or a weighted formula, found '{text}'"));
    }
    let arity = match rest {
        None => 0,
        Some(r) => {
            let inner = r.trim_end().strip_suffix(')').ok_or("missing ')' in declaration")?;
            if inner.trim().is_empty() {
                0
            } else {
                let types: Vec<&str> = inner.split(',').map(str::trim).collect();
                if let Some(bad) = types.iter().find(|t| !crate::fol::is_identifier(t)) {
                    return Err(format!("bad type name '{bad}'"));
                }
                types.len()
            }
        }
    };
    Ok((name.to_string(), arity))
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(u32),
    LParen,
    RParen,
    Comma,
    Not,
    And,
    Or,
    Implies,
    Iff,
}

fn tokenize(text: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let rest = &text[i..];
        let (tok, len) = if rest.starts_with("<=>") {
            (Tok::Iff, 3)
        } else if rest.starts_with("=>") {
            (Tok::Implies, 2)
        } else {
            match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                ',' => (Tok::Comma, 1),
                '!' => (Tok::Not, 1),
                '^' | '&' => (Tok::And, 1),
                '|' => (Tok::Or, 1),
                _ if c.is_ascii_digit() => {
                    let len = rest.bytes().take_while(u8::is_ascii_digit).count();
                    let v = rest[..len]
                        .parse()
                        .map_err(|_| ParseError::new(line, col, "integer too large".into()))?;
                    (Tok::Int(v), len)
                }
                _ if c.is_ascii_alphabetic() || c == '_' => {
                    let len = rest.bytes().take_while(|b| b.is_ascii_alphanumeric() || *b == b'_').count();
                    let word = &rest[..len];
                    if word == "v" { (Tok::Or, 1) } else { (Tok::Ident(word.to_string()), len) }
                }
                _ => return Err(ParseError::new(line, col, format!("unexpected character '{c}'"))),
            }
        };
        out.push((tok, col));
        i += len;
    }
    Ok(out)
}

struct FormulaParser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sentence: &'a Sentence,
    line: usize,
    end_col: usize,
    vars: HashMap<String, String>,
}

fn parse_formula(text: &str, sentence: &Sentence, line: usize, col0: usize) -> Result<Formula, ParseError> {
    let toks = tokenize(text, line, col0)?;
    let mut p = FormulaParser {
        toks,
        pos: 0,
        sentence,
        line,
        end_col: col0 + text.len(),
        vars: HashMap::new(),
    };
    let f = p.iff()?;
    if let Some((t, col)) = p.toks.get(p.pos) {
        return Err(ParseError::new(line, *col, format!("unexpected {t:?}")));
    }
    Ok(f)
}

impl FormulaParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col(), msg.into())
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {t:?}")))
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.implies()?;
        if self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let rhs = self.iff()?;
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one") } else { Formula::Or(parts) })
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one") } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::negation(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Ident(_)) => self.atom(),
            _ => Err(self.error("expected a formula")),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let col = self.col();
        let Some(Tok::Ident(name)) = self.peek().cloned() else {
            return Err(self.error("expected a predicate"));
        };
        self.pos += 1;
        let id = self
            .sentence
            .find(&name)
            .ok_or_else(|| ParseError::new(self.line, col, format!("undeclared predicate '{name}'")))?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            if self.peek() != Some(&Tok::RParen) {
                loop {
                    args.push(self.term()?);
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
        }
        let arity = self.sentence.predicate(id).arity;
        if arity != args.len() {
            return Err(ParseError::new(
                self.line,
                col,
                format!("'{name}' has arity {arity}, used with {} argument(s)", args.len()),
            ));
        }
        Ok(Formula::Lit(Literal::pos(id, args)))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(0)) => Err(self.error("domain constants start at 1")),
            Some(Tok::Int(c)) => {
                self.pos += 1;
                Ok(Term::Const(c))
            }
            Some(Tok::Ident(v)) => {
                self.pos += 1;
                Ok(Term::Var(self.rename(&v)))
            }
            _ => Err(self.error("expected a variable or constant")),
        }
    }

    // Variables in the native format start with an uppercase letter.
    fn rename(&mut self, v: &str) -> String {
        if let Some(r) = self.vars.get(v) {
            return r.clone();
        }
        let mut chars = v.chars();
        let first = chars.next().expect("non-empty identifier");
        let base = if first == '_' {
            format!("V{v}")
        } else {
            format!("{}{}", first.to_ascii_uppercase(), chars.as_str())
        };
        let mut name = base.clone();
        let mut n = 2;
        while self.vars.values().any(|x| *x == name) {
            name = format!("{base}_{n}");
            n += 1;
        }
        self.vars.insert(v.to_string(), name.clone());
        name
    }
}

/// One auxiliary predicate per soft formula, `A_i(x) <-> phi_i(x)` with
/// weights `(factor_i, 1)`; hard formulas are added as constraints.
/// Declared predicates stay neutral and ordinary.
pub fn encode_mln(program: &MlnProgram, options: &MlnOptions) -> Result<MlnEncoding, EncodeError> {
    let mut sentence = program.sentence.clone();
    let mut encoded = Vec::with_capacity(program.rules.len());
    for (i, rule) in program.rules.iter().enumerate() {
        let (factor, err) = match &rule.weight {
            RuleWeight::Hard => {
                CnfBuilder::new(&mut sentence, options.tseitin_budget, format!("T{}", i + 1)).add(&rule.formula)?;
                encoded.push(EncodedRule {
                    aux: None,
                    factor: None,
                    approximation_error: None,
                });
                continue;
            }
            RuleWeight::Factor(f) => (f.clone(), None),
            RuleWeight::Log(w) => {
                let (f, e) = exp_rational(w, options.precision);
                (f, Some(e))
            }
        };
        let vars = rule.formula.variables();
        let aux = sentence.add_fresh_predicate(
            &format!("A{}", i + 1),
            Predicate::weighted(format!("A{}", i + 1), vars.len(), factor.clone(), BigRational::from_integer(1.into()))
                .with_role(Role::Auxiliary),
        )?;
        let head = Formula::Lit(Literal::pos(aux, vars.into_iter().map(Term::Var).collect()));
        CnfBuilder::new(&mut sentence, options.tseitin_budget, format!("T{}", i + 1))
            .add(&Formula::iff(head, rule.formula.clone()))?;
        encoded.push(EncodedRule {
            aux: Some(aux),
            factor: Some(factor),
            approximation_error: err,
        });
    }
    Ok(MlnEncoding {
        sentence,
        rules: encoded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fol::ground;
    use crate::oracle::{count_exact, wmc_bruteforce, CountRequest, CounterLimits};

    const SMOKERS: &str = "\
// transitive smokers
stress(person)
smokes(person)
friends(person, person)
1.22 stress(x) => smokes(x)
2.08 friends(x,y) ^ smokes(x) => smokes(y)
0.69 friends(x,y) ^ friends(y,z) => friends(x,z)
";

    #[test]
    fn parses_smokers() {
        let p = parse_mln(SMOKERS).unwrap();
        assert_eq!(p.sentence.predicates().len(), 3);
        assert_eq!(p.rules.len(), 3);
        assert_eq!(p.rules[0].weight, RuleWeight::Log(parse_rational("1.22").unwrap()));
        assert_eq!(p.rules[2].formula.variables(), vec!["X", "Y", "Z"]);
    }

    #[test]
    fn encoding_shape() {
        let p = parse_mln(SMOKERS).unwrap();
        let enc = encode_mln(&p, &MlnOptions::default()).unwrap();
        let s = &enc.sentence;
        let weighted: Vec<&str> = s.weighted_predicates().iter().map(|&id| s.predicate(id).name.as_str()).collect();
        assert_eq!(weighted, vec!["A1", "A2", "A3"]);
        assert_eq!(s.predicate(s.find("A2").unwrap()).arity, 2);
        assert_eq!(s.predicate(s.find("A3").unwrap()).arity, 3);
        let f = enc.rules[0].factor.clone().unwrap().to_f64().unwrap();
        assert!((f - 1.22f64.exp()).abs() < 1e-10);
        assert!(enc.rules[0].approximation_error.unwrap() < 1e-11);
        let gp = ground(s, 2).unwrap();
        assert_eq!(gp.sampling_set.len(), 8);
    }

    #[test]
    fn exp_conversion() {
        let (one, e0) = exp_rational(&BigRational::zero(), 12);
        assert_eq!((one, e0), (BigRational::from_integer(1.into()), 0.0));
        let (e, _) = exp_rational(&BigRational::from_integer(1.into()), 12);
        assert_eq!(e, parse_rational("2.71828182846").unwrap());
        let (inv, _) = exp_rational(&parse_rational("-2").unwrap(), 12);
        assert_eq!(inv, parse_rational("0.135335283237").unwrap());
        let (big, _) = exp_rational(&parse_rational("20").unwrap(), 12);
        assert_eq!(big, parse_rational("485165195.410").unwrap());
    }

    #[test]
    fn zero_weight_is_neutral() {
        let p = parse_mln("P(t)\n0 P(x)\n").unwrap();
        let enc = encode_mln(&p, &MlnOptions::default()).unwrap();
        assert!(enc.sentence.weighted_predicates().is_empty());
        assert_eq!(wmc_bruteforce(&enc.sentence, 2).unwrap(), BigRational::from_integer(4.into()));
    }

    #[test]
    fn direct_factor_and_hard_rule() {
        let p = parse_mln("P(t)\nQ\n=3 P(x) v Q\n!Q.\n").unwrap();
        let enc = encode_mln(&p, &MlnOptions::default()).unwrap();
        // Q false: each of the two groundings contributes 3 if P(x) else 1.
        assert_eq!(wmc_bruteforce(&enc.sentence, 2).unwrap(), BigRational::from_integer(16.into()));
    }

    #[test]
    fn zero_ary_rule() {
        let p = parse_mln("Q()\n=1/2 Q\n").unwrap();
        let enc = encode_mln(&p, &MlnOptions::default()).unwrap();
        assert_eq!(enc.sentence.predicate(enc.rules[0].aux.unwrap()).arity, 0);
        assert_eq!(wmc_bruteforce(&enc.sentence, 3).unwrap(), parse_rational("3/2").unwrap());
    }

    #[test]
    fn auxiliaries_are_determined() {
        let p = parse_mln(SMOKERS).unwrap();
        let enc = encode_mln(&p, &MlnOptions::default()).unwrap();
        let gp = ground(&enc.sentence, 2).unwrap();
        let all: Vec<u32> = (1..=gp.num_vars).collect();
        let full = count_exact(
            &CountRequest {
                sampling_set: &all,
                ..CountRequest::plain(&gp)
            },
            &CounterLimits::default(),
        )
        .unwrap();
        assert_eq!(full.count, 256u32.into());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_mln("P(t)\n1.5 P(x) ^ R(x)\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 12));
        let e = parse_mln("P(t)\n1.5 P(x, y)\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 5));
        let e = parse_mln("P(t)\n1.5 P(x) ^\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_mln("P(t)\n=-1 P(x)\n").is_err());
        assert!(parse_mln("P(t)\n1 P(0)\n").is_err());
    }
}
