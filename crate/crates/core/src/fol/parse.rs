//! Reader for the native model format.
//!
//! ```text
//! # comment
//! domain 6
//! predicate Heads/1 w=0.5 wbar=1
//! predicate Tails/1 w=0.1 wbar=1
//! clause Heads(X) Tails(X)
//! clause !Heads(X) !Tails(X)
//! ```
//!
//! Predicates may carry `role=auxiliary` or `role=skolem`. Encoders also emit
//! `witness <atom> exists <Var>[,<Var>...] <literal>` lines.

use num_rational::BigRational;
use num_traits::One;

use super::syntax::{Clause, Literal, Predicate, Role, Sentence, Term, Witness};
use super::{FolError, ParseError};
use crate::rational::parse_rational;

/// `(line, column, constant)`
type ConstantUse = (usize, usize, u32);

/// A parsed model file: the sentence plus the optional `domain` line.
#[derive(Clone, Debug)]
pub struct ModelFile {
    pub domain: Option<u32>,
    pub sentence: Sentence,
}

pub fn parse_sentence(text: &str) -> Result<Sentence, ParseError> {
    parse_model(text).map(|m| m.sentence)
}

pub fn parse_model(text: &str) -> Result<ModelFile, ParseError> {
    let mut sentence = Sentence::new();
    let mut domain: Option<u32> = None;
    // Constants are checked against the domain once the whole file is read.
    let mut constants: Vec<ConstantUse> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim_start();
        let indent = raw.len() - trimmed.len();
        let line = trimmed.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (keyword, rest) = match line.find(char::is_whitespace) {
            Some(pos) => (&line[..pos], &line[pos..]),
            None => (line, ""),
        };
        let rest_col = indent + keyword.len() + 1;
        let err = |col: usize, msg: String| ParseError::new(line_no, col, msg);
        match keyword {
            "domain" => {
                if domain.is_some() {
                    return Err(err(indent + 1, "duplicate domain line".into()));
                }
                let value = rest.trim();
                let d: u32 = value
                    .parse()
                    .ok()
                    .filter(|&d| d >= 1)
                    .ok_or_else(|| err(rest_col, format!("invalid domain size '{value}'")))?;
                domain = Some(d);
            }
            "predicate" => {
                let pred = parse_predicate_decl(rest, line_no, rest_col)?;
                sentence
                    .add_predicate(pred)
                    .map_err(|e| err(rest_col, e.to_string()))?;
            }
            "clause" => {
                let mut lexer = Lexer::new(rest, line_no, rest_col);
                let mut lits = Vec::new();
                while !lexer.at_end() {
                    let (lit, consts) = lexer.literal(&sentence)?;
                    constants.extend(consts);
                    lits.push(lit);
                }
                if lits.is_empty() {
                    return Err(err(rest_col, "clause needs at least one literal".into()));
                }
                sentence
                    .add_clause(Clause::new(lits))
                    .map_err(|e| err(rest_col, e.to_string()))?;
            }
            "witness" => {
                let mut lexer = Lexer::new(rest, line_no, rest_col);
                let (head, c1) = lexer.literal(&sentence)?;
                lexer.keyword("exists")?;
                let exists = lexer.variable_list()?;
                let (body, c2) = lexer.literal(&sentence)?;
                if !lexer.at_end() {
                    return Err(lexer.error("trailing input after witness body"));
                }
                constants.extend(c1);
                constants.extend(c2);
                sentence
                    .add_witness(Witness { head, exists, body })
                    .map_err(|e| err(rest_col, e.to_string()))?;
            }
            other => return Err(err(indent + 1, format!("unknown directive '{other}'"))),
        }
    }

    if let Some(d) = domain {
        for (line, col, c) in constants {
            if c > d {
                return Err(ParseError::new(line, col, format!("constant {c} outside domain 1..{d}")));
            }
        }
    }
    Ok(ModelFile { domain, sentence })
}

fn parse_predicate_decl(rest: &str, line: usize, col0: usize) -> Result<Predicate, ParseError> {
    let mut tokens = tokens_with_columns(rest, col0);
    let (head, head_col) = tokens
        .next()
        .ok_or_else(|| ParseError::new(line, col0, "expected <name>/<arity>".into()))?;
    let (name, arity) = head
        .split_once('/')
        .ok_or_else(|| ParseError::new(line, head_col, format!("expected <name>/<arity>, found '{head}'")))?;
    if !is_identifier(name) {
        return Err(ParseError::new(line, head_col, format!("invalid predicate name '{name}'")));
    }
    let arity: usize = arity
        .parse()
        .map_err(|_| ParseError::new(line, head_col + name.len() + 1, format!("invalid arity '{arity}'")))?;

    let mut pred = Predicate::new(name, arity);
    for (tok, col) in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| ParseError::new(line, col, format!("expected key=value, found '{tok}'")))?;
        let weight = |v: &str| {
            parse_rational(v).ok_or_else(|| ParseError::new(line, col + key.len() + 1, format!("invalid weight '{v}'")))
        };
        match key {
            "w" => pred.w = weight(value)?,
            "wbar" => pred.wbar = weight(value)?,
            "role" => {
                pred.role = match value {
                    "ordinary" => Role::Ordinary,
                    "auxiliary" | "aux" => Role::Auxiliary,
                    "skolem" => Role::Skolem,
                    _ => return Err(ParseError::new(line, col, format!("unknown role '{value}'"))),
                }
            }
            _ => return Err(ParseError::new(line, col, format!("unknown attribute '{key}'"))),
        }
    }
    if pred.role == Role::Skolem && pred.w.is_one() && pred.wbar.is_one() {
        // `role=skolem` alone implies the canonical (1, -1) weighting.
        pred.wbar = -BigRational::one();
    }
    Ok(pred)
}

fn tokens_with_columns(text: &str, col0: usize) -> impl Iterator<Item = (&str, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((&text[s..i], col0 + s));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((&text[s..], col0 + s));
    }
    out.into_iter()
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    col0: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str, line: usize, col0: usize) -> Self {
        Lexer { text, pos: 0, line, col0 }
    }

    fn column(&self) -> usize {
        self.col0 + self.pos
    }

    fn error(&self, msg: &str) -> ParseError {
        ParseError::new(self.line, self.column(), msg.to_string())
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.text.len()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .char_indices()
            .find(|&(_, c)| !(c.is_ascii_alphanumeric() || c == '_'))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            None
        } else {
            self.pos += len;
            Some(&rest[..len])
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let save = self.pos;
        match self.word() {
            Some(w) if w == kw => Ok(()),
            _ => {
                self.pos = save;
                Err(self.error(&format!("expected '{kw}'")))
            }
        }
    }

    fn variable_list(&mut self) -> Result<Vec<String>, ParseError> {
        let mut vars = Vec::new();
        loop {
            self.skip_ws();
            let col_err = self.error("expected variable");
            match self.word() {
                Some(w) if is_variable_name(w) => vars.push(w.to_string()),
                _ => return Err(col_err),
            }
            if !self.eat(',') {
                break;
            }
        }
        Ok(vars)
    }

    /// Parses `[!]name[(t1,...,tn)]`; returns the literal and the constants it
    /// mentions with their columns.
    fn literal(&mut self, sentence: &Sentence) -> Result<(Literal, Vec<ConstantUse>), ParseError> {
        let positive = !self.eat('!');
        self.skip_ws();
        let name_col = self.column();
        let name = self
            .word()
            .filter(|w| is_identifier(w))
            .ok_or_else(|| ParseError::new(self.line, name_col, "expected predicate name".into()))?;
        let mut args = Vec::new();
        let mut consts = Vec::new();
        if self.eat('(') {
            loop {
                self.skip_ws();
                let col = self.column();
                let tok = self.word().ok_or_else(|| self.error("expected term"))?;
                if is_variable_name(tok) {
                    args.push(Term::Var(tok.to_string()));
                } else if let Ok(c) = tok.parse::<u32>() {
                    if c == 0 {
                        return Err(ParseError::new(self.line, col, "domain constants start at 1".into()));
                    }
                    consts.push((self.line, col, c));
                    args.push(Term::Const(c));
                } else {
                    return Err(ParseError::new(
                        self.line,
                        col,
                        format!("'{tok}' is neither a variable (uppercase initial) nor an integer constant"),
                    ));
                }
                if self.eat(',') {
                    continue;
                }
                if self.eat(')') {
                    break;
                }
                return Err(self.error("expected ',' or ')'"));
            }
        }
        let pred = sentence.find(name).ok_or_else(|| {
            ParseError::new(self.line, name_col, FolError::UnknownPredicate(name.to_string()).to_string())
        })?;
        let arity = sentence.predicate(pred).arity;
        if arity != args.len() {
            return Err(ParseError::new(
                self.line,
                name_col,
                FolError::ArityMismatch {
                    predicate: name.to_string(),
                    expected: arity,
                    found: args.len(),
                }
                .to_string(),
            ));
        }
        Ok((Literal::new(pred, args, positive), consts))
    }
}

fn is_variable_name(s: &str) -> bool {
    matches!(s.chars().next(), Some(c) if c.is_ascii_uppercase() || c == '_') && is_identifier(s)
}
