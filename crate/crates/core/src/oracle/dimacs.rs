use std::io::{self, Write};

use super::{CountRequest, OracleError};
use crate::{Lit, Var};

/// Writes a request as DIMACS CNF, with the sampling set as `c ind` lines
/// (at most ten ids each) before the header.
pub fn write_dimacs<W: Write>(request: &CountRequest<'_>, sink: &mut W) -> io::Result<()> {
    write_dimacs_raw(request.num_vars, request.clauses(), request.num_clauses(), request.sampling_set, sink)
}

pub fn write_dimacs_raw<'a, W: Write>(
    num_vars: u32,
    clauses: impl IntoIterator<Item = &'a Vec<Lit>>,
    num_clauses: usize,
    sampling_set: &[Var],
    sink: &mut W,
) -> io::Result<()> {
    let mut out = io::BufWriter::new(sink);
    if sampling_set.is_empty() {
        writeln!(out, "c ind 0")?;
    }
    for chunk in sampling_set.chunks(10) {
        write!(out, "c ind")?;
        for v in chunk {
            write!(out, " {v}")?;
        }
        writeln!(out, " 0")?;
    }
    writeln!(out, "p cnf {num_vars} {num_clauses}")?;
    let mut written = 0;
    for c in clauses {
        for l in c {
            write!(out, "{l} ")?;
        }
        writeln!(out, "0")?;
        written += 1;
    }
    debug_assert_eq!(written, num_clauses);
    out.flush()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimacsInstance {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    /// `None` when the file carries no `c ind` lines.
    pub sampling_set: Option<Vec<Var>>,
}

pub fn read_dimacs(text: &str) -> Result<DimacsInstance, OracleError> {
    let bad = |line: usize, msg: &str| OracleError::InvalidInstance(format!("line {}: {msg}", line + 1));
    let mut header: Option<(u32, usize)> = None;
    let mut sampling: Option<Vec<Var>> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            let mut toks = rest.split_whitespace();
            if toks.next() == Some("ind") {
                let set = sampling.get_or_insert_with(Vec::new);
                for t in toks {
                    let v: Var = t.parse().map_err(|_| bad(no, "bad sampling id"))?;
                    if v == 0 {
                        break;
                    }
                    set.push(v);
                }
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("p ") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 3 || toks[0] != "cnf" || header.is_some() {
                return Err(bad(no, "malformed header"));
            }
            let nv = toks[1].parse().map_err(|_| bad(no, "bad variable count"))?;
            let nc = toks[2].parse().map_err(|_| bad(no, "bad clause count"))?;
            header = Some((nv, nc));
            continue;
        }
        let (nv, _) = header.ok_or_else(|| bad(no, "clause before header"))?;
        for t in line.split_whitespace() {
            let l: Lit = t.parse().map_err(|_| bad(no, "bad literal"))?;
            if l == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if l.unsigned_abs() > nv {
                return Err(bad(no, "literal exceeds declared variable count"));
            } else {
                current.push(l);
            }
        }
    }
    let (num_vars, nc) = header.ok_or_else(|| OracleError::InvalidInstance("missing header".into()))?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != nc {
        return Err(OracleError::InvalidInstance(format!(
            "header declares {nc} clauses, found {}",
            clauses.len()
        )));
    }
    if let Some(s) = &sampling {
        if let Some(v) = s.iter().find(|&&v| v > num_vars) {
            return Err(OracleError::InvalidInstance(format!("sampling id {v} exceeds variable count")));
        }
    }
    Ok(DimacsInstance {
        num_vars,
        clauses,
        sampling_set: sampling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(num_vars: u32, clauses: &[Vec<Lit>], sampling: &[Var]) -> String {
        let mut buf = Vec::new();
        write_dimacs_raw(num_vars, clauses, clauses.len(), sampling, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn minimal_golden() {
        assert_eq!(render(1, &[vec![1]], &[1]), "c ind 1 0\np cnf 1 1\n1 0\n");
    }

    #[test]
    fn sampling_lines_are_chunked() {
        let s: Vec<Var> = (1..=12).collect();
        let text = render(12, &[], &s);
        assert_eq!(text, "c ind 1 2 3 4 5 6 7 8 9 10 0\nc ind 11 12 0\np cnf 12 0\n");
    }

    #[test]
    fn round_trip() {
        let clauses = vec![vec![1, -2], vec![3], vec![-1, 2, -3]];
        let text = render(3, &clauses, &[1, 3]);
        let inst = read_dimacs(&text).unwrap();
        assert_eq!(inst.num_vars, 3);
        assert_eq!(inst.clauses, clauses);
        assert_eq!(inst.sampling_set, Some(vec![1, 3]));
    }

    #[test]
    fn reader_rejects_garbage() {
        assert!(read_dimacs("1 0\n").is_err());
        assert!(read_dimacs("p cnf 1 2\n1 0\n").is_err());
        assert!(read_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert_eq!(read_dimacs("p cnf 2 1\n1 -2 0\n").unwrap().sampling_set, None);
    }
}
