use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{write_dimacs, CountRequest, DeltaLedger, FomcOracle, OracleError, OracleResult};

type OutputParser = fn(&str) -> Option<BigUint>;

/// Recognized result lines, tried in order on every stdout line.
const PARSERS: &[(&str, OutputParser)] = &[
    ("s mc", parse_s_mc),
    ("s pmc", parse_s_pmc),
    ("legacy", parse_legacy),
];

fn parse_s_mc(line: &str) -> Option<BigUint> {
    line.strip_prefix("s mc ")?.trim().parse().ok()
}

fn parse_s_pmc(line: &str) -> Option<BigUint> {
    line.strip_prefix("s pmc ")?.trim().parse().ok()
}

// "Number of solutions is: 24*2**3" and the "^" variant.
fn parse_legacy(line: &str) -> Option<BigUint> {
    let rest = line.trim().strip_prefix("Number of solutions is:")?.trim();
    let (a, b) = rest.split_once('*')?;
    let b = b.trim_start_matches('*').trim();
    let exp = b.strip_prefix("2^").or_else(|| b.strip_prefix("2**")).or_else(|| b.strip_prefix("2 ** "))?;
    let a: BigUint = a.trim().parse().ok()?;
    let e: u32 = exp.trim().parse().ok()?;
    Some(a << e)
}

/// Extracts the count from a counter's standard output.
pub fn parse_counter_output(stdout: &str) -> Result<BigUint, OracleError> {
    for line in stdout.lines() {
        let line = line.trim();
        if line == "s UNSATISFIABLE" {
            return Ok(BigUint::zero());
        }
        for (_, parse) in PARSERS {
            if let Some(c) = parse(line) {
                return Ok(c);
            }
        }
    }
    let tail: String = stdout.lines().rev().take(3).collect::<Vec<_>>().join(" | ");
    Err(OracleError::UnparsableOutput(format!("no result line found (last lines: {tail})")))
}

/// Largest decimal with at most `sig` significant digits not exceeding `r`.
fn decimal_floor(r: &BigRational, sig: u32) -> String {
    if !r.is_positive() {
        return "0".into();
    }
    let ten = BigInt::from(10);
    // Scale into [10^(sig-1), 10^sig).
    let mut k: i64 = 0;
    let mut scaled = r.clone();
    let lo = BigRational::from_integer(ten.pow(sig - 1));
    let hi = BigRational::from_integer(ten.pow(sig));
    while scaled < lo {
        scaled *= BigRational::from_integer(ten.clone());
        k += 1;
    }
    while scaled >= hi {
        scaled /= BigRational::from_integer(ten.clone());
        k -= 1;
    }
    let mut digits = scaled.floor().to_integer();
    // Trim trailing zeros.
    while k > 0 && digits.is_multiple_of(&ten) {
        digits /= &ten;
        k -= 1;
    }
    if k <= 0 {
        return (digits * ten.pow((-k) as u32)).to_string();
    }
    let s = digits.to_string();
    let k = k as usize;
    if s.len() > k {
        format!("{}.{}", &s[..s.len() - k], &s[s.len() - k..])
    } else {
        format!("0.{}{}", "0".repeat(k - s.len()), s)
    }
}

/// Runs the external counter once on `request`.
///
/// Invocation: `<path> --seed N --epsilon E --delta D <file.cnf>`; the count
/// is read from standard output. `epsilon` and `delta` are passed rounded
/// down to 15 significant digits.
pub fn count_external(
    request: &CountRequest<'_>,
    path: &Path,
    epsilon: &BigRational,
    delta: &BigRational,
    seed: u64,
    timeout: Option<Duration>,
) -> Result<BigUint, OracleError> {
    let mut file = tempfile::Builder::new().prefix("wfomc-").suffix(".cnf").tempfile()?;
    write_dimacs(request, file.as_file_mut())?;
    let mut child = Command::new(path)
        .arg("--seed")
        .arg(seed.to_string())
        .arg("--epsilon")
        .arg(decimal_floor(epsilon, 15))
        .arg("--delta")
        .arg(decimal_floor(delta, 15))
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| OracleError::Io(format!("cannot start {}: {e}", path.display())))?;
    let mut stdout = child.stdout.take().expect("piped");
    let mut stderr = child.stderr.take().expect("piped");
    let out_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let err_reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let start = Instant::now();
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if let Some(limit) = timeout {
            if start.elapsed() > limit {
                let _ = child.kill();
                let _ = child.wait();
                return Err(OracleError::Timeout(limit));
            }
        }
        std::thread::sleep(Duration::from_millis(2));
    };
    let out = out_reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    if !status.success() {
        return Err(OracleError::SubprocessFailed {
            status: status.to_string(),
            stderr: err.trim().chars().take(400).collect(),
        });
    }
    parse_counter_output(&out)
}

/// Approximate counter run as a subprocess, with per-call confidence drawn
/// from a ledger. A failed call is refunded and retried once.
#[derive(Debug)]
pub struct ExternalOracle {
    pub path: PathBuf,
    pub epsilon: BigRational,
    pub seed: u64,
    pub timeout: Option<Duration>,
    pub retries: u32,
    ledger: DeltaLedger,
    calls: u64,
}

impl ExternalOracle {
    pub fn new(path: PathBuf, epsilon: BigRational, ledger: DeltaLedger) -> Self {
        ExternalOracle {
            path,
            epsilon,
            seed: 0,
            timeout: None,
            retries: 1,
            ledger,
            calls: 0,
        }
    }

    pub fn ledger(&self) -> &DeltaLedger {
        &self.ledger
    }
}

impl FomcOracle for ExternalOracle {
    fn count(&mut self, request: &CountRequest<'_>) -> Result<OracleResult, OracleError> {
        let mut attempt = 0;
        loop {
            let delta = self.ledger.next_delta()?;
            let start = Instant::now();
            // Each attempt gets its own seed so a retry is not a replay.
            let seed = self.seed.wrapping_add(self.ledger.calls_made());
            match count_external(request, &self.path, &self.epsilon, &delta, seed, self.timeout) {
                Ok(count) => {
                    self.calls += 1;
                    return Ok(OracleResult {
                        count,
                        exact: false,
                        epsilon_used: Some(self.epsilon.clone()),
                        delta_consumed: Some(delta),
                        call_index: self.ledger.calls_made(),
                        wall_time: start.elapsed(),
                    });
                }
                Err(e) => {
                    self.ledger.refund(&delta);
                    if attempt >= self.retries {
                        return Err(e);
                    }
                    attempt += 1;
                }
            }
        }
    }

    fn epsilon(&self) -> Option<BigRational> {
        Some(self.epsilon.clone())
    }

    fn delta_consumed(&self) -> Option<BigRational> {
        Some(self.ledger.consumed().clone())
    }

    fn calls(&self) -> u64 {
        self.calls
    }
}
