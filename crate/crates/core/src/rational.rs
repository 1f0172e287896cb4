//! Exact rational helpers: decimal parsing, decimal rendering, small powers.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Parses a decimal literal (`0.5`, `-1`, `1e-3`, `2.5E+2`) or a fraction
/// (`3/7`) into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    let (negative, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let scale = exponent - frac_part.len() as i32;
    let mut value = BigRational::from_integer(numer);
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= pow(&ten, scale as u64);
    } else {
        value /= pow(&ten, scale.unsigned_abs() as u64);
    }
    Some(if negative { -value } else { value })
}

/// `base^exp` by repeated squaring.
pub fn pow(base: &BigRational, mut exp: u64) -> BigRational {
    let mut result = BigRational::one();
    let mut acc = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result *= &acc;
        }
        exp >>= 1;
        if exp > 0 {
            acc = &acc * &acc;
        }
    }
    result
}

pub fn from_biguint(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()))
}

pub fn from_u64(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Renders `r` as the shortest decimal that agrees with `r` to `sig`
/// significant digits. Terminating decimals with at most `sig` significant
/// digits are rendered exactly.
pub fn format_decimal(r: &BigRational, sig: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let sig = sig.max(1);
    let negative = r.is_negative();
    let abs = r.abs();

    // Decimal exponent e with 10^e <= abs < 10^(e+1).
    let mut e = estimate_exponent(&abs);
    while pow10(e + 1) <= abs {
        e += 1;
    }
    while pow10(e) > abs {
        e -= 1;
    }

    let shift = sig as i64 - 1 - e;
    let scaled = &abs * pow10(shift);
    let mut digits = round_half_even(&scaled);
    if digits.to_string().len() > sig {
        // Rounding carried into a new leading digit.
        e += 1;
        digits = round_half_even(&(&abs * pow10(sig as i64 - 1 - e)));
    }
    let mut text = digits.to_string();
    while text.len() > 1 && text.ends_with('0') {
        text.pop();
    }

    let body = if (-7..16).contains(&e) {
        positional(&text, e)
    } else {
        let (lead, rest) = text.split_at(1);
        if rest.is_empty() {
            format!("{lead}e{e}")
        } else {
            format!("{lead}.{rest}e{e}")
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// Lossy conversion for display and logging.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `num/den` rendering of the exact value.
pub fn exact_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn positional(digits: &str, e: i64) -> String {
    if e < 0 {
        let zeros = "0".repeat((-e - 1) as usize);
        format!("0.{zeros}{digits}")
    } else {
        let int_len = e as usize + 1;
        if digits.len() <= int_len {
            format!("{digits}{}", "0".repeat(int_len - digits.len()))
        } else {
            format!("{}.{}", &digits[..int_len], &digits[int_len..])
        }
    }
}

fn pow10(e: i64) -> BigRational {
    let ten = BigRational::from_integer(BigInt::from(10));
    if e >= 0 {
        pow(&ten, e as u64)
    } else {
        pow(&ten, e.unsigned_abs()).recip()
    }
}

fn estimate_exponent(abs: &BigRational) -> i64 {
    let n = abs.numer().to_string().len() as i64;
    let d = abs.denom().to_string().len() as i64;
    n - d
}

fn round_half_even(x: &BigRational) -> BigInt {
    let (q, r): (BigInt, BigInt) = x.numer().div_rem(x.denom());
    let twice: BigInt = r * 2;
    match twice.cmp(x.denom()) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    }
}
