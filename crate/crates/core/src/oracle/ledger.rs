use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::OracleError;
use crate::rational::{exact_string, from_biguint};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaSchedule {
    /// `delta / m_max` for every call.
    Uniform,
    /// `delta / (i * ln(m_max + 1))` for the `i`-th call.
    Harmonic,
}

impl DeltaSchedule {
    pub fn as_str(self) -> &'static str {
        match self {
            DeltaSchedule::Uniform => "uniform",
            DeltaSchedule::Harmonic => "harmonic",
        }
    }
}

/// Rational upper bound on `ln(n)` for `n >= 1`, tight to a few ulps.
pub fn ln_upper(n: &BigUint) -> BigRational {
    if n <= &BigUint::from(1u32) {
        return BigRational::zero();
    }
    let bits = n.bits();
    let ln = if bits < 1000 {
        n.to_f64().expect("finite").ln()
    } else {
        // n = m * 2^shift with m < 2^64.
        let shift = bits - 64;
        let m = (n >> shift).to_f64().expect("finite");
        m.ln() + shift as f64 * std::f64::consts::LN_2
    };
    // The libm result is within one ulp; pad by a few more.
    let padded = ln * (1.0 + 8.0 * f64::EPSILON);
    BigRational::from_float(padded).expect("finite")
}

/// Splits the total confidence budget over oracle calls.
///
/// A grant that would push the consumed total above the budget is refused,
/// so `consumed <= total_delta` always holds.
#[derive(Clone, Debug)]
pub struct DeltaLedger {
    schedule: DeltaSchedule,
    total_delta: BigRational,
    m_max: BigUint,
    ln_m: BigRational,
    calls_made: u64,
    consumed: BigRational,
}

impl DeltaLedger {
    pub fn new(schedule: DeltaSchedule, total_delta: BigRational, m_max: BigUint) -> Self {
        assert!(!m_max.is_zero(), "m_max must be positive");
        let ln_m = ln_upper(&(&m_max + 1u32));
        DeltaLedger {
            schedule,
            total_delta,
            m_max,
            ln_m,
            calls_made: 0,
            consumed: BigRational::zero(),
        }
    }

    pub fn schedule(&self) -> DeltaSchedule {
        self.schedule
    }

    pub fn total_delta(&self) -> &BigRational {
        &self.total_delta
    }

    pub fn m_max(&self) -> &BigUint {
        &self.m_max
    }

    pub fn calls_made(&self) -> u64 {
        self.calls_made
    }

    pub fn consumed(&self) -> &BigRational {
        &self.consumed
    }

    /// The grant the `i`-th call (1-based) would receive.
    pub fn delta_for(&self, i: u64) -> BigRational {
        match self.schedule {
            DeltaSchedule::Uniform => &self.total_delta / from_biguint(&self.m_max),
            DeltaSchedule::Harmonic => &self.total_delta / (&self.ln_m * BigRational::from_integer(i.into())),
        }
    }

    pub fn next_delta(&mut self) -> Result<BigRational, OracleError> {
        let delta = self.delta_for(self.calls_made + 1);
        let after = &self.consumed + &delta;
        if after > self.total_delta {
            return Err(OracleError::BudgetExhausted {
                consumed: exact_string(&self.consumed),
                total: exact_string(&self.total_delta),
                requested: exact_string(&delta),
            });
        }
        self.calls_made += 1;
        self.consumed = after;
        Ok(delta)
    }

    /// Returns a grant whose call failed. The call index is not reused.
    pub fn refund(&mut self, delta: &BigRational) {
        self.consumed -= delta;
        debug_assert!(self.consumed >= BigRational::zero());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn uniform_grant() {
        let mut l = DeltaLedger::new(DeltaSchedule::Uniform, q(1, 5), BigUint::from(49u32));
        for _ in 0..49 {
            assert_eq!(l.next_delta().unwrap(), q(1, 245));
        }
        assert_eq!(l.consumed(), &q(1, 5));
        assert!(matches!(l.next_delta(), Err(OracleError::BudgetExhausted { .. })));
    }

    #[test]
    fn harmonic_first_grant() {
        let mut l = DeltaLedger::new(DeltaSchedule::Harmonic, q(1, 5), BigUint::from(49u32));
        let d1 = l.next_delta().unwrap().to_f64().unwrap();
        let expected = 0.2 / 50f64.ln();
        assert!((d1 - expected).abs() < 1e-14, "{d1} vs {expected}");
        assert!(d1 <= expected);
        let d2 = l.next_delta().unwrap().to_f64().unwrap();
        assert!((d2 - expected / 2.0).abs() < 1e-14);
    }

    #[test]
    fn harmonic_stops_before_overspending() {
        let mut l = DeltaLedger::new(DeltaSchedule::Harmonic, q(1, 5), BigUint::from(49u32));
        let mut granted = 0;
        while l.next_delta().is_ok() {
            granted += 1;
            assert!(l.consumed() <= l.total_delta());
        }
        // H_27 < ln 50 < H_28.
        assert_eq!(granted, 27);
    }

    #[test]
    fn ln_upper_bounds() {
        for n in [2u64, 3, 10, 50, 1_000_001, u64::MAX] {
            let v = ln_upper(&BigUint::from(n)).to_f64().unwrap();
            assert!(v >= (n as f64).ln());
            assert!(v - (n as f64).ln() < 1e-12 * (n as f64).ln());
        }
        let huge = BigUint::from(1u32) << 2000u32;
        let v = ln_upper(&huge).to_f64().unwrap();
        assert!((v - 2000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!(ln_upper(&BigUint::from(1u32)).is_zero());
    }

    #[test]
    fn refund_keeps_index() {
        let mut l = DeltaLedger::new(DeltaSchedule::Harmonic, q(1, 1), BigUint::from(10u32));
        let d1 = l.next_delta().unwrap();
        l.refund(&d1);
        assert!(l.consumed().is_zero());
        let d2 = l.next_delta().unwrap();
        assert_eq!(d2, &d1 / q(2, 1));
        assert_eq!(l.calls_made(), 2);
    }
}
