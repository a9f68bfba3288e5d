//! Finite-precision elements of `Q_p` together with the square-class and
//! unit-filtration structure built on top of them.
//!
//! A nonzero [`PAdic`] is stored as `p^valuation * unit` where `unit` is a
//! residue modulo `p^precision` that is prime to `p`. Zero is a separate,
//! exact value. Arithmetic tracks relative precision: products keep the
//! smaller precision of their operands, sums lose whatever digits cancel.

pub mod modarith;
mod square_class;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use modarith::{add_mod, inv_mod, mul_mod, neg_mod, prime_power, val_u64};

pub use square_class::{
    epsilon, epsilon_residue, filtration_level, is_square, omega, omega_residue, square_class,
    SquareClass,
};

/// Largest prime accepted by this crate.
pub const MAX_PRIME: u64 = 1 << 32;

/// Default number of unit digits for `p = 2`.
pub const DEFAULT_PRECISION_2: u32 = 24;
/// Default number of unit digits for odd `p` (clamped for large primes).
pub const DEFAULT_PRECISION_ODD: u32 = 12;

/// Checks that `p` is a prime in the supported range.
pub fn check_prime(p: u64) -> Result<()> {
    if p >= MAX_PRIME {
        return Err(Error::PrimeTooLarge(p));
    }
    if !num_prime::nt_funcs::is_prime64(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(())
}

/// Minimum precision an element over `p` may carry: squareness over `Q_2`
/// needs the unit modulo 8.
pub fn precision_floor(p: u64) -> u32 {
    if p == 2 {
        3
    } else {
        1
    }
}

/// Largest precision whose modulus `p^k` still fits the word-sized arithmetic.
pub fn max_precision(p: u64) -> u32 {
    let mut k = 1;
    while prime_power(p, k + 1).is_some() {
        k += 1;
    }
    k
}

pub fn default_precision(p: u64) -> u32 {
    let wanted = if p == 2 {
        DEFAULT_PRECISION_2
    } else {
        DEFAULT_PRECISION_ODD
    };
    wanted.min(max_precision(p))
}

/// Validates a requested precision for `p`.
pub fn check_precision(p: u64, precision: u32) -> Result<()> {
    let (min, max) = (precision_floor(p), max_precision(p));
    if precision < min || precision > max {
        return Err(Error::PrecisionOutOfRange {
            p,
            requested: precision,
            min,
            max,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Digits {
    Zero,
    Nonzero {
        valuation: i64,
        unit: u64,
        precision: u32,
    },
}

/// An element of `Q_p` known to finitely many digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PAdicRepr", into = "PAdicRepr")]
pub struct PAdic {
    p: u64,
    digits: Digits,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PAdicRepr {
    Nonzero {
        p: u64,
        valuation: i64,
        unit: u64,
        precision: u32,
    },
    Zero {
        p: u64,
        zero: bool,
    },
}

impl From<PAdic> for PAdicRepr {
    fn from(x: PAdic) -> Self {
        match x.digits {
            Digits::Zero => PAdicRepr::Zero { p: x.p, zero: true },
            Digits::Nonzero {
                valuation,
                unit,
                precision,
            } => PAdicRepr::Nonzero {
                p: x.p,
                valuation,
                unit,
                precision,
            },
        }
    }
}

impl TryFrom<PAdicRepr> for PAdic {
    type Error = Error;

    fn try_from(r: PAdicRepr) -> Result<Self> {
        match r {
            PAdicRepr::Zero { p, zero: true } => {
                check_prime(p)?;
                Ok(PAdic::zero(p))
            }
            PAdicRepr::Zero { .. } => Err(Error::Parse("zero: false".into())),
            PAdicRepr::Nonzero {
                p,
                valuation,
                unit,
                precision,
            } => PAdic::new(p, valuation, unit, precision),
        }
    }
}

impl PAdic {
    /// `p^valuation * unit`, with `unit` read modulo `p^precision`.
    pub fn new(p: u64, valuation: i64, unit: u64, precision: u32) -> Result<Self> {
        check_prime(p)?;
        check_precision(p, precision)?;
        let m = prime_power(p, precision).expect("checked precision");
        let unit = unit % m;
        if unit.is_multiple_of(p) {
            return Err(Error::NotAUnit);
        }
        Ok(Self::raw(p, valuation, unit, precision))
    }

    fn raw(p: u64, valuation: i64, unit: u64, precision: u32) -> Self {
        PAdic {
            p,
            digits: Digits::Nonzero {
                valuation,
                unit,
                precision,
            },
        }
    }

    pub fn zero(p: u64) -> Self {
        PAdic {
            p,
            digits: Digits::Zero,
        }
    }

    pub fn one(p: u64, precision: u32) -> Result<Self> {
        Self::new(p, 0, 1, precision)
    }

    /// The uniformiser `p` itself.
    pub fn uniformiser(p: u64, precision: u32) -> Result<Self> {
        Self::new(p, 1, 1, precision)
    }

    pub fn from_i64(p: u64, n: i64, precision: u32) -> Result<Self> {
        Self::from_integer(p, &BigInt::from(n), precision)
    }

    pub fn from_integer(p: u64, n: &BigInt, precision: u32) -> Result<Self> {
        Self::from_rational(p, &BigRational::from_integer(n.clone()), precision)
    }

    /// Embeds a rational number exactly: the valuation is `v_p(num) - v_p(den)`
    /// and the unit is `num/den` stripped of `p`, reduced modulo `p^precision`.
    pub fn from_rational(p: u64, q: &BigRational, precision: u32) -> Result<Self> {
        check_prime(p)?;
        check_precision(p, precision)?;
        if q.is_zero() {
            return Ok(Self::zero(p));
        }
        let m = prime_power(p, precision).expect("checked precision");
        let (vn, un) = split_integer(q.numer(), p, m);
        let (vd, ud) = split_integer(q.denom(), p, m);
        let inv = inv_mod(ud, m).expect("denominator stripped of p is a unit");
        Ok(Self::raw(p, vn - vd, mul_mod(un, inv, m), precision))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.digits, Digits::Zero)
    }

    /// `v_p(x)`; `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        match self.digits {
            Digits::Zero => None,
            Digits::Nonzero { valuation, .. } => Some(valuation),
        }
    }

    /// The unit part modulo `p^precision`; `None` for zero.
    pub fn unit(&self) -> Option<u64> {
        match self.digits {
            Digits::Zero => None,
            Digits::Nonzero { unit, .. } => Some(unit),
        }
    }

    /// Number of significant digits of the unit part; `None` for the exact zero.
    pub fn precision(&self) -> Option<u32> {
        match self.digits {
            Digits::Zero => None,
            Digits::Nonzero { precision, .. } => Some(precision),
        }
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    fn parts(&self) -> Option<(i64, u64, u32)> {
        match self.digits {
            Digits::Zero => None,
            Digits::Nonzero {
                valuation,
                unit,
                precision,
            } => Some((valuation, unit, precision)),
        }
    }

    fn same_prime(&self, other: &PAdic) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        Ok(())
    }

    /// Same element with the unit truncated to `precision` digits.
    pub fn truncate(&self, precision: u32) -> Result<Self> {
        match self.parts() {
            None => Ok(*self),
            Some((v, u, prec)) => {
                if precision > prec {
                    return Err(Error::InsufficientPrecision {
                        needed: precision,
                        have: prec,
                    });
                }
                check_precision(self.p, precision)?;
                let m = prime_power(self.p, precision).expect("checked precision");
                Ok(Self::raw(self.p, v, u % m, precision))
            }
        }
    }

    pub fn neg(&self) -> Self {
        match self.parts() {
            None => *self,
            Some((v, u, prec)) => {
                let m = prime_power(self.p, prec).expect("valid precision");
                Self::raw(self.p, v, neg_mod(u, m), prec)
            }
        }
    }

    pub fn checked_mul(&self, other: &PAdic) -> Result<Self> {
        self.same_prime(other)?;
        match (self.parts(), other.parts()) {
            (None, _) | (_, None) => Ok(Self::zero(self.p)),
            (Some((va, ua, pa)), Some((vb, ub, pb))) => {
                let prec = pa.min(pb);
                let m = prime_power(self.p, prec).expect("valid precision");
                Ok(Self::raw(self.p, va + vb, mul_mod(ua, ub, m), prec))
            }
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        match self.parts() {
            None => Err(Error::DivisionByZero),
            Some((v, u, prec)) => {
                let m = prime_power(self.p, prec).expect("valid precision");
                let inv = inv_mod(u, m).expect("unit is invertible");
                Ok(Self::raw(self.p, -v, inv, prec))
            }
        }
    }

    pub fn checked_div(&self, other: &PAdic) -> Result<Self> {
        self.same_prime(other)?;
        self.checked_mul(&other.inverse()?)
    }

    pub fn checked_add(&self, other: &PAdic) -> Result<Self> {
        self.add_impl(other, false)
    }

    /// Like [`checked_add`](Self::checked_add), except that a sum vanishing
    /// to the precision of its operands is returned as zero instead of an
    /// error. Used where coordinates are known to be exact integers or where
    /// "zero to working precision" is the intended reading.
    pub fn add_absorbing(&self, other: &PAdic) -> Result<Self> {
        self.add_impl(other, true)
    }

    pub fn sub_absorbing(&self, other: &PAdic) -> Result<Self> {
        self.add_impl(&other.neg(), true)
    }

    fn add_impl(&self, other: &PAdic, absorb: bool) -> Result<Self> {
        self.same_prime(other)?;
        let (a, b) = match (self.parts(), other.parts()) {
            (None, _) => return Ok(*other),
            (_, None) => return Ok(*self),
            (Some(a), Some(b)) => {
                if a.0 <= b.0 {
                    (a, b)
                } else {
                    (b, a)
                }
            }
        };
        let p = self.p;
        let (va, ua, pa) = a;
        let (vb, ub, pb) = b;
        let gap = (vb - va) as u64;
        // Absolute precision of the sum, measured from p^va.
        let rel = (pa as u64).min(gap + pb as u64) as u32;
        let m = prime_power(p, rel).expect("rel <= operand precision");
        let mut s = ua % m;
        if gap < rel as u64 {
            let shift = prime_power(p, gap as u32).expect("gap < rel");
            s = add_mod(s, mul_mod(shift, ub % m, m), m);
        }
        if s == 0 {
            if absorb {
                return Ok(Self::zero(p));
            }
            return Err(Error::PrecisionExhausted { p });
        }
        let t = val_u64(s, p);
        let prec = rel - t;
        if prec < precision_floor(p) {
            return Err(Error::PrecisionExhausted { p });
        }
        let unit = s / prime_power(p, t).expect("t < rel");
        Ok(Self::raw(p, va + t as i64, unit, prec))
    }

    pub fn checked_sub(&self, other: &PAdic) -> Result<Self> {
        self.checked_add(&other.neg())
    }

    pub fn square(&self) -> Self {
        self.checked_mul(self).expect("same prime")
    }

    /// Multiplies by `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        match self.parts() {
            None => *self,
            Some((v, u, prec)) => Self::raw(self.p, v + k, u, prec),
        }
    }

    /// `x / p^{v(x)}` as a unit.
    pub fn unit_part(&self) -> Result<Self> {
        match self.parts() {
            None => Err(Error::ZeroArgument("unit part")),
            Some((_, u, prec)) => Ok(Self::raw(self.p, 0, u, prec)),
        }
    }

    /// True when `self - other` vanishes to the precision both operands carry.
    pub fn agrees_with(&self, other: &PAdic) -> bool {
        match (self.parts(), other.parts()) {
            (None, None) => true,
            (Some((va, ua, pa)), Some((vb, ub, pb))) => {
                if self.p != other.p || va != vb {
                    return false;
                }
                let m = prime_power(self.p, pa.min(pb)).expect("valid precision");
                ua % m == ub % m
            }
            _ => false,
        }
    }

    /// The unit as a signed integer in `(-p^prec/2, p^prec/2]`.
    pub fn signed_unit(&self) -> Option<i128> {
        let (_, u, prec) = self.parts()?;
        let m = prime_power(self.p, prec).expect("valid precision") as i128;
        let u = u as i128;
        Some(if 2 * u > m { u - m } else { u })
    }

    /// The rational number `p^v * signed_unit`: the smallest-height integer
    /// lift, useful for display.
    pub fn to_rational(&self) -> BigRational {
        match self.parts() {
            None => BigRational::zero(),
            Some((v, _, _)) => {
                let u = BigInt::from(self.signed_unit().expect("nonzero"));
                let pk = BigInt::from(self.p).pow(v.unsigned_abs() as u32);
                if v >= 0 {
                    BigRational::from_integer(u * pk)
                } else {
                    BigRational::new(u, pk)
                }
            }
        }
    }

    /// Integer representative of `x` modulo `p^digits`; requires `x ∈ Z_p`
    /// known to at least that many digits.
    pub fn residue_mod(&self, digits: u32) -> Result<u64> {
        let m = prime_power(self.p, digits).ok_or(Error::InsufficientPrecision {
            needed: digits,
            have: max_precision(self.p),
        })?;
        match self.parts() {
            None => Ok(0),
            Some((v, u, prec)) => {
                if v < 0 {
                    return Err(Error::Precondition("element is not integral".into()));
                }
                if v as u64 >= digits as u64 {
                    return Ok(0);
                }
                let v = v as u32;
                if prec + v < digits {
                    return Err(Error::InsufficientPrecision {
                        needed: digits,
                        have: prec + v,
                    });
                }
                let pv = prime_power(self.p, v).expect("v < digits");
                Ok(mul_mod(pv, u % m, m))
            }
        }
    }
}

fn split_integer(n: &BigInt, p: u64, m: u64) -> (i64, u64) {
    let bp = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0i64;
    loop {
        let (q, r) = n.div_rem(&bp);
        if !r.is_zero() {
            break;
        }
        n = q;
        v += 1;
    }
    let r = n.mod_floor(&BigInt::from(m));
    (v, r.to_u64().expect("reduced below m"))
}

/// Parses `[+-]?digits` or `[+-]?digits/digits` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let err = || Error::Parse(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, Some(b)),
        None => (t, None),
    };
    let digits_only = |x: &str| !x.is_empty() && x.bytes().all(|c| c.is_ascii_digit());
    let unsigned = num.strip_prefix(['+', '-']).unwrap_or(num);
    if !digits_only(unsigned) {
        return Err(err());
    }
    let n: BigInt = num.parse().map_err(|_| err())?;
    let d: BigInt = match den {
        None => BigInt::one(),
        Some(b) if digits_only(b) => b.parse().map_err(|_| err())?,
        Some(_) => return Err(err()),
    };
    if d.is_zero() {
        return Err(err());
    }
    Ok(BigRational::new(n, d))
}

/// Formats a rational as `a` or `a/b`.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parts() {
            None => write!(f, "0"),
            Some((v, _, prec)) => {
                let u = self.signed_unit().expect("nonzero");
                let lift = self.to_rational();
                if lift.abs() < BigRational::from_integer(BigInt::from(1u64 << 40)) {
                    write!(f, "{} + O({}^{})", format_rational(&lift), self.p, v + prec as i64)
                } else {
                    write!(f, "{}^{} * {} + O({}^{})", self.p, v, u, self.p, v + prec as i64)
                }
            }
        }
    }
}
