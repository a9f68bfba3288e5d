//! `K*/K*^2` for `K = Q_p`, squareness, the dyadic characters `ε` and `ω`,
//! and the unit filtration `U_i = 1 + p^i Z_p`.

use std::fmt;

use serde::{Serialize, Serializer};

use super::modarith::{is_residue, prime_power, smallest_nonresidue, val_u64};
use super::{precision_floor, PAdic};
use crate::error::{Error, Result};

/// A coset of `Q_p*` modulo squares, named by its canonical representative.
///
/// Over `Q_2` the representatives are `±1, ±5, ±2, ±10`; over odd `p` they
/// are `1, u, p, up` where `u` is the smallest positive non-residue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass {
    p: u64,
    odd_valuation: bool,
    /// `p = 2`: the unit modulo 8 (1, 3, 5 or 7). Odd `p`: 1 for the
    /// non-residue class, 0 otherwise.
    unit: u8,
}

impl SquareClass {
    pub fn one(p: u64) -> Self {
        SquareClass {
            p,
            odd_valuation: false,
            unit: if p == 2 { 1 } else { 0 },
        }
    }

    /// Number of classes: 8 over `Q_2`, 4 otherwise.
    pub fn count(p: u64) -> usize {
        if p == 2 {
            8
        } else {
            4
        }
    }

    /// Index in `0..count(p)`, viewing the group as an `F_2`-vector space.
    pub fn index(&self) -> usize {
        let unit_bits = if self.p == 2 {
            (self.unit as usize >> 1) & 3
        } else {
            self.unit as usize
        };
        let width = if self.p == 2 { 2 } else { 1 };
        ((self.odd_valuation as usize) << width) | unit_bits
    }

    pub fn from_index(p: u64, index: usize) -> Self {
        assert!(index < Self::count(p), "square class index out of range");
        if p == 2 {
            SquareClass {
                p,
                odd_valuation: index & 4 != 0,
                unit: (((index & 3) << 1) | 1) as u8,
            }
        } else {
            SquareClass {
                p,
                odd_valuation: index & 2 != 0,
                unit: (index & 1) as u8,
            }
        }
    }

    /// All classes in index order; the trivial class comes first.
    pub fn all(p: u64) -> Vec<SquareClass> {
        (0..Self::count(p)).map(|i| Self::from_index(p, i)).collect()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_trivial(&self) -> bool {
        *self == Self::one(self.p)
    }

    pub fn has_odd_valuation(&self) -> bool {
        self.odd_valuation
    }

    pub fn mul(&self, other: &SquareClass) -> SquareClass {
        assert_eq!(self.p, other.p, "square classes over different primes");
        let unit = if self.p == 2 {
            (self.unit * other.unit) % 8
        } else {
            self.unit ^ other.unit
        };
        SquareClass {
            p: self.p,
            odd_valuation: self.odd_valuation ^ other.odd_valuation,
            unit,
        }
    }

    fn unit_representative(&self) -> i64 {
        if self.p == 2 {
            match self.unit {
                1 => 1,
                3 => -5,
                5 => 5,
                7 => -1,
                _ => unreachable!("unit class mod 8 is odd"),
            }
        } else if self.unit == 1 {
            smallest_nonresidue(self.p) as i64
        } else {
            1
        }
    }

    /// The canonical integer representative.
    pub fn representative(&self) -> i64 {
        let u = self.unit_representative();
        if self.odd_valuation {
            u * self.p as i64
        } else {
            u
        }
    }

    /// The representative as a p-adic number with `precision` digits.
    pub fn to_padic(&self, precision: u32) -> Result<PAdic> {
        let x = PAdic::from_i64(self.p, self.unit_representative(), precision)?;
        Ok(x.shift(self.odd_valuation as i64))
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.representative())
    }
}

impl Serialize for SquareClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i64(self.representative())
    }
}

fn nonzero_parts(x: &PAdic, op: &'static str) -> Result<(i64, u64, u32)> {
    match (x.valuation(), x.unit(), x.precision()) {
        (Some(v), Some(u), Some(prec)) => Ok((v, u, prec)),
        _ => Err(Error::ZeroArgument(op)),
    }
}

fn need_precision(x: &PAdic, prec: u32) -> Result<()> {
    let floor = precision_floor(x.p());
    if prec < floor {
        return Err(Error::InsufficientPrecision {
            needed: floor,
            have: prec,
        });
    }
    Ok(())
}

/// The square class of a nonzero element.
pub fn square_class(x: &PAdic) -> Result<SquareClass> {
    let (v, u, prec) = nonzero_parts(x, "square_class")?;
    need_precision(x, prec)?;
    let p = x.p();
    let odd_valuation = v.rem_euclid(2) == 1;
    let unit = if p == 2 {
        (u % 8) as u8
    } else {
        (!is_residue(u % p, p)) as u8
    };
    Ok(SquareClass {
        p,
        odd_valuation,
        unit,
    })
}

/// `x ∈ K*^2`: even valuation and a square unit (modulo 8 over `Q_2`,
/// modulo `p` otherwise).
pub fn is_square(x: &PAdic) -> Result<bool> {
    let (v, u, prec) = nonzero_parts(x, "is_square")?;
    need_precision(x, prec)?;
    let p = x.p();
    if v.rem_euclid(2) != 0 {
        return Ok(false);
    }
    Ok(if p == 2 {
        u % 8 == 1
    } else {
        is_residue(u % p, p)
    })
}

fn dyadic_unit(z: &PAdic) -> Result<u64> {
    if z.p() != 2 {
        return Err(Error::Precondition("ε and ω are defined on Z_2*".into()));
    }
    let (v, u, prec) = nonzero_parts(z, "ε/ω")?;
    if v != 0 {
        return Err(Error::NotAUnit);
    }
    need_precision(z, prec)?;
    Ok(u % 8)
}

/// `ε(z) = (z - 1)/2 mod 2` for an odd residue `z`.
pub fn epsilon_residue(z: u64) -> u8 {
    assert!(z % 2 == 1, "ε needs an odd residue");
    (((z % 4) - 1) / 2) as u8
}

/// `ω(z) = (z^2 - 1)/8 mod 2` for an odd residue `z`.
pub fn omega_residue(z: u64) -> u8 {
    assert!(z % 2 == 1, "ω needs an odd residue");
    let z = z % 8;
    (((z * z - 1) / 8) % 2) as u8
}

pub fn epsilon(z: &PAdic) -> Result<u8> {
    dyadic_unit(z).map(epsilon_residue)
}

pub fn omega(z: &PAdic) -> Result<u8> {
    dyadic_unit(z).map(omega_residue)
}

/// Largest `i` with `x ∈ U_i`, i.e. `v_p(1 - x)`; 0 when `x ≢ 1 mod p`.
/// Reaching the precision cap is reported as [`Error::FiltrationCap`].
pub fn filtration_level(x: &PAdic) -> Result<u32> {
    let (v, u, prec) = nonzero_parts(x, "filtration_level")?;
    if v != 0 {
        return Err(Error::NotAUnit);
    }
    let p = x.p();
    let m = prime_power(p, prec).expect("valid precision");
    let diff = (u + m - 1) % m;
    if diff == 0 {
        return Err(Error::FiltrationCap(prec));
    }
    Ok(val_u64(diff, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::default_precision;

    fn q(p: u64, n: i64) -> PAdic {
        PAdic::from_i64(p, n, default_precision(p)).unwrap()
    }

    /// Independent square test: search for a square root modulo `2^k`
    /// among odd residues and check that it lifts (k >= 3 suffices by the
    /// dyadic Hensel bound, since the derivative 2r has valuation 1).
    fn brute_square_2(n: u64) -> bool {
        let v = n.trailing_zeros();
        if v % 2 == 1 {
            return false;
        }
        let u = n >> v;
        (1..32u64).step_by(2).any(|r| (r * r) % 32 == u % 32)
    }

    #[test]
    fn squareness_examples() {
        assert!(is_square(&q(2, 17)).unwrap());
        assert!(!is_square(&q(2, 2)).unwrap());
        assert!(is_square(&q(5, 4)).unwrap());
        assert!(!is_square(&q(5, 2)).unwrap());
        assert!(is_square(&q(3, 9 * 7)).unwrap());
    }

    #[test]
    fn squareness_matches_brute_force_2() {
        for n in 1..2000u64 {
            assert_eq!(
                is_square(&q(2, n as i64)).unwrap(),
                brute_square_2(n),
                "n = {n}"
            );
        }
    }

    #[test]
    fn seventeen_has_a_hensel_root() {
        // r^2 = 17 mod 2^k lifts to mod 2^(k+1) via r or r + 2^(k-1).
        let mut r = 1u64;
        for k in 3..40u32 {
            let m = 1u64 << (k + 1);
            if (r as u128 * r as u128) % m as u128 != 17 % m as u128 {
                r += 1 << (k - 1);
            }
            assert_eq!((r as u128 * r as u128) % m as u128, 17 % m as u128);
        }
    }

    #[test]
    fn class_examples() {
        let c = square_class(&q(2, 12)).unwrap();
        assert_eq!(c.representative(), -5);
        let ratio = q(2, 12).checked_div(&q(2, -5)).unwrap();
        assert!(is_square(&ratio).unwrap());

        assert_eq!(square_class(&q(2, 9)).unwrap().representative(), 1);

        let c3 = square_class(&q(3, 5)).unwrap();
        assert_eq!(c3.representative(), 2);
        assert!(is_square(&q(3, 5).checked_div(&q(3, 2)).unwrap()).unwrap());
    }

    #[test]
    fn representatives_are_self_classes() {
        for p in [2u64, 3, 5, 7, 13] {
            for c in SquareClass::all(p) {
                let x = c.to_padic(default_precision(p)).unwrap();
                assert_eq!(square_class(&x).unwrap(), c);
                assert_eq!(c.index(), SquareClass::from_index(p, c.index()).index());
            }
        }
        let reps: Vec<i64> = SquareClass::all(2).iter().map(|c| c.representative()).collect();
        assert_eq!(reps, vec![1, -5, 5, -1, 2, -10, 10, -2]);
    }

    #[test]
    fn zero_is_rejected() {
        assert_eq!(
            square_class(&PAdic::zero(2)),
            Err(Error::ZeroArgument("square_class"))
        );
        assert!(is_square(&PAdic::zero(7)).is_err());
    }

    #[test]
    fn epsilon_omega_values() {
        assert_eq!((epsilon_residue(1), omega_residue(1)), (0, 0));
        assert_eq!(epsilon_residue(3), 1);
        assert_eq!(omega_residue(7), 0);
        assert_eq!(epsilon(&q(2, -1)).unwrap(), 1);
        assert_eq!(omega(&q(2, 5)).unwrap(), 1);
        assert_eq!(epsilon(&q(2, 2)), Err(Error::NotAUnit));
    }

    #[test]
    fn epsilon_omega_are_homomorphisms() {
        for a in [1u64, 3, 5, 7] {
            for b in [1u64, 3, 5, 7] {
                let ab = (a * b) % 8;
                assert_eq!(epsilon_residue(ab), epsilon_residue(a) ^ epsilon_residue(b));
                assert_eq!(omega_residue(ab), omega_residue(a) ^ omega_residue(b));
            }
        }
    }

    #[test]
    fn filtration_examples() {
        assert_eq!(filtration_level(&q(2, 9)).unwrap(), 3);
        assert_eq!(filtration_level(&q(2, 3)).unwrap(), 1);
        assert_eq!(filtration_level(&q(2, 5)).unwrap(), 2);
        assert_eq!(filtration_level(&q(5, 2)).unwrap(), 0);
        assert_eq!(filtration_level(&q(2, 1)), Err(Error::FiltrationCap(24)));
        assert_eq!(filtration_level(&q(2, 4)), Err(Error::NotAUnit));
    }

    #[test]
    fn class_group_law() {
        for p in [2u64, 3, 7] {
            let prec = default_precision(p);
            for a in SquareClass::all(p) {
                for b in SquareClass::all(p) {
                    let prod = a.to_padic(prec).unwrap().checked_mul(&b.to_padic(prec).unwrap()).unwrap();
                    assert_eq!(square_class(&prod).unwrap(), a.mul(&b));
                }
            }
        }
    }
}
