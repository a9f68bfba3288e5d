//! Monic cubics over `Q_p` and certified root counting.
//!
//! Roots are found by refining balls `r + p^j Z_p` on an integral rescaling
//! `g` of the cubic: a ball splits along the roots mod `p` of
//! `g(r + p^j s)` over its content, so at most three children survive. A
//! ball is certified to hold exactly one root once `v(g'(r)) = t < j` and
//! `v(g(r)) >= j + t` (Hensel), and every root in `Z_p` is certified by
//! depth `2 v(disc) + 1`. Most branches close well before that.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fp;
use crate::padic::modarith::{add_mod, inv_mod, mul_mod, neg_mod, prime_power, val_u64};
use crate::padic::{check_precision, default_precision, max_precision, precision_floor, PAdic};

/// Upper bound on balls examined by the root search.
const NODE_LIMIT: usize = 1 << 21;

/// `x^3 + a x^2 + b x + c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cubic {
    p: u64,
    a: PAdic,
    b: PAdic,
    c: PAdic,
    /// Whether the discriminant is exactly zero, when the coefficients
    /// came from exact rationals.
    exact_singular: Option<bool>,
}

fn exact_discriminant(coeffs: &[BigRational; 3]) -> BigRational {
    let [a, b, c] = coeffs;
    let k = |n: i64| BigRational::from_integer(n.into());
    a * a * b * b - k(4) * b * b * b - k(4) * a * a * a * c - k(27) * c * c + k(18) * a * b * c
}

impl Cubic {
    pub fn new(a: PAdic, b: PAdic, c: PAdic) -> Result<Self> {
        let p = a.p();
        for x in [&b, &c] {
            if x.p() != p {
                return Err(Error::PrimeMismatch(p, x.p()));
            }
        }
        Ok(Cubic {
            p,
            a,
            b,
            c,
            exact_singular: None,
        })
    }

    pub fn from_ints(p: u64, a: i64, b: i64, c: i64) -> Result<Self> {
        let coeffs = [a, b, c].map(|n| BigRational::from_integer(n.into()));
        Self::from_rationals(p, &coeffs, default_precision(p))
    }

    pub fn from_rationals(p: u64, coeffs: &[BigRational; 3], precision: u32) -> Result<Self> {
        check_precision(p, precision)?;
        let mut f = Self::new(
            PAdic::from_rational(p, &coeffs[0], precision)?,
            PAdic::from_rational(p, &coeffs[1], precision)?,
            PAdic::from_rational(p, &coeffs[2], precision)?,
        )?;
        f.exact_singular = Some(exact_discriminant(coeffs).is_zero());
        Ok(f)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coefficients(&self) -> [PAdic; 3] {
        [self.a, self.b, self.c]
    }

    pub fn eval(&self, x: &PAdic) -> Result<PAdic> {
        let t = x.add_absorbing(&self.a)?.checked_mul(x)?;
        let t = t.add_absorbing(&self.b)?.checked_mul(x)?;
        t.add_absorbing(&self.c)
    }

    pub fn derivative_at(&self, x: &PAdic) -> Result<PAdic> {
        let prec = x.precision().unwrap_or(default_precision(self.p));
        let three = PAdic::from_i64(self.p, 3, prec)?;
        let two = PAdic::from_i64(self.p, 2, prec)?;
        let t = three.checked_mul(x)?.add_absorbing(&two.checked_mul(&self.a)?)?;
        t.checked_mul(x)?.add_absorbing(&self.b)
    }

    /// If `f(x) = (x - r)((x - r)^2 - e)` with `r = -a/3`, returns `(r, e)`.
    pub fn translated_pair_shape(&self) -> Result<Option<(PAdic, PAdic)>> {
        let prec = [self.a, self.b, self.c]
            .iter()
            .filter_map(|x| x.precision())
            .min()
            .unwrap_or(default_precision(self.p));
        let three = PAdic::from_i64(self.p, 3, prec)?;
        let r = self.a.neg().checked_div(&three)?;
        if !self.eval(&r)?.is_zero() {
            return Ok(None);
        }
        let e = self.derivative_at(&r)?.neg();
        if e.is_zero() {
            return Ok(None);
        }
        Ok(Some((r, e)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertifiedRoot {
    /// Residue of the rescaled root `p^k x` at the certifying level.
    pub residue: u64,
    pub level: u32,
    pub derivative_valuation: u32,
    /// The root in the original coordinate, lifted to working precision.
    pub root: PAdic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootCertificate {
    /// `k` in the substitution `x = y / p^k`: the least `k` making the
    /// cubic integral, negative when every root is divisible by `p`.
    pub scale: i64,
    pub working_digits: u32,
    /// `None` when the discriminant vanishes to working precision; the
    /// search then runs until it certifies or runs out of digits.
    pub discriminant_valuation: Option<u32>,
    pub depth: u32,
    pub nodes_examined: u64,
    pub roots: Vec<CertifiedRoot>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootReport {
    pub count: usize,
    pub roots: Vec<PAdic>,
    pub certificate: RootCertificate,
}

struct Integral {
    p: u64,
    m: u64,
    digits: u32,
    a: u64,
    b: u64,
    c: u64,
}

impl Integral {
    fn g(&self, r: u64) -> u64 {
        let m = self.m;
        let t = mul_mod(add_mod(r, self.a, m), r, m);
        let t = mul_mod(add_mod(t, self.b, m), r, m);
        add_mod(t, self.c, m)
    }

    fn dg(&self, r: u64) -> u64 {
        let m = self.m;
        let t = add_mod(mul_mod(3 % m, r, m), mul_mod(2 % m, self.a, m), m);
        add_mod(mul_mod(t, r, m), self.b, m)
    }

    fn discriminant(&self) -> u64 {
        let m = self.m;
        let (a, b, c) = (self.a, self.b, self.c);
        let k = |n: u64| n % m;
        let ab = mul_mod(a, b, m);
        let b3 = mul_mod(mul_mod(b, b, m), b, m);
        let a3c = mul_mod(mul_mod(mul_mod(a, a, m), a, m), c, m);
        let c2 = mul_mod(c, c, m);
        let mut d = mul_mod(ab, ab, m);
        d = add_mod(d, neg_mod(mul_mod(k(4), b3, m), m), m);
        d = add_mod(d, neg_mod(mul_mod(k(4), a3c, m), m), m);
        d = add_mod(d, neg_mod(mul_mod(k(27), c2, m), m), m);
        add_mod(d, mul_mod(k(18), mul_mod(ab, c, m), m), m)
    }

    fn valuation(&self, x: u64) -> u32 {
        if x == 0 {
            self.digits
        } else {
            val_u64(x, self.p)
        }
    }

    /// Newton iteration from a certified residue, to `digits - t` digits.
    fn lift(&self, mut r: u64, t: u32) -> (u64, u32) {
        let digits = self.digits - t;
        let pt = prime_power(self.p, t).expect("t < digits");
        let m2 = prime_power(self.p, digits).expect("digits <= working");
        for _ in 0..64 {
            let gr = self.g(r);
            if gr == 0 {
                break;
            }
            let num = (gr / pt) % m2;
            let den = (self.dg(r) / pt) % m2;
            let inv = inv_mod(den, m2).expect("derivative unit after division");
            let step = mul_mod(num, inv, m2);
            let next = add_mod(r % m2, neg_mod(step, m2), m2);
            if next == r % m2 {
                break;
            }
            r = next;
        }
        (r % m2, digits)
    }
}

fn to_integral(f: &Cubic) -> Result<(i64, Integral)> {
    let p = f.p;
    let coeffs = [f.a, f.b, f.c];
    let k = coeffs
        .iter()
        .enumerate()
        .filter_map(|(i, x)| {
            let w = (i + 1) as i64;
            x.valuation().map(|v| (-v).div_euclid(w) + i64::from((-v).rem_euclid(w) != 0))
        })
        .max()
        .unwrap_or(0);
    let scaled: Vec<PAdic> = coeffs
        .iter()
        .enumerate()
        .map(|(i, x)| x.shift(k * (i as i64 + 1)))
        .collect();
    let mut digits = max_precision(p);
    for x in &scaled {
        if let (Some(v), Some(prec)) = (x.valuation(), x.precision()) {
            digits = digits.min((v as u32).saturating_add(prec));
        }
    }
    let residue = |x: &PAdic| x.residue_mod(digits);
    let int = Integral {
        p,
        m: prime_power(p, digits).expect("digits within range"),
        digits,
        a: residue(&scaled[0])?,
        b: residue(&scaled[1])?,
        c: residue(&scaled[2])?,
    };
    Ok((k, int))
}

fn residue_to_padic(p: u64, r: u64, digits: u32, scale: i64) -> Result<PAdic> {
    if r == 0 {
        return Ok(PAdic::zero(p));
    }
    let v = val_u64(r, p);
    let unit = r / prime_power(p, v).expect("v < digits");
    let prec = (digits - v).max(precision_floor(p));
    PAdic::new(p, v as i64 - scale, unit, prec)
}

/// Counts the roots of a separable monic cubic in `Q_p`.
///
/// Fails with [`Error::SingularCubic`] when `f` has a repeated root: exactly,
/// for cubics built from rationals, or to working precision otherwise.
pub fn count_roots_cubic(f: &Cubic) -> Result<RootReport> {
    let p = f.p;
    let (scale, g) = to_integral(f)?;
    let disc = g.discriminant();
    if f.exact_singular == Some(true) {
        return Err(Error::SingularCubic);
    }
    if disc == 0 && f.exact_singular.is_none() {
        return Err(Error::SingularCubic);
    }
    let n = g.digits;
    let delta = (disc != 0).then(|| g.valuation(disc));
    let depth = 2 * delta.unwrap_or(n) + 1;
    let short = || Error::InsufficientPrecision {
        needed: depth,
        have: n,
    };

    // Balls r + p^j Z_p, refined through the roots mod p of g(r + p^j s)
    // divided by its content.
    let mut certified: Vec<(u64, u32, u32)> = Vec::new();
    let mut examined: u64 = 0;
    let mut level: Vec<u64> = vec![0];
    let mut j = 0u32;
    while !level.is_empty() {
        let mut next = Vec::new();
        for r in level {
            examined += 1;
            let g0 = g.valuation(g.g(r));
            let t = g.valuation(g.dg(r));
            if t < j && g0 >= j + t {
                certified.push((r, j, t));
                continue;
            }
            if j >= depth {
                continue;
            }
            if j == n {
                return Err(short());
            }
            let taylor = [g.g(r), g.dg(r), add_mod(mul_mod(3 % g.m, r, g.m), g.a, g.m), 1 % g.m];
            let scaled: Vec<u64> = taylor
                .iter()
                .enumerate()
                .map(|(i, &c)| match prime_power(p, i as u32 * j) {
                    Some(pij) if i as u32 * j < n => mul_mod(c, pij, g.m),
                    _ => 0,
                })
                .collect();
            let content = scaled.iter().map(|&d| g.valuation(d)).min().expect("four terms");
            if content >= n {
                return Err(short());
            }
            let pc = prime_power(p, content).expect("content < digits");
            let reduced: Vec<u64> = scaled.iter().map(|&d| (d / pc) % p).collect();
            let pj = prime_power(p, j).expect("j < digits");
            for s in fp::roots(&reduced, p) {
                next.push(r + s * pj);
            }
        }
        if examined as usize + next.len() > NODE_LIMIT {
            return Err(Error::Inconclusive(format!(
                "root search exceeded {NODE_LIMIT} balls at level {}",
                j + 1
            )));
        }
        level = next;
        j += 1;
    }

    let mut roots = Vec::with_capacity(certified.len());
    let mut cert_roots = Vec::with_capacity(certified.len());
    for &(r, lvl, t) in &certified {
        let (lifted, digits) = g.lift(r, t);
        let root = residue_to_padic(p, lifted, digits, scale)?;
        roots.push(root);
        cert_roots.push(CertifiedRoot {
            residue: r,
            level: lvl,
            derivative_valuation: t,
            root,
        });
    }
    let count = roots.len();
    if !matches!(count, 0 | 1 | 3) {
        return Err(Error::Inconsistency(format!(
            "separable cubic with {count} roots in Q_{p}"
        )));
    }
    Ok(RootReport {
        count,
        roots,
        certificate: RootCertificate {
            scale,
            working_digits: g.digits,
            discriminant_valuation: delta,
            depth,
            nodes_examined: examined,
            roots: cert_roots,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn count(p: u64, a: i64, b: i64, c: i64) -> usize {
        count_roots_cubic(&Cubic::from_ints(p, a, b, c).unwrap())
            .unwrap()
            .count
    }

    #[test]
    fn simple_counts() {
        assert_eq!(count(7, 0, 0, -2), 0);
        assert_eq!(count(5, 0, 0, -2), 1);
        assert_eq!(count(3, 0, -1, 0), 3);
        assert_eq!(count(2, 0, -1, 0), 3);
        // x^3 - x - 1 is irreducible mod 2 and 3.
        assert_eq!(count(2, 0, -1, -1), 0);
        assert_eq!(count(3, 0, -1, -1), 0);
        // x(x^2 - 2) over Q_7: 2 = 3^2 mod 7.
        assert_eq!(count(7, 0, -2, 0), 3);
        assert_eq!(count(5, 0, -2, 0), 1);
    }

    #[test]
    fn close_roots_are_separated() {
        // (x - 1)(x - 1 - 3^4)(x - 1 + 3^4) has three roots close together.
        let (r1, r2, r3) = (1i64, 82i64, -80i64);
        let a = -(r1 + r2 + r3);
        let b = r1 * r2 + r1 * r3 + r2 * r3;
        let c = -r1 * r2 * r3;
        let prec = max_precision(3);
        let coeffs = [a, b, c].map(|n| BigRational::from_integer(BigInt::from(n)));
        let rep = count_roots_cubic(&Cubic::from_rationals(3, &coeffs, prec).unwrap()).unwrap();
        assert_eq!(rep.count, 3);
        assert_eq!(rep.certificate.discriminant_valuation, Some(24));
    }

    #[test]
    fn nonintegral_coefficients() {
        // x^3 - x/4 = x(x - 1/2)(x + 1/2) over Q_2 and Q_3.
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        for p in [2u64, 3] {
            let f = Cubic::from_rationals(p, &[q(0, 1), q(-1, 4), q(0, 1)], default_precision(p))
                .unwrap();
            let rep = count_roots_cubic(&f).unwrap();
            assert_eq!(rep.count, 3, "p = {p}");
            for root in &rep.roots {
                let v = f.eval(root).unwrap();
                assert!(v.is_zero() || v.valuation().unwrap() >= 4);
            }
        }
    }

    #[test]
    fn lifted_roots_satisfy_cubic() {
        let f = Cubic::from_ints(5, 0, 0, -2).unwrap();
        let rep = count_roots_cubic(&f).unwrap();
        let root = rep.roots[0];
        let v = f.eval(&root).unwrap();
        assert!(v.is_zero() || v.valuation().unwrap() >= 8);
    }

    #[test]
    fn singular_detected() {
        let f = Cubic::from_ints(5, -2, 1, 0).unwrap(); // x(x - 1)^2
        assert_eq!(count_roots_cubic(&f), Err(Error::SingularCubic));
    }

    #[test]
    fn brute_force_agreement_small_coefficients() {
        // For p = 7 and coefficients in [-4, 4], compare with roots mod 7
        // whenever the discriminant is a unit (roots then lift uniquely).
        let p = 7u64;
        for a in -4i64..=4 {
            for b in -4i64..=4 {
                for c in -4i64..=4 {
                    let disc = a * a * b * b - 4 * b.pow(3) - 4 * a.pow(3) * c - 27 * c * c
                        + 18 * a * b * c;
                    if disc.rem_euclid(p as i64) == 0 {
                        continue;
                    }
                    let mod_roots = (0..p as i64)
                        .filter(|&x| (x.pow(3) + a * x * x + b * x + c).rem_euclid(p as i64) == 0)
                        .count();
                    assert_eq!(count(p, a, b, c), mod_roots, "{a} {b} {c}");
                }
            }
        }
    }

    #[test]
    fn large_primes() {
        let p = 4_294_967_291u64;
        let pi = p as i64;
        // (x - 1)(x - 2)(x - 5) and x^3 + x^2 + 2x + 3.
        assert_eq!(count_roots_cubic(&Cubic::from_ints(p, -8, 17, -10).unwrap()).unwrap().count, 3);
        assert_eq!(count(p, 1, 2, 3), 1);
        // x(x^2 - p) is x^3 to one digit, so nothing can be certified.
        let f = Cubic::from_ints(p, 0, -pi, 0).unwrap();
        assert!(matches!(count_roots_cubic(&f), Err(Error::InsufficientPrecision { .. })));
        // With three digits the discriminant still vanishes, but the search
        // separates 0 from the ramified pair.
        let q = 1_000_003u64;
        let rep = count_roots_cubic(&Cubic::from_ints(q, 0, -(q as i64), 0).unwrap()).unwrap();
        assert_eq!((rep.count, rep.certificate.discriminant_valuation), (1, None));
    }

    #[test]
    fn roots_divisible_by_p_are_rescaled() {
        // x^3 - 5^12 = 5^12 (y^3 - 1) with x = 5^4 y.
        let f = Cubic::from_ints(5, 0, 0, -244_140_625).unwrap();
        let rep = count_roots_cubic(&f).unwrap();
        assert_eq!(rep.count, 1);
        assert_eq!(rep.certificate.scale, -4);
        assert_eq!(rep.roots[0].valuation(), Some(4));
        // x^3 - 3^12 x has roots 0 and +-3^6.
        assert_eq!(count(3, 0, -531_441, 0), 3);
    }

    #[test]
    fn pair_shape() {
        let f = Cubic::from_ints(5, -3, -2, 4).unwrap();
        let (r, e) = f.translated_pair_shape().unwrap().unwrap();
        assert!(r.agrees_with(&PAdic::from_i64(5, 1, 12).unwrap()));
        assert!(e.agrees_with(&PAdic::from_i64(5, 5, 12).unwrap()));
        assert!(Cubic::from_ints(5, 0, 0, -2)
            .unwrap()
            .translated_pair_shape()
            .unwrap()
            .is_none());
    }
}
