//! The Hilbert symbol `(a, b)_p` over `Q_p`.
//!
//! Three independent evaluations are provided: the closed dyadic formula in
//! terms of `ε` and `ω`, the odd-`p` criterion through norms from `Q_p(√b)`,
//! and a certified search for a nontrivial zero of `a X^2 + b Y^2 - Z^2`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::modarith::{add_mod, mul_mod, neg_mod, prime_power, val_u64};
use crate::padic::{epsilon_residue, is_square, omega_residue, square_class, PAdic, SquareClass};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolValue {
    Plus,
    Minus,
}

impl SymbolValue {
    pub fn from_sign_bit(bit: u8) -> Self {
        if bit & 1 == 0 {
            SymbolValue::Plus
        } else {
            SymbolValue::Minus
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            SymbolValue::Plus => 1,
            SymbolValue::Minus => -1,
        }
    }

    pub fn is_plus(self) -> bool {
        self == SymbolValue::Plus
    }

    pub fn times(self, other: SymbolValue) -> SymbolValue {
        if self == other {
            SymbolValue::Plus
        } else {
            SymbolValue::Minus
        }
    }
}

impl fmt::Display for SymbolValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

impl Serialize for SymbolValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_i8())
    }
}

/// Which evaluation produced a symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    DyadicFormula,
    OddNormCriterion,
    ConicSearch,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::DyadicFormula => "dyadic epsilon/omega formula",
            Route::OddNormCriterion => "norm criterion for odd p",
            Route::ConicSearch => "certified conic search",
        })
    }
}

fn classes(a: &PAdic, b: &PAdic) -> Result<(SquareClass, SquareClass)> {
    if a.p() != b.p() {
        return Err(Error::PrimeMismatch(a.p(), b.p()));
    }
    Ok((square_class(a)?, square_class(b)?))
}

/// `(a, b)_2 = (-1)^{ε(u)ε(v) + ω(v)α + ω(u)β}` for `a = 2^α u`, `b = 2^β v`.
pub fn hilbert_2(a: &PAdic, b: &PAdic) -> Result<SymbolValue> {
    if a.p() != 2 || b.p() != 2 {
        return Err(Error::Precondition("hilbert_2 needs p = 2".into()));
    }
    let (ca, cb) = classes(a, b)?;
    Ok(hilbert_2_classes(ca, cb))
}

fn hilbert_2_classes(a: SquareClass, b: SquareClass) -> SymbolValue {
    let unit_mod_8 = |c: SquareClass| {
        let r = c.representative();
        let r = if c.has_odd_valuation() { r / 2 } else { r };
        r.rem_euclid(8) as u64
    };
    let (u, v) = (unit_mod_8(a), unit_mod_8(b));
    let (alpha, beta) = (a.has_odd_valuation() as u8, b.has_odd_valuation() as u8);
    let exponent = epsilon_residue(u) * epsilon_residue(v)
        + omega_residue(v) * alpha
        + omega_residue(u) * beta;
    SymbolValue::from_sign_bit(exponent)
}

/// Odd `p`: `(a, b) = +1` iff `a` is a norm from `Q_p(√b)`. For unramified
/// `Q_p(√b)` that means `v(a)` even; for ramified, with `π = N(√b') = -b'`
/// (`b'` the class representative of valuation 1), that `a / π^{v(a)}` is
/// a square.
pub fn hilbert_odd(a: &PAdic, b: &PAdic) -> Result<SymbolValue> {
    if a.p() == 2 {
        return Err(Error::Precondition("hilbert_odd needs odd p".into()));
    }
    let (ca, cb) = classes(a, b)?;
    if cb.is_trivial() {
        return Ok(SymbolValue::Plus);
    }
    if !cb.has_odd_valuation() {
        return Ok(SymbolValue::from_sign_bit(ca.has_odd_valuation() as u8));
    }
    let prec = a.precision().unwrap().min(b.precision().unwrap());
    let pi_k = cb.to_padic(prec)?.neg();
    let mut stripped = a.unit_part()?;
    if ca.has_odd_valuation() {
        // a / π^{v(a)} ≡ (a / p^{v(a)}) · (p / π) modulo squares.
        let p_over_pi = PAdic::uniformiser(a.p(), prec)?.checked_div(&pi_k)?;
        stripped = stripped.checked_mul(&p_over_pi)?;
    }
    Ok(SymbolValue::from_sign_bit((!is_square(&stripped)?) as u8))
}

/// Closed-form symbol: the dyadic formula at `p = 2`, the norm criterion otherwise.
pub fn hilbert(a: &PAdic, b: &PAdic) -> Result<(SymbolValue, Route)> {
    if a.p() == 2 {
        Ok((hilbert_2(a, b)?, Route::DyadicFormula))
    } else {
        Ok((hilbert_odd(a, b)?, Route::OddNormCriterion))
    }
}

/// The closed-form symbol evaluated on class representatives.
pub fn hilbert_classes(a: SquareClass, b: SquareClass) -> SymbolValue {
    assert_eq!(a.p(), b.p());
    let p = a.p();
    if p == 2 {
        return hilbert_2_classes(a, b);
    }
    let prec = crate::padic::default_precision(p);
    let (x, y) = (a.to_padic(prec).unwrap(), b.to_padic(prec).unwrap());
    hilbert_odd(&x, &y).expect("class representatives are valid inputs")
}

/// Largest prime accepted by [`hilbert_oracle`]; about a second at the top.
pub const ORACLE_PRIME_LIMIT: u64 = 4096;

/// Evidence produced by [`hilbert_oracle`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConicCertificate {
    pub value: SymbolValue,
    /// Residues are taken modulo `p^depth`.
    pub depth: u32,
    /// For `+1`: a primitive residue triple `(X, Y, Z)` modulo `p^depth`
    /// of `a' X^2 + b' Y^2 - Z^2` that Hensel-lifts to a true zero.
    pub point: Option<[u64; 3]>,
    /// Valuation of the partial derivative used for lifting.
    pub lifting_valuation: Option<u32>,
    /// Total residue classes evaluated.
    pub examined: u64,
}

/// Decides `(a, b)_p` by looking for a nontrivial zero of `a X^2 + b Y^2 - Z^2`.
///
/// `a` and `b` are first multiplied by even powers of `p` so their
/// valuations are 0 or 1. Any nontrivial zero can be scaled to a primitive
/// triple and then to one with its first unit coordinate equal to 1. At
/// such a triple some partial derivative (`2aX`, `2bY` or `-2Z`) has
/// valuation at most `T = v(2) + max(v(a), v(b))`, so the residue of the
/// zero modulo `p^{2T+1}` passes the Hensel test `v(F) > 2 v(∂F)`.
/// Conversely every residue passing that test lifts. The search descends
/// digit by digit, keeping only residues with `F ≡ 0`, and answers `-1`
/// only after every branch has been closed at depth `2T+1`.
pub fn hilbert_oracle(a: &PAdic, b: &PAdic) -> Result<ConicCertificate> {
    if a.p() != b.p() {
        return Err(Error::PrimeMismatch(a.p(), b.p()));
    }
    let p = a.p();
    if p > ORACLE_PRIME_LIMIT {
        return Err(Error::Precondition(format!(
            "the conic search visits about p^2 residues per level and is limited to p <= {ORACLE_PRIME_LIMIT}"
        )));
    }
    let reduce = |x: &PAdic| -> Result<(PAdic, u32)> {
        let v = x.valuation().ok_or(Error::ZeroArgument("hilbert_oracle"))?;
        let odd = v.rem_euclid(2);
        Ok((x.shift(odd - v), odd as u32))
    };
    let (a1, va) = reduce(a)?;
    let (b1, vb) = reduce(b)?;
    let v2 = (p == 2) as u32;
    let bound = v2 + va.max(vb);
    let depth = 2 * bound + 1;
    let have = a1.precision().unwrap().min(b1.precision().unwrap());
    if have < depth {
        return Err(Error::Inconclusive(format!(
            "inputs carry {have} digits, the search needs {depth}"
        )));
    }
    let coeffs = [a1.residue_mod(depth)?, b1.residue_mod(depth)?];
    let mut search = ConicSearch {
        p,
        depth,
        modulus: prime_power(p, depth).expect("depth within precision"),
        coeffs,
        examined: 0,
    };
    for chart in 0..3 {
        if let Some((point, t)) = search.run_chart(chart) {
            return Ok(ConicCertificate {
                value: SymbolValue::Plus,
                depth,
                point: Some(point),
                lifting_valuation: Some(t),
                examined: search.examined,
            });
        }
    }
    Ok(ConicCertificate {
        value: SymbolValue::Minus,
        depth,
        point: None,
        lifting_valuation: None,
        examined: search.examined,
    })
}

struct ConicSearch {
    p: u64,
    depth: u32,
    modulus: u64,
    coeffs: [u64; 2],
    examined: u64,
}

impl ConicSearch {
    fn form(&self, x: [u64; 3]) -> u64 {
        let m = self.modulus;
        let ax = mul_mod(self.coeffs[0], mul_mod(x[0], x[0], m), m);
        let by = mul_mod(self.coeffs[1], mul_mod(x[1], x[1], m), m);
        add_mod(add_mod(ax, by, m), neg_mod(mul_mod(x[2], x[2], m), m), m)
    }

    fn gradient(&self, x: [u64; 3]) -> [u64; 3] {
        let m = self.modulus;
        [
            mul_mod(2 * self.coeffs[0] % m, x[0], m),
            mul_mod(2 * self.coeffs[1] % m, x[1], m),
            neg_mod(mul_mod(2, x[2], m), m),
        ]
    }

    /// `v_p(n mod p^j)`, or `None` when it vanishes to that depth.
    fn val_at(&self, n: u64, j: u32) -> Option<u32> {
        let mj = prime_power(self.p, j).unwrap();
        let n = n % mj;
        (n != 0).then(|| val_u64(n, self.p))
    }

    /// Searches triples with coordinate `chart` equal to 1 and the earlier
    /// coordinates divisible by `p`.
    fn run_chart(&mut self, chart: usize) -> Option<([u64; 3], u32)> {
        let p = self.p;
        let mut base = [0u64; 3];
        base[chart] = 1;
        let free = [free_coord(chart, 0), free_coord(chart, 1)];
        let mut level: Vec<[u64; 3]> = vec![base];
        for j in 1..=self.depth {
            let step = prime_power(p, j - 1).unwrap();
            let mj = prime_power(p, j).unwrap();
            let mut next = Vec::new();
            for x in &level {
                for d1 in 0..p {
                    for d2 in 0..p {
                        // Coordinates before the pinned one are divisible by p.
                        if j == 1 && ((free[0] < chart && d1 != 0) || (free[1] < chart && d2 != 0)) {
                            continue;
                        }
                        let mut y = *x;
                        y[free[0]] += d1 * step;
                        y[free[1]] += d2 * step;
                        self.examined += 1;
                        if !self.form(y).is_multiple_of(mj) {
                            continue;
                        }
                        let grad = self.gradient(y);
                        let t = grad.iter().filter_map(|&g| self.val_at(g, j)).min();
                        if let Some(t) = t {
                            if 2 * t < j {
                                return Some((y, t));
                            }
                        }
                        next.push(y);
                    }
                }
            }
            if next.is_empty() {
                return None;
            }
            level = next;
        }
        None
    }
}

/// The `slot`-th free coordinate in the chart that pins coordinate `chart`.
fn free_coord(chart: usize, slot: usize) -> usize {
    [0usize, 1, 2]
        .into_iter()
        .filter(|&i| i != chart)
        .nth(slot)
        .expect("two free coordinates")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::default_precision;

    fn q(p: u64, n: i64) -> PAdic {
        PAdic::from_i64(p, n, default_precision(p)).unwrap()
    }

    #[test]
    fn dyadic_examples() {
        assert_eq!(hilbert_2(&q(2, -1), &q(2, -1)).unwrap(), SymbolValue::Minus);
        assert_eq!(hilbert_2(&q(2, 2), &q(2, 7)).unwrap(), SymbolValue::Plus);
        assert_eq!(hilbert_2(&q(2, 9), &q(2, 6)).unwrap(), SymbolValue::Plus);
        assert_eq!(hilbert_2(&q(2, 2), &q(2, 5)).unwrap(), SymbolValue::Minus);
    }

    #[test]
    fn odd_examples() {
        assert_eq!(hilbert_odd(&q(3, 3), &q(3, 2)).unwrap(), SymbolValue::Minus);
        assert_eq!(hilbert_odd(&q(5, -5), &q(5, 5)).unwrap(), SymbolValue::Plus);
        for b in 1..30 {
            assert_eq!(hilbert_odd(&q(7, 1), &q(7, b)).unwrap(), SymbolValue::Plus);
        }
        // (p, p)_p = (p, -1)_p = +1 iff -1 is a square mod p.
        assert_eq!(hilbert_odd(&q(5, 5), &q(5, 5)).unwrap(), SymbolValue::Plus);
        assert_eq!(hilbert_odd(&q(3, 3), &q(3, 3)).unwrap(), SymbolValue::Minus);
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(hilbert_oracle(&q(2, 1), &q(2, 1)).unwrap().value, SymbolValue::Plus);
        let c = hilbert_oracle(&q(2, -1), &q(2, -1)).unwrap();
        assert_eq!(c.value, SymbolValue::Minus);
        assert_eq!(c.depth, 3);
        assert_eq!(
            hilbert_oracle(&q(5, 5), &q(5, 2)).unwrap().value,
            hilbert_odd(&q(5, 5), &q(5, 2)).unwrap()
        );
        assert_eq!(hilbert_oracle(&q(2, 2), &q(2, 7)).unwrap().value, SymbolValue::Plus);
    }

    #[test]
    fn oracle_point_is_a_residue_zero() {
        let (a, b) = (q(2, 2), q(2, -2));
        let c = hilbert_oracle(&a, &b).unwrap();
        let pt = c.point.expect("(a, -a) = +1");
        let m = 1i128 << c.depth;
        let f = 2 * (pt[0] as i128).pow(2) - 2 * (pt[1] as i128).pow(2) - (pt[2] as i128).pow(2);
        assert_eq!(f.rem_euclid(m), 0);
    }

    #[test]
    fn oracle_needs_digits() {
        let a = PAdic::from_i64(2, 3, 3).unwrap();
        let b = PAdic::from_i64(2, 2, 3).unwrap();
        assert!(matches!(hilbert_oracle(&a, &b), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn zero_rejected() {
        assert!(hilbert_2(&PAdic::zero(2), &q(2, 3)).is_err());
        assert!(hilbert_oracle(&q(3, 1), &PAdic::zero(3)).is_err());
    }

    #[test]
    fn classes_agree_with_formula_on_padics() {
        for p in [2u64, 3, 5] {
            for a in SquareClass::all(p) {
                for b in SquareClass::all(p) {
                    let (x, y) = (a.to_padic(8).unwrap(), b.to_padic(8).unwrap());
                    assert_eq!(hilbert_classes(a, b), hilbert(&x, &y).unwrap().0);
                }
            }
        }
    }

    #[test]
    fn oracle_agrees_on_all_class_pairs() {
        for p in [2u64, 3, 5, 7, 13] {
            for a in SquareClass::all(p) {
                for b in SquareClass::all(p) {
                    let (x, y) = (a.to_padic(8).unwrap(), b.to_padic(8).unwrap());
                    let cert = hilbert_oracle(&x, &y).unwrap();
                    assert_eq!(cert.value, hilbert(&x, &y).unwrap().0, "p={p} ({a},{b})");
                }
            }
        }
    }
}
