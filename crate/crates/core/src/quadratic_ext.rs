//! Quadratic extensions `L = Q_p(√d)`: ramification, norms, the unit
//! filtration of a ramified `L/Q_2`, and the norm subgroup `N(L*) ⊂ Q_p*`.
//!
//! Elements of `L` are pairs `a + b√d` with `a, b ∈ Q_p`, where `d` is the
//! canonical square-class representative. When `L/Q_p` is ramified, `v_L`
//! is normalised so that `v_L(π_L) = 1`, which makes `v_L = v_p ∘ N`. For
//! unramified `L`, `v_L` restricts to `v_p` on `Q_p` and equals `v_p ∘ N / 2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::hilbert;
use crate::padic::{filtration_level, is_square, square_class, PAdic, SquareClass};

/// An element `a + b√d` of a quadratic extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadExtElem {
    d: PAdic,
    a: PAdic,
    b: PAdic,
}

impl QuadExtElem {
    pub fn new(ext: &QuadExt, a: PAdic, b: PAdic) -> Result<Self> {
        if a.p() != ext.p || b.p() != ext.p {
            return Err(Error::PrimeMismatch(a.p(), ext.p));
        }
        Ok(QuadExtElem { d: ext.d_value, a, b })
    }

    pub fn from_base(ext: &QuadExt, a: PAdic) -> Result<Self> {
        Self::new(ext, a, PAdic::zero(ext.p))
    }

    /// `√d` itself.
    pub fn sqrt_d(ext: &QuadExt) -> Result<Self> {
        Self::new(ext, PAdic::zero(ext.p), PAdic::one(ext.p, ext.precision)?)
    }

    /// `a + b√d` for integers `a`, `b`.
    pub fn from_ints(ext: &QuadExt, a: i64, b: i64) -> Result<Self> {
        Self::new(
            ext,
            PAdic::from_i64(ext.p, a, ext.precision)?,
            PAdic::from_i64(ext.p, b, ext.precision)?,
        )
    }

    pub fn a(&self) -> &PAdic {
        &self.a
    }

    pub fn b(&self) -> &PAdic {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn check(&self, other: &QuadExtElem) -> Result<()> {
        if !self.d.agrees_with(&other.d) {
            return Err(Error::Precondition(
                "elements belong to different quadratic extensions".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &QuadExtElem) -> Result<Self> {
        self.check(other)?;
        Ok(QuadExtElem {
            d: self.d,
            a: self.a.add_absorbing(&other.a)?,
            b: self.b.add_absorbing(&other.b)?,
        })
    }

    pub fn sub(&self, other: &QuadExtElem) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        QuadExtElem {
            d: self.d,
            a: self.a.neg(),
            b: self.b.neg(),
        }
    }

    /// The Galois conjugate `a - b√d`.
    pub fn conjugate(&self) -> Self {
        QuadExtElem {
            d: self.d,
            a: self.a,
            b: self.b.neg(),
        }
    }

    pub fn mul(&self, other: &QuadExtElem) -> Result<Self> {
        self.check(other)?;
        let (a1, b1, a2, b2) = (&self.a, &self.b, &other.a, &other.b);
        let db1b2 = self.d.checked_mul(b1)?.checked_mul(b2)?;
        let a = a1.checked_mul(a2)?.add_absorbing(&db1b2)?;
        let b = a1.checked_mul(b2)?.add_absorbing(&a2.checked_mul(b1)?)?;
        Ok(QuadExtElem { d: self.d, a, b })
    }

    pub fn scale(&self, c: &PAdic) -> Result<Self> {
        Ok(QuadExtElem {
            d: self.d,
            a: self.a.checked_mul(c)?,
            b: self.b.checked_mul(c)?,
        })
    }

    /// `N(a + b√d) = a^2 - d b^2`.
    pub fn norm(&self) -> Result<PAdic> {
        if self.is_zero() {
            return Err(Error::ZeroArgument("norm"));
        }
        let n = self
            .a
            .square()
            .sub_absorbing(&self.d.checked_mul(&self.b.square())?)?;
        if n.is_zero() {
            return Err(Error::PrecisionExhausted { p: self.d.p() });
        }
        Ok(n)
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.norm()?;
        self.conjugate().scale(&n.inverse()?)
    }

    pub fn div(&self, other: &QuadExtElem) -> Result<Self> {
        self.mul(&other.inverse()?)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let one = QuadExtElem {
            d: self.d,
            a: PAdic::one(self.d.p(), self.d.precision().unwrap())?,
            b: PAdic::zero(self.d.p()),
        };
        (0..k).try_fold(one, |acc, _| acc.mul(self))
    }
}

/// The subgroup `N(L*)/K*^2` of `K*/K*^2`, as a bit set over class indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NormGroup {
    p: u64,
    mask: u8,
}

impl NormGroup {
    fn trivial(p: u64) -> Self {
        NormGroup {
            p,
            mask: 1 << SquareClass::one(p).index(),
        }
    }

    pub fn contains(&self, c: &SquareClass) -> bool {
        c.p() == self.p && self.mask & (1 << c.index()) != 0
    }

    pub fn classes(&self) -> Vec<SquareClass> {
        SquareClass::all(self.p)
            .into_iter()
            .filter(|c| self.contains(c))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    /// Index in `K*/K*^2`.
    pub fn index(&self) -> usize {
        SquareClass::count(self.p) / self.len()
    }

    /// Closes the set under multiplication by `g`.
    fn adjoin(&mut self, g: SquareClass) {
        for c in self.classes() {
            self.mask |= 1 << c.mul(&g).index();
        }
    }
}

impl Serialize for NormGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.classes().serialize(s)
    }
}

/// `L = Q_p(√d)` for a non-square `d`.
#[derive(Clone, Debug)]
pub struct QuadExt {
    p: u64,
    d: SquareClass,
    d_value: PAdic,
    precision: u32,
    ramified: bool,
    pi_l: Option<QuadExtElem>,
    pi_k: Option<PAdic>,
    s: Option<u32>,
    norm_group: NormGroup,
}

impl QuadExt {
    /// Builds `Q_p(√d)`. The extension depends only on the square class of
    /// `d`; internally `d` is replaced by its canonical representative.
    pub fn new(d: &PAdic) -> Result<Self> {
        if is_square(d)? {
            return Err(Error::SquareDefiningElement);
        }
        let p = d.p();
        let class = square_class(d)?;
        let precision = d.precision().expect("nonzero");
        let d_value = class.to_padic(precision)?;
        let ramified = if p == 2 {
            class.representative() != 5
        } else {
            class.has_odd_valuation()
        };
        let mut ext = QuadExt {
            p,
            d: class,
            d_value,
            precision,
            ramified,
            pi_l: None,
            pi_k: None,
            s: None,
            norm_group: NormGroup::trivial(p),
        };
        if ramified {
            let pi_l = ext.choose_uniformiser()?;
            ext.pi_k = Some(pi_l.norm()?);
            ext.pi_l = Some(pi_l);
            if p == 2 {
                ext.s = Some(ext.compute_s()?);
            }
        }
        ext.norm_group = ext.compute_norm_group()?;
        Ok(ext)
    }

    /// `Q_p(√c)` for a nontrivial class `c`, at the default precision.
    pub fn from_class(c: SquareClass) -> Result<Self> {
        Self::new(&c.to_padic(crate::padic::default_precision(c.p()))?)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The defining class `d`.
    pub fn d(&self) -> SquareClass {
        self.d
    }

    pub fn d_value(&self) -> &PAdic {
        &self.d_value
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_ramified(&self) -> bool {
        self.ramified
    }

    pub fn uniformiser(&self) -> Option<&QuadExtElem> {
        self.pi_l.as_ref()
    }

    /// `N(π_L)`, a uniformiser of `Q_p` lying in the norm group.
    pub fn base_uniformiser(&self) -> Option<&PAdic> {
        self.pi_k.as_ref()
    }

    /// `s(L/Q_2)`: the largest `i` with `σ(π_L)/π_L ∈ U_{i,L}`. Present
    /// exactly when `p = 2` and `L` is ramified.
    pub fn s_invariant(&self) -> Option<u32> {
        self.s
    }

    pub fn norm_group(&self) -> &NormGroup {
        &self.norm_group
    }

    /// `v_L(x)` in the normalisation described in the module docs.
    pub fn valuation(&self, x: &QuadExtElem) -> Result<i64> {
        let n = x.norm()?.valuation().expect("nonzero norm");
        Ok(if self.ramified { n } else { n / 2 })
    }

    /// Uniformiser: `√d` when `v(d) = 1`; otherwise `1 + √d` if its norm has
    /// valuation 1, falling back to a scan over small `a + b√d`.
    fn choose_uniformiser(&self) -> Result<QuadExtElem> {
        if self.d.has_odd_valuation() {
            return QuadExtElem::sqrt_d(self);
        }
        let first = QuadExtElem::from_ints(self, 1, 1)?;
        if first.norm()?.valuation() == Some(1) {
            return Ok(first);
        }
        for a in 0..=4i64 {
            for b in 1..=4i64 {
                let x = QuadExtElem::from_ints(self, a, b)?;
                if x.norm()?.valuation() == Some(1) {
                    return Ok(x);
                }
            }
        }
        Err(Error::Inconsistency(
            "no uniformiser among small a + b√d".into(),
        ))
    }

    fn compute_s(&self) -> Result<u32> {
        let pi = self.pi_l.as_ref().expect("ramified");
        let ratio = pi.conjugate().div(pi)?;
        let one = QuadExtElem::from_base(self, PAdic::one(self.p, self.precision)?)?;
        let diff = one.sub(&ratio)?;
        if diff.is_zero() {
            return Err(Error::FiltrationCap(self.precision));
        }
        let s = self.valuation(&diff)?;
        if s < 1 {
            return Err(Error::Inconsistency(format!(
                "σ(π)/π has filtration level {s}"
            )));
        }
        Ok(s as u32)
    }

    /// Elements whose classes span `L*/L*^2`.
    ///
    /// Ramified: `π_L` and `1 + π_L^i` for `1 <= i <= 2e_L + 1` (odd `p`:
    /// `π_L` and the residues `1..p`). Unramified: `p`, representatives of
    /// the nonzero residues of `O_L/p` (odd `p`), or `ω = (1 + √5)/2` and
    /// `1 + θ 2^i` for `θ ∈ {1, ω}`, `i = 1, 2, 3` (`p = 2`).
    pub fn generators(&self) -> Result<Vec<QuadExtElem>> {
        let p = self.p;
        let prec = self.precision;
        let mut out = Vec::new();
        match (p == 2, self.ramified) {
            (true, true) => {
                let pi = *self.pi_l.as_ref().unwrap();
                out.push(pi);
                let one = QuadExtElem::from_ints(self, 1, 0)?;
                for i in 1..=5 {
                    out.push(one.add(&pi.pow(i)?)?);
                }
            }
            (true, false) => {
                out.push(QuadExtElem::from_ints(self, 2, 0)?);
                let half = PAdic::from_rational(
                    2,
                    &num_rational::BigRational::new(1.into(), 2.into()),
                    prec,
                )?;
                let omega = QuadExtElem::new(self, half, half)?;
                out.push(omega);
                let one = QuadExtElem::from_ints(self, 1, 0)?;
                for i in 1..=3 {
                    let two_i = PAdic::new(2, i, 1, prec)?;
                    out.push(one.add(&QuadExtElem::from_base(self, two_i)?)?);
                    out.push(one.add(&omega.scale(&two_i)?)?);
                }
            }
            (false, true) => {
                out.push(*self.pi_l.as_ref().unwrap());
                for a in 1..p.min(64) as i64 {
                    out.push(QuadExtElem::from_ints(self, a, 0)?);
                }
            }
            (false, false) => {
                out.push(QuadExtElem::from_ints(self, p as i64, 0)?);
                let bound = p.min(64) as i64;
                for a in 0..bound {
                    for b in 0..bound {
                        if a == 0 && b == 0 {
                            continue;
                        }
                        out.push(QuadExtElem::from_ints(self, a, b)?);
                    }
                }
            }
        }
        Ok(out)
    }

    fn compute_norm_group(&self) -> Result<NormGroup> {
        let mut group = NormGroup::trivial(self.p);
        for g in self.generators()? {
            group.adjoin(square_class(&g.norm()?)?);
        }
        if group.index() != 2 || group.len() * 2 != SquareClass::count(self.p) {
            return Err(Error::NormIndex(SquareClass::count(self.p) / group.len()));
        }
        Ok(group)
    }

    /// `x ∈ N(L*)`, by membership of its class in the norm group.
    pub fn is_norm(&self, x: &PAdic) -> Result<bool> {
        if x.p() != self.p {
            return Err(Error::PrimeMismatch(x.p(), self.p));
        }
        Ok(self.norm_group.contains(&square_class(x)?))
    }

    /// `x ∈ N(L*)` via the Hilbert symbol `(x, d) = +1`.
    pub fn is_norm_by_symbol(&self, x: &PAdic) -> Result<bool> {
        Ok(hilbert(x, &self.d_value)?.0.is_plus())
    }

    /// `x ∈ N(L*)` via valuation criteria: for unramified `L`, `v(x)` even;
    /// for ramified `L` and odd `p`, `x / π_K^{v(x)}` a square. `None` for
    /// ramified `L/Q_2`, where no such criterion applies.
    pub fn is_norm_by_valuation(&self, x: &PAdic) -> Result<Option<bool>> {
        let v = x.valuation().ok_or(Error::ZeroArgument("is_norm"))?;
        if !self.ramified {
            return Ok(Some(v.rem_euclid(2) == 0));
        }
        if self.p == 2 {
            return Ok(None);
        }
        let pi_k = self.pi_k.as_ref().unwrap();
        let mut y = x.unit_part()?;
        if v.rem_euclid(2) == 1 {
            let p = PAdic::uniformiser(self.p, self.precision)?;
            y = y.checked_mul(&p.checked_div(pi_k)?)?;
        }
        Ok(Some(is_square(&y)?))
    }

    /// `λ_{i,L}(1 + θ π_L^i) = θ mod π_L` on `U_{i,L}`, for ramified `L/Q_2`
    /// (residue field `F_2`).
    pub fn lambda(&self, i: u32, x: &QuadExtElem) -> Result<u8> {
        if !(self.p == 2 && self.ramified) {
            return Err(Error::Precondition(
                "λ on L is implemented for ramified L/Q_2".into(),
            ));
        }
        if i == 0 || i >= self.precision {
            return Err(Error::Precondition(format!("level {i} out of range")));
        }
        if self.valuation(x)? != 0 {
            return Err(Error::NotAUnit);
        }
        let one = QuadExtElem::from_ints(self, 1, 0)?;
        let diff = x.sub(&one)?;
        if diff.is_zero() {
            return Ok(0);
        }
        let level = self.valuation(&diff)?;
        match level.cmp(&(i as i64)) {
            std::cmp::Ordering::Less => Err(Error::NotInFiltration { level: i }),
            std::cmp::Ordering::Equal => Ok(1),
            std::cmp::Ordering::Greater => Ok(0),
        }
    }
}

/// `λ_{i,K}(1 + θ π^i) = θ mod p` on `U_{i,K}` with respect to `uniformiser`.
pub fn lambda_base(i: u32, x: &PAdic, uniformiser: &PAdic) -> Result<u64> {
    if uniformiser.valuation() != Some(1) {
        return Err(Error::Precondition("not a uniformiser".into()));
    }
    let prec = x.precision().ok_or(Error::ZeroArgument("lambda"))?;
    if i == 0 || i >= prec {
        return Err(Error::Precondition(format!("level {i} out of range")));
    }
    let level = match filtration_level(x) {
        Ok(l) => l,
        Err(Error::FiltrationCap(_)) => return Ok(0),
        Err(e) => return Err(e),
    };
    if level < i {
        return Err(Error::NotInFiltration { level: i });
    }
    if level > i {
        return Ok(0);
    }
    let one = PAdic::one(x.p(), prec)?;
    let mut pi_i = PAdic::one(x.p(), prec)?;
    for _ in 0..i {
        pi_i = pi_i.checked_mul(uniformiser)?;
    }
    let theta = x.checked_sub(&one)?.checked_div(&pi_i)?;
    Ok(theta.unit().expect("unit θ") % x.p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::default_precision;

    fn q(p: u64, n: i64) -> PAdic {
        PAdic::from_i64(p, n, default_precision(p)).unwrap()
    }

    fn ext(p: u64, d: i64) -> QuadExt {
        QuadExt::new(&q(p, d)).unwrap()
    }

    #[test]
    fn ramification() {
        assert!(ext(5, 5).is_ramified());
        assert!(!ext(5, 2).is_ramified());
        assert!(!ext(2, 5).is_ramified());
        assert!(!ext(2, 13).is_ramified());
        let l = ext(2, -1);
        assert!(l.is_ramified());
        assert_eq!(l.s_invariant(), Some(1));
        assert_eq!(ext(2, 2).s_invariant(), Some(2));
        assert_eq!(ext(2, -5).s_invariant(), Some(1));
        assert_eq!(ext(2, 3).s_invariant(), Some(1));
        assert_eq!(ext(5, 5).s_invariant(), None);
    }

    #[test]
    fn square_is_rejected() {
        assert_eq!(
            QuadExt::new(&q(2, 17)).unwrap_err(),
            Error::SquareDefiningElement
        );
        assert_eq!(
            QuadExt::new(&q(7, 2)).unwrap_err(),
            Error::SquareDefiningElement
        );
    }

    #[test]
    fn norms() {
        let l = ext(2, -1);
        let sqrt = QuadExtElem::sqrt_d(&l).unwrap();
        assert!(sqrt.norm().unwrap().agrees_with(&q(2, 1)));
        let one = QuadExtElem::from_ints(&l, 1, 0).unwrap();
        assert!(one.norm().unwrap().agrees_with(&q(2, 1)));
        let x = QuadExtElem::from_ints(&l, 1, 1).unwrap();
        assert!(x.norm().unwrap().agrees_with(&q(2, 2)));
        assert_eq!(
            QuadExtElem::from_ints(&l, 0, 0).unwrap().norm(),
            Err(Error::ZeroArgument("norm"))
        );

        let l = ext(7, 3);
        let sqrt = QuadExtElem::sqrt_d(&l).unwrap();
        assert!(sqrt.norm().unwrap().agrees_with(&q(7, -3)));
    }

    #[test]
    fn norm_is_multiplicative() {
        let l = ext(3, 6);
        for (a, b, c, e) in [(1, 2, 3, 4), (5, -1, 2, 7), (9, 3, -2, 1)] {
            let x = QuadExtElem::from_ints(&l, a, b).unwrap();
            let y = QuadExtElem::from_ints(&l, c, e).unwrap();
            let lhs = x.mul(&y).unwrap().norm().unwrap();
            let rhs = x.norm().unwrap().checked_mul(&y.norm().unwrap()).unwrap();
            assert!(lhs.agrees_with(&rhs));
        }
    }

    #[test]
    fn norm_groups() {
        let reps = |l: &QuadExt| {
            let mut v: Vec<i64> = l.norm_group().classes().iter().map(|c| c.representative()).collect();
            v.sort();
            v
        };
        assert_eq!(reps(&ext(2, 5)), vec![-5, -1, 1, 5]);
        assert_eq!(reps(&ext(2, -1)), vec![1, 2, 5, 10]);
        assert_eq!(reps(&ext(2, 2)), vec![-2, -1, 1, 2]);
        assert_eq!(reps(&ext(3, 2)), vec![1, 2]);
        assert_eq!(reps(&ext(7, 3)), vec![1, 3]);
        // Ramified, odd p: generated by N(√d) = -d.
        assert_eq!(reps(&ext(5, 5)), vec![1, 5]);
    }

    #[test]
    fn is_norm_examples() {
        let l = ext(3, 2);
        assert!(!l.is_norm(&q(3, 3)).unwrap());
        for d in [2, -1, 5, -5, 10, 6, 3] {
            let l = ext(2, d);
            assert!(l.is_norm(&q(2, -d)).unwrap(), "-{d} is N(√{d})");
        }
        // -1 = N(1 + √2), confirmed by the symbol (-1, 2)_2 = +1.
        assert!(ext(2, 2).is_norm(&q(2, -1)).unwrap());
        assert!(ext(2, 2).is_norm_by_symbol(&q(2, -1)).unwrap());
        assert!(!ext(2, -1).is_norm(&q(2, -1)).unwrap());
        assert!(!ext(2, 2).is_norm(&q(2, 5)).unwrap());
    }

    #[test]
    fn three_routes_agree() {
        for p in [2u64, 3, 5, 7] {
            for d in SquareClass::all(p).into_iter().filter(|c| !c.is_trivial()) {
                let l = QuadExt::from_class(d).unwrap();
                for x in SquareClass::all(p) {
                    let xv = x.to_padic(default_precision(p)).unwrap();
                    let a = l.is_norm(&xv).unwrap();
                    assert_eq!(a, l.is_norm_by_symbol(&xv).unwrap(), "p={p} d={d} x={x}");
                    if let Some(b) = l.is_norm_by_valuation(&xv).unwrap() {
                        assert_eq!(a, b, "p={p} d={d} x={x}");
                    }
                }
            }
        }
    }

    #[test]
    fn lambda_examples() {
        let two = q(2, 2);
        assert_eq!(lambda_base(1, &q(2, 3), &two).unwrap(), 1);
        assert_eq!(lambda_base(1, &q(2, 1), &two).unwrap(), 0);
        assert_eq!(lambda_base(2, &q(2, 5), &two).unwrap(), 1);
        assert_eq!(lambda_base(1, &q(2, 5), &two).unwrap(), 0);
        assert_eq!(
            lambda_base(2, &q(2, 3), &two),
            Err(Error::NotInFiltration { level: 2 })
        );

        let l = ext(2, -1);
        let pi = *l.uniformiser().unwrap();
        let one = QuadExtElem::from_ints(&l, 1, 0).unwrap();
        let x = one.add(&pi).unwrap();
        assert_eq!(l.lambda(1, &x).unwrap(), 1);
        assert_eq!(l.lambda(1, &one).unwrap(), 0);
        let y = one.add(&pi.pow(2).unwrap()).unwrap();
        assert_eq!(l.lambda(1, &y).unwrap(), 0);
        assert_eq!(l.lambda(2, &y).unwrap(), 1);
        assert_eq!(l.lambda(2, &x), Err(Error::NotInFiltration { level: 2 }));
    }

    #[test]
    fn uniformisers_have_valuation_one() {
        for d in [-1i64, -5, 2, -2, 10, -10] {
            let l = ext(2, d);
            let pi = l.uniformiser().unwrap();
            assert_eq!(l.valuation(pi).unwrap(), 1);
            let pk = l.base_uniformiser().unwrap();
            assert_eq!(pk.valuation(), Some(1));
            assert!(l.is_norm(pk).unwrap());
        }
    }
}
