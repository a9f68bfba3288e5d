//! The map `χ : M → (Z/2)^2` and a brute-force witness search.
//!
//! `M = { x ∈ K* : x(x^2 - e) ∈ N(L*) } ∪ {0}`. For `x ≠ 0`,
//! `χ(x) = ([x], [x^2 - e])` in `K*/N(L*)`, the second coordinate being the
//! image of `x - √e` transported through `N_{E/K}`. For `x = 0` both
//! coordinates come from `-e`. When `L ≅ E` the second factor is trivial.
//!
//! A witness is an `x ∈ M` with `χ(x) = (1, 1)`; one exists exactly when
//! `A_0(X)_0 ≅ Z/2`.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::chatelet::{classify_cubic, classify_pair, LocalChowResult, Outcome};
use crate::cubic::Cubic;
use crate::error::{Error, Result};
use crate::padic::modarith::prime_power;
use crate::padic::{format_rational, is_square, square_class, PAdic};
use crate::quadratic_ext::QuadExt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChiValue {
    pub first: u8,
    pub second: u8,
}

impl ChiValue {
    pub const ZERO: ChiValue = ChiValue { first: 0, second: 0 };
    pub const DIAGONAL: ChiValue = ChiValue { first: 1, second: 1 };

    pub fn is_diagonal(&self) -> bool {
        self.first == self.second
    }
}

impl fmt::Display for ChiValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}

impl Serialize for ChiValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.first, self.second].serialize(s)
    }
}

/// The norm checks behind an M-membership decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MembershipCertificate {
    /// `x(x^2 - e) ∈ N(L*)`; always true for `x = 0`.
    pub product_is_norm: bool,
    /// `x ∈ N(L*)`, or `-e ∈ N(L*)` for `x = 0`.
    pub first_is_norm: bool,
    /// `x^2 - e ∈ N(L*)`, or `-e ∈ N(L*)` for `x = 0`.
    pub second_is_norm: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// `x` as an exact rational.
    pub x: WitnessValue,
    pub chi: ChiValue,
    pub certificate: MembershipCertificate,
}

/// A grid point, displayed as a rational number.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WitnessValue(pub PAdic);

impl fmt::Display for WitnessValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0.to_rational()))
    }
}

impl Serialize for WitnessValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Valuations `-m..=m` crossed with units modulo `p^k`, plus `x = 0`.
/// Only the `max_units` smallest unit residues are used, so large primes
/// get a bounded sample rather than all of `(Z/p^k)^*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchGrid {
    pub window: u32,
    pub depth: u32,
    pub max_units: u64,
}

impl SearchGrid {
    pub const DEFAULT_WINDOW: u32 = 6;
    pub const DEFAULT_MAX_UNITS: u64 = 2048;

    pub fn default_for(p: u64) -> Self {
        SearchGrid {
            window: Self::DEFAULT_WINDOW,
            depth: if p == 2 { 5 } else { 2 },
            max_units: Self::DEFAULT_MAX_UNITS,
        }
    }

    pub fn with_window(p: u64, window: u32) -> Self {
        SearchGrid {
            window,
            ..Self::default_for(p)
        }
    }

    /// Grid points in enumeration order: `|v|` ascending, `+v` before `-v`,
    /// unit residues ascending, and `0` last. A depth beyond `precision` is
    /// cut back to it.
    pub fn points(&self, p: u64, precision: u32) -> Result<Vec<PAdic>> {
        let depth = self.depth.min(precision);
        // Residues never reach p^k when it overflows, so u64::MAX stands in.
        let modulus = prime_power(p, depth).unwrap_or(u64::MAX);
        let units: Vec<u64> = (1..modulus)
            .filter(|u| u % p != 0)
            .take(self.max_units as usize)
            .collect();
        let mut out = Vec::with_capacity(units.len() * (2 * self.window as usize + 1) + 1);
        for a in 0..=i64::from(self.window) {
            let vals: &[i64] = if a == 0 { &[0] } else { &[a, -a] };
            for &v in vals {
                for &u in &units {
                    out.push(PAdic::new(p, v, u, precision)?);
                }
            }
        }
        out.push(PAdic::zero(p));
        Ok(out)
    }
}

/// `L = Q_p(√d)` together with `e`, prepared for repeated `χ` evaluations.
#[derive(Clone, Debug)]
pub struct ChiContext {
    l: QuadExt,
    e: PAdic,
    minus_e_is_norm: bool,
    isomorphic: bool,
}

impl ChiContext {
    pub fn new(d: &PAdic, e: &PAdic) -> Result<Self> {
        if d.p() != e.p() {
            return Err(Error::PrimeMismatch(d.p(), e.p()));
        }
        if e.is_zero() {
            return Err(Error::ZeroArgument("chi with e = 0"));
        }
        if is_square(e)? {
            return Err(Error::SplitCase);
        }
        Self::with_extension(QuadExt::new(d)?, e)
    }

    /// Reuses a prepared `L`, for sweeps over many `e`.
    pub fn with_extension(l: QuadExt, e: &PAdic) -> Result<Self> {
        if l.p() != e.p() {
            return Err(Error::PrimeMismatch(l.p(), e.p()));
        }
        if e.is_zero() {
            return Err(Error::ZeroArgument("chi with e = 0"));
        }
        if is_square(e)? {
            return Err(Error::SplitCase);
        }
        let isomorphic = square_class(e)? == l.d();
        let minus_e_is_norm = l.is_norm(&e.neg())?;
        Ok(ChiContext {
            l,
            e: *e,
            minus_e_is_norm,
            isomorphic,
        })
    }

    pub fn extension(&self) -> &QuadExt {
        &self.l
    }

    pub fn e(&self) -> &PAdic {
        &self.e
    }

    pub fn p(&self) -> u64 {
        self.l.p()
    }

    /// `L ≅ E`.
    pub fn is_isomorphic(&self) -> bool {
        self.isomorphic
    }

    /// The norm checks for `x`, without deciding membership.
    pub fn certificate(&self, x: &PAdic) -> Result<MembershipCertificate> {
        if x.is_zero() {
            return Ok(MembershipCertificate {
                product_is_norm: true,
                first_is_norm: self.minus_e_is_norm,
                second_is_norm: self.minus_e_is_norm,
            });
        }
        let q = x.square().checked_sub(&self.e)?;
        let first_is_norm = self.l.is_norm(x)?;
        let second_is_norm = self.l.is_norm(&q)?;
        let product_is_norm = self.l.is_norm(&x.checked_mul(&q)?)?;
        if product_is_norm != (first_is_norm == second_is_norm) {
            return Err(Error::Inconsistency(
                "norm group is not a subgroup of index 2".into(),
            ));
        }
        Ok(MembershipCertificate {
            product_is_norm,
            first_is_norm,
            second_is_norm,
        })
    }

    pub fn in_m(&self, x: &PAdic) -> Result<bool> {
        Ok(self.certificate(x)?.product_is_norm)
    }

    /// `χ(x)` with its certificate; [`Error::NotInM`] for `x ∉ M`.
    pub fn evaluate(&self, x: &PAdic) -> Result<(ChiValue, MembershipCertificate)> {
        let cert = self.certificate(x)?;
        if !cert.product_is_norm {
            return Err(Error::NotInM);
        }
        let first = u8::from(!cert.first_is_norm);
        let second = if self.isomorphic {
            0
        } else {
            u8::from(!cert.second_is_norm)
        };
        Ok((ChiValue { first, second }, cert))
    }

    pub fn chi(&self, x: &PAdic) -> Result<ChiValue> {
        Ok(self.evaluate(x)?.0)
    }

    fn grid(&self, grid: &SearchGrid) -> Result<Vec<PAdic>> {
        let prec = self.l.precision().min(self.e.precision().expect("nonzero"));
        grid.points(self.p(), prec)
    }

    /// Grid points lying in `M`, in enumeration order (so `0` is last).
    pub fn sample_m(&self, grid: &SearchGrid) -> Result<Vec<PAdic>> {
        let points = self.grid(grid)?;
        let flags: Vec<bool> = points
            .par_iter()
            .map(|x| self.in_m(x))
            .collect::<Result<_>>()?;
        Ok(points
            .into_iter()
            .zip(flags)
            .filter_map(|(x, keep)| keep.then_some(x))
            .collect())
    }

    /// The first grid point of `M` with `χ = (1, 1)`.
    pub fn find_witness(&self, grid: &SearchGrid) -> Result<Option<Witness>> {
        let points = self.grid(grid)?;
        let found = points.par_iter().find_map_first(|x| match self.evaluate(x) {
            Ok((chi, certificate)) if chi == ChiValue::DIAGONAL => Some(Ok(Witness {
                x: WitnessValue(*x),
                chi,
                certificate,
            })),
            Ok(_) | Err(Error::NotInM) => None,
            Err(e) => Some(Err(e)),
        });
        found.transpose()
    }

    /// `χ` over every sampled point of `M`.
    pub fn image(&self, grid: &SearchGrid) -> Result<Vec<(PAdic, ChiValue)>> {
        let sample = self.sample_m(grid)?;
        sample
            .par_iter()
            .map(|x| Ok((*x, self.chi(x)?)))
            .collect()
    }
}

pub fn chi(x: &PAdic, d: &PAdic, e: &PAdic) -> Result<ChiValue> {
    ChiContext::new(d, e)?.chi(x)
}

pub fn sample_m(d: &PAdic, e: &PAdic, grid: &SearchGrid) -> Result<Vec<PAdic>> {
    ChiContext::new(d, e)?.sample_m(grid)
}

pub fn find_witness(d: &PAdic, e: &PAdic, grid: &SearchGrid) -> Result<Option<Witness>> {
    ChiContext::new(d, e)?.find_witness(grid)
}

/// For `L/Q_2` ramified with `v(d) = 1` and `v(e) ∈ {1, 3}`, `L ≇ E`:
/// at least one of `-1`, `1 - e` (resp. `1 - e/4`), `e` is not a norm.
pub fn verify_e1d1(d: &PAdic, e: &PAdic) -> Result<bool> {
    if d.p() != 2 || e.p() != 2 {
        return Err(Error::Precondition("verify_e1d1 needs p = 2".into()));
    }
    let (vd, ve) = match (d.valuation(), e.valuation()) {
        (Some(vd), Some(ve)) => (vd, ve),
        _ => return Err(Error::ZeroArgument("verify_e1d1")),
    };
    if vd != 1 || !(ve == 1 || ve == 3) {
        return Err(Error::Precondition(format!(
            "need v(d) = 1 and v(e) in {{1, 3}}, got {vd} and {ve}"
        )));
    }
    if square_class(d)? == square_class(e)? {
        return Err(Error::Precondition("L and E are isomorphic".into()));
    }
    let l = QuadExt::new(d)?;
    let prec = e.precision().expect("nonzero");
    let one = PAdic::one(2, prec)?;
    let middle = if ve == 1 {
        one.checked_sub(e)?
    } else {
        one.checked_sub(&e.shift(-2))?
    };
    Ok(!l.is_norm(&one.neg())? || !l.is_norm(&middle)? || !l.is_norm(e)?)
}

/// Classifies `(d, e)` and confirms the answer against the oracle.
///
/// `Z2` results carry a witness; a `Z2` without one is an
/// [`Error::Inconsistency`]. `Zero` results with `d` non-square and `e`
/// non-square are checked to have `χ ≡ (0, 0)` on the sampled part of `M`.
pub fn classify_confirmed(d: &PAdic, e: &PAdic, grid: &SearchGrid) -> Result<LocalChowResult> {
    let mut result = classify_pair(d, e)?;
    if result.outcome == Outcome::OutOfScope || is_square(d)? {
        return Ok(result);
    }
    let ctx = ChiContext::new(d, e)?;
    match result.outcome {
        Outcome::Z2 => match ctx.find_witness(grid)? {
            Some(w) => result.witness = Some(w),
            None => {
                return Err(Error::Inconsistency(format!(
                    "classifier says Z/2 for d = {d}, e = {e} but no witness in the grid"
                )))
            }
        },
        Outcome::Zero => {
            if let Some(w) = ctx.find_witness(grid)? {
                return Err(Error::Inconsistency(format!(
                    "classifier says 0 for d = {d}, e = {e} but x = {} has chi = (1, 1)",
                    w.x
                )));
            }
        }
        Outcome::OutOfScope => unreachable!(),
    }
    Ok(result)
}

/// [`classify_cubic`] with a witness attached when the cubic reduces to a
/// pair `(d, e)` and the answer is `Z2`. The witness is expressed in the
/// translated coordinate `x - r`.
pub fn classify_cubic_confirmed(d: &PAdic, f: &Cubic, grid: &SearchGrid) -> Result<LocalChowResult> {
    let mut result = classify_cubic(d, f)?;
    if result.outcome != Outcome::Z2 {
        return Ok(result);
    }
    let (_, e) = f.translated_pair_shape()?.ok_or_else(|| {
        Error::Inconsistency("Z/2 for a cubic without pair shape".into())
    })?;
    let confirmed = classify_confirmed(d, &e, grid)?;
    result.witness = confirmed.witness;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::default_precision;

    fn q(p: u64, n: i64) -> PAdic {
        PAdic::from_i64(p, n, default_precision(p)).unwrap()
    }

    #[test]
    fn chi_examples() {
        let c = chi(&q(2, 2), &q(2, 5), &q(2, 2)).unwrap();
        assert_eq!(c, ChiValue::DIAGONAL);

        let ctx = ChiContext::new(&q(2, 5), &q(2, -1)).unwrap();
        for x in ctx.sample_m(&SearchGrid::default_for(2)).unwrap() {
            assert_eq!(ctx.chi(&x).unwrap(), ChiValue::ZERO);
        }

        let iso = ChiContext::new(&q(3, 2), &q(3, 8)).unwrap();
        assert!(iso.is_isomorphic());
        assert_eq!(iso.chi(&PAdic::zero(3)).unwrap(), ChiValue::ZERO);
    }

    #[test]
    fn not_in_m_refused() {
        // p = 3, L unramified: x = 3 gives 3 * (9 - 2), odd valuation.
        let ctx = ChiContext::new(&q(3, 2), &q(3, 2 * 4 + 3)).unwrap();
        let x = q(3, 3);
        let x_prod = x.checked_mul(&x.square().checked_sub(ctx.e()).unwrap()).unwrap();
        if x_prod.valuation().unwrap() % 2 == 1 {
            assert_eq!(ctx.chi(&x), Err(Error::NotInM));
        }
        assert_eq!(chi(&q(3, 3), &q(3, 2), &q(3, 5)), Err(Error::NotInM));
    }

    #[test]
    fn split_case_rejected() {
        assert_eq!(ChiContext::new(&q(5, 2), &q(5, 4)).err(), Some(Error::SplitCase));
    }

    #[test]
    fn sample_m_examples() {
        let grid = SearchGrid::default_for(3);
        let m = sample_m(&q(3, 2), &q(3, 3), &grid).unwrap();
        assert!(m.last().unwrap().is_zero());
        assert!(m.contains(&q(3, 1)));
        for x in &m {
            if let Some(v) = x.valuation() {
                let prod = x
                    .checked_mul(&x.square().checked_sub(&q(3, 3)).unwrap())
                    .unwrap();
                assert_eq!(prod.valuation().unwrap() % 2, 0, "x = {x}, v = {v}");
            }
        }
    }

    #[test]
    fn witness_examples() {
        let grid = SearchGrid::default_for(2);
        let w = find_witness(&q(2, 5), &q(2, 2), &grid).unwrap().unwrap();
        assert_eq!(w.x.to_string(), "2");
        assert_eq!(w.chi, ChiValue::DIAGONAL);
        assert!(find_witness(&q(2, 5), &q(2, -1), &grid).unwrap().is_none());
        // d = -1, e = 2u: a witness exists.
        assert!(find_witness(&q(2, -1), &q(2, 6), &grid).unwrap().is_some());
        let g5 = SearchGrid::default_for(5);
        assert!(find_witness(&q(5, 2), &q(5, 5), &g5).unwrap().is_some());
    }

    #[test]
    fn parallel_matches_serial_first() {
        let grid = SearchGrid::default_for(3);
        let ctx = ChiContext::new(&q(3, 3), &q(3, 2)).unwrap();
        let serial = ctx
            .grid(&grid)
            .unwrap()
            .into_iter()
            .find(|x| ctx.chi(x).ok() == Some(ChiValue::DIAGONAL));
        let par = ctx.find_witness(&grid).unwrap().map(|w| w.x.0);
        assert_eq!(serial, par);
    }

    #[test]
    fn e1d1_examples() {
        assert!(verify_e1d1(&q(2, 2), &q(2, 6)).unwrap());
        assert!(verify_e1d1(&q(2, -2), &q(2, 2)).unwrap());
        assert!(verify_e1d1(&q(2, 2), &q(2, 18)).is_err());
        assert!(verify_e1d1(&q(2, 5), &q(2, 2)).is_err());
    }

    #[test]
    fn cubic_with_witness() {
        let f = Cubic::from_ints(5, 0, -5, 0).unwrap();
        let r = classify_cubic_confirmed(&q(5, 2), &f, &SearchGrid::default_for(5)).unwrap();
        assert_eq!(r.outcome, Outcome::Z2);
        assert_eq!(r.witness.unwrap().chi, ChiValue::DIAGONAL);
    }

    #[test]
    fn confirmed_classification() {
        let grid = SearchGrid::default_for(5);
        let r = classify_confirmed(&q(5, 2), &q(5, 5), &grid).unwrap();
        assert!(r.witness.is_some());
        let g2 = SearchGrid::default_for(2);
        let r = classify_confirmed(&q(2, 5), &q(2, -1), &g2).unwrap();
        assert!(r.is_zero() && r.witness.is_none());
    }
}
