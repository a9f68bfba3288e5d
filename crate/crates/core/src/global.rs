//! Local groups `A_0(X_v)_0` at every place of `Q` for rational `d`, `e`.
//!
//! Outside a finite set of places both `Q_v(√d)` and `Q_v(√e)` are
//! unramified (or trivial) and the local group vanishes. The global group
//! itself is not computed.

use std::fmt;

use num_bigint::BigInt;
use num_prime::nt_funcs::factorize128;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::chatelet::{classify_pair, LocalChowResult, Outcome, Provenance};
use crate::chi::{classify_confirmed, SearchGrid};
use crate::error::{Error, Result};
use crate::padic::{default_precision, format_rational, is_square, PAdic};

pub const DISCLAIMER: &str = "local groups only; the global group needs Sha^1(K, S) and H^1(K, S^), which are not computed";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Finite(u64),
    Real,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Real => f.write_str("real"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Place::Finite(p) => s.serialize_u64(*p),
            Place::Real => s.serialize_str("real"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaceReport {
    pub place: Place,
    pub outcome: Outcome,
    pub reason: String,
    /// The local classification, for finite places.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<LocalChowResult>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlobalReport {
    pub d: String,
    pub e: String,
    pub bad_places: Vec<u64>,
    pub places: Vec<PlaceReport>,
    pub disclaimer: &'static str,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GlobalOptions {
    /// Digits used at each finite place; the per-prime default when absent.
    pub precision: Option<u32>,
    /// Attach a `χ` witness to `Z2` places and check `Zero` places.
    pub confirm: bool,
}

fn is_rational_square(q: &BigRational) -> bool {
    let square = |n: &BigInt| {
        if n.is_negative() {
            return false;
        }
        let r = n.sqrt();
        &r * &r == *n
    };
    square(q.numer()) && square(q.denom())
}

fn prime_support(n: &BigInt) -> Result<Vec<u64>> {
    let m = n
        .magnitude()
        .to_u128()
        .ok_or_else(|| Error::Factorization(n.to_string()))?;
    if m <= 1 {
        return Ok(Vec::new());
    }
    factorize128(m)
        .into_keys()
        .map(|p| u64::try_from(p).map_err(|_| Error::Factorization(n.to_string())))
        .collect()
}

fn check_inputs(d: &BigRational, e: &BigRational) -> Result<()> {
    if d.is_zero() || e.is_zero() {
        return Err(Error::ZeroArgument("global classification with d = 0 or e = 0"));
    }
    if is_rational_square(d) {
        return Err(Error::RationalSquare);
    }
    Ok(())
}

/// `{2}` together with every prime dividing a numerator or denominator of
/// `d` or `e`.
pub fn bad_places(d: &BigRational, e: &BigRational) -> Result<Vec<u64>> {
    check_inputs(d, e)?;
    let mut primes = vec![2u64];
    for n in [d.numer(), d.denom(), e.numer(), e.denom()] {
        primes.extend(prime_support(n)?);
    }
    primes.sort_unstable();
    primes.dedup();
    Ok(primes)
}

fn local_inputs(d: &BigRational, e: &BigRational, p: u64, prec: Option<u32>) -> Result<(PAdic, PAdic)> {
    let prec = prec.unwrap_or_else(|| default_precision(p));
    Ok((
        PAdic::from_rational(p, d, prec)?,
        PAdic::from_rational(p, e, prec)?,
    ))
}

fn finite_report(
    d: &BigRational,
    e: &BigRational,
    p: u64,
    opts: &GlobalOptions,
) -> Result<PlaceReport> {
    let (dp, ep) = local_inputs(d, e, p, opts.precision)?;
    let result = if opts.confirm {
        classify_confirmed(&dp, &ep, &SearchGrid::default_for(p))?
    } else {
        classify_pair(&dp, &ep)?
    };
    Ok(PlaceReport {
        place: Place::Finite(p),
        outcome: result.outcome,
        reason: result.provenance.description().to_string(),
        result: Some(result),
    })
}

/// The report at a prime outside [`bad_places`], decided without the local
/// classifier: `d` a square, `e` a square unit, or both non-square units
/// (then `L ≅ E`, both unramified).
pub fn good_place_report(d: &BigRational, e: &BigRational, p: u64) -> Result<PlaceReport> {
    if bad_places(d, e)?.contains(&p) {
        return Err(Error::Precondition(format!("{p} is a bad place")));
    }
    let (dp, ep) = local_inputs(d, e, p, None)?;
    let reason = if is_square(&dp)? {
        "almost all places: d is a square"
    } else if is_square(&ep)? {
        "almost all places: e is a square unit at an odd place"
    } else {
        "almost all places: L and E unramified, hence isomorphic"
    };
    Ok(PlaceReport {
        place: Place::Finite(p),
        outcome: Outcome::Zero,
        reason: reason.to_string(),
        result: None,
    })
}

/// Runs the local classifier at a good prime and checks it agrees with
/// [`good_place_report`]. A square `e` yields the split case locally,
/// which counts as agreement.
pub fn spot_check_good_place(d: &BigRational, e: &BigRational, p: u64) -> Result<LocalChowResult> {
    let expected = good_place_report(d, e, p)?;
    let (dp, ep) = local_inputs(d, e, p, None)?;
    let local = classify_pair(&dp, &ep)?;
    let agrees = match local.outcome {
        Outcome::Zero => true,
        Outcome::OutOfScope => local.provenance == Provenance::EIsSquare,
        Outcome::Z2 => false,
    };
    if !agrees || expected.outcome != Outcome::Zero {
        return Err(Error::Inconsistency(format!(
            "good place {p} classified as {local}"
        )));
    }
    Ok(local)
}

fn real_report(e: &BigRational) -> PlaceReport {
    if e.is_negative() {
        PlaceReport {
            place: Place::Real,
            outcome: Outcome::Zero,
            reason: "e < 0: x^2 - e irreducible over R, so L is trivial or L and E are isomorphic"
                .to_string(),
            result: None,
        }
    } else {
        PlaceReport {
            place: Place::Real,
            outcome: Outcome::OutOfScope,
            reason: "e > 0: x^2 - e reducible over R; not determined here".to_string(),
            result: None,
        }
    }
}

pub fn classify_all_places_with(
    d: &BigRational,
    e: &BigRational,
    opts: &GlobalOptions,
) -> Result<GlobalReport> {
    let primes = bad_places(d, e)?;
    let mut places: Vec<PlaceReport> = primes
        .par_iter()
        .map(|&p| finite_report(d, e, p, opts))
        .collect::<Result<_>>()?;
    places.push(real_report(e));
    Ok(GlobalReport {
        d: format_rational(d),
        e: format_rational(e),
        bad_places: primes,
        places,
        disclaimer: DISCLAIMER,
    })
}

/// Every bad place plus the real place, with witnesses attached to `Z2`
/// places. Places not listed have trivial local group.
pub fn classify_all_places(d: &BigRational, e: &BigRational) -> Result<GlobalReport> {
    classify_all_places_with(
        d,
        e,
        &GlobalOptions {
            precision: None,
            confirm: true,
        },
    )
}

pub fn rational(n: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(den))
}
