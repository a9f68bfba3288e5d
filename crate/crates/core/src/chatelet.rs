//! Closed-form classification of `A_0(X)_0` for Châtelet surfaces over `Q_p`.
//!
//! For `y^2 - d z^2 = x(x^2 - e)` with `L = Q_p(√d)` and `E = Q_p(√e)`:
//!
//! * `d` a square: `X` is rational, the group is zero;
//! * `L ≅ E`: zero;
//! * `p` odd, `L ≇ E`: `Z/2`;
//! * `p = 2`, `L` unramified: zero iff `v(e) ≡ 0 (mod 4)`, else `Z/2`;
//! * `p = 2`, `L` ramified: `Z/2`.
//!
//! For an irreducible monic cubic `f` the group is zero. A square `e` (and
//! a cubic with three roots) is the split case, which is reported as out of
//! scope.

use std::fmt;

use serde::Serialize;

use crate::chi::Witness;
use crate::cubic::{count_roots_cubic, Cubic, RootCertificate};
use crate::error::{Error, Result};
use crate::padic::{is_square, square_class, PAdic};
use crate::quadratic_ext::QuadExt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Zero,
    Z2,
    OutOfScope,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Zero => "0",
            Outcome::Z2 => "Z/2Z",
            Outcome::OutOfScope => "out of scope",
        })
    }
}

/// The clause of the classification that decided a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    DIsSquare,
    EIsSquare,
    IsomorphicExtensions,
    OddPrimeDistinctExtensions,
    DyadicUnramifiedValuationDivisibleByFour,
    DyadicUnramifiedValuationNotDivisibleByFour,
    DyadicRamified,
    IrreducibleCubic,
    SplitCubic,
    UnsupportedCubicShape,
    SingularCubic,
}

impl Provenance {
    pub fn outcome(self) -> Outcome {
        use Provenance::*;
        match self {
            DIsSquare | IsomorphicExtensions | DyadicUnramifiedValuationDivisibleByFour
            | IrreducibleCubic => Outcome::Zero,
            OddPrimeDistinctExtensions | DyadicUnramifiedValuationNotDivisibleByFour
            | DyadicRamified => Outcome::Z2,
            EIsSquare | SplitCubic | UnsupportedCubicShape | SingularCubic => Outcome::OutOfScope,
        }
    }

    pub fn description(self) -> &'static str {
        use Provenance::*;
        match self {
            DIsSquare => "d is a square; birational to the plane",
            EIsSquare => "e is a square; split case",
            IsomorphicExtensions => "L and E are isomorphic",
            OddPrimeDistinctExtensions => "p odd, L and E not isomorphic",
            DyadicUnramifiedValuationDivisibleByFour => "p = 2, L unramified, v(e) = 0 mod 4",
            DyadicUnramifiedValuationNotDivisibleByFour => "p = 2, L unramified, v(e) != 0 mod 4",
            DyadicRamified => "p = 2, L ramified",
            IrreducibleCubic => "f is irreducible",
            SplitCubic => "f splits completely; split case",
            UnsupportedCubicShape => "f has one root but is not of the form x(x^2 - e) after translation",
            SingularCubic => "f has a repeated root",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.description())
    }
}

/// The shape of the right-hand side of `y^2 - d z^2 = f(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// `f(x) = x(x^2 - e)`.
    PairDE { e: PAdic },
    Cubic(Cubic),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SurfaceSpec {
    pub d: PAdic,
    pub shape: Shape,
}

impl SurfaceSpec {
    pub fn pair(d: PAdic, e: PAdic) -> Result<Self> {
        if d.is_zero() || e.is_zero() {
            return Err(Error::ZeroArgument("surface with d = 0 or e = 0"));
        }
        if d.p() != e.p() {
            return Err(Error::PrimeMismatch(d.p(), e.p()));
        }
        Ok(SurfaceSpec {
            d,
            shape: Shape::PairDE { e },
        })
    }

    pub fn cubic(d: PAdic, f: Cubic) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::ZeroArgument("surface with d = 0"));
        }
        if d.p() != f.p() {
            return Err(Error::PrimeMismatch(d.p(), f.p()));
        }
        Ok(SurfaceSpec {
            d,
            shape: Shape::Cubic(f),
        })
    }

    pub fn p(&self) -> u64 {
        self.d.p()
    }

    pub fn classify(&self) -> Result<LocalChowResult> {
        match &self.shape {
            Shape::PairDE { e } => classify_pair(&self.d, e),
            Shape::Cubic(f) => classify_cubic(&self.d, f),
        }
    }
}

/// `A_0(X)_0` over `Q_p`, with the clause that decided it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalChowResult {
    pub p: u64,
    pub outcome: Outcome,
    pub provenance: Provenance,
    /// A point `x ∈ M` with `χ(x) = (1, 1)`, when one was requested and found.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Root analysis of the cubic, for cubic inputs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root_certificate: Option<RootCertificate>,
}

impl LocalChowResult {
    pub fn from_provenance(p: u64, provenance: Provenance) -> Self {
        LocalChowResult {
            p,
            outcome: provenance.outcome(),
            provenance,
            witness: None,
            root_certificate: None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.outcome == Outcome::Zero
    }

    pub fn is_z2(&self) -> bool {
        self.outcome == Outcome::Z2
    }
}

impl fmt::Display for LocalChowResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.outcome, self.provenance)
    }
}

/// Reduces `(d, e)` to `v(d) ∈ {0, 1}` and `v(e) ∈ {0, 1, 2, 3}`.
///
/// `e` is multiplied by `p^{-4k}` (the substitution `x = p^2 x'`,
/// `y = p^3 y'`, `z = p^3 z'`) and `d` is replaced by its square-class
/// representative (rescaling `z`). Neither change alters `A_0(X)_0`.
pub fn normalize_pair(d: &PAdic, e: &PAdic) -> Result<(PAdic, PAdic)> {
    let ve = e.valuation().ok_or(Error::ZeroArgument("normalize_pair"))?;
    let prec = d.precision().ok_or(Error::ZeroArgument("normalize_pair"))?;
    let d_norm = square_class(d)?.to_padic(prec)?;
    let e_norm = e.shift(-4 * ve.div_euclid(4));
    Ok((d_norm, e_norm))
}

/// Classifies `y^2 - d z^2 = x(x^2 - e)` over `Q_p`.
pub fn classify_pair(d: &PAdic, e: &PAdic) -> Result<LocalChowResult> {
    if d.is_zero() || e.is_zero() {
        return Err(Error::ZeroArgument("classify_pair"));
    }
    if d.p() != e.p() {
        return Err(Error::PrimeMismatch(d.p(), e.p()));
    }
    let p = d.p();
    let decided = |prov| Ok(LocalChowResult::from_provenance(p, prov));
    if is_square(d)? {
        return decided(Provenance::DIsSquare);
    }
    if is_square(e)? {
        return decided(Provenance::EIsSquare);
    }
    if square_class(d)? == square_class(e)? {
        return decided(Provenance::IsomorphicExtensions);
    }
    if p != 2 {
        return decided(Provenance::OddPrimeDistinctExtensions);
    }
    let l = QuadExt::new(d)?;
    if l.is_ramified() {
        return decided(Provenance::DyadicRamified);
    }
    let ve = e.valuation().expect("nonzero");
    if ve.rem_euclid(4) == 0 {
        decided(Provenance::DyadicUnramifiedValuationDivisibleByFour)
    } else {
        decided(Provenance::DyadicUnramifiedValuationNotDivisibleByFour)
    }
}

/// Classifies `y^2 - d z^2 = f(x)` for a separable monic cubic `f`.
///
/// No rational root: zero. Three roots: split case. One root `r`: if
/// `f(x) = (x - r)((x - r)^2 - e)` the pair classifier decides, otherwise
/// the shape is unsupported.
pub fn classify_cubic(d: &PAdic, f: &Cubic) -> Result<LocalChowResult> {
    if d.is_zero() {
        return Err(Error::ZeroArgument("classify_cubic"));
    }
    if d.p() != f.p() {
        return Err(Error::PrimeMismatch(d.p(), f.p()));
    }
    let p = d.p();
    if is_square(d)? {
        return Ok(LocalChowResult::from_provenance(p, Provenance::DIsSquare));
    }
    let report = match count_roots_cubic(f) {
        Ok(r) => r,
        Err(Error::SingularCubic) => {
            return Ok(LocalChowResult::from_provenance(p, Provenance::SingularCubic));
        }
        Err(e) => return Err(e),
    };
    let certificate = Some(report.certificate.clone());
    let mut result = match report.count {
        0 => LocalChowResult::from_provenance(p, Provenance::IrreducibleCubic),
        3 => LocalChowResult::from_provenance(p, Provenance::SplitCubic),
        1 => match f.translated_pair_shape()? {
            Some((_, e)) => classify_pair(d, &e)?,
            None => LocalChowResult::from_provenance(p, Provenance::UnsupportedCubicShape),
        },
        n => {
            return Err(Error::Inconsistency(format!(
                "separable cubic with {n} roots"
            )))
        }
    };
    result.root_certificate = certificate;
    Ok(result)
}
