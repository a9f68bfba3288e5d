//! Degree-zero Chow groups `A_0(X)_0` of Châtelet surfaces
//! `y^2 - d z^2 = f(x)` over `Q_p`.
//!
//! The closed-form classifier lives in [`chatelet`]; [`chi`] re-derives
//! every answer by brute force from norm-group arithmetic, and [`verify`]
//! bundles the consistency sweeps.

pub mod chatelet;
pub mod chi;
pub mod cubic;
pub mod error;
mod fp;
pub mod global;
pub mod hilbert;
pub mod padic;
pub mod quadratic_ext;
pub mod verify;

pub use chatelet::{classify_cubic, classify_pair, LocalChowResult, Outcome, Provenance, SurfaceSpec};
pub use chi::{ChiValue, SearchGrid, Witness};
pub use cubic::Cubic;
pub use error::{Error, Result};
pub use global::{GlobalReport, Place, PlaceReport};
pub use hilbert::{Route, SymbolValue};
pub use padic::{PAdic, SquareClass};
pub use quadratic_ext::{NormGroup, QuadExt, QuadExtElem};
