//! Exact arithmetic over the global fields `Q` and `F_p(T)`, quaternion
//! algebras and their local behaviour, and explicit first-order formulas
//! defining rings of `S`-integers and their complements.

pub mod approx;
pub mod arith;
pub mod definable;
pub mod error;
pub mod ff;
pub mod formula;
pub mod fgring;
pub mod field;
pub mod place;
pub mod poly;
pub mod quaternion;
pub mod suites;
pub mod synthesis;

pub use approx::{weak_approximate, Target};
pub use error::{Error, Result};
pub use field::{FieldDesc, FieldElement, RatFunc};
pub use place::{reduce, support, valuation, Place, PlaceSet, Valuation};
pub use poly::Poly;
