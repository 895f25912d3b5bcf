//! Exact computer algebra for Weyl and Poisson algebras: normal-ordered
//! arithmetic, polynomial symplectomorphisms and tame words, tame
//! approximation, the characteristic-p center restriction Φ_p, the
//! singularity-trick membership test, and the tame lifting pipeline.
//!
//! All algorithms are generic over the coefficient [`scalars::Field`]; the
//! aliases below fix the two concrete fields used in practice.

pub mod algebra;
pub mod approx;
pub mod charp;
pub mod error;
pub mod linalg;
pub mod morphism;
pub mod poisson;
pub mod scalars;
pub mod singlift;
pub mod tame;
pub mod text;
pub mod weyl;
pub mod cli;

pub use algebra::{BracketKind, Flavor, Grading, Mono, NameSide, Terms};
pub use error::{Error, Result};
pub use poisson::Poly;
pub use scalars::{Field, FieldSpec, Gf, GfSpec, Rational};
pub use tame::{ElementaryGen, TameWord};
pub use morphism::{Endo, LaurentEndo, Side, TruncatedEndo};
pub use weyl::WeylElt;

/// Polynomial over ℚ.
pub type QPoly = Poly<Rational>;
/// Polynomial over F_{p^k}.
pub type FpPoly = Poly<Gf>;
/// Weyl element over ℚ.
pub type QWeyl = WeylElt<Rational>;
/// Weyl element over F_{p^k}.
pub type FpWeyl = WeylElt<Gf>;
/// Endomorphism over ℚ.
pub type QEndo = Endo<Rational>;
/// Endomorphism over F_{p^k}.
pub type FpEndo = Endo<Gf>;
