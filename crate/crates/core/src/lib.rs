//! Permutation trinomials with all-ones coefficients over GF(2^{2m}).
//!
//! The crate builds Niho-type trinomials `x^{d1} + x^{d2} + x^{d3}` from
//! permutations of the unit circle, checks them with three independent
//! verifiers, computes compositional inverses, and keeps a JSON-lines catalog
//! of the results.

pub mod catalog;
pub mod cli;
pub mod construct;
pub mod field;
pub mod fixtures;
pub mod invert;
pub mod numtheory;
pub mod unit_circle;
pub mod verify;

pub use construct::{derive_exponents, enumerate_triples, ExponentTriple, SparsePoly};
pub use field::{make_field, FieldElement, FieldSpec};
pub use unit_circle::{FractionMap, UnitCircle};
pub use verify::{Method, VerificationReport};
