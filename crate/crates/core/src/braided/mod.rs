//! Exact symbolic engine for the braided line.
//!
//! Elements are normal-ordered polynomials in ξ₂, ξ₁, z, s with
//! coefficients that are Laurent polynomials in q, so every identity here is
//! checked as an equality, not up to a tolerance.

pub mod checks;
pub mod kernel;
pub mod laurent;
pub mod ncpoly;
pub mod ops;
pub mod parse;

pub use laurent::{gaussian_binomial, q_factorial, q_number, GaussRational, LaurentPoly, LaurentPolyQ, Rational};
pub use ncpoly::{normal_order, GeneratorTable, Gen, NCPolynomial, STANDARD};
pub use ops::{apply_word, shift_series_apply, verify_relation, Op, OperatorSeries, RelationOutcome, Side};
