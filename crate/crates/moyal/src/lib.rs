//! Exact symbolic computation engine for first-order Moyal-Weyl deformations.
//!
//! Everything is computed over the ring `Q(i)[e]` with `h = i*e^2`, where `h`
//! is the formal deformation parameter and `e` is the adjoined square root of
//! `h/i`. All arithmetic is exact rational; there is no floating point
//! anywhere in this crate.
//!
//! The deformed structures implemented here:
//!
//! * [`deform`] — the deformed product `a *_d b = a*b + L*(-1)^{|a|} da*db`
//!   on free graded-commutative algebras, its associativity, exactness
//!   rewritings, conjugation symmetry, the transform `S = id + c*e*d`, and
//!   the truncated exponential Moyal-Weyl product along commuting
//!   derivations.
//! * [`complexes`] — bounded chain complexes, graded maps, the homotopy
//!   differential, and the deformed composition of graded maps.
//! * [`dgla`] — structure-constant differential graded Lie algebras, the
//!   deformed bracket, the graded Jacobiator, and its explicit primitive.
//! * [`coalgebra`] — structure-constant graded coalgebras with flat
//!   coderivations, the deformed coproduct, and the dualization bridge from
//!   finite-dimensional graded algebras.
//!
//! [`instances`] holds the built-in catalog (polynomial de Rham contexts,
//! the Weyl pair, small complexes and their endomorphism Lie algebras, a
//! truncated four-dimensional algebra for dualization), and [`random`]
//! provides seeded generators used by the randomized identity suites.

pub mod coalgebra;
pub mod complexes;
pub mod deform;
pub mod dgla;
pub mod error;
pub mod expr;
pub mod graded;
pub mod instances;
pub mod lexer;
pub mod matrix;
pub mod random;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{GaussianRational, Rational, Scalar};
