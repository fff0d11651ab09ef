//! Finite logical matrices and the congruences of abstract algebraic logic.
//!
//! The crate works entirely over finite carriers: formulas are evaluated in
//! finite algebras, consequence is decided by enumerating valuations, and the
//! infinite formula algebra is replaced by its finite image in term functions
//! over `k` variables.

pub mod algebra;
mod closure;
pub mod congruence;
pub mod equivalence;
pub mod error;
pub mod fixture;
pub mod language;
pub mod lindenbaum;
pub mod matrix;
pub mod partition;
pub mod rules;
pub mod sweep;

pub use algebra::{check_identity, FiniteAlgebra, PointedAlgebra, Subalgebra, Valuation};
pub use error::{Error, Result};
pub use language::{format_formula, parse_formula, vars_of, Formula, Signature, Substitution};

pub use matrix::{Caps, GMatrix, Matrix, TermFunctionAlgebra};
pub use partition::Partition;
