//! Singular Toda systems on the plane.
//!
//! The crate is split along the lines of the computation:
//!
//! * [`algebra`] and [`cartan`] build Cartan matrices of the simple Lie
//!   algebras together with their exact inverses.
//! * [`conditions`] evaluates the existence and non-existence conditions on
//!   the singularity exponents, in exact rational arithmetic.
//! * [`pohozaev`] encodes the quadratic local-mass identities and locates
//!   their nonnegative roots.
//! * [`solver`] discretizes the Green-kernel fixed-point map and iterates it
//!   to construct solutions numerically.
//! * [`problem`] holds the JSON problem-file schema shared with the CLI.

pub mod algebra;
pub mod cartan;
pub mod conditions;
pub mod error;
pub mod pohozaev;
pub mod problem;
pub mod rational;
pub mod solver;

pub use algebra::{Family, LieAlgebraType};
pub use cartan::{build_cartan, inverse_closed_form, verify_inverse, CartanMatrix, InverseCartanMatrix};
pub use error::{Result, TodaError};
