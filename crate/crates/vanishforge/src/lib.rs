//! High-precision construction of Eisenstein series whose L-series vanish at
//! prescribed critical values.
//!
//! The pipeline runs from weak functions (1-periodic rational functions of
//! `e(z)` with simple poles at `(1/N)Z`) through their Taylor expansions at
//! zero, tensor products of order-graded bases, and finally the theta map to
//! Eisenstein series. Every construction can be re-checked through
//! independent evaluation of Dirichlet L-values.

pub mod characters;
pub mod construct;
pub mod context;
pub mod cotangent;
pub mod eisenstein;
pub mod error;
pub mod lfunctions;
pub mod linalg;
pub mod num;
pub mod special;
pub mod tensor;
pub mod weak;

pub use characters::DirichletCharacter;
pub use context::PrecisionContext;
pub use error::{Error, Result};
pub use weak::WeakFunction;
