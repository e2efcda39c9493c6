//! Numerical tools for the c-numerical range of matrices and finite-rank
//! operators, closed forms for small-rank cases, a Monte Carlo oracle, and
//! checks for maps preserving the range of products.

// `!(x > y)` is used on purpose so that NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closedform;
pub mod coefficients;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod oracle;
pub mod preserver;
pub mod range;
pub mod rng;

pub use coefficients::{AmbientDim, CoefficientVector, RegimeClass};
pub use error::{Error, Result};
pub use exec::Execution;
pub use linalg::{ComplexMatrix, OperatorModel};
pub use range::{Interval, RangeRegion};
