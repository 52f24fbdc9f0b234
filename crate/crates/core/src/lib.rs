#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod direct_sum;
pub mod error;
pub mod geometry;
pub mod interpolation;
pub mod norms;
pub mod orlicz;
pub mod report;
pub mod solve;
pub mod suites;

pub use algebra::{Operator, OperatorKind, TracialAlgebra};
pub use error::{Error, Result};
pub use orlicz::OrliczFunction;
