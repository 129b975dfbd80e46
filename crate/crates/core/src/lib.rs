//! Exact step-function algebra for majorization, K-functionals and the
//! constructive side of real interpolation between `L_p` and `L_q`.

pub mod corpus;
pub mod decompose;
pub mod error;
pub mod kfunc;
pub mod majorize;
pub mod matrix;
pub mod numeric;
pub mod schurhorn;
pub mod spaces;
pub mod stepfn;
pub mod transfer;
pub mod verify;

pub use error::{Error, Result};
pub use numeric::{Bound, Rational, Real};
pub use stepfn::{Interval, IntervalSet, Rounding, SeqView, StepFunction};
