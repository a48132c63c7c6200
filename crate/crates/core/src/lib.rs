//! Sampling estimators for subderivatives, subdifferentials and the duality
//! between them, for lower semicontinuous functions on small boxes.

pub mod error;
pub mod extreal;
pub mod funcmodel;
pub mod sampling;
pub mod subderiv;
pub mod subdiff;
pub mod duality;
pub mod variational;
pub mod corpus;

pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use funcmodel::{parse_function, FunctionSpec};
