//! Thresholding greedy algorithm, brute-force best m-term approximation and
//! lower-bound estimates of greedy-type basis constants on finite
//! dimensional sequence spaces.

pub mod cli;
pub mod constants;
pub mod error;
pub mod exec;
pub mod greedy;
pub mod oracle;
pub mod scalar;
pub mod space;
pub mod theorems;

pub use constants::{estimate, Budget, ConstantEstimate, ConstantKind, Grid, Witness};
pub use error::{Error, Result};
pub use exec::Exec;
pub use greedy::{greedy_ordering, greedy_set, greedy_sum, SignVec, SupportSet};
pub use oracle::{d_m, sigma_m, Method, OracleOptions};
pub use scalar::{Scalar, ScalarMode};
pub use space::{CoeffVec, NormModel, Space};
