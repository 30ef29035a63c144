//! Numerical laboratory for the circle-method objects attached to the
//! equation `n = x1^2 + x2^2 + x3^3 + x4^3 + x5^5 + x6^6 + x7^c` with prime
//! variables and `c` equal to 6 or 7.
//!
//! Everything that can be evaluated at desk scale is implemented here and
//! cross-checked against an independent route:
//!
//! * [`arith`] — prime sieves, weighted power tables, factorization.
//! * [`expsum`] — log-weighted prime exponential sums, complete Gauss-type
//!   sums, the smooth comparison sums `v_k` and `w_c`, arc classification,
//!   and an exact DFT evaluator of the weighted representation count.
//! * [`local`] — solution counts in prime fields, the coefficients
//!   `A_{n,c}(q)`, and the truncated singular series.
//! * [`archimedean`] — the singular integral as an explicit composition sum
//!   (two independent algorithms) and the assembled main-term prediction.
//! * [`count`] — exact representation counts by meet-in-the-middle, the
//!   auxiliary mean-value equation counters, and log-log slope fitting.

pub mod archimedean;
pub mod arith;
pub mod count;
pub mod error;
pub mod expsum;
pub mod local;
mod numeric;

pub use error::{Error, Result};
