//! Sketching approximability of Max-CSPs over linear threshold predicates.
//!
//! * [`boolean_fn`]: truth tables, LTFs, Fourier and Chow data.
//! * [`monarchy`]: reduced distributions for MON_k and the exact LP that
//!   separates approximable from approximation-resistant arities.
//! * [`lp`]: exact rational simplex with self-checking certificates.
//! * [`csp`]: instances, exact evaluation, brute force, generators, file format.
//! * [`sketch`]: bias vectors, the Cauchy l1 sketch and the bias-based
//!   approximation algorithm with its value bounds.

pub mod boolean_fn;
pub mod csp;
pub mod error;
pub mod lp;
pub mod monarchy;
pub mod polynomial;
pub mod rational;
pub mod sketch;

pub use error::{Error, Result};
