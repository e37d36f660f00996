//! Colored sparse random graphs and their large-deviation rate functions.
//!
//! Vertices carry i.i.d. colors from a law `μ` on a finite alphabet and each
//! pair of vertices with colors `a, b` is joined with probability
//! `min(C(a,b)/n, 1)`. The crate provides the empirical color, pair and
//! neighborhood measures of such graphs, the rate functions governing their
//! large deviations, exact combinatorial oracles used to check them, and a
//! seeded Monte Carlo harness.

pub mod error;
pub mod graphs;
pub mod math;
pub mod mcharness;
pub mod measures;
pub mod oracles;
pub mod rates;
pub mod seed;
pub mod validation;
pub mod varsolve;

pub use error::{Error, Result};
