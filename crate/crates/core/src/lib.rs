//! Exact-arithmetic kernels for the online maximum independent set problem on
//! axis-aligned boxes: geometric predicates, online selection policies,
//! adversary instance generators, expectation polynomials, exhaustive
//! ordered-graph search, and closed-form bound calculators.
//!
//! The crate is `no_std` (with `alloc`); all IO, parallelism, and file formats
//! live in the companion `boxmis` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod adversaries;
pub mod expectation;
pub mod geometry;
pub mod graph;
pub mod policies;
pub mod poly;
pub mod rat;
pub mod rng;
pub mod search;
pub mod tuning;

pub use geometry::{Arrangement, Box, OrderClass, ShapeClass};
pub use graph::OrderedGraph;
pub use poly::ExpectationPolynomial;
pub use rat::Rat;
pub use rng::RandomSource;
