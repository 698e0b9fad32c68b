//! Heavy-tailed distributions whose `h_F(x) = -log F(1/x)` is subadditive,
//! the closure operations that preserve that property, negatively dependent
//! joint samplers, and numerical / statistical checkers for the dominance
//! relation `X <=_st θ1 X1 + ... + θn Xn`.
//!
//! The crate is `no_std` with `alloc`. The default `std` feature only adds
//! rayon-backed parallelism for Monte Carlo blocks; results are identical
//! with and without it.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod math;
mod serde_ext;

pub mod combinators;
pub mod dependence;
pub mod dist;
pub mod dominance;
pub mod ecdf;
pub mod error;
pub mod grid;
pub mod membership;
pub mod quadrature;
pub mod rng;
pub mod weights;

pub use combinators::{ConvexFn, OrderingVerdict};
pub use dependence::{DependenceModel, JointSample};
pub use dist::{Distribution, Family, InfiniteMean};
pub use dominance::DominanceReport;
pub use error::{Error, Result};
pub use grid::{Grid, GridScale};
pub use membership::{Criterion, MembershipReport, Verdict};
pub use weights::WeightVector;
