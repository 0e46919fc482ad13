//! Bidder subset selection for single-item auctions.
//!
//! A seller picks which bidders to invite, subject either to a capacity
//! `|S| <= m` or to per-bidder invitation costs, and then runs one of four
//! auction formats on the chosen set. This crate evaluates the expected
//! revenue of every format exactly over independent discrete value
//! distributions, implements the selection algorithms with their
//! approximation guarantees, and ships the brute-force oracles and structural
//! checks used to verify those guarantees on small instances.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the precision used by the CLI and the test suites.

// `!(x > 0)` deliberately rejects NaN as well as non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod auction;
pub mod capacity;
pub mod cost;
mod error;
pub mod generate;
pub mod io;
pub mod model;
mod scalar;
pub mod suites;

pub use error::{Error, Result};
pub use model::{Bidder, Constraint, Instance, PriceGrid, ValueDistribution};
pub use scalar::Scalar;

pub type ValueDistribution64 = model::ValueDistribution<f64>;
pub type Bidder64 = model::Bidder<f64>;
pub type Instance64 = model::Instance<f64>;
pub type PriceGrid64 = model::PriceGrid<f64>;
pub type SelectionOutcome64 = capacity::SelectionOutcome<f64>;
pub type SppPlan64 = auction::SppPlan<f64>;

pub type ValueDistribution32 = model::ValueDistribution<f32>;
pub type Instance32 = model::Instance<f32>;
