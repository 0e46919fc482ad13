//! Exact expected revenue of the four single-item formats over independent
//! discrete values: anonymous pricing, second price with anonymous reserve,
//! sequential posted pricing and the Myerson auction.
//!
//! Every evaluator takes the participating bidders as a slice of
//! distributions; an empty slice is a valid (zero revenue) auction.

mod anonymous;
mod myerson;
mod order_stats;
mod sequential;

pub use anonymous::{ap_optimal, ap_revenue};
pub use myerson::{
    expected_max, ironed_virtual_values, is_regular, myerson_revenue, raw_virtual_values, virtual_transform,
};
pub use order_stats::{ar_optimal, ar_revenue, order_stats, order_stats_on, spa_revenue, OrderStatTable};
pub(crate) use sequential::best_price as sequential_best_price;
pub use sequential::{
    spp_optimal, spp_optimal_capped, spp_optimal_fixed_order, spp_revenue, SppPlan, DEFAULT_SPP_ORDER_CAP,
};

use crate::model::ValueDistribution;

/// Borrowed bidder set handed to the evaluators.
pub type Dists<'a, T> = [&'a ValueDistribution<T>];

/// Auction format selector used by the CLI and brute-force oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    /// Anonymous pricing.
    Ap,
    /// Second price auction with anonymous reserve.
    Ar,
    /// Second price auction without reserve.
    Spa,
    /// Sequential posted pricing.
    Spp,
    /// Myerson's optimal auction.
    Myerson,
}

impl Format {
    pub fn name(&self) -> &'static str {
        match self {
            Format::Ap => "ap",
            Format::Ar => "ar",
            Format::Spa => "spa",
            Format::Spp => "spp",
            Format::Myerson => "myer",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ap" => Ok(Format::Ap),
            "ar" => Ok(Format::Ar),
            "spa" => Ok(Format::Spa),
            "spp" => Ok(Format::Spp),
            "myer" | "myerson" => Ok(Format::Myerson),
            other => Err(format!("unknown auction format {other:?} (expected ap|ar|spa|spp|myer)")),
        }
    }
}
