//! Value distributions, bidders, market instances and the candidate price grid.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default cap on the number of atoms in a single distribution.
pub const DEFAULT_SUPPORT_CAP: usize = 64;

/// Finite discrete distribution of a bidder's value.
///
/// Atoms are stored in strictly increasing order together with the prefix sums
/// of their masses, so `cdf_below` is a binary search.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueDistribution<T> {
    support: Vec<T>,
    masses: Vec<T>,
    // below[k] = Pr[v < support[k]]; below[len] is pinned to exactly one.
    below: Vec<T>,
}

impl<T: Scalar> ValueDistribution<T> {
    /// Builds a distribution from `(value, mass)` atoms given in strictly increasing value order.
    pub fn new(atoms: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        Self::with_cap(atoms, DEFAULT_SUPPORT_CAP)
    }

    pub fn with_cap(atoms: impl IntoIterator<Item = (T, T)>, cap: usize) -> Result<Self> {
        let (support, masses): (Vec<T>, Vec<T>) = atoms.into_iter().unzip();
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.len() > cap {
            return Err(Error::InvalidDistribution(format!(
                "{} atoms exceeds the support cap of {cap}",
                support.len()
            )));
        }
        for (k, (&v, &p)) in support.iter().zip(&masses).enumerate() {
            if !v.is_finite() || v < T::zero() {
                return Err(Error::InvalidDistribution(format!("atom {k} has invalid value {v}")));
            }
            if !p.is_finite() || p <= T::zero() {
                return Err(Error::InvalidDistribution(format!("atom {k} has non-positive mass {p}")));
            }
            if k > 0 && !(support[k - 1] < v) {
                return Err(Error::InvalidDistribution(format!(
                    "support not strictly increasing at atom {k} ({} then {v})",
                    support[k - 1]
                )));
            }
        }
        let total: T = masses.iter().copied().sum();
        if (total - T::one()).abs() > T::mass_tolerance() {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}, not 1")));
        }
        let mut below = Vec::with_capacity(masses.len() + 1);
        let mut acc = T::zero();
        for &p in &masses {
            below.push(acc);
            acc = acc + p;
        }
        below.push(T::one());
        Ok(Self { support, masses, below })
    }

    /// Deterministic value `v`.
    pub fn point_mass(v: T) -> Result<Self> {
        Self::new([(v, T::one())])
    }

    pub fn support(&self) -> &[T] {
        &self.support
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn atoms(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.support.iter().copied().zip(self.masses.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn max_value(&self) -> T {
        *self.support.last().expect("nonempty support")
    }

    /// Left limit of the CDF: `Pr[v < t]`.
    pub fn cdf_below(&self, t: T) -> T {
        self.below[self.support.partition_point(|&v| v < t)]
    }

    /// Probability the bidder accepts price `r`, i.e. `Pr[v >= r]`.
    pub fn accept_prob(&self, r: T) -> T {
        T::one() - self.cdf_below(r)
    }

    /// Expected value, `E[v]`.
    pub fn mean(&self) -> T {
        self.atoms().map(|(v, p)| v * p).sum()
    }
}

/// One candidate bidder.
#[derive(Debug, Clone, PartialEq)]
pub struct Bidder<T> {
    pub id: String,
    pub dist: ValueDistribution<T>,
    pub cost: Option<T>,
}

impl<T: Scalar> Bidder<T> {
    pub fn new(id: impl Into<String>, dist: ValueDistribution<T>) -> Self {
        Self { id: id.into(), dist, cost: None }
    }

    pub fn with_cost(id: impl Into<String>, dist: ValueDistribution<T>, cost: T) -> Self {
        Self { id: id.into(), dist, cost: Some(cost) }
    }
}

/// How the seller's choice of bidders is restricted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// At most `m` bidders may be selected.
    Capacity(usize),
    /// Every bidder carries an invitation cost, no size limit.
    Costs,
    /// Plain bidder pool, only useful for evaluation.
    Free,
}

impl Constraint {
    pub fn name(&self) -> &'static str {
        match self {
            Constraint::Capacity(_) => "capacity",
            Constraint::Costs => "cost",
            Constraint::Free => "unconstrained",
        }
    }
}

/// A bidder pool plus its selection constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    bidders: Vec<Bidder<T>>,
    constraint: Constraint,
}

impl<T: Scalar> Instance<T> {
    /// Validates ids, capacity and cost presence. The constraint is `Costs` iff
    /// every bidder has a cost; mixing costs with a capacity is rejected.
    pub fn new(bidders: Vec<Bidder<T>>, capacity: Option<usize>) -> Result<Self> {
        let mut seen = HashSet::new();
        for b in &bidders {
            if !seen.insert(b.id.as_str()) {
                return Err(Error::InvalidInstance(format!("duplicate bidder id {:?}", b.id)));
            }
            if let Some(c) = b.cost {
                if !c.is_finite() || c < T::zero() {
                    return Err(Error::InvalidInstance(format!("bidder {:?} has invalid cost {c}", b.id)));
                }
            }
        }
        let with_cost = bidders.iter().filter(|b| b.cost.is_some()).count();
        if with_cost != 0 && with_cost != bidders.len() {
            return Err(Error::InvalidInstance(format!(
                "{with_cost} of {} bidders carry a cost; costs must be all or nothing",
                bidders.len()
            )));
        }
        let constraint = match (capacity, with_cost > 0) {
            (Some(_), true) => return Err(Error::InvalidInstance("capacity and costs may not both be present".into())),
            (Some(m), false) => {
                if m == 0 || m > bidders.len() {
                    return Err(Error::InvalidInstance(format!("capacity {m} outside 1..={}", bidders.len())));
                }
                Constraint::Capacity(m)
            }
            (None, true) => Constraint::Costs,
            (None, false) => Constraint::Free,
        };
        Ok(Self { bidders, constraint })
    }

    pub fn capacity_instance(bidders: Vec<Bidder<T>>, m: usize) -> Result<Self> {
        Self::new(bidders, Some(m))
    }

    pub fn bidders(&self) -> &[Bidder<T>] {
        &self.bidders
    }

    pub fn bidder(&self, i: usize) -> &Bidder<T> {
        &self.bidders[i]
    }

    pub fn len(&self) -> usize {
        self.bidders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bidders.is_empty()
    }

    pub fn constraint(&self) -> Constraint {
        self.constraint
    }

    pub fn capacity(&self) -> Result<usize> {
        match self.constraint {
            Constraint::Capacity(m) => Ok(m),
            other => Err(Error::ConstraintMismatch { expected: "capacity", found: other.name() }),
        }
    }

    /// Per-bidder invitation costs, in bidder order.
    pub fn costs(&self) -> Result<Vec<T>> {
        match self.constraint {
            Constraint::Costs => Ok(self.bidders.iter().map(|b| b.cost.unwrap_or_else(T::zero)).collect()),
            other => Err(Error::ConstraintMismatch { expected: "cost", found: other.name() }),
        }
    }

    /// Total cost of `set`; `+0` for the empty set, where `sum` would give `-0`.
    pub fn cost_of(&self, set: &[usize]) -> T {
        set.iter().map(|&i| self.bidders[i].cost.unwrap_or_else(T::zero)).fold(T::zero(), |a, c| a + c)
    }

    pub fn dist(&self, i: usize) -> &ValueDistribution<T> {
        &self.bidders[i].dist
    }

    pub fn dists(&self, set: &[usize]) -> Vec<&ValueDistribution<T>> {
        set.iter().map(|&i| &self.bidders[i].dist).collect()
    }

    pub fn all_dists(&self) -> Vec<&ValueDistribution<T>> {
        self.bidders.iter().map(|b| &b.dist).collect()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.bidders.iter().position(|b| b.id == id).ok_or_else(|| Error::UnknownBidder(id.to_string()))
    }

    pub fn ids(&self, set: &[usize]) -> Vec<String> {
        set.iter().map(|&i| self.bidders[i].id.clone()).collect()
    }

    pub fn price_grid(&self) -> PriceGrid<T> {
        PriceGrid::from_dists(self.all_dists())
    }

    /// Same pool and constraint with a different capacity; used by sweeps.
    pub fn with_capacity(&self, m: usize) -> Result<Self> {
        Self::new(self.bidders.clone(), Some(m))
    }
}

/// Sorted, deduplicated union of all support points with 0 prepended.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceGrid<T> {
    prices: Vec<T>,
}

impl<T: Scalar> PriceGrid<T> {
    pub fn from_dists<'a, I>(dists: I) -> Self
    where
        I: IntoIterator<Item = &'a ValueDistribution<T>>,
    {
        let mut prices = vec![T::zero()];
        for d in dists {
            prices.extend_from_slice(d.support());
        }
        prices.sort_by(|a, b| a.partial_cmp(b).expect("finite support"));
        prices.dedup();
        Self { prices }
    }

    pub fn prices(&self) -> &[T] {
        &self.prices
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}
