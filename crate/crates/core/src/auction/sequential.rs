use itertools::Itertools;

use super::Dists;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest bidder set for which [`spp_optimal`] enumerates every order.
pub const DEFAULT_SPP_ORDER_CAP: usize = 8;

/// Visiting order and prices of a sequential posted pricing mechanism.
///
/// `order[k]` is the position (in the evaluated bidder slice) of the `k`-th
/// bidder approached and `prices[k]` the price offered to it. `None` means
/// the bidder is passed over, which is the same as a price above its support.
#[derive(Debug, Clone, PartialEq)]
pub struct SppPlan<T> {
    pub order: Vec<usize>,
    pub prices: Vec<Option<T>>,
}

impl<T: Scalar> SppPlan<T> {
    fn check(&self, n: usize) -> Result<()> {
        if self.order.len() != n || self.prices.len() != n {
            return Err(Error::PlanMismatch(format!(
                "plan has {} positions and {} prices for {n} bidders",
                self.order.len(),
                self.prices.len()
            )));
        }
        check_permutation(&self.order, n)
    }
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::PlanMismatch(format!("order of length {} for {n} bidders", order.len())));
    }
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::PlanMismatch(format!("order {order:?} is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

/// Expected revenue when the item goes to the first bidder whose value clears its price.
pub fn spp_revenue<T: Scalar>(dists: &Dists<'_, T>, plan: &SppPlan<T>) -> Result<T> {
    plan.check(dists.len())?;
    let mut unsold = T::one();
    let mut rev = T::zero();
    for (&i, price) in plan.order.iter().zip(&plan.prices) {
        if let Some(p) = *price {
            let q = dists[i].accept_prob(p);
            rev = rev + unsold * p * q;
            unsold = unsold * (T::one() - q);
        }
    }
    Ok(rev)
}

/// Best atom of `dist` to offer as price when a refusal is worth `continuation`.
/// Ties go to the smaller price.
pub(crate) fn best_price<T: Scalar>(dist: &crate::model::ValueDistribution<T>, continuation: T) -> (T, T) {
    let mut best: Option<(T, T)> = None;
    for &p in dist.support() {
        let q = dist.accept_prob(p);
        let val = p * q + (T::one() - q) * continuation;
        if best.is_none_or(|(_, b)| val > b) {
            best = Some((p, val));
        }
    }
    best.expect("nonempty support")
}

/// Like [`best_price`] but passing the bidder over (worth `continuation`) wins
/// when it is strictly better than every atom.
fn best_offer<T: Scalar>(dist: &crate::model::ValueDistribution<T>, continuation: T) -> (Option<T>, T) {
    let (p, val) = best_price(dist, continuation);
    if val >= continuation {
        (Some(p), val)
    } else {
        (None, continuation)
    }
}

/// Optimal prices for a fixed visiting order by backward induction over each
/// bidder's own support. Ties go to the smaller price.
pub fn spp_optimal_fixed_order<T: Scalar>(dists: &Dists<'_, T>, order: &[usize]) -> Result<(SppPlan<T>, T)> {
    check_permutation(order, dists.len())?;
    let mut prices = vec![None; order.len()];
    let mut value = T::zero();
    for (k, &i) in order.iter().enumerate().rev() {
        let (price, v) = best_offer(dists[i], value);
        prices[k] = price;
        value = v;
    }
    Ok((SppPlan { order: order.to_vec(), prices }, value))
}

/// Best sequential posted pricing over every order of at most
/// [`DEFAULT_SPP_ORDER_CAP`] bidders.
pub fn spp_optimal<T: Scalar>(dists: &Dists<'_, T>) -> Result<(SppPlan<T>, T)> {
    spp_optimal_capped(dists, DEFAULT_SPP_ORDER_CAP)
}

pub fn spp_optimal_capped<T: Scalar>(dists: &Dists<'_, T>, cap: usize) -> Result<(SppPlan<T>, T)> {
    let n = dists.len();
    if n > cap {
        return Err(Error::CapExceeded { what: "bidders for order enumeration", got: n, cap });
    }
    let mut best: Option<(SppPlan<T>, T)> = None;
    for order in (0..n).permutations(n) {
        let (plan, rev) = spp_optimal_fixed_order(dists, &order)?;
        if best.as_ref().is_none_or(|(_, b)| rev > *b) {
            best = Some((plan, rev));
        }
    }
    Ok(best.expect("at least the empty order"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ValueDistribution;

    fn d(atoms: &[(f64, f64)]) -> ValueDistribution<f64> {
        ValueDistribution::new(atoms.iter().copied()).unwrap()
    }

    #[test]
    fn revenue_examples() {
        let one = d(&[(1.0, 1.0)]);
        let plan = SppPlan { order: vec![0], prices: vec![Some(1.0)] };
        assert_eq!(spp_revenue(&[&one], &plan).unwrap(), 1.0);

        let coin = d(&[(0.0, 0.5), (1.0, 0.5)]);
        let plan = SppPlan { order: vec![1, 0], prices: vec![Some(1.0), Some(1.0)] };
        assert_eq!(spp_revenue(&[&coin, &coin], &plan).unwrap(), 0.75);

        let plan = SppPlan { order: vec![0, 1], prices: vec![Some(9.0), Some(9.0)] };
        assert_eq!(spp_revenue(&[&coin, &coin], &plan).unwrap(), 0.0);
    }

    #[test]
    fn revenue_rejects_mismatched_plans() {
        let one = d(&[(1.0, 1.0)]);
        let short = SppPlan { order: vec![], prices: vec![] };
        assert!(spp_revenue(&[&one], &short).is_err());
        let dup = SppPlan { order: vec![0, 0], prices: vec![None, None] };
        assert!(spp_revenue(&[&one, &one], &dup).is_err());
    }

    #[test]
    fn fixed_order_examples() {
        let coin = d(&[(0.0, 0.5), (1.0, 0.5)]);
        let (plan, rev) = spp_optimal_fixed_order(&[&coin, &coin], &[0, 1]).unwrap();
        assert_eq!(plan.prices, vec![Some(1.0), Some(1.0)]);
        assert_eq!(rev, 0.75);

        let two = d(&[(1.0, 0.5), (2.0, 0.5)]);
        let (plan, rev) = spp_optimal_fixed_order(&[&two], &[0]).unwrap();
        assert_eq!(plan.prices, vec![Some(1.0)]);
        assert_eq!(rev, 1.0);

        let (plan, rev) = spp_optimal_fixed_order::<f64>(&[], &[]).unwrap();
        assert!(plan.order.is_empty());
        assert_eq!(rev, 0.0);
    }

    #[test]
    fn fixed_order_passes_over_weak_early_bidder() {
        let (lo, hi) = (d(&[(1.0, 1.0)]), d(&[(2.0, 1.0)]));
        let (plan, rev) = spp_optimal_fixed_order(&[&lo, &hi], &[0, 1]).unwrap();
        assert_eq!(plan.prices, vec![None, Some(2.0)]);
        assert_eq!(rev, 2.0);
    }

    #[test]
    fn optimal_examples() {
        let (lo, hi) = (d(&[(1.0, 1.0)]), d(&[(2.0, 1.0)]));
        let (plan, rev) = spp_optimal(&[&lo, &hi]).unwrap();
        assert_eq!(rev, 2.0);
        assert_eq!(plan.prices[plan.order.iter().position(|&i| i == 1).unwrap()], Some(2.0));

        let coin = d(&[(0.0, 0.5), (1.0, 0.5)]);
        let set = [&coin, &coin, &coin];
        let (_, best) = spp_optimal(&set).unwrap();
        let (_, fixed) = spp_optimal_fixed_order(&set, &[2, 0, 1]).unwrap();
        assert_eq!(best, fixed);

        let many: Vec<_> = (0..9).map(|_| &coin).collect();
        assert!(matches!(spp_optimal(&many), Err(Error::CapExceeded { .. })));
    }
}
