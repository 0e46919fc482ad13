//! Bidder selection under a capacity constraint `|S| <= m`, and exhaustive
//! oracles for every format.

use itertools::Itertools;
use rayon::prelude::*;

use crate::auction::sequential_best_price as best_price;
use crate::auction::{
    ap_optimal, ap_revenue, ar_optimal, ar_revenue, expected_max, myerson_revenue, spa_revenue, spp_optimal_capped,
    spp_optimal_fixed_order, virtual_transform, SppPlan,
};
use crate::error::{Error, Result};
use crate::model::{Instance, ValueDistribution};
use crate::scalar::Scalar;

/// Largest pool the single-evaluator oracles enumerate.
pub const BRUTE_FORCE_CAP: usize = 16;
/// Largest pool the all-orders sequential pricing oracle enumerates.
pub const BRUTE_FORCE_SPP_CAP: usize = 10;

/// Mechanism run on the selected bidders.
#[derive(Debug, Clone, PartialEq)]
pub enum Mechanism<T> {
    AnonymousPrice(T),
    Reserve(T),
    /// `(bidder index, offered price)` in visiting order; `None` skips the bidder.
    Sequential(Vec<(usize, Option<T>)>),
    Myerson,
}

impl<T: Scalar> Mechanism<T> {
    pub fn describe(&self, instance: &Instance<T>) -> String {
        match self {
            Mechanism::AnonymousPrice(r) => format!("price={r}"),
            Mechanism::Reserve(r) => format!("reserve={r}"),
            Mechanism::Sequential(steps) => steps
                .iter()
                .map(|(i, p)| match p {
                    Some(p) => format!("{}@{p}", instance.bidder(*i).id),
                    None => format!("{}@skip", instance.bidder(*i).id),
                })
                .join(" "),
            Mechanism::Myerson => "myerson".to_string(),
        }
    }
}

/// A chosen bidder set together with the mechanism and its economics.
///
/// `guarantee` is the claimed approximation factor `alpha` in the sense
/// `alpha * value >= optimum`; `None` when no guarantee applies.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome<T> {
    pub selected: Vec<usize>,
    pub mechanism: Mechanism<T>,
    pub revenue: T,
    pub cost: T,
    pub profit: T,
    pub guarantee: Option<T>,
}

impl<T: Scalar> SelectionOutcome<T> {
    pub fn revenue_only(selected: Vec<usize>, mechanism: Mechanism<T>, revenue: T, guarantee: Option<T>) -> Self {
        Self { selected, mechanism, revenue, cost: T::zero(), profit: revenue, guarantee }
    }

    pub fn with_cost(selected: Vec<usize>, mechanism: Mechanism<T>, revenue: T, cost: T, guarantee: Option<T>) -> Self {
        Self { selected, mechanism, revenue, cost, profit: revenue - cost, guarantee }
    }
}

/// `pi^2 / 6`, the anonymous-pricing versus reserve-auction ratio.
pub fn pi_squared_over_six<T: Scalar>() -> T {
    T::PI() * T::PI() / T::lit(6.0)
}

/// Reciprocal of `1 - 1/e`, the greedy factor written as `alpha * value >= optimum`.
pub fn greedy_factor<T: Scalar>() -> T {
    T::one() / (T::one() - T::one() / T::E())
}

/// The `m` bidders most likely to accept `r`. Ties go to the larger expected
/// value, then to the smaller bidder id. Exact maximizer of anonymous pricing
/// at fixed `r` among sets of size `m`.
pub fn select_ap_capacity<T: Scalar>(instance: &Instance<T>, r: T) -> Result<SelectionOutcome<T>> {
    let m = instance.capacity()?;
    Ok(ap_top_m(instance, r, m))
}

fn ap_top_m<T: Scalar>(instance: &Instance<T>, r: T, m: usize) -> SelectionOutcome<T> {
    let mut ranked: Vec<(usize, T, T)> =
        (0..instance.len()).map(|i| (i, instance.dist(i).accept_prob(r), instance.dist(i).mean())).collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("probabilities are finite")
            .then_with(|| b.2.partial_cmp(&a.2).expect("finite means"))
            .then_with(|| instance.bidder(a.0).id.cmp(&instance.bidder(b.0).id))
    });
    let mut selected: Vec<usize> = ranked.into_iter().take(m).map(|(i, _, _)| i).collect();
    selected.sort_unstable();
    let revenue = ap_revenue(&instance.dists(&selected), r);
    SelectionOutcome::revenue_only(selected, Mechanism::AnonymousPrice(r), revenue, Some(T::one()))
}

/// Exact `max_{|S| <= m} AP(S)`: the top-`m` rule at every price of the grid.
pub fn select_ap_capacity_opt<T: Scalar>(instance: &Instance<T>) -> Result<SelectionOutcome<T>> {
    let m = instance.capacity()?;
    let mut best: Option<SelectionOutcome<T>> = None;
    for &r in instance.price_grid().prices() {
        let cand = ap_top_m(instance, r, m);
        if best.as_ref().is_none_or(|b| cand.revenue > b.revenue) {
            best = Some(cand);
        }
    }
    Ok(best.expect("grid contains 0"))
}

/// Reserve-auction selection through anonymous pricing.
#[derive(Debug, Clone, PartialEq)]
pub struct ArCapacitySelection<T> {
    /// Reserve auction on the anonymous-pricing optimal set at the anonymous-pricing optimal price.
    pub outcome: SelectionOutcome<T>,
    /// Same set with its reserve re-optimized: `(reserve, revenue)`.
    pub reoptimized: (T, T),
}

/// Picks `(S*, r*)` maximizing anonymous pricing and runs the reserve auction
/// with reserve `r*` on `S*`; within `pi^2/6` of the best reserve auction.
pub fn select_ar_capacity<T: Scalar>(instance: &Instance<T>) -> Result<ArCapacitySelection<T>> {
    let ap = select_ap_capacity_opt(instance)?;
    let r = match ap.mechanism {
        Mechanism::AnonymousPrice(r) => r,
        _ => unreachable!("anonymous pricing outcome"),
    };
    let dists = instance.dists(&ap.selected);
    let revenue = ar_revenue(&dists, r);
    let reoptimized = ar_optimal(&dists);
    Ok(ArCapacitySelection {
        outcome: SelectionOutcome::revenue_only(
            ap.selected,
            Mechanism::Reserve(r),
            revenue,
            Some(pi_squared_over_six()),
        ),
        reoptimized,
    })
}

/// Best sequential posted pricing over sets of size at most `m` for a fixed
/// visiting order, by dynamic programming over `(position, offers left)`.
///
/// `order` lists bidder indices of the instance; defaults to input order.
/// Exact for the fixed order and within factor 2 of the best over all orders.
pub fn select_spp_capacity<T: Scalar>(instance: &Instance<T>, order: Option<&[usize]>) -> Result<SelectionOutcome<T>> {
    let m = instance.capacity()?;
    let identity: Vec<usize> = (0..instance.len()).collect();
    let order = order.unwrap_or(&identity);
    spp_capacity_dp(instance, order, m)
}

/// The dynamic program behind [`select_spp_capacity`] with an explicit `m` (which may be 0).
pub fn spp_capacity_dp<T: Scalar>(instance: &Instance<T>, order: &[usize], m: usize) -> Result<SelectionOutcome<T>> {
    let n = instance.len();
    check_full_order(order, n)?;
    let m = m.min(n);
    // value[pos][k]: best revenue from bidders order[pos..] with at most k offers.
    let mut value = vec![vec![T::zero(); m + 1]; n + 1];
    let mut offer: Vec<Vec<Option<T>>> = vec![vec![None; m + 1]; n];
    for pos in (0..n).rev() {
        let dist = instance.dist(order[pos]);
        for k in 1..=m {
            let skip = value[pos + 1][k];
            let (p, take) = best_price(dist, value[pos + 1][k - 1]);
            if take > skip {
                value[pos][k] = take;
                offer[pos][k] = Some(p);
            } else {
                value[pos][k] = skip;
            }
        }
    }
    let mut steps = Vec::new();
    let mut k = m;
    for pos in 0..n {
        if k == 0 {
            break;
        }
        if let Some(p) = offer[pos][k] {
            steps.push((order[pos], Some(p)));
            k -= 1;
        }
    }
    let mut selected: Vec<usize> = steps.iter().map(|&(i, _)| i).collect();
    selected.sort_unstable();
    Ok(SelectionOutcome::revenue_only(selected, Mechanism::Sequential(steps), value[0][m], Some(T::lit(2.0))))
}

fn check_full_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return Err(Error::PlanMismatch(format!("order {order:?} is not a permutation of the {n} bidders")));
    }
    Ok(())
}

/// Greedy maximization of Myerson revenue: `m` rounds, each adding the bidder
/// with the largest marginal revenue (first index on ties).
pub fn select_myerson_greedy<T: Scalar>(instance: &Instance<T>) -> Result<SelectionOutcome<T>> {
    let m = instance.capacity()?;
    let transformed: Vec<ValueDistribution<T>> = instance.all_dists().into_iter().map(virtual_transform).collect();
    let mut selected: Vec<usize> = Vec::with_capacity(m);
    let mut current = T::zero();
    for _ in 0..m {
        let mut best: Option<(usize, T)> = None;
        for j in (0..instance.len()).filter(|j| !selected.contains(j)) {
            let set: Vec<&ValueDistribution<T>> =
                selected.iter().chain(std::iter::once(&j)).map(|&i| &transformed[i]).collect();
            let rev = expected_max(&set);
            if best.is_none_or(|(_, b)| rev > b) {
                best = Some((j, rev));
            }
        }
        match best {
            Some((j, rev)) => {
                selected.push(j);
                current = rev;
            }
            None => break,
        }
    }
    selected.sort_unstable();
    Ok(SelectionOutcome::revenue_only(selected, Mechanism::Myerson, current, Some(greedy_factor())))
}

/// Objective maximized by [`brute_force_capacity`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CapacityObjective {
    Ap,
    Ar,
    Spa,
    /// Sequential pricing with the visiting order restricted from this order of all bidders.
    SppFixedOrder(Vec<usize>),
    /// Sequential pricing over all orders.
    Spp,
    Myerson,
}

/// Evaluates one set under `objective`, returning the mechanism and revenue.
pub fn evaluate_capacity_objective<T: Scalar>(
    instance: &Instance<T>,
    set: &[usize],
    objective: &CapacityObjective,
) -> Result<(Mechanism<T>, T)> {
    let dists = instance.dists(set);
    Ok(match objective {
        CapacityObjective::Ap => {
            let (r, rev) = ap_optimal(&dists);
            (Mechanism::AnonymousPrice(r), rev)
        }
        CapacityObjective::Ar => {
            let (r, rev) = ar_optimal(&dists);
            (Mechanism::Reserve(r), rev)
        }
        CapacityObjective::Spa => (Mechanism::Reserve(T::zero()), spa_revenue(&dists)),
        CapacityObjective::SppFixedOrder(order) => {
            let local = restrict_order(order, set);
            let (plan, rev) = spp_optimal_fixed_order(&dists, &local)?;
            (plan_steps(set, &plan), rev)
        }
        CapacityObjective::Spp => {
            let (plan, rev) = spp_optimal_capped(&dists, usize::MAX)?;
            (plan_steps(set, &plan), rev)
        }
        CapacityObjective::Myerson => (Mechanism::Myerson, myerson_revenue(&dists)),
    })
}

/// Positions within `set` visited in the order `order` induces on `set`.
pub fn restrict_order(order: &[usize], set: &[usize]) -> Vec<usize> {
    order.iter().filter_map(|i| set.iter().position(|j| j == i)).collect()
}

fn plan_steps<T: Scalar>(set: &[usize], plan: &SppPlan<T>) -> Mechanism<T> {
    Mechanism::Sequential(plan.order.iter().zip(&plan.prices).map(|(&k, &p)| (set[k], p)).collect())
}

/// Every subset of `0..n` with at most `m` elements, by size then lexicographically.
pub fn subsets_up_to(n: usize, m: usize) -> Vec<Vec<usize>> {
    (0..=m.min(n)).flat_map(|k| (0..n).combinations(k)).collect()
}

/// Exact optimum over all sets of size at most the capacity. Ties keep the
/// earliest set in (size, lexicographic) order.
pub fn brute_force_capacity<T: Scalar>(
    instance: &Instance<T>,
    objective: &CapacityObjective,
) -> Result<SelectionOutcome<T>> {
    let m = instance.capacity()?;
    brute_force_capacity_with(instance, objective, m)
}

pub fn brute_force_capacity_with<T: Scalar>(
    instance: &Instance<T>,
    objective: &CapacityObjective,
    m: usize,
) -> Result<SelectionOutcome<T>> {
    let n = instance.len();
    let cap = match objective {
        CapacityObjective::Spp => BRUTE_FORCE_SPP_CAP,
        _ => BRUTE_FORCE_CAP,
    };
    if n > cap {
        return Err(Error::CapExceeded { what: "bidders for brute force", got: n, cap });
    }
    if let CapacityObjective::Spp = objective {
        if m > crate::auction::DEFAULT_SPP_ORDER_CAP {
            return Err(Error::CapExceeded {
                what: "capacity for order enumeration",
                got: m,
                cap: crate::auction::DEFAULT_SPP_ORDER_CAP,
            });
        }
    }
    if let CapacityObjective::SppFixedOrder(order) = objective {
        check_full_order(order, n)?;
    }
    let subsets = subsets_up_to(n, m);
    let evaluated: Vec<(Mechanism<T>, T)> =
        subsets.par_iter().map(|s| evaluate_capacity_objective(instance, s, objective)).collect::<Result<_>>()?;
    let mut best = 0;
    for (k, (_, rev)) in evaluated.iter().enumerate() {
        if *rev > evaluated[best].1 {
            best = k;
        }
    }
    let (mechanism, revenue) = evaluated.into_iter().nth(best).expect("empty set is always enumerated");
    Ok(SelectionOutcome::revenue_only(subsets[best].clone(), mechanism, revenue, Some(T::one())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Bidder;

    fn d(atoms: &[(f64, f64)]) -> ValueDistribution<f64> {
        ValueDistribution::new(atoms.iter().copied()).unwrap()
    }

    fn capacity(dists: Vec<ValueDistribution<f64>>, m: usize) -> Instance<f64> {
        let bidders = dists.into_iter().enumerate().map(|(i, d)| Bidder::new(format!("b{}", i + 1), d)).collect();
        Instance::new(bidders, Some(m)).unwrap()
    }

    fn bernoulli(q: f64) -> ValueDistribution<f64> {
        d(&[(0.0, 1.0 - q), (1.0, q)])
    }

    #[test]
    fn ap_capacity_takes_most_likely_buyers() {
        let inst = capacity(vec![bernoulli(0.9), bernoulli(0.5), bernoulli(0.8)], 2);
        assert_eq!(select_ap_capacity(&inst, 1.0).unwrap().selected, vec![0, 2]);
        let all = capacity(vec![bernoulli(0.9), bernoulli(0.5), bernoulli(0.8)], 3);
        assert_eq!(select_ap_capacity(&all, 1.0).unwrap().selected, vec![0, 1, 2]);
    }

    #[test]
    fn ap_capacity_ties_break_by_id() {
        let bidders =
            vec![Bidder::new("z", bernoulli(0.5)), Bidder::new("a", bernoulli(0.5)), Bidder::new("m", bernoulli(0.5))];
        let inst = Instance::new(bidders, Some(2)).unwrap();
        let out = select_ap_capacity(&inst, 1.0).unwrap();
        assert_eq!(inst.ids(&out.selected), vec!["a", "m"]);
    }

    #[test]
    fn ap_capacity_opt_examples() {
        let inst = capacity(vec![d(&[(1.0, 0.5), (2.0, 0.5)])], 1);
        assert_eq!(select_ap_capacity_opt(&inst).unwrap().revenue, 1.0);
        let same = capacity(vec![d(&[(1.0, 0.5), (2.0, 0.5)]); 4], 1);
        let out = select_ap_capacity_opt(&same).unwrap();
        assert_eq!(out.selected.len(), 1);
        assert_eq!(out.revenue, 1.0);
    }

    #[test]
    fn ar_capacity_deterministic_triple() {
        let inst = capacity(vec![d(&[(1.0, 1.0)]), d(&[(2.0, 1.0)]), d(&[(3.0, 1.0)])], 2);
        let sel = select_ar_capacity(&inst).unwrap();
        assert_eq!(sel.outcome.selected, vec![1, 2]);
        assert!(sel.outcome.revenue >= 2.0);
        assert!((sel.outcome.guarantee.unwrap() - 1.6449340668).abs() < 1e-9);
    }

    #[test]
    fn spp_dp_examples() {
        let coin = d(&[(0.0, 0.5), (1.0, 0.5)]);
        let one = capacity(vec![coin.clone(), coin.clone()], 1);
        let out = select_spp_capacity(&one, None).unwrap();
        assert_eq!(out.selected.len(), 1);
        assert_eq!(out.revenue, 0.5);
        assert_eq!(out.mechanism, Mechanism::Sequential(vec![(out.selected[0], Some(1.0))]));

        let both = capacity(vec![coin.clone(), coin.clone()], 2);
        let out = select_spp_capacity(&both, None).unwrap();
        assert_eq!(out.selected, vec![0, 1]);
        assert_eq!(out.revenue, 0.75);

        let none = spp_capacity_dp(&both, &[0, 1], 0).unwrap();
        assert!(none.selected.is_empty());
        assert_eq!(none.revenue, 0.0);
    }

    #[test]
    fn spp_dp_rejects_bad_order() {
        let inst = capacity(vec![bernoulli(0.5), bernoulli(0.5)], 1);
        assert!(select_spp_capacity(&inst, Some(&[0, 0])).is_err());
        assert!(select_spp_capacity(&inst, Some(&[1])).is_err());
    }

    #[test]
    fn myerson_greedy_first_step_is_best_monopoly() {
        let inst = capacity(vec![d(&[(1.0, 1.0)]), d(&[(1.0, 0.5), (3.0, 0.5)]), d(&[(2.0, 1.0)])], 1);
        let out = select_myerson_greedy(&inst).unwrap();
        assert_eq!(out.selected, vec![2]);
        assert!((out.revenue - 2.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_examples() {
        let inst = capacity(vec![d(&[(1.0, 1.0)]), d(&[(2.0, 1.0)]), d(&[(3.0, 1.0)])], 3);
        let all = brute_force_capacity(&inst, &CapacityObjective::Ar).unwrap();
        assert_eq!(all.revenue, 3.0);
        let spa = brute_force_capacity(&inst, &CapacityObjective::Spa).unwrap();
        assert_eq!(spa.selected, vec![1, 2]);
        assert_eq!(spa.revenue, 2.0);

        let single = capacity(vec![d(&[(0.0, 1.0)])], 1);
        assert!(brute_force_capacity(&single, &CapacityObjective::Ap).unwrap().selected.is_empty());
        let single = capacity(vec![d(&[(2.0, 1.0)])], 1);
        assert_eq!(brute_force_capacity(&single, &CapacityObjective::Ap).unwrap().selected, vec![0]);
    }

    #[test]
    fn brute_force_refuses_large_pools() {
        let big = capacity(vec![bernoulli(0.5); 17], 2);
        assert!(matches!(brute_force_capacity(&big, &CapacityObjective::Ap), Err(Error::CapExceeded { .. })));
        let spp = capacity(vec![bernoulli(0.5); 11], 2);
        assert!(brute_force_capacity(&spp, &CapacityObjective::Spp).is_err());
    }

    #[test]
    fn order_restriction() {
        assert_eq!(restrict_order(&[3, 0, 2, 1], &[1, 3]), vec![1, 0]);
    }
}
