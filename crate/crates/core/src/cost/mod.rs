//! Bidder selection with invitation costs: maximize revenue minus the total
//! cost of the invited bidders.
//!
//! [`select_apc`] is a 2-approximation for anonymous pricing minus cost.
//! [`select_arc`] reuses its set for the reserve auction, which is within a
//! constant factor of the best reserve-auction profit whenever the optimum
//! has surplus `AR(S*) >= (1 + delta) c(S*)`.

mod partition;
mod relaxation;

pub use partition::{verify_partition_bound, PartitionCheck, PARTITION_GROUP_CAP, PARTITION_SET_CAP};
pub use relaxation::{fr_objective, solve_fr, FrItem, FractionalSolution};

use rayon::prelude::*;

use crate::auction::{ap_optimal, ap_revenue, ar_optimal, ar_revenue};
use crate::capacity::{subsets_up_to, Mechanism, SelectionOutcome, BRUTE_FORCE_CAP};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::scalar::Scalar;

/// Per-bidder quantities at a fixed price `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BidderWeight<T> {
    /// `Pr[v >= r]`.
    pub accept: T,
    /// `-ln Pr[v < r]`; infinite when the bidder always accepts.
    pub weight: T,
    pub cost: T,
    /// `r e^{-w} w < c`, or an infinite weight.
    pub special: bool,
    pub infinite: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostWeights<T> {
    pub r: T,
    pub bidders: Vec<BidderWeight<T>>,
}

pub fn compute_weights<T: Scalar>(instance: &Instance<T>, r: T) -> Result<CostWeights<T>> {
    let costs = instance.costs()?;
    let bidders = costs
        .into_iter()
        .enumerate()
        .map(|(i, cost)| {
            let refuse = instance.dist(i).cdf_below(r);
            let accept = T::one() - refuse;
            let infinite = refuse <= T::zero();
            let weight = if infinite { T::infinity() } else { -refuse.ln() };
            let special = infinite || r * refuse * weight < cost;
            BidderWeight { accept, weight, cost, special, infinite }
        })
        .collect();
    Ok(CostWeights { r, bidders })
}

/// Bidders whose singleton profit `r Pr[v >= r] - c` is nonnegative. No
/// optimal set at price `r` needs any of the others.
pub fn prune_negative_singletons<T: Scalar>(instance: &Instance<T>, r: T) -> Result<Vec<usize>> {
    let costs = instance.costs()?;
    Ok((0..instance.len()).filter(|&i| r * instance.dist(i).accept_prob(r) - costs[i] >= T::zero()).collect())
}

/// One set considered by [`select_apc_fixed_r`].
#[derive(Debug, Clone, PartialEq)]
pub struct ApcCandidate<T> {
    /// The special bidder forced into the set, if any.
    pub special: Option<usize>,
    /// Value of the relaxation, including the forced bidder's cost.
    pub relaxation: T,
    pub set: Vec<usize>,
    pub profit: T,
}

/// Everything [`select_apc_fixed_r`] looked at for one price.
#[derive(Debug, Clone, PartialEq)]
pub struct ApcRun<T> {
    pub r: T,
    pub weights: CostWeights<T>,
    /// Bidders surviving the singleton pruning.
    pub kept: Vec<usize>,
    pub best_singleton: Option<(usize, T)>,
    /// The relaxation candidates: first without a special bidder, then one per special bidder.
    pub candidates: Vec<ApcCandidate<T>>,
    pub outcome: SelectionOutcome<T>,
}

fn set_profit<T: Scalar>(instance: &Instance<T>, set: &[usize], r: T) -> T {
    ap_revenue(&instance.dists(set), r) - instance.cost_of(set)
}

/// Keeps `best` unless `cand` has strictly larger profit, or equal profit and
/// a lexicographically smaller set.
fn better<T: Scalar>(cand_profit: T, cand_set: &[usize], best_profit: T, best_set: &[usize]) -> bool {
    cand_profit > best_profit || (cand_profit == best_profit && cand_set < best_set)
}

/// Anonymous pricing at a fixed price with invitation costs.
pub fn apc_run<T: Scalar>(instance: &Instance<T>, r: T) -> Result<ApcRun<T>> {
    let weights = compute_weights(instance, r)?;
    let kept = prune_negative_singletons(instance, r)?;
    let (regular, specials): (Vec<usize>, Vec<usize>) = kept.iter().partition(|&&i| !weights.bidders[i].special);
    let items: Vec<FrItem<T>> =
        regular.iter().map(|&i| FrItem { weight: weights.bidders[i].weight, cost: weights.bidders[i].cost }).collect();

    let mut best_set: Vec<usize> = Vec::new();
    let mut best_profit = T::zero();

    let mut best_singleton: Option<(usize, T)> = None;
    for &i in &kept {
        let p = set_profit(instance, &[i], r);
        if best_singleton.is_none_or(|(_, b)| p > b) {
            best_singleton = Some((i, p));
        }
    }
    if let Some((i, p)) = best_singleton {
        if better(p, &[i], best_profit, &best_set) {
            best_set = vec![i];
            best_profit = p;
        }
    }

    let forced = std::iter::once(None).chain(specials.iter().copied().map(Some));
    let mut candidates = Vec::with_capacity(specials.len() + 1);
    for special in forced {
        let (q, forced_cost) = match special {
            None => (T::one(), T::zero()),
            Some(t) => (instance.dist(t).cdf_below(r), weights.bidders[t].cost),
        };
        let fr = solve_fr(&items, q, r);
        let mut set: Vec<usize> = fr.integral_part().into_iter().map(|k| regular[k]).collect();
        set.extend(special);
        set.sort_unstable();
        let profit = set_profit(instance, &set, r);
        if better(profit, &set, best_profit, &best_set) {
            best_set = set.clone();
            best_profit = profit;
        }
        candidates.push(ApcCandidate { special, relaxation: fr.objective - forced_cost, set, profit });
    }

    let revenue = ap_revenue(&instance.dists(&best_set), r);
    let cost = instance.cost_of(&best_set);
    let outcome = SelectionOutcome::with_cost(best_set, Mechanism::AnonymousPrice(r), revenue, cost, Some(T::lit(2.0)));
    Ok(ApcRun { r, weights, kept, best_singleton, candidates, outcome })
}

/// Best of the empty set, the best singleton and the rounded relaxation
/// candidates at price `r`. Within factor 2 of the best set at this price.
pub fn select_apc_fixed_r<T: Scalar>(instance: &Instance<T>, r: T) -> Result<SelectionOutcome<T>> {
    Ok(apc_run(instance, r)?.outcome)
}

/// [`select_apc_fixed_r`] at every grid price; ties go to the smaller price.
pub fn select_apc<T: Scalar>(instance: &Instance<T>) -> Result<SelectionOutcome<T>> {
    let grid = instance.price_grid();
    let runs: Vec<SelectionOutcome<T>> =
        grid.prices().par_iter().map(|&r| select_apc_fixed_r(instance, r)).collect::<Result<_>>()?;
    let mut best: Option<SelectionOutcome<T>> = None;
    for out in runs {
        if best.as_ref().is_none_or(|b| out.profit > b.profit) {
            best = Some(out);
        }
    }
    Ok(best.expect("grid contains 0"))
}

/// Surplus of a reference solution and the guarantee it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurplusGuarantee<T> {
    /// `AR(S*) / c(S*) - 1`; infinite when `c(S*) = 0`.
    pub delta: T,
    /// Number of partition groups, `ceil(2 (1 + delta) / delta)`.
    pub ell: Option<usize>,
    /// `4 ell`, or 8 for infinite surplus; `None` without positive surplus.
    pub factor: Option<T>,
}

/// Guarantee implied by surplus `delta`.
pub fn surplus_guarantee<T: Scalar>(delta: T) -> SurplusGuarantee<T> {
    if delta.is_infinite() && delta > T::zero() {
        return SurplusGuarantee { delta, ell: Some(2), factor: Some(T::lit(8.0)) };
    }
    if !(delta > T::zero()) {
        return SurplusGuarantee { delta, ell: None, factor: None };
    }
    let raw = T::lit(2.0) * (T::one() + delta) / delta;
    // Absorb rounding so that exact integers do not jump to the next one.
    let ell = (raw - T::revenue_tolerance()).ceil().to_usize();
    SurplusGuarantee { delta, ell, factor: ell.map(|l| T::lit(4.0) * T::from_usize_lossy(l)) }
}

/// Surplus of a set: `AR(S) / c(S) - 1`, infinite for a free set.
pub fn surplus_of<T: Scalar>(ar: T, cost: T) -> T {
    if cost <= T::zero() {
        T::infinity()
    } else {
        ar / cost - T::one()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcSelection<T> {
    /// Reserve auction on the anonymous-pricing set, at its anonymous price.
    pub outcome: SelectionOutcome<T>,
    /// Profit of the same set under anonymous pricing.
    pub apc_profit: T,
    /// Exhaustive reserve-auction optimum, when the instance is small enough.
    pub oracle: Option<SelectionOutcome<T>>,
    pub surplus: Option<SurplusGuarantee<T>>,
}

/// Reserve-auction selection with invitation costs. The surplus and guarantee
/// are measured against the exhaustive optimum when `n <= 16`.
pub fn select_arc<T: Scalar>(instance: &Instance<T>) -> Result<ArcSelection<T>> {
    let oracle =
        if instance.len() <= BRUTE_FORCE_CAP { Some(brute_force_cost(instance, CostObjective::Arc)?) } else { None };
    let delta = oracle.as_ref().map(|o| surplus_of(o.revenue, o.cost));
    select_arc_with_delta(instance, delta, oracle)
}

/// [`select_arc`] with a caller-supplied surplus and no exhaustive search.
pub fn select_arc_assuming<T: Scalar>(instance: &Instance<T>, delta: Option<T>) -> Result<ArcSelection<T>> {
    select_arc_with_delta(instance, delta, None)
}

fn select_arc_with_delta<T: Scalar>(
    instance: &Instance<T>,
    delta: Option<T>,
    oracle: Option<SelectionOutcome<T>>,
) -> Result<ArcSelection<T>> {
    let apc = select_apc(instance)?;
    let r = match apc.mechanism {
        Mechanism::AnonymousPrice(r) => r,
        _ => unreachable!("anonymous pricing outcome"),
    };
    let surplus = delta.map(surplus_guarantee);
    let revenue = ar_revenue(&instance.dists(&apc.selected), r);
    let outcome = SelectionOutcome::with_cost(
        apc.selected,
        Mechanism::Reserve(r),
        revenue,
        apc.cost,
        surplus.and_then(|s| s.factor),
    );
    Ok(ArcSelection { outcome, apc_profit: apc.profit, oracle, surplus })
}

/// Objective maximized by [`brute_force_cost`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostObjective {
    /// Optimal anonymous price revenue minus cost.
    Apc,
    /// Optimal reserve auction revenue minus cost.
    Arc,
}

fn check_cap(n: usize) -> Result<()> {
    if n > BRUTE_FORCE_CAP {
        return Err(Error::CapExceeded { what: "bidders for brute force", got: n, cap: BRUTE_FORCE_CAP });
    }
    Ok(())
}

fn first_max<T: Scalar>(profits: &[T]) -> usize {
    let mut best = 0;
    for (k, p) in profits.iter().enumerate() {
        if *p > profits[best] {
            best = k;
        }
    }
    best
}

/// Exact optimum over all `2^n` subsets, empty set included. Ties keep the
/// earliest set in (size, lexicographic) order.
pub fn brute_force_cost<T: Scalar>(instance: &Instance<T>, objective: CostObjective) -> Result<SelectionOutcome<T>> {
    let costs = instance.costs()?;
    let n = instance.len();
    check_cap(n)?;
    let subsets = subsets_up_to(n, n);
    let evaluated: Vec<(Mechanism<T>, T)> = subsets
        .par_iter()
        .map(|s| {
            let dists = instance.dists(s);
            match objective {
                CostObjective::Apc => {
                    let (r, rev) = ap_optimal(&dists);
                    (Mechanism::AnonymousPrice(r), rev)
                }
                CostObjective::Arc => {
                    let (r, rev) = ar_optimal(&dists);
                    (Mechanism::Reserve(r), rev)
                }
            }
        })
        .collect();
    let profits: Vec<T> = subsets
        .iter()
        .zip(&evaluated)
        .map(|(s, (_, rev))| *rev - s.iter().fold(T::zero(), |a, &i| a + costs[i]))
        .collect();
    let best = first_max(&profits);
    let set = subsets[best].clone();
    let (mechanism, revenue) = evaluated[best].clone();
    let cost = instance.cost_of(&set);
    Ok(SelectionOutcome::with_cost(set, mechanism, revenue, cost, Some(T::one())))
}

/// Exact optimum of anonymous pricing minus cost at the fixed price `r`.
pub fn brute_force_cost_fixed_r<T: Scalar>(instance: &Instance<T>, r: T) -> Result<SelectionOutcome<T>> {
    instance.costs()?;
    let n = instance.len();
    check_cap(n)?;
    let subsets = subsets_up_to(n, n);
    let profits: Vec<T> = subsets.par_iter().map(|s| set_profit(instance, s, r)).collect();
    let best = first_max(&profits);
    let set = subsets[best].clone();
    let revenue = ap_revenue(&instance.dists(&set), r);
    let cost = instance.cost_of(&set);
    Ok(SelectionOutcome::with_cost(set, Mechanism::AnonymousPrice(r), revenue, cost, Some(T::one())))
}
