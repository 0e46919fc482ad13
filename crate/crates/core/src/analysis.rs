//! Structural checks on the revenue set functions and the instance families
//! behind the hardness and gap results.

use crate::auction::{ap_revenue, ar_optimal, order_stats, Dists};
use crate::error::{Error, Result};
use crate::model::{Bidder, Instance, ValueDistribution};
use crate::scalar::Scalar;

pub const XOS_SET_CAP: usize = 8;
pub const XOS_JOINT_CAP: usize = 2_000_000;
pub const XOS_CHECK_CAP: usize = 6;
pub const SUBMODULARITY_CAP: usize = 5;

/// Additive lower bound on the reserve auction revenue that is tight on the base set.
#[derive(Debug, Clone, PartialEq)]
pub struct XosCertificate<T> {
    pub r_star: T,
    /// One coefficient per bidder of the base set.
    pub coefficients: Vec<T>,
    /// `AR_{r_star}` of the base set.
    pub base_revenue: T,
    /// `(subset as positions, AR(subset) - sum of its coefficients)`.
    pub slacks: Vec<(Vec<usize>, T)>,
}

impl<T: Scalar> XosCertificate<T> {
    pub fn min_slack(&self) -> Option<T> {
        self.slacks.iter().map(|&(_, s)| s).reduce(T::min)
    }

    pub fn coefficient_sum(&self) -> T {
        self.coefficients.iter().copied().sum()
    }
}

/// Expected payment of each bidder in the reserve auction with reserve
/// `r_star`, by enumerating the joint support. Among bidders tied for the
/// highest value, the lowest position wins.
pub fn xos_coefficients<T: Scalar>(set: &Dists<'_, T>, r_star: T) -> Result<XosCertificate<T>> {
    let n = set.len();
    if n > XOS_SET_CAP {
        return Err(Error::CapExceeded { what: "bidders for joint enumeration", got: n, cap: XOS_SET_CAP });
    }
    let points = set.iter().try_fold(1usize, |acc, d| acc.checked_mul(d.len()).filter(|&p| p <= XOS_JOINT_CAP));
    let Some(_) = points else {
        return Err(Error::CapExceeded { what: "joint support points", got: usize::MAX, cap: XOS_JOINT_CAP });
    };

    let mut coefficients = vec![T::zero(); n];
    let mut idx = vec![0usize; n];
    if n > 0 {
        loop {
            let mut prob = T::one();
            let mut winner = 0;
            for (k, d) in set.iter().enumerate() {
                prob = prob * d.masses()[idx[k]];
                if d.support()[idx[k]] > set[winner].support()[idx[winner]] {
                    winner = k;
                }
            }
            let top = set[winner].support()[idx[winner]];
            if top >= r_star {
                let price = set
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != winner)
                    .map(|(k, d)| d.support()[idx[k]])
                    .fold(r_star, T::max);
                coefficients[winner] = coefficients[winner] + prob * price;
            }
            // Odometer over the joint support.
            let mut k = 0;
            while k < n {
                idx[k] += 1;
                if idx[k] < set[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    }
    let base_revenue = order_stats(set).ar_revenue(r_star);
    Ok(XosCertificate { r_star, coefficients, base_revenue, slacks: Vec::new() })
}

/// Coefficients at the optimal reserve of `set`, checked against every
/// subset: `max_r AR_r(T) >= sum_{i in T} A_i`.
pub fn check_xos<T: Scalar>(set: &Dists<'_, T>) -> Result<XosCertificate<T>> {
    let n = set.len();
    if n > XOS_CHECK_CAP {
        return Err(Error::CapExceeded { what: "bidders for the XOS check", got: n, cap: XOS_CHECK_CAP });
    }
    let (r_star, _) = ar_optimal(set);
    let mut cert = xos_coefficients(set, r_star)?;
    for mask in 0u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|&k| mask >> k & 1 == 1).collect();
        let dists: Vec<_> = members.iter().map(|&k| set[k]).collect();
        let additive: T = members.iter().map(|&k| cert.coefficients[k]).sum();
        let slack = ar_optimal(&dists).1 - additive;
        cert.slacks.push((members, slack));
    }
    Ok(cert)
}

/// `f(U + j) - f(U) > f(T + j) - f(T)` for some `T` strictly inside `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularityWitness<T> {
    pub smaller: Vec<usize>,
    pub larger: Vec<usize>,
    pub added: usize,
    pub marginal_smaller: T,
    pub marginal_larger: T,
}

/// Every violation of diminishing returns of `f` over subsets of `0..n`,
/// beyond `threshold`. An empty list certifies submodularity.
pub fn check_submodularity<T: Scalar>(
    n: usize,
    threshold: T,
    f: impl Fn(&[usize]) -> T,
) -> Result<Vec<SubmodularityWitness<T>>> {
    if n > SUBMODULARITY_CAP {
        return Err(Error::CapExceeded { what: "ground set for submodularity", got: n, cap: SUBMODULARITY_CAP });
    }
    let members = |mask: usize| (0..n).filter(|&k| mask >> k & 1 == 1).collect::<Vec<_>>();
    let values: Vec<T> = (0..1usize << n).map(|mask| f(&members(mask))).collect();
    let mut witnesses = Vec::new();
    for big in 0..1usize << n {
        // Proper submasks of `big`.
        let mut small = big;
        while small > 0 {
            small = (small - 1) & big;
            for j in (0..n).filter(|&j| big >> j & 1 == 0) {
                let m_small = values[small | 1 << j] - values[small];
                let m_big = values[big | 1 << j] - values[big];
                if m_big > m_small + threshold {
                    witnesses.push(SubmodularityWitness {
                        smaller: members(small),
                        larger: members(big),
                        added: j,
                        marginal_smaller: m_small,
                        marginal_larger: m_big,
                    });
                }
            }
        }
    }
    Ok(witnesses)
}

/// Reduction instance: bidder `i` has value 1 with probability `1 - e^{-w_i}`
/// and 0 otherwise, and costs `e^{-W} w_i`. At price 1 the best profit is
/// `1 - e^{-W} - W e^{-W}` exactly when some weights sum to `W`.
pub fn gen_subset_sum_instance<T: Scalar>(weights: &[T], total: T) -> Result<Instance<T>> {
    if weights.is_empty() {
        return Err(Error::InvalidInstance("subset-sum instance needs at least one weight".into()));
    }
    if !(total > T::zero()) {
        return Err(Error::InvalidInstance(format!("target sum must be positive, got {total}")));
    }
    let scale = (-total).exp();
    let bidders = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::InvalidInstance(format!("weight {i} must be positive and finite, got {w}")));
            }
            let refuse = (-w).exp();
            let dist = ValueDistribution::new([(T::zero(), refuse), (T::one(), T::one() - refuse)])?;
            Ok(Bidder::with_cost(format!("b{}", i + 1), dist, scale * w))
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(bidders, None)
}

/// `F(v) = max_{1 <= i <= n} (1 - (i+1)/v)^{1/i}` on `v >= i + 1`.
fn gap_cdf(n: usize, v: f64) -> f64 {
    (1..=n)
        .filter(|&i| v >= (i + 1) as f64)
        .map(|i| ((-(i as f64 + 1.0) / v).ln_1p() / i as f64).exp())
        .fold(0.0, f64::max)
}

/// Default upper end of the gap grid: `n^2`.
pub fn gap_vmax(n: usize) -> f64 {
    (n * n) as f64
}

/// I.i.d. unit-cost instance from the gap family, discretized with upper end [`gap_vmax`].
pub fn gen_gap_instance<T: Scalar>(n: usize, grid_size: usize) -> Result<Instance<T>> {
    gen_gap_instance_with(n, grid_size, gap_vmax(n))
}

/// Gap family discretized on `grid_size` geometric points over `[2, vmax]`.
/// The mass of `[v_k, v_{k+1})` sits at `v_k` and the tail above `vmax` at
/// `vmax`, so every value is rounded down.
pub fn gen_gap_instance_with<T: Scalar>(n: usize, grid_size: usize, vmax: f64) -> Result<Instance<T>> {
    if n < 2 {
        return Err(Error::InvalidInstance(format!("gap instance needs n >= 2, got {n}")));
    }
    if grid_size < 32 {
        return Err(Error::InvalidInstance(format!("gap grid needs at least 32 points, got {grid_size}")));
    }
    if !(vmax > 2.0) || !vmax.is_finite() {
        return Err(Error::InvalidInstance(format!("gap grid upper end must exceed 2, got {vmax}")));
    }
    let ratio = (vmax / 2.0).ln() / (grid_size - 1) as f64;
    let grid: Vec<f64> = (0..grid_size).map(|k| 2.0 * (ratio * k as f64).exp()).collect();
    let cdf: Vec<f64> = grid.iter().map(|&v| gap_cdf(n, v)).collect();
    let mut atoms: Vec<(T, T)> = Vec::with_capacity(grid_size);
    for k in 0..grid_size {
        let upper = if k + 1 < grid_size { cdf[k + 1] } else { 1.0 };
        let mass = upper - cdf[k];
        if mass > 0.0 {
            atoms.push((T::lit(grid[k]), T::lit(mass)));
        }
    }
    let dist = ValueDistribution::with_cap(atoms, grid_size)?;
    let bidders = (0..n).map(|i| Bidder::with_cost(format!("b{}", i + 1), dist.clone(), T::one())).collect();
    Instance::new(bidders, None)
}

/// Anonymous pricing against the reserve auction on an i.i.d. unit-cost instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport<T> {
    pub n: usize,
    /// `max_{1 <= i <= n} (max_r r (1 - F(r^-)^i) - i)`.
    pub max_apc: T,
    /// Number of bidders attaining `max_apc`.
    pub best_size: usize,
    /// `max_r AR_r(all n bidders) - n`.
    pub arc_all: T,
    pub gap: T,
}

/// Evaluates [`GapReport`] for an instance whose bidders share bidder 0's
/// distribution and cost; the anonymous-pricing side uses the i.i.d. closed form.
pub fn gap_report<T: Scalar>(instance: &Instance<T>) -> Result<GapReport<T>> {
    let n = instance.len();
    let costs = instance.costs()?;
    let dist = instance.dist(0);
    let cost = costs[0];
    if (1..n).any(|i| instance.dist(i) != dist || costs[i] != cost) {
        return Err(Error::InvalidInstance("gap report needs identical bidders".into()));
    }
    let mut max_apc = T::neg_infinity();
    let mut best_size = 0;
    for size in 1..=n {
        let exponent = i32::try_from(size).expect("bidder count fits in i32");
        let best_rev =
            dist.support().iter().map(|&r| r * (T::one() - dist.cdf_below(r).powi(exponent))).fold(T::zero(), T::max);
        let apc = best_rev - cost * T::from_usize_lossy(size);
        if apc > max_apc {
            max_apc = apc;
            best_size = size;
        }
    }
    let arc_all = ar_optimal(&instance.all_dists()).1 - cost * T::from_usize_lossy(n);
    Ok(GapReport { n, max_apc, best_size, arc_all, gap: arc_all - max_apc })
}

/// `AP_r` as a set function over positions of `set`, for the submodularity check.
pub fn ap_at<'a, T: Scalar>(set: &'a Dists<'a, T>, r: T) -> impl Fn(&[usize]) -> T + 'a {
    move |members| {
        let dists: Vec<_> = members.iter().map(|&k| set[k]).collect();
        ap_revenue(&dists, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::{ar_revenue, myerson_revenue};

    fn d(atoms: &[(f64, f64)]) -> ValueDistribution<f64> {
        ValueDistribution::new(atoms.iter().copied()).unwrap()
    }

    #[test]
    fn xos_deterministic_pair() {
        let (a, b) = (d(&[(1.0, 1.0)]), d(&[(2.0, 1.0)]));
        let cert = xos_coefficients(&[&a, &b], 0.0).unwrap();
        assert_eq!(cert.coefficients, vec![0.0, 1.0]);
        assert_eq!(cert.base_revenue, 1.0);
    }

    #[test]
    fn xos_single_bidder_is_monopoly_revenue() {
        let a = d(&[(1.0, 0.5), (3.0, 0.5)]);
        let cert = xos_coefficients(&[&a], 3.0).unwrap();
        assert_eq!(cert.coefficients, vec![1.5]);
    }

    #[test]
    fn xos_ties_go_to_the_lowest_position() {
        let a = d(&[(1.0, 1.0)]);
        let cert = xos_coefficients(&[&a, &a], 0.0).unwrap();
        assert_eq!(cert.coefficients, vec![1.0, 0.0]);
        assert_eq!(cert.coefficient_sum(), cert.base_revenue);
    }

    #[test]
    fn xos_check_trivial_subsets() {
        let a = d(&[(1.0, 0.4), (2.5, 0.6)]);
        let b = d(&[(1.2, 0.7), (3.1, 0.3)]);
        let cert = check_xos(&[&a, &b]).unwrap();
        assert_eq!(cert.slacks.first().unwrap(), &(vec![], 0.0));
        let full = &cert.slacks.last().unwrap();
        assert_eq!(full.0, vec![0, 1]);
        assert!(full.1.abs() < 1e-12);
        assert!(cert.min_slack().unwrap() >= -1e-12);
    }

    #[test]
    fn ar_is_not_submodular_on_the_three_bidder_instance() {
        let x = d(&[(1.0, 0.99), (1.01, 0.01)]);
        let set = [&x, &x, &x];
        let ar = |m: &[usize]| ar_revenue(&m.iter().map(|&k| set[k]).collect::<Vec<_>>(), 1.0);
        let witnesses = check_submodularity(3, 1e-12, ar).unwrap();
        let w = witnesses
            .iter()
            .find(|w| w.smaller == vec![0] && w.larger == vec![0, 2] && w.added == 1)
            .expect("expected witness");
        assert!((w.marginal_smaller - 1.0e-6).abs() < 1e-12);
        assert!((w.marginal_larger - 1.98e-6).abs() < 1e-12);

        assert!(check_submodularity(3, 1e-12, ap_at(&set, 1.0)).unwrap().is_empty());
        let myer = |m: &[usize]| myerson_revenue(&m.iter().map(|&k| set[k]).collect::<Vec<_>>());
        assert!(check_submodularity(3, 1e-12, myer).unwrap().is_empty());
    }

    #[test]
    fn submodularity_caps() {
        assert!(check_submodularity(6, 1e-12, |_: &[usize]| 0.0).is_err());
    }

    #[test]
    fn subset_sum_construction() {
        let inst = gen_subset_sum_instance(&[1.0, 2.0], 3.0).unwrap();
        assert_eq!(inst.len(), 2);
        let c = inst.costs().unwrap();
        assert!((c[1] - 2.0 * (-3f64).exp()).abs() < 1e-15);
        assert!((inst.dist(0).accept_prob(1.0) - (1.0 - (-1f64).exp())).abs() < 1e-15);
        assert!(gen_subset_sum_instance::<f64>(&[], 3.0).is_err());
        assert!(gen_subset_sum_instance(&[-1.0], 3.0).is_err());
    }

    #[test]
    fn gap_distribution_is_valid() {
        let inst = gen_gap_instance::<f64>(16, 64).unwrap();
        let dist = inst.dist(0);
        let total: f64 = dist.masses().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(dist.support()[0], 2.0);
        assert!((dist.max_value() - 256.0).abs() < 1e-9);
        assert!(inst.costs().unwrap().iter().all(|&c| c == 1.0));
        assert!(gen_gap_instance::<f64>(1, 64).is_err());
        assert!(gen_gap_instance::<f64>(4, 16).is_err());
    }

    #[test]
    fn gap_report_small() {
        let inst = gen_gap_instance::<f64>(16, 256).unwrap();
        let rep = gap_report(&inst).unwrap();
        assert!(rep.max_apc <= 1.2);
        assert!(rep.gap > 0.0);
    }
}
