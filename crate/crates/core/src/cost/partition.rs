use crate::auction::{ap_optimal, ar_revenue, Dists};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const PARTITION_SET_CAP: usize = 6;
pub const PARTITION_GROUP_CAP: usize = 4;

/// Best split of a bidder set into at most `ell` groups, scored by the sum of
/// each group's optimal anonymous pricing revenue.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionCheck<T> {
    /// Groups as positions into the checked set.
    pub groups: Vec<Vec<usize>>,
    pub total_ap: T,
    /// `(1 - 1/ell) * AR_r(S)`.
    pub bound: T,
    pub holds: bool,
}

impl<T> PartitionCheck<T> {
    pub fn witness(&self) -> Option<&[Vec<usize>]> {
        self.holds.then_some(self.groups.as_slice())
    }
}

/// Enumerates every partition of `set` into at most `ell` groups and reports
/// the best one against `(1 - 1/ell) * AR_{r_star}(set)`.
pub fn verify_partition_bound<T: Scalar>(set: &Dists<'_, T>, r_star: T, ell: usize) -> Result<PartitionCheck<T>> {
    let n = set.len();
    if n > PARTITION_SET_CAP {
        return Err(Error::CapExceeded { what: "bidders to partition", got: n, cap: PARTITION_SET_CAP });
    }
    if ell == 0 || ell > PARTITION_GROUP_CAP {
        return Err(Error::CapExceeded { what: "partition groups", got: ell, cap: PARTITION_GROUP_CAP });
    }
    let ell_t = T::from_usize_lossy(ell);
    let bound = (T::one() - T::one() / ell_t) * ar_revenue(set, r_star);

    let mut best: Option<(Vec<usize>, T)> = None;
    let mut labels = vec![0usize; n];
    for_each_partition(&mut labels, 0, 0, ell, &mut |labels| {
        let groups = group_members(labels);
        let total: T = groups
            .iter()
            .map(|g| {
                let members: Vec<_> = g.iter().map(|&k| set[k]).collect();
                ap_optimal(&members).1
            })
            .sum();
        if best.as_ref().is_none_or(|(_, b)| total > *b) {
            best = Some((labels.to_vec(), total));
        }
    });
    let (labels, total_ap) = best.unwrap_or_else(|| (Vec::new(), T::zero()));
    Ok(PartitionCheck {
        groups: group_members(&labels),
        total_ap,
        bound,
        holds: total_ap >= bound - T::revenue_tolerance(),
    })
}

/// Restricted growth strings: label of position `k` is at most one more than
/// the largest label before it.
fn for_each_partition(labels: &mut [usize], pos: usize, used: usize, ell: usize, f: &mut impl FnMut(&[usize])) {
    if pos == labels.len() {
        f(labels);
        return;
    }
    for g in 0..=used.min(ell - 1) {
        labels[pos] = g;
        let next_used = if g == used { used + 1 } else { used };
        for_each_partition(labels, pos + 1, next_used, ell, f);
    }
}

fn group_members(labels: &[usize]) -> Vec<Vec<usize>> {
    let count = labels.iter().max().map_or(0, |&m| m + 1);
    let mut groups = vec![Vec::new(); count];
    for (k, &g) in labels.iter().enumerate() {
        groups[g].push(k);
    }
    groups
}
