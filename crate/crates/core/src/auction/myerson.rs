//! Myerson revenue through ironed virtual values.
//!
//! For a discrete distribution with atoms `v_1 < ... < v_K`, the revenue curve
//! in quantile space passes through `(Pr[v >= v_k], v_k * Pr[v >= v_k])`. The
//! virtual value of atom `k` is the slope of the curve on the segment of width
//! `f(v_k)` it owns; the top atom's virtual value is `v_K`. Ironing replaces
//! the curve by its upper concave envelope, computed here by pooling adjacent
//! segments whose slopes increase with quantile.

use super::order_stats::order_stats;
use super::Dists;
use crate::model::ValueDistribution;
use crate::scalar::Scalar;

/// Virtual value of every atom before ironing, in support order.
pub fn raw_virtual_values<T: Scalar>(dist: &ValueDistribution<T>) -> Vec<T> {
    let support = dist.support();
    let masses = dist.masses();
    let k_max = support.len() - 1;
    (0..=k_max)
        .map(|k| {
            if k == k_max {
                support[k]
            } else {
                let above = dist.accept_prob(support[k + 1]);
                support[k] - (support[k + 1] - support[k]) * above / masses[k]
            }
        })
        .collect()
}

/// Whether the raw virtual values are nondecreasing, so that ironing is a no-op.
pub fn is_regular<T: Scalar>(dist: &ValueDistribution<T>) -> bool {
    raw_virtual_values(dist).windows(2).all(|w| w[0] <= w[1])
}

/// Ironed virtual value of every atom, in support order (nondecreasing).
pub fn ironed_virtual_values<T: Scalar>(dist: &ValueDistribution<T>) -> Vec<T> {
    let masses = dist.masses();
    let k_max = masses.len() - 1;
    let raw = raw_virtual_values(dist);

    // Blocks of (mass-weighted sum, mass, atom count), built from the top atom down.
    let mut blocks: Vec<(T, T, usize)> = Vec::with_capacity(raw.len());
    for k in (0..=k_max).rev() {
        let mut block = (raw[k] * masses[k], masses[k], 1);
        while let Some(&(s, w, c)) = blocks.last() {
            if block.0 / block.1 > s / w {
                blocks.pop();
                block = (block.0 + s, block.1 + w, block.2 + c);
            } else {
                break;
            }
        }
        blocks.push(block);
    }

    let mut out = Vec::with_capacity(raw.len());
    for &(s, w, c) in blocks.iter().rev() {
        if c == 1 {
            out.push(raw[out.len()]);
        } else {
            let slope = s / w;
            out.extend(std::iter::repeat_n(slope, c));
        }
    }
    out
}

/// Distribution of `max(ironed virtual value, 0)` for `v ~ dist`.
pub fn virtual_transform<T: Scalar>(dist: &ValueDistribution<T>) -> ValueDistribution<T> {
    let phis = ironed_virtual_values(dist);
    let mut atoms: Vec<(T, T)> = Vec::with_capacity(phis.len());
    for (phi, mass) in phis.into_iter().zip(dist.masses().iter().copied()) {
        let v = phi.max(T::zero());
        match atoms.last_mut() {
            Some((last, m)) if !(v > *last) => *m = *m + mass,
            _ => atoms.push((v, mass)),
        }
    }
    let n = atoms.len();
    ValueDistribution::with_cap(atoms, n).expect("ironed values are sorted with positive mass")
}

/// `E[max(0, max_i v_i)]`.
pub fn expected_max<T: Scalar>(dists: &Dists<'_, T>) -> T {
    if dists.is_empty() {
        return T::zero();
    }
    order_stats(dists).expected_max()
}

/// Optimal auction revenue: expected maximum nonnegative ironed virtual value.
pub fn myerson_revenue<T: Scalar>(dists: &Dists<'_, T>) -> T {
    let transformed: Vec<_> = dists.iter().map(|d| virtual_transform(d)).collect();
    let refs: Vec<_> = transformed.iter().collect();
    expected_max(&refs)
}
