use super::Dists;
use crate::model::PriceGrid;
use crate::scalar::Scalar;

/// Revenue of a take-it-or-leave-it price `r` offered to everyone: `r * Pr[max v >= r]`.
pub fn ap_revenue<T: Scalar>(dists: &Dists<'_, T>, r: T) -> T {
    let none_accepts = dists.iter().fold(T::one(), |acc, d| acc * d.cdf_below(r));
    r * (T::one() - none_accepts)
}

/// Best anonymous price over the grid of `dists`; ties go to the smaller price.
pub fn ap_optimal<T: Scalar>(dists: &Dists<'_, T>) -> (T, T) {
    let grid = PriceGrid::from_dists(dists.iter().copied());
    let mut best = (T::zero(), T::zero());
    for &r in grid.prices() {
        let rev = ap_revenue(dists, r);
        if rev > best.1 {
            best = (r, rev);
        }
    }
    best
}
