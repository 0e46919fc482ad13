use super::Dists;
use crate::model::PriceGrid;
use crate::scalar::Scalar;

/// `Pr[max >= u]` and `Pr[second max >= u]` tabulated on a sorted grid.
///
/// Values of the tabulated bidders lie on the grid, so both probabilities are
/// constant on every half-open segment `(grid[k-1], grid[k]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStatTable<T> {
    grid: Vec<T>,
    p_max_ge: Vec<T>,
    p_second_ge: Vec<T>,
}

impl<T: Scalar> OrderStatTable<T> {
    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn p_max_ge_at(&self) -> &[T] {
        &self.p_max_ge
    }

    pub fn p_second_ge_at(&self) -> &[T] {
        &self.p_second_ge
    }

    fn next_grid(&self, u: T) -> Option<usize> {
        let k = self.grid.partition_point(|&g| g < u);
        (k < self.grid.len()).then_some(k)
    }

    /// `Pr[max_i v_i >= u]` for any real `u`.
    pub fn p_max_ge(&self, u: T) -> T {
        self.next_grid(u).map_or_else(T::zero, |k| self.p_max_ge[k])
    }

    /// `Pr[at least two bidders have v_i >= u]` for any real `u`.
    pub fn p_second_ge(&self, u: T) -> T {
        self.next_grid(u).map_or_else(T::zero, |k| self.p_second_ge[k])
    }

    /// Expected second-price payment with reserve `r`:
    /// `r * Pr[max >= r] + E[(second max - r)^+]`.
    pub fn ar_revenue(&self, r: T) -> T {
        let mut rev = r * self.p_max_ge(r);
        for k in 1..self.grid.len() {
            let u = self.grid[k];
            if u > r {
                let lo = self.grid[k - 1].max(r);
                rev = rev + (u - lo) * self.p_second_ge[k];
            }
        }
        rev
    }

    /// Reserve revenue at every grid point, via one suffix sum.
    pub fn ar_curve(&self) -> Vec<T> {
        let n = self.grid.len();
        let mut out = vec![T::zero(); n];
        let mut tail = T::zero();
        for k in (0..n).rev() {
            out[k] = self.grid[k] * self.p_max_ge[k] + tail;
            if k > 0 {
                tail = tail + (self.grid[k] - self.grid[k - 1]) * self.p_second_ge[k];
            }
        }
        out
    }

    /// `E[max(0, max_i v_i)]` when the grid starts at zero.
    pub fn expected_max(&self) -> T {
        let mut acc = T::zero();
        for k in 1..self.grid.len() {
            acc = acc + (self.grid[k] - self.grid[k - 1]) * self.p_max_ge[k];
        }
        acc
    }
}

/// Order statistics of `dists` on their own price grid.
pub fn order_stats<T: Scalar>(dists: &Dists<'_, T>) -> OrderStatTable<T> {
    let grid = PriceGrid::from_dists(dists.iter().copied());
    order_stats_on(dists, grid.prices())
}

/// Order statistics on an explicit sorted grid.
pub fn order_stats_on<T: Scalar>(dists: &Dists<'_, T>, grid: &[T]) -> OrderStatTable<T> {
    let mut p_max_ge = Vec::with_capacity(grid.len());
    let mut p_second_ge = Vec::with_capacity(grid.len());
    for &u in grid {
        // Probabilities that zero, exactly one, and at least two bidders reach u.
        let (mut none, mut one, mut two) = (T::one(), T::zero(), T::zero());
        for d in dists {
            let below = d.cdf_below(u);
            let above = T::one() - below;
            two = two + one * above;
            one = one * below + none * above;
            none = none * below;
        }
        p_max_ge.push((one + two).min(T::one()));
        p_second_ge.push(two);
    }
    OrderStatTable { grid: grid.to_vec(), p_max_ge, p_second_ge }
}

/// Expected revenue of the second price auction with anonymous reserve `r`.
pub fn ar_revenue<T: Scalar>(dists: &Dists<'_, T>, r: T) -> T {
    if dists.is_empty() {
        return T::zero();
    }
    order_stats(dists).ar_revenue(r)
}

/// Second price auction without reserve.
pub fn spa_revenue<T: Scalar>(dists: &Dists<'_, T>) -> T {
    ar_revenue(dists, T::zero())
}

/// Best reserve over the grid (which contains 0); ties go to the smaller reserve.
pub fn ar_optimal<T: Scalar>(dists: &Dists<'_, T>) -> (T, T) {
    if dists.is_empty() {
        return (T::zero(), T::zero());
    }
    let table = order_stats(dists);
    let mut best = (T::zero(), T::zero());
    for (&r, rev) in table.grid().iter().zip(table.ar_curve()) {
        if rev > best.1 {
            best = (r, rev);
        }
    }
    best
}
