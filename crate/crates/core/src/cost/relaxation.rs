//! Concave relaxation of anonymous pricing with invitation costs.
//!
//! For a price `r`, a scale `q` in `[0, 1]` and bidders with weights
//! `w_i = -ln Pr[v_i < r]` and costs `c_i`, maximize over `x` in `[0,1]^S`
//!
//! ```text
//! r * (1 - q * exp(-sum_i w_i x_i)) - sum_i c_i x_i
//! ```
//!
//! The gradient in `x_i` is `r q w_i exp(-W) - c_i`, so at the optimum every
//! bidder with `w_i / c_i` above the threshold `1 / (r q exp(-W))` is fully
//! included, every bidder below it is excluded, and at most one sits at the
//! threshold. Filling bidders in descending `w_i / c_i` order reproduces that.

use std::cmp::Ordering;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrItem<T> {
    pub weight: T,
    pub cost: T,
}

/// Optimal point of the relaxation; `x` is in the order the items were given.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution<T> {
    pub x: Vec<T>,
    pub objective: T,
    /// Index of the coordinate strictly inside `(0, 1)`, if any.
    pub fractional: Option<usize>,
}

impl<T: Scalar> FractionalSolution<T> {
    /// Items with `x_i = 1`.
    pub fn integral_part(&self) -> Vec<usize> {
        self.x.iter().enumerate().filter(|(_, &x)| x == T::one()).map(|(i, _)| i).collect()
    }
}

/// Objective of the relaxation at `x`.
pub fn fr_objective<T: Scalar>(items: &[FrItem<T>], x: &[T], q: T, r: T) -> T {
    let exposure: T = items.iter().zip(x).map(|(it, &xi)| it.weight * xi).sum();
    let spend: T = items.iter().zip(x).map(|(it, &xi)| it.cost * xi).sum();
    r * (T::one() - q * (-exposure).exp()) - spend
}

/// `a` before `b` when `w_a / c_a > w_b / c_b`, compared without dividing.
fn by_ratio_desc<T: Scalar>(a: &FrItem<T>, b: &FrItem<T>) -> Ordering {
    let lhs = a.weight * b.cost;
    let rhs = b.weight * a.cost;
    rhs.partial_cmp(&lhs).unwrap_or(Ordering::Equal)
}

/// Greedy solution of the relaxation. Every weight must be finite.
pub fn solve_fr<T: Scalar>(items: &[FrItem<T>], q: T, r: T) -> FractionalSolution<T> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| by_ratio_desc(&items[a], &items[b]));

    // A stationary point within this relative distance of full inclusion is
    // rounded up; the objective is flat there.
    let snap = T::epsilon().sqrt();
    let mut x = vec![T::zero(); items.len()];
    let mut fractional = None;
    let mut exposure = T::zero();
    for &i in &order {
        let FrItem { weight: w, cost: c } = items[i];
        debug_assert!(w.is_finite(), "infinite weight in relaxation");
        if w <= T::zero() {
            continue;
        }
        if c <= T::zero() || r * q * w * (-(exposure + w)).exp() >= c {
            x[i] = T::one();
            exposure = exposure + w;
            continue;
        }
        let level = ((r * q * w / c).ln() - exposure) / w;
        if level >= T::one() - snap {
            x[i] = T::one();
            exposure = exposure + w;
            continue;
        }
        if level > T::zero() {
            x[i] = level;
            fractional = Some(i);
        }
        break;
    }
    let objective = fr_objective(items, &x, q, r);
    FractionalSolution { x, objective, fractional }
}
