//! Selection algorithms against their oracles and the bounds their analyses rely on.

use bidder_select::auction::{ap_optimal, ar_optimal, myerson_revenue};
use bidder_select::capacity::{brute_force_capacity, select_ap_capacity_opt, select_spp_capacity, CapacityObjective};
use bidder_select::cost::{
    apc_run, brute_force_cost, fr_objective, select_apc, select_arc, solve_fr, CostObjective, FrItem,
};
use bidder_select::generate::{random_instance, RandomConfig};
use bidder_select::io::{instance_to_json, parse_instance};
use bidder_select::{Bidder, Instance, Instance64};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn capacity_instance() -> impl Strategy<Value = Instance64> {
    (1usize..=7, any::<u64>(), 1usize..=4).prop_map(|(n, seed, m)| {
        random_instance(&RandomConfig { n, capacity: Some(m.min(n)), ..RandomConfig::default() }, seed, 0).unwrap()
    })
}

fn cost_instance(n_max: usize) -> impl Strategy<Value = Instance64> {
    (1usize..=n_max, any::<u64>()).prop_map(|(n, seed)| {
        random_instance(&RandomConfig { n, cost_range: Some((0.05, 4.0)), ..RandomConfig::default() }, seed, 0).unwrap()
    })
}

/// Same bidders in reverse order.
fn reversed(inst: &Instance64) -> Instance64 {
    let bidders: Vec<Bidder<f64>> = inst.bidders().iter().rev().cloned().collect();
    let capacity = inst.capacity().ok();
    Instance::new(bidders, capacity).unwrap()
}

fn fr_items() -> impl Strategy<Value = (Vec<FrItem<f64>>, f64, f64)> {
    (0.5f64..5.0, 0.0f64..=1.0, prop::collection::vec((0.05f64..3.0, 0.01f64..=1.0), 0..=7)).prop_map(|(r, q, raw)| {
        let items = raw
            .into_iter()
            .map(|(weight, frac)| FrItem { weight, cost: r * (-weight).exp() * weight * frac })
            .collect();
        (items, q, r)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn capacity_optima_ignore_bidder_order(inst in capacity_instance()) {
        let rev = reversed(&inst);
        for obj in [CapacityObjective::Ap, CapacityObjective::Ar, CapacityObjective::Myerson] {
            let a = brute_force_capacity(&inst, &obj).unwrap().revenue;
            let b = brute_force_capacity(&rev, &obj).unwrap().revenue;
            prop_assert!((a - b).abs() < TOL);
        }
        let a = select_ap_capacity_opt(&inst).unwrap().revenue;
        let b = select_ap_capacity_opt(&rev).unwrap().revenue;
        prop_assert!((a - b).abs() < TOL);
    }

    #[test]
    fn sequential_dp_is_exact_for_any_order(inst in capacity_instance(), shift in 0usize..7) {
        let n = inst.len();
        let order: Vec<usize> = (0..n).map(|k| (k + shift) % n).collect();
        let dp = select_spp_capacity(&inst, Some(&order)).unwrap();
        let oracle = brute_force_capacity(&inst, &CapacityObjective::SppFixedOrder(order)).unwrap();
        prop_assert!((dp.revenue - oracle.revenue).abs() < 1e-12);
        prop_assert!(dp.selected.len() <= inst.capacity().unwrap());
    }

    #[test]
    fn relaxation_structure((items, q, r) in fr_items()) {
        let sol = solve_fr(&items, q, r);
        prop_assert!(sol.x.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!(sol.x.iter().filter(|&&x| x > 0.0 && x < 1.0).count() <= 1);
        prop_assert!((sol.objective - fr_objective(&items, &sol.x, q, r)).abs() < TOL);
        // The relaxation bounds every integral point.
        for mask in 0u32..1 << items.len() {
            let x: Vec<f64> = (0..items.len()).map(|i| f64::from(mask >> i & 1)).collect();
            prop_assert!(sol.objective >= fr_objective(&items, &x, q, r) - TOL);
        }
    }

    #[test]
    fn rounding_loses_at_most_the_best_singleton(inst in cost_instance(8)) {
        for &r in inst.price_grid().prices() {
            let run = apc_run(&inst, r).unwrap();
            let singleton = run.best_singleton.map_or(0.0, |(_, p)| p);
            for cand in &run.candidates {
                prop_assert!(cand.relaxation - cand.profit <= singleton + TOL);
            }
        }
    }

    #[test]
    fn reserve_selection_dominates_anonymous(inst in cost_instance(6)) {
        let apc = select_apc(&inst).unwrap();
        let arc = select_arc(&inst).unwrap();
        prop_assert!(arc.outcome.profit >= apc.profit - TOL);
        prop_assert!((arc.apc_profit - apc.profit).abs() < TOL);
    }

    #[test]
    fn reserve_oracle_dominates_anonymous_oracle(inst in cost_instance(6)) {
        let apc = brute_force_cost(&inst, CostObjective::Apc).unwrap();
        let arc = brute_force_cost(&inst, CostObjective::Arc).unwrap();
        prop_assert!(arc.profit >= apc.profit - TOL);
        prop_assert!(apc.profit >= 0.0);
    }

    #[test]
    fn instances_round_trip(inst in cost_instance(6)) {
        let json = instance_to_json(&inst);
        let back: Instance64 = parse_instance(&json).unwrap();
        prop_assert_eq!(instance_to_json(&back), json);
        prop_assert_eq!(back.costs().unwrap(), inst.costs().unwrap());
    }
}

/// The one-bidder relaxation `h(x) = 1 - e^{-wx} - (1 - eps) x` against its
/// integral optimum `max(h(0), h(1))`, with `eps = 2 e^{-w}` so the integral
/// value is `e^{-w}`. The ratio must grow without bound as `w` grows.
#[test]
fn integrality_gap_grows() {
    let ratios: Vec<f64> = [2.0f64, 8.0, 32.0]
        .into_iter()
        .map(|w| {
            let eps = 2.0 * (-w).exp();
            let cost = 1.0 - eps;
            let sol = solve_fr(&[FrItem { weight: w, cost }], 1.0, 1.0);
            let integral = (1.0 - (-w).exp() - cost).max(0.0);
            assert!((integral - (-w).exp()).abs() < 1e-15);
            sol.objective / integral
        })
        .collect();
    assert!(ratios.windows(2).all(|p| p[1] > p[0]), "{ratios:?}");
    assert!(ratios[2] > 1e12);
}

#[test]
fn subset_sum_selects_both_bidders() {
    let inst: Instance64 = bidder_select::analysis::gen_subset_sum_instance(&[1.0, 2.0], 3.0).unwrap();
    let out = select_apc(&inst).unwrap();
    assert_eq!(out.selected, vec![0, 1]);
    assert!((out.profit - 0.800852).abs() < 1e-6);
    let oracle = brute_force_cost(&inst, CostObjective::Apc).unwrap();
    assert!((out.profit - oracle.profit).abs() < TOL);
}

#[test]
fn myerson_matches_monopoly_price_for_one_bidder() {
    let inst = random_instance::<f64>(&RandomConfig { n: 1, ..RandomConfig::default() }, 4, 0).unwrap();
    let d = inst.all_dists();
    assert!((myerson_revenue(&d) - ap_optimal(&d).1).abs() < TOL);
    assert!((ar_optimal(&d).1 - ap_optimal(&d).1).abs() < TOL);
}
