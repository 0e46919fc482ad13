//! Subcommand implementations. Each returns an [`Output`] for `main` to render.

use std::io::Read;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, ensure, Context as _, Result};
use bidder_select::analysis::{gen_gap_instance, gen_gap_instance_with, gen_subset_sum_instance};
use bidder_select::auction::{
    ap_optimal, ap_revenue, ar_optimal, ar_revenue, myerson_revenue, spa_revenue, spp_optimal, spp_optimal_fixed_order,
    Format,
};
use bidder_select::capacity::{
    brute_force_capacity, pi_squared_over_six, restrict_order, select_ap_capacity_opt, select_ar_capacity,
    select_myerson_greedy, select_spp_capacity, CapacityObjective, Mechanism, SelectionOutcome, BRUTE_FORCE_CAP,
    BRUTE_FORCE_SPP_CAP,
};
use bidder_select::cost::{brute_force_cost, select_apc, select_arc, select_arc_assuming, CostObjective};
use bidder_select::generate::{random_instance, RandomConfig};
use bidder_select::io::{instance_to_json, parse_instance};
use bidder_select::suites::{parse_suites, run_suite};
use bidder_select::{auction::DEFAULT_SPP_ORDER_CAP, Constraint, Instance64};
use rayon::prelude::*;

use crate::report::{instance_digest, ReportRow, RunReport};
use crate::{BenchArgs, EvalArgs, GenKind, Model, OracleMode, SelectArgs, VerifyArgs};

/// Invitation costs drawn by `bench` for cost instances.
const BENCH_COST_RANGE: (f64, f64) = (0.2, 4.0);

pub struct Context {
    pub seed: u64,
    pub oracle: OracleMode,
    /// Oracle pool cap, already clamped to the library's limit.
    pub cap: usize,
    pub timings: bool,
    pub command: String,
}

pub enum Output {
    Instance(String),
    Report { report: RunReport, checks: bool },
}

impl Context {
    /// Whether an oracle over `n` bidders with pool cap `cap` should run.
    fn oracle_for(&self, n: usize, cap: usize, what: &str) -> Result<bool> {
        let cap = cap.min(self.cap);
        match self.oracle {
            OracleMode::Off => Ok(false),
            OracleMode::Auto => Ok(n <= cap),
            OracleMode::Strict if n <= cap => Ok(true),
            OracleMode::Strict => bail!("{what} oracle over {n} bidders exceeds the cap of {cap}"),
        }
    }

    /// Runs `f`, returning its value and the elapsed milliseconds (0 unless timings are on).
    fn timed<R>(&self, f: impl FnOnce() -> R) -> (R, f64) {
        let start = Instant::now();
        let out = f();
        let millis = if self.timings { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        (out, millis)
    }

    fn report(&self, digest: Option<String>, rows: Vec<ReportRow>) -> Output {
        Output::Report { report: RunReport::new(self.command.clone(), digest, self.seed, rows), checks: false }
    }
}

fn load_instance(path: &Path) -> Result<Instance64> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_ids(instance: &Instance64, list: &str) -> Result<Vec<usize>> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|id| Ok(instance.index_of(id)?)).collect()
}

/// Full visiting order over `0..n`: `input`, or ids followed by the remaining bidders in input order.
fn parse_order(instance: &Instance64, spec: &str) -> Result<Vec<usize>> {
    if spec == "input" {
        return Ok((0..instance.len()).collect());
    }
    let mut order = parse_ids(instance, spec)?;
    let mut seen = vec![false; instance.len()];
    for &i in &order {
        ensure!(!std::mem::replace(&mut seen[i], true), "bidder {:?} repeated in --order", instance.bidder(i).id);
    }
    order.extend((0..instance.len()).filter(|&i| !seen[i]));
    Ok(order)
}

pub fn eval(ctx: &Context, args: &EvalArgs) -> Result<Output> {
    let inst = load_instance(&args.instance)?;
    let set: Vec<usize> = match &args.subset {
        Some(list) => parse_ids(&inst, list)?,
        None => (0..inst.len()).collect(),
    };
    let dists = inst.dists(&set);
    if args.price.is_some() && !matches!(args.auction, Format::Ap | Format::Ar) {
        bail!("--price applies to ap and ar only");
    }
    let (result, millis) = ctx.timed(|| -> Result<(Mechanism<f64>, f64)> {
        Ok(match args.auction {
            Format::Ap => {
                let (r, rev) = match args.price {
                    Some(r) => (r, ap_revenue(&dists, r)),
                    None => ap_optimal(&dists),
                };
                (Mechanism::AnonymousPrice(r), rev)
            }
            Format::Ar => {
                let (r, rev) = match args.price {
                    Some(r) => (r, ar_revenue(&dists, r)),
                    None => ar_optimal(&dists),
                };
                (Mechanism::Reserve(r), rev)
            }
            Format::Spa => (Mechanism::Reserve(0.0), spa_revenue(&dists)),
            Format::Spp => {
                let (plan, rev) = if args.order == "best" {
                    spp_optimal(&dists)?
                } else {
                    let order = restrict_order(&parse_order(&inst, &args.order)?, &set);
                    spp_optimal_fixed_order(&dists, &order)?
                };
                let steps = plan.order.iter().zip(&plan.prices).map(|(&k, &p)| (set[k], p)).collect();
                (Mechanism::Sequential(steps), rev)
            }
            Format::Myerson => (Mechanism::Myerson, myerson_revenue(&dists)),
        })
    });
    let (mechanism, revenue) = result?;
    let outcome = SelectionOutcome::with_cost(set.clone(), mechanism, revenue, inst.cost_of(&set), None);
    let digest = instance_digest(&inst);
    let row = ReportRow::from_outcome(format!("eval-{}", args.auction.name()), &inst, &digest, &outcome, None)
        .with_millis(millis);
    Ok(ctx.report(Some(digest), vec![row]))
}

fn capacity_rows(
    ctx: &Context,
    inst: &Instance64,
    hash: &str,
    auction: Format,
    order: &[usize],
) -> Result<Vec<ReportRow>> {
    let m = inst.capacity()?;
    let n = inst.len();
    let param = Some(m as f64);
    let oracle = |objective: CapacityObjective| brute_force_capacity(inst, &objective).map(|o| o.revenue);
    let mut rows = Vec::new();
    match auction {
        Format::Ap => {
            let (out, ms) = ctx.timed(|| select_ap_capacity_opt(inst));
            let mut row = ReportRow::from_outcome("ap-capacity", inst, hash, &out?, param).with_millis(ms);
            if ctx.oracle_for(n, BRUTE_FORCE_CAP, "ap")? {
                row = row.with_oracle(oracle(CapacityObjective::Ap)?);
            }
            rows.push(row);
        }
        Format::Ar => {
            let (sel, ms) = ctx.timed(|| select_ar_capacity(inst));
            let sel = sel?;
            let (r, rev) = sel.reoptimized;
            let reopt = SelectionOutcome::revenue_only(
                sel.outcome.selected.clone(),
                Mechanism::Reserve(r),
                rev,
                Some(pi_squared_over_six()),
            );
            let mut pair = [
                ReportRow::from_outcome("ar-capacity", inst, hash, &sel.outcome, param).with_millis(ms),
                ReportRow::from_outcome("ar-capacity-reopt", inst, hash, &reopt, param).with_millis(ms),
            ];
            if ctx.oracle_for(n, BRUTE_FORCE_CAP, "ar")? {
                let best = oracle(CapacityObjective::Ar)?;
                pair = pair.map(|row| row.with_oracle(best));
            }
            rows.extend(pair);
        }
        Format::Spp => {
            let (out, ms) = ctx.timed(|| select_spp_capacity(inst, Some(order)));
            let out = out?;
            let exact = SelectionOutcome { guarantee: Some(1.0), ..out.clone() };
            let mut fixed = ReportRow::from_outcome("spp-capacity", inst, hash, &exact, param).with_millis(ms);
            if ctx.oracle_for(n, BRUTE_FORCE_CAP, "spp fixed-order")? {
                fixed = fixed.with_oracle(oracle(CapacityObjective::SppFixedOrder(order.to_vec()))?);
            }
            rows.push(fixed);
            let mut any =
                ReportRow::from_outcome("spp-capacity-vs-all-orders", inst, hash, &out, param).with_millis(ms);
            if m <= DEFAULT_SPP_ORDER_CAP && ctx.oracle_for(n, BRUTE_FORCE_SPP_CAP, "spp all-orders")? {
                any = any.with_oracle(oracle(CapacityObjective::Spp)?);
            }
            rows.push(any);
        }
        Format::Myerson => {
            let (out, ms) = ctx.timed(|| select_myerson_greedy(inst));
            let mut row = ReportRow::from_outcome("myer-capacity-greedy", inst, hash, &out?, param).with_millis(ms);
            if ctx.oracle_for(n, BRUTE_FORCE_CAP, "myerson")? {
                row = row.with_oracle(oracle(CapacityObjective::Myerson)?);
            }
            rows.push(row);
        }
        Format::Spa => bail!("no capacity selection algorithm for spa; use eval or ar"),
    }
    Ok(rows)
}

fn cost_rows(
    ctx: &Context,
    inst: &Instance64,
    hash: &str,
    auction: Format,
    delta: Option<f64>,
) -> Result<Vec<ReportRow>> {
    inst.costs()?;
    let n = inst.len();
    match auction {
        Format::Ap => {
            let (out, ms) = ctx.timed(|| select_apc(inst));
            let mut row = ReportRow::from_outcome("ap-cost", inst, hash, &out?, None).with_millis(ms);
            if ctx.oracle_for(n, BRUTE_FORCE_CAP, "ap cost")? {
                let best = brute_force_cost(inst, CostObjective::Apc)?.profit;
                row = row.with_oracle(best);
            }
            Ok(vec![row])
        }
        Format::Ar => {
            let run_oracle = ctx.oracle_for(n, BRUTE_FORCE_CAP, "ar cost")?;
            let (sel, ms) = ctx.timed(|| match delta {
                Some(d) => select_arc_assuming(inst, Some(d)),
                None if run_oracle => select_arc(inst),
                None => select_arc_assuming(inst, None),
            });
            let sel = sel?;
            let param = sel.surplus.map(|s| s.delta);
            let mut row = ReportRow::from_outcome("ar-cost", inst, hash, &sel.outcome, param).with_millis(ms);
            let best = match sel.oracle {
                Some(o) => Some(o.profit),
                None if run_oracle => Some(brute_force_cost(inst, CostObjective::Arc)?.profit),
                None => None,
            };
            if let Some(best) = best {
                row = row.with_oracle(best);
            }
            Ok(vec![row])
        }
        other => bail!("no cost selection algorithm for {}; use ap or ar", other.name()),
    }
}

pub fn select(ctx: &Context, args: &SelectArgs) -> Result<Output> {
    let inst = load_instance(&args.instance)?;
    let found = inst.constraint();
    let matches =
        matches!((args.model, found), (Model::Capacity, Constraint::Capacity(_)) | (Model::Cost, Constraint::Costs));
    ensure!(matches, "--model does not match the instance, which is a {} instance", found.name());
    let digest = instance_digest(&inst);
    let rows = match args.model {
        Model::Capacity => capacity_rows(ctx, &inst, &digest, args.auction, &parse_order(&inst, &args.order)?)?,
        Model::Cost => {
            ensure!(args.order == "input", "--order applies to capacity spp only");
            cost_rows(ctx, &inst, &digest, args.auction, args.delta)?
        }
    };
    Ok(ctx.report(Some(digest), rows))
}

pub fn verify(ctx: &Context, args: &VerifyArgs) -> Result<Output> {
    let suites = parse_suites(&args.suite).map_err(anyhow::Error::msg)?;
    let mut rows = Vec::new();
    for suite in suites {
        let (outcome, ms) = ctx.timed(|| run_suite(suite, ctx.seed, args.count));
        let outcome = outcome?;
        let worst = outcome.rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        let max_factor = outcome.rows.iter().filter_map(|r| r.observed_factor()).fold(0.0, f64::max);
        eprintln!(
            "{}: {} checks, {} violations, min slack {worst:.3e}, max observed factor {max_factor:.4}",
            suite.name(),
            outcome.rows.len(),
            outcome.violations()
        );
        let per_row = ms / outcome.rows.len().max(1) as f64;
        rows.extend(outcome.rows.iter().map(|r| ReportRow {
            instance_hash: instance_digest(&r.instance),
            algorithm: format!("{}/{}", suite.name(), r.check),
            n: r.n(),
            m_or_deltastar: r.param,
            selected_ids: Vec::new(),
            mechanism: format!("instance={}", r.index),
            revenue: r.value + r.cost,
            cost: r.cost,
            profit: r.value,
            claimed_factor: r.claimed_factor,
            oracle_value: r.oracle,
            observed_factor: r.observed_factor(),
            millis: per_row,
            slack: Some(r.slack),
            pass: Some(r.pass()),
        }));
    }
    let report = RunReport::new(ctx.command.clone(), None, ctx.seed, rows);
    Ok(Output::Report { report, checks: true })
}

fn pair<T: Copy>(values: &[T], flag: &str) -> Result<(T, T)> {
    match values {
        &[lo, hi] => Ok((lo, hi)),
        _ => bail!("--{flag} takes exactly two comma-separated values"),
    }
}

pub fn gen(ctx: &Context, kind: &GenKind) -> Result<Output> {
    let inst: Instance64 = match kind {
        GenKind::Random { n, capacity, costs, support, values, tie_free, regular } => {
            let config = RandomConfig {
                n: *n,
                support: pair(support, "support")?,
                value_range: pair(values, "values")?,
                cost_range: costs.as_deref().map(|c| pair(c, "costs")).transpose()?,
                capacity: *capacity,
                tie_free: *tie_free,
                regular: *regular,
                ..RandomConfig::default()
            };
            random_instance(&config, ctx.seed, 0)?
        }
        GenKind::SubsetSum { weights, total } => gen_subset_sum_instance(weights, *total)?,
        GenKind::Gap { n, grid, vmax } => match vmax {
            Some(v) => gen_gap_instance_with(*n, *grid, *v)?,
            None => gen_gap_instance(*n, *grid)?,
        },
    };
    Ok(Output::Instance(instance_to_json(&inst)))
}

/// One capacity and one cost instance per `(size, index)`, every algorithm on each.
pub fn bench(ctx: &Context, args: &BenchArgs) -> Result<Output> {
    ensure!(args.sizes.iter().all(|&n| n >= 1), "--sizes must be positive");
    let jobs: Vec<(usize, usize)> = args.sizes.iter().flat_map(|&n| (0..args.count).map(move |k| (n, k))).collect();
    let nested: Vec<Vec<ReportRow>> = jobs
        .par_iter()
        .map(|&(n, k)| -> Result<Vec<ReportRow>> {
            let stream = (n as u64) << 32 | k as u64;
            // Capacities cycle through 1..=ceil(n/2).
            let m = 1 + k % n.div_ceil(2);
            let cap_inst: Instance64 =
                random_instance(&RandomConfig { n, capacity: Some(m), ..RandomConfig::default() }, ctx.seed, stream)?;
            let hash = instance_digest(&cap_inst);
            let order: Vec<usize> = (0..n).collect();
            let mut rows = Vec::new();
            for auction in [Format::Ap, Format::Ar, Format::Spp, Format::Myerson] {
                rows.extend(capacity_rows(ctx, &cap_inst, &hash, auction, &order)?);
            }
            let cost_cfg = RandomConfig { n, cost_range: Some(BENCH_COST_RANGE), ..RandomConfig::default() };
            let cost_inst: Instance64 = random_instance(&cost_cfg, ctx.seed, stream | 1 << 63)?;
            let hash = instance_digest(&cost_inst);
            for auction in [Format::Ap, Format::Ar] {
                rows.extend(cost_rows(ctx, &cost_inst, &hash, auction, None)?);
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ReportRow> = nested.into_iter().flatten().collect();
    let report = RunReport::new(ctx.command.clone(), None, ctx.seed, rows);
    Ok(Output::Report { report, checks: false })
}
