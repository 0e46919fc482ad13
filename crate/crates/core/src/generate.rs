//! Seeded random instances.
//!
//! Every instance is drawn from a ChaCha8 stream selected by `(seed, stream)`,
//! so instance `k` of a batch can be regenerated on its own and batches can be
//! produced in parallel without changing their content.

use rand::seq::index;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::auction::is_regular;
use crate::error::{Error, Result};
use crate::model::{Bidder, Instance, ValueDistribution};
use crate::scalar::Scalar;

/// Name of the generator recorded in reports.
pub const GENERATOR_NAME: &str = "chacha8";

/// Offset added to every value of bidder `i` (times `i`) in tie-free instances.
pub const TIE_BREAK_JITTER: f64 = 1e-7;

const REGULAR_ATTEMPTS: usize = 1000;

pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomConfig {
    pub n: usize,
    /// Inclusive range of support sizes.
    pub support: (usize, usize),
    /// Values are drawn from `grid_points` log-spaced points over this range.
    pub value_range: (f64, f64),
    pub grid_points: usize,
    /// Log-uniform invitation costs; `None` for no costs.
    pub cost_range: Option<(f64, f64)>,
    pub capacity: Option<usize>,
    /// Shift bidder `i`'s support by `i * 1e-7` so no two bidders share a value.
    pub tie_free: bool,
    /// Redraw each distribution until its virtual values need no ironing.
    pub regular: bool,
}

impl Default for RandomConfig {
    fn default() -> Self {
        Self {
            n: 6,
            support: (2, 5),
            value_range: (1.0, 20.0),
            grid_points: 24,
            cost_range: None,
            capacity: None,
            tie_free: false,
            regular: false,
        }
    }
}

impl RandomConfig {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support;
        let (vlo, vhi) = self.value_range;
        if self.n == 0 {
            return Err(Error::InvalidInstance("random instance needs n >= 1".into()));
        }
        if lo == 0 || lo > hi || hi > self.grid_points {
            return Err(Error::InvalidInstance(format!(
                "support sizes {lo}..={hi} must be nonempty and fit in {} grid points",
                self.grid_points
            )));
        }
        if !(vlo > 0.0 && vhi > vlo && vhi.is_finite()) {
            return Err(Error::InvalidInstance(format!("value range ({vlo}, {vhi}) must be positive and increasing")));
        }
        if let Some((clo, chi)) = self.cost_range {
            if !(clo > 0.0 && chi >= clo && chi.is_finite()) {
                return Err(Error::InvalidInstance(format!("cost range ({clo}, {chi}) must be positive")));
            }
        }
        Ok(())
    }

    fn value_grid(&self) -> Vec<f64> {
        let (lo, hi) = self.value_range;
        let steps = (self.grid_points.max(2) - 1) as f64;
        (0..self.grid_points).map(|k| lo * (hi / lo).powf(k as f64 / steps)).collect()
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// Masses from the uniform distribution on the simplex.
fn simplex<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1).max(f64::MIN_POSITIVE)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

fn draw_distribution<T: Scalar, R: Rng>(
    rng: &mut R,
    grid: &[f64],
    support: (usize, usize),
    offset: f64,
) -> Result<ValueDistribution<T>> {
    let k = rng.random_range(support.0..=support.1);
    let mut picks = index::sample(rng, grid.len(), k).into_vec();
    picks.sort_unstable();
    let masses = simplex(rng, k);
    ValueDistribution::new(picks.into_iter().zip(masses).map(|(p, m)| (T::lit(grid[p] + offset), T::lit(m))))
}

/// One random distribution under `config`, shifted by `offset`.
pub fn random_distribution<T: Scalar, R: Rng>(
    rng: &mut R,
    config: &RandomConfig,
    offset: f64,
) -> Result<ValueDistribution<T>> {
    config.validate()?;
    let grid = config.value_grid();
    if !config.regular {
        return draw_distribution(rng, &grid, config.support, offset);
    }
    for _ in 0..REGULAR_ATTEMPTS {
        let dist = draw_distribution(rng, &grid, config.support, offset)?;
        if is_regular(&dist) {
            return Ok(dist);
        }
    }
    // Two-atom distributions are always regular.
    draw_distribution(rng, &grid, (config.support.0.min(2), 2), offset)
}

/// A random instance drawn from `rng`.
pub fn random_instance_from<T: Scalar, R: Rng>(rng: &mut R, config: &RandomConfig) -> Result<Instance<T>> {
    config.validate()?;
    let mut bidders = Vec::with_capacity(config.n);
    for i in 0..config.n {
        let offset = if config.tie_free { i as f64 * TIE_BREAK_JITTER } else { 0.0 };
        let dist = random_distribution(rng, config, offset)?;
        let id = format!("b{}", i + 1);
        bidders.push(match config.cost_range {
            Some((lo, hi)) => Bidder::with_cost(id, dist, T::lit(log_uniform(rng, lo, hi))),
            None => Bidder::new(id, dist),
        });
    }
    Instance::new(bidders, config.capacity.map(|m| m.min(config.n)))
}

/// Instance number `stream` of the batch seeded by `seed`.
pub fn random_instance<T: Scalar>(config: &RandomConfig, seed: u64, stream: u64) -> Result<Instance<T>> {
    random_instance_from(&mut seeded_rng(seed, stream), config)
}

/// Each of `0..n` independently with probability one half.
pub fn random_subset<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).filter(|_| rng.random_bool(0.5)).collect()
}
