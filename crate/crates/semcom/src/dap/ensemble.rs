//! Monte Carlo ensemble over random allocation instances: per (user count,
//! discount) cell, mean profit for the greedy, greedy-cost, and exact
//! solvers plus rating statistics.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

use super::{
    exact_allocate_with, greedy_allocate, greedy_cost_allocate, profit, rating,
    satisfaction_levels, Allocation, AllocationInstance, CategoryCatalog, ExactConfig,
};

#[derive(Debug, Clone)]
pub struct EnsembleParams {
    pub category_count: usize,
    pub user_grid: Vec<usize>,
    pub capacity: f64,
    /// Sizes drawn uniformly from this closed interval.
    pub size_range: (f64, f64),
    /// Sell costs drawn uniformly from (0, cost_max].
    pub cost_max: f64,
    /// Purchase cost of a category as a fraction of its sell cost.
    pub purchase_fraction: f64,
    /// Sell costs scaled by (1 - f) per grid entry; 0.0 means no discount.
    pub discount_grid: Vec<f64>,
    pub iterations: usize,
    /// Attempts per instance before an infeasible draw becomes an error.
    pub max_retries: usize,
    pub exact: ExactConfig,
    /// Skip the exact solver entirely (large cells where it cannot finish).
    pub run_exact: bool,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        EnsembleParams {
            category_count: 20,
            user_grid: vec![500, 900, 1300, 1700, 2100],
            capacity: 64_000.0,
            size_range: (10.0, 100.0),
            cost_max: 1.0,
            purchase_fraction: 0.1,
            discount_grid: vec![0.0],
            iterations: 25,
            max_retries: 100,
            exact: ExactConfig::default(),
            run_exact: false,
        }
    }
}

/// Aggregates for one (user count, discount) grid cell.
#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub user_count: usize,
    pub discount: f64,
    pub iterations: usize,
    pub mean_profit_greedy: f64,
    pub mean_profit_greedy_cost: f64,
    /// Present only when the exact solver ran on every iteration.
    pub mean_profit_exact: Option<f64>,
    pub mean_rating_greedy: f64,
    pub mean_rating_greedy_cost: f64,
    /// Counts of ratings 1..=5 over all users and iterations, greedy solver.
    pub rating_histogram_greedy: [u64; 5],
    pub rating_histogram_greedy_cost: [u64; 5],
    /// Infeasible draws that were regenerated while filling this cell.
    pub regenerated: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleReport {
    pub cells: Vec<CellReport>,
}

fn mix_seed(base: u64, stream: u64) -> u64 {
    let mut x = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Draw `n` values from `draw`, sort ascending, and nudge ties by rank so the
/// result is strictly increasing.
fn sorted_strict(n: usize, mut draw: impl FnMut() -> f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| draw()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for i in 1..n {
        if v[i] <= v[i - 1] {
            v[i] = v[i - 1] + f64::EPSILON * (i as f64 + 1.0) * v[i - 1].abs().max(1.0);
        }
    }
    v
}

fn generate_instance(
    params: &EnsembleParams,
    user_count: usize,
    discount: f64,
    rng: &mut ChaCha8Rng,
) -> Result<AllocationInstance> {
    let g = params.category_count;
    let (lo, hi) = params.size_range;
    let sizes = sorted_strict(g, || rng.gen_range(lo..=hi));
    // uniform over (0, cost_max]: flip the half-open end of gen_range
    let mut costs = sorted_strict(g, || params.cost_max - rng.gen_range(0.0..params.cost_max));
    let purchase: Vec<f64> = costs.iter().map(|c| params.purchase_fraction * c).collect();
    let budgets: Vec<f64> = (0..user_count)
        .map(|_| rng.gen_range(costs[0]..=costs[g - 1]))
        .collect();
    if discount != 0.0 {
        for c in &mut costs {
            *c *= 1.0 - discount;
        }
    }
    let catalog = CategoryCatalog::new(sizes, costs, purchase)?;
    AllocationInstance::new(catalog, budgets, params.capacity)
}

fn rating_stats(
    instance: &AllocationInstance,
    allocation: &Allocation,
    histogram: &mut [u64; 5],
) -> Result<f64> {
    let levels = satisfaction_levels(instance, allocation);
    let mut sum = 0.0;
    for sl in &levels {
        let r = rating(*sl as i64)?;
        histogram[r as usize - 1] += 1;
        sum += r as f64;
    }
    Ok(sum / levels.len().max(1) as f64)
}

/// Run the full grid. Deterministic in `seed`: every cell and iteration gets
/// an independently derived stream.
pub fn simulate_ensemble(params: &EnsembleParams, seed: u64) -> Result<EnsembleReport> {
    if params.user_grid.is_empty() || params.discount_grid.is_empty() {
        return Err(Error::Dap(
            "user and discount grids must be nonempty".into(),
        ));
    }
    if params.iterations == 0 {
        return Err(Error::Dap("iterations must be positive".into()));
    }
    if params
        .discount_grid
        .iter()
        .any(|&f| !(0.0..1.0).contains(&f))
    {
        return Err(Error::Dap("discount factors must lie in [0, 1)".into()));
    }
    let mut cells = Vec::new();
    for (ci, &user_count) in params.user_grid.iter().enumerate() {
        for (di, &discount) in params.discount_grid.iter().enumerate() {
            let cell_stream = (ci as u64) << 32 | di as u64;
            let mut regenerated = 0usize;
            let mut sum_greedy = 0.0;
            let mut sum_cost = 0.0;
            let mut sum_exact = 0.0;
            let mut exact_runs = 0usize;
            let mut sum_rating_greedy = 0.0;
            let mut sum_rating_cost = 0.0;
            let mut hist_greedy = [0u64; 5];
            let mut hist_cost = [0u64; 5];
            for iter in 0..params.iterations {
                let stream = cell_stream
                    .wrapping_mul(0x1_0000_0001)
                    .wrapping_add(iter as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, stream));
                let mut instance = None;
                for _ in 0..=params.max_retries {
                    let candidate = generate_instance(params, user_count, discount, &mut rng)?;
                    if super::feasible(&candidate) {
                        instance = Some(candidate);
                        break;
                    }
                    regenerated += 1;
                }
                let instance = instance.ok_or_else(|| {
                    Error::Dap(format!(
                        "no feasible instance for J = {user_count} after {} retries",
                        params.max_retries
                    ))
                })?;

                let greedy = greedy_allocate(&instance)?;
                let greedy_cost = greedy_cost_allocate(&instance)?;
                sum_greedy += profit(&instance, &greedy)?;
                sum_cost += profit(&instance, &greedy_cost)?;
                sum_rating_greedy += rating_stats(&instance, &greedy, &mut hist_greedy)?;
                sum_rating_cost += rating_stats(&instance, &greedy_cost, &mut hist_cost)?;
                if params.run_exact {
                    match exact_allocate_with(&instance, &params.exact) {
                        Ok(exact) => {
                            sum_exact += profit(&instance, &exact)?;
                            exact_runs += 1;
                        }
                        // search-budget exhaustion just drops the exact
                        // column; real errors still surface
                        Err(Error::Dap(msg)) if msg.contains("budget exceeded") => {}
                        Err(e) => return Err(e),
                    }
                }
            }
            let n = params.iterations as f64;
            cells.push(CellReport {
                user_count,
                discount,
                iterations: params.iterations,
                mean_profit_greedy: sum_greedy / n,
                mean_profit_greedy_cost: sum_cost / n,
                mean_profit_exact: (exact_runs == params.iterations && params.run_exact)
                    .then(|| sum_exact / exact_runs as f64),
                mean_rating_greedy: sum_rating_greedy / n,
                mean_rating_greedy_cost: sum_rating_cost / n,
                rating_histogram_greedy: hist_greedy,
                rating_histogram_greedy_cost: hist_cost,
                regenerated,
            });
        }
    }
    Ok(EnsembleReport { cells })
}

/// Plot-ready CSV, one row per cell.
pub fn write_ensemble_csv(
    report: &EnsembleReport,
    path: impl AsRef<std::path::Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from(
        "users,discount,profit_greedy,profit_greedy_cost,profit_exact,rating_greedy,rating_greedy_cost,regenerated\n",
    );
    for cell in &report.cells {
        let exact = cell
            .mean_profit_exact
            .map_or_else(|| "".to_string(), |p| format!("{p:.6}"));
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{},{:.6},{:.6},{}\n",
            cell.user_count,
            cell.discount,
            cell.mean_profit_greedy,
            cell.mean_profit_greedy_cost,
            exact,
            cell.mean_rating_greedy,
            cell.mean_rating_greedy_cost,
            cell.regenerated,
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}
