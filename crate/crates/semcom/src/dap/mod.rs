//! The data allocation problem: assign exactly one data category to each
//! user, respecting budgets and the storage cap, maximizing data-center
//! profit. Greedy, greedy-cost, and exact solvers, plus the knapsack
//! reduction and satisfaction/rating analytics.

pub mod ensemble;

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Relative slack for floating-point capacity checks.
const CAPACITY_EPS: f64 = 1e-9;

/// The data categories on offer: sizes and sell costs strictly increase with
/// the category index; purchase costs are nondecreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryCatalog {
    pub sizes: Vec<f64>,
    pub sell_costs: Vec<f64>,
    pub purchase_costs: Vec<f64>,
}

impl CategoryCatalog {
    pub fn new(sizes: Vec<f64>, sell_costs: Vec<f64>, purchase_costs: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Dap("catalog must have at least one category".into()));
        }
        if sizes.len() != sell_costs.len() || sizes.len() != purchase_costs.len() {
            return Err(Error::Dap("catalog arrays must have equal length".into()));
        }
        let finite_positive = |v: &[f64], name: &str| -> Result<()> {
            if v.iter().any(|&x| !x.is_finite() || x <= 0.0) {
                return Err(Error::Dap(format!("{name} must be positive and finite")));
            }
            Ok(())
        };
        finite_positive(&sizes, "sizes z")?;
        finite_positive(&sell_costs, "sell costs c")?;
        if purchase_costs.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::Dap("purchase costs d must be nonnegative".into()));
        }
        let strictly_increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !strictly_increasing(&sizes) {
            return Err(Error::Dap("sizes z must be strictly increasing".into()));
        }
        if !strictly_increasing(&sell_costs) {
            return Err(Error::Dap(
                "sell costs c must be strictly increasing".into(),
            ));
        }
        if purchase_costs.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Dap("purchase costs d must be nondecreasing".into()));
        }
        Ok(CategoryCatalog {
            sizes,
            sell_costs,
            purchase_costs,
        })
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }
}

/// The subscribed users; every budget must afford the cheapest category.
#[derive(Debug, Clone, PartialEq)]
pub struct UserSet {
    pub budgets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationInstance {
    pub catalog: CategoryCatalog,
    pub users: UserSet,
    pub capacity: f64,
}

impl AllocationInstance {
    pub fn new(catalog: CategoryCatalog, budgets: Vec<f64>, capacity: f64) -> Result<Self> {
        if capacity <= 0.0 || !capacity.is_finite() {
            return Err(Error::Dap("capacity Z must be positive".into()));
        }
        let c1 = catalog.sell_costs[0];
        if let Some(j) = budgets.iter().position(|&b| b < c1 || b.is_nan()) {
            return Err(Error::Dap(format!(
                "budget b_{} = {} below cheapest category cost {c1}",
                j + 1,
                budgets[j]
            )));
        }
        Ok(AllocationInstance {
            catalog,
            users: UserSet { budgets },
            capacity,
        })
    }

    pub fn category_count(&self) -> usize {
        self.catalog.len()
    }

    pub fn user_count(&self) -> usize {
        self.users.budgets.len()
    }

    /// Highest category index (0-based) whose sell cost fits budget j.
    pub fn best_eligible(&self, user: usize) -> usize {
        let b = self.users.budgets[user];
        self.catalog
            .sell_costs
            .partition_point(|&c| c <= b)
            .saturating_sub(1)
    }
}

/// One category per user, stored as 0-based category indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub assignment: Vec<usize>,
}

impl Allocation {
    /// m_i: users allocated each category.
    pub fn category_counts(&self, category_count: usize) -> Vec<usize> {
        let mut counts = vec![0; category_count];
        for &i in &self.assignment {
            counts[i] += 1;
        }
        counts
    }

    pub fn total_size(&self, instance: &AllocationInstance) -> f64 {
        self.assignment
            .iter()
            .map(|&i| instance.catalog.sizes[i])
            .sum()
    }
}

/// Eligibility matrix U: U[i][j] = 1 iff user j's budget covers category i.
pub fn eligibility(instance: &AllocationInstance) -> Vec<Vec<bool>> {
    let g = instance.category_count();
    let j = instance.user_count();
    let mut u = vec![vec![false; j]; g];
    for (jj, &b) in instance.users.budgets.iter().enumerate() {
        for (ii, &c) in instance.catalog.sell_costs.iter().enumerate() {
            u[ii][jj] = b >= c;
        }
    }
    u
}

/// Feasibility: even the cheapest assignment for everyone fits, J * z_1 <= Z.
pub fn feasible(instance: &AllocationInstance) -> bool {
    instance.user_count() as f64 * instance.catalog.sizes[0]
        <= instance.capacity * (1.0 + CAPACITY_EPS)
}

fn greedy_core(instance: &AllocationInstance, downgrade_key: &[f64]) -> Result<Allocation> {
    if !feasible(instance) {
        return Err(Error::Dap("No feasible solution".into()));
    }
    let g = instance.category_count();
    let j = instance.user_count();

    let mut assignment: Vec<usize> = (0..j).map(|u| instance.best_eligible(u)).collect();
    let mut total: f64 = assignment.iter().map(|&i| instance.catalog.sizes[i]).sum();

    // users grouped by current category, min-index first; category 0 is
    // never a downgrade source
    let mut buckets: Vec<BinaryHeap<Reverse<usize>>> = vec![BinaryHeap::new(); g];
    for (u, &i) in assignment.iter().enumerate() {
        buckets[i].push(Reverse(u));
    }
    // categories in downgrade-priority order: smallest key, then smallest index
    let mut order: Vec<usize> = (1..g).collect();
    order.sort_by(|&a, &b| {
        downgrade_key[a]
            .partial_cmp(&downgrade_key[b])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut iterations = 0usize;
    let bound = j * g.saturating_sub(1);
    // same relative slack as the profit checker: summation order must not
    // force a downgrade on a boundary-tight instance
    while total > instance.capacity * (1.0 + CAPACITY_EPS) {
        let Some(&cat) = order.iter().find(|&&i| !buckets[i].is_empty()) else {
            // everyone already at category 1; feasibility precheck makes
            // this unreachable, but never loop silently
            return Err(Error::Dap("no downgrade candidate left".into()));
        };
        let Reverse(user) = buckets[cat].pop().unwrap();
        buckets[cat - 1].push(Reverse(user));
        assignment[user] = cat - 1;
        total += instance.catalog.sizes[cat - 1] - instance.catalog.sizes[cat];
        iterations += 1;
        if iterations > bound {
            return Err(Error::Dap("downgrade loop exceeded its bound".into()));
        }
    }
    Ok(Allocation { assignment })
}

/// Algorithm that assigns everyone their best eligible category and, while
/// the storage cap is violated, downgrades the user whose category minimizes
/// the cost/size ratio (ties: smallest category index, then smallest user).
pub fn greedy_allocate(instance: &AllocationInstance) -> Result<Allocation> {
    let key: Vec<f64> = instance
        .catalog
        .sell_costs
        .iter()
        .zip(&instance.catalog.sizes)
        .map(|(&c, &z)| c / z)
        .collect();
    greedy_core(instance, &key)
}

/// Greedy variant downgrading by minimum sell cost instead of the ratio.
pub fn greedy_cost_allocate(instance: &AllocationInstance) -> Result<Allocation> {
    greedy_core(instance, &instance.catalog.sell_costs)
}

/// Validate an allocation and return its profit, sum_i (c_i m_i - d_i).
/// The purchase cost of every category is subtracted regardless of use.
pub fn profit(instance: &AllocationInstance, allocation: &Allocation) -> Result<f64> {
    let g = instance.category_count();
    if allocation.assignment.len() != instance.user_count() {
        return Err(Error::Dap(format!(
            "assignment covers {} users, instance has {} (one category per user)",
            allocation.assignment.len(),
            instance.user_count()
        )));
    }
    for (j, &i) in allocation.assignment.iter().enumerate() {
        if i >= g {
            return Err(Error::Dap(format!(
                "user {} assigned nonexistent category {}",
                j + 1,
                i + 1
            )));
        }
        if instance.catalog.sell_costs[i] > instance.users.budgets[j] {
            return Err(Error::Dap(format!(
                "eligibility violated: category {} costs {} but user {} has budget {}",
                i + 1,
                instance.catalog.sell_costs[i],
                j + 1,
                instance.users.budgets[j]
            )));
        }
    }
    let total = allocation.total_size(instance);
    if total > instance.capacity * (1.0 + CAPACITY_EPS) + CAPACITY_EPS {
        return Err(Error::Dap(format!(
            "capacity violated: total size {total} exceeds Z = {}",
            instance.capacity
        )));
    }
    let counts = allocation.category_counts(g);
    let sold: f64 = counts
        .iter()
        .zip(&instance.catalog.sell_costs)
        .map(|(&m, &c)| m as f64 * c)
        .sum();
    let purchased: f64 = instance.catalog.purchase_costs.iter().sum();
    Ok(sold - purchased)
}

/// Search limits for the exact solver.
#[derive(Debug, Clone, Copy)]
pub struct ExactConfig {
    /// Use plain enumeration when G^J stays at or below this.
    pub exhaustive_limit: f64,
    /// Branch-and-bound node budget; exceeding it is an error, never a
    /// silent approximation.
    pub max_nodes: u64,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            exhaustive_limit: 1e7,
            max_nodes: 20_000_000,
        }
    }
}

/// Profit-maximal allocation. Ties break toward the lexicographically
/// smallest assignment vector.
pub fn exact_allocate(instance: &AllocationInstance) -> Result<Allocation> {
    exact_allocate_with(instance, &ExactConfig::default())
}

pub fn exact_allocate_with(
    instance: &AllocationInstance,
    config: &ExactConfig,
) -> Result<Allocation> {
    if !feasible(instance) {
        return Err(Error::Dap("No feasible solution".into()));
    }
    if instance.user_count() == 0 {
        return Ok(Allocation { assignment: vec![] });
    }
    let g = instance.category_count() as f64;
    let space = g.powi(instance.user_count() as i32);
    let best = if space <= config.exhaustive_limit {
        exact_exhaustive(instance)
    } else {
        exact_branch_and_bound(instance, config)?
    };
    best.ok_or_else(|| Error::Dap("No feasible solution".into()))
}

/// Lexicographic enumeration over per-user eligible categories; the first
/// strictly-better assignment wins, so ties keep the lex-smallest optimum.
fn exact_exhaustive(instance: &AllocationInstance) -> Option<Allocation> {
    let j = instance.user_count();
    let best_eligible: Vec<usize> = (0..j).map(|u| instance.best_eligible(u)).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut current = vec![0usize; j];

    fn recurse(
        user: usize,
        size: f64,
        sold: f64,
        instance: &AllocationInstance,
        best_eligible: &[usize],
        current: &mut Vec<usize>,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let j = instance.user_count();
        if user == j {
            // accumulation order perturbs equal profits by an ulp; treat
            // near-equal as ties and keep the lex-smallest assignment
            let replace = match best {
                None => true,
                Some((p, a)) => sold > *p + 1e-12 || ((sold - *p).abs() <= 1e-12 && *current < *a),
            };
            if replace {
                *best = Some((sold, current.clone()));
            }
            return;
        }
        let remaining_min = (j - user - 1) as f64 * instance.catalog.sizes[0];
        for cat in 0..=best_eligible[user] {
            let new_size = size + instance.catalog.sizes[cat];
            if new_size + remaining_min > instance.capacity * (1.0 + CAPACITY_EPS) {
                continue;
            }
            current[user] = cat;
            recurse(
                user + 1,
                new_size,
                sold + instance.catalog.sell_costs[cat],
                instance,
                best_eligible,
                current,
                best,
            );
        }
    }

    recurse(
        0,
        0.0,
        0.0,
        instance,
        &best_eligible,
        &mut current,
        &mut best,
    );
    best.map(|(_, assignment)| Allocation { assignment })
}

/// Depth-first branch and bound. The upper bound gives every undecided user
/// their best eligible category and ignores capacity, which only adds
/// profit, so pruning on it is safe. Equal-profit completions are compared
/// lexicographically so the tie-break matches the exhaustive path.
fn exact_branch_and_bound(
    instance: &AllocationInstance,
    config: &ExactConfig,
) -> Result<Option<Allocation>> {
    let j = instance.user_count();
    let best_eligible: Vec<usize> = (0..j).map(|u| instance.best_eligible(u)).collect();
    // suffix sums of the per-user best sell cost, for the bound
    let mut suffix_best = vec![0.0; j + 1];
    for u in (0..j).rev() {
        suffix_best[u] = suffix_best[u + 1] + instance.catalog.sell_costs[best_eligible[u]];
    }

    struct Search<'a> {
        instance: &'a AllocationInstance,
        best_eligible: &'a [usize],
        suffix_best: &'a [f64],
        best: Option<(f64, Vec<usize>)>,
        current: Vec<usize>,
        nodes: u64,
        max_nodes: u64,
    }

    impl Search<'_> {
        fn run(&mut self, user: usize, size: f64, sold: f64) -> Result<()> {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Err(Error::Dap(format!(
                    "exact search budget exceeded ({} nodes)",
                    self.max_nodes
                )));
            }
            let j = self.instance.user_count();
            if user == j {
                let replace = match &self.best {
                    None => true,
                    Some((p, a)) => {
                        sold > *p + 1e-12 || ((sold - p).abs() <= 1e-12 && self.current < *a)
                    }
                };
                if replace {
                    self.best = Some((sold, self.current.clone()));
                }
                return Ok(());
            }
            if let Some((p, _)) = &self.best {
                if sold + self.suffix_best[user] < p - 1e-12 {
                    return Ok(());
                }
            }
            let remaining_min = (j - user - 1) as f64 * self.instance.catalog.sizes[0];
            // try expensive categories first so good incumbents tighten the
            // bound early; the explicit lex comparison keeps ties correct
            for cat in (0..=self.best_eligible[user]).rev() {
                let new_size = size + self.instance.catalog.sizes[cat];
                if new_size + remaining_min > self.instance.capacity * (1.0 + CAPACITY_EPS) {
                    continue;
                }
                self.current[user] = cat;
                self.run(
                    user + 1,
                    new_size,
                    sold + self.instance.catalog.sell_costs[cat],
                )?;
            }
            Ok(())
        }
    }

    let mut search = Search {
        instance,
        best_eligible: &best_eligible,
        suffix_best: &suffix_best,
        best: None,
        current: vec![0; j],
        nodes: 0,
        max_nodes: config.max_nodes,
    };
    search.run(0, 0.0, 0.0)?;
    Ok(search.best.map(|(_, assignment)| Allocation { assignment }))
}

/// Build the DAP instance of the knapsack reduction: sell costs are the item
/// values, sizes the weights, purchase costs zero, and every budget affords
/// the dearest category.
pub fn reduce_knapsack(
    values: &[f64],
    weights: &[f64],
    capacity: f64,
    user_count: usize,
) -> Result<AllocationInstance> {
    if values.len() != weights.len() || values.is_empty() {
        return Err(Error::Dap(
            "values and weights must be nonempty and equal-length".into(),
        ));
    }
    let strictly_increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
    if !strictly_increasing(values) || !strictly_increasing(weights) {
        return Err(Error::Dap(
            "values and weights must be strictly increasing (pre-sort and dedup the instance)"
                .into(),
        ));
    }
    let catalog = CategoryCatalog::new(weights.to_vec(), values.to_vec(), vec![0.0; values.len()])?;
    let top = *values.last().unwrap();
    AllocationInstance::new(catalog, vec![top; user_count], capacity)
}

/// Per-user satisfaction level: gap between the best eligible category index
/// and the allocated one.
pub fn satisfaction_levels(instance: &AllocationInstance, allocation: &Allocation) -> Vec<usize> {
    allocation
        .assignment
        .iter()
        .enumerate()
        .map(|(j, &i)| instance.best_eligible(j) - i)
        .collect()
}

/// Map a satisfaction level to the 1..5 user rating scale.
pub fn rating(satisfaction_level: i64) -> Result<u8> {
    match satisfaction_level {
        i64::MIN..=-1 => Err(Error::Dap(format!(
            "satisfaction level {satisfaction_level} is negative"
        ))),
        0 => Ok(5),
        1..=2 => Ok(4),
        3..=5 => Ok(3),
        6..=10 => Ok(2),
        _ => Ok(1),
    }
}

/// Write an instance file with the fields G, Z, z, c, d, b.
pub fn write_instance(instance: &AllocationInstance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let join = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let text = format!(
        "G {}\nZ {}\nz {}\nc {}\nd {}\nb {}\n",
        instance.category_count(),
        instance.capacity,
        join(&instance.catalog.sizes),
        join(&instance.catalog.sell_costs),
        join(&instance.catalog.purchase_costs),
        join(&instance.users.budgets),
    );
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Read an instance file written by [`write_instance`].
pub fn read_instance(path: impl AsRef<Path>) -> Result<AllocationInstance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut g: Option<usize> = None;
    let mut capacity: Option<f64> = None;
    let mut z: Option<Vec<f64>> = None;
    let mut c: Option<Vec<f64>> = None;
    let mut d: Option<Vec<f64>> = None;
    let mut b: Option<Vec<f64>> = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (field, rest) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::Dap(format!("{}:{}: missing value", path.display(), i + 1)))?;
        let parse_vec = |rest: &str| -> Result<Vec<f64>> {
            rest.split_whitespace()
                .map(|v| {
                    v.parse::<f64>().map_err(|_| {
                        Error::Dap(format!("{}:{}: bad number '{v}'", path.display(), i + 1))
                    })
                })
                .collect()
        };
        match field {
            "G" => {
                g = Some(rest.trim().parse().map_err(|_| {
                    Error::Dap(format!(
                        "{}:{}: bad integer '{rest}'",
                        path.display(),
                        i + 1
                    ))
                })?)
            }
            "Z" => {
                capacity = Some(rest.trim().parse().map_err(|_| {
                    Error::Dap(format!("{}:{}: bad number '{rest}'", path.display(), i + 1))
                })?)
            }
            "z" => z = Some(parse_vec(rest)?),
            "c" => c = Some(parse_vec(rest)?),
            "d" => d = Some(parse_vec(rest)?),
            "b" => b = Some(parse_vec(rest)?),
            other => {
                return Err(Error::Dap(format!(
                    "{}:{}: unknown field '{other}'",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    let missing = |name: &str| Error::Dap(format!("{}: missing field {name}", path.display()));
    let g = g.ok_or_else(|| missing("G"))?;
    let capacity = capacity.ok_or_else(|| missing("Z"))?;
    let z = z.ok_or_else(|| missing("z"))?;
    let c = c.ok_or_else(|| missing("c"))?;
    let d = d.ok_or_else(|| missing("d"))?;
    let b = b.ok_or_else(|| missing("b"))?;
    if z.len() != g {
        return Err(Error::Dap(format!(
            "{}: G = {g} but z has {} entries",
            path.display(),
            z.len()
        )));
    }
    let catalog = CategoryCatalog::new(z, c, d)?;
    AllocationInstance::new(catalog, b, capacity)
}
