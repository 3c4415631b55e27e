//! Code construction by ordering synthetic channels on their `B` moment.
//!
//! `B` obeys an exact scalar recursion, so the moments of all `2^m` paths
//! come out of one breadth-first pass over the path tree (each node costs a
//! single step from its parent). Sorting then dominates the cost.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::channel::{Bsc, MomentPair};
use crate::codebook::{CodeSpec, Path, MAX_CODE_DEPTH};
use crate::error::{check_open_unit, Error, Result};
use crate::format::{fmt_num, Table};

/// Width below which a sign-change bracket stops being refined.
pub const BISECTION_TOLERANCE: f64 = 1e-9;

/// Default cap on pair-by-grid comparisons in [`order_scan`].
pub const ORDER_SCAN_BUDGET: u128 = 1_000_000_000;

const PARALLEL_LEVEL: usize = 1 << 14;

/// `ε = i/100`, `i = 1..=99`.
pub fn default_grid() -> Vec<f64> {
    (1..100).map(|i| f64::from(i) / 100.0).collect()
}

fn start_pair(epsilon: f64) -> Result<MomentPair> {
    check_open_unit("epsilon", epsilon)?;
    Ok(Bsc::new(epsilon)?.moment_pair())
}

/// Moments of every path of length `m`, indexed by path integer.
/// Returns the table and the number of recursion steps taken.
fn moment_table(m: u32, start: MomentPair) -> (Vec<MomentPair>, u64) {
    let mut level = vec![start];
    let mut steps = 0u64;
    for _ in 0..m {
        let expand = |p: &MomentPair| [p.step(0), p.step(1)];
        level = if level.len() >= PARALLEL_LEVEL {
            level.par_iter().flat_map_iter(expand).collect()
        } else {
            level.iter().flat_map(expand).collect()
        };
        steps += level.len() as u64;
    }
    (level, steps)
}

/// Full `B` table and the selection derived from it.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderedDesign {
    pub m: u32,
    pub epsilon: f64,
    /// `b0 = 1 - ε²`.
    pub b0: f64,
    /// Moments indexed by path integer.
    pub table: Vec<MomentPair>,
    /// Path indices from smallest to largest `B`.
    pub order: Vec<u32>,
    /// Selection flag indexed by path integer.
    pub selected: Vec<bool>,
    pub moment_steps: u64,
    /// `Σ_{ξ ∈ T} B_ξ`, a union bound on the block error probability.
    pub sum_selected_b: f64,
}

impl OrderedDesign {
    pub fn b(&self, path: &Path) -> f64 {
        self.table[path.index() as usize].b
    }

    /// CSV rows `path,B,selected` in path order.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["path", "B", "selected"]);
        for (i, p) in self.table.iter().enumerate() {
            t.push(vec![
                Path::from_index(i as u32, self.m).to_string(),
                fmt_num(p.b),
                self.selected[i].to_string(),
            ]);
        }
        t
    }
}

/// Selects the `k` paths with the smallest `B` on `BSC(ε)`. Ties go to the
/// lexicographically smaller path.
pub fn construct_code(m: u32, k: usize, epsilon: f64) -> Result<(CodeSpec, OrderedDesign)> {
    if !(1..=MAX_CODE_DEPTH).contains(&m) {
        return Err(Error::Depth {
            got: m,
            min: 1,
            max: MAX_CODE_DEPTH,
        });
    }
    let n = 1usize << m;
    if k == 0 || k > n {
        return Err(Error::Dimension { k, n });
    }
    let start = start_pair(epsilon)?;
    let (table, moment_steps) = moment_table(m, start);

    let mut order: Vec<u32> = (0..n as u32).collect();
    let by_b = |x: &u32, y: &u32| {
        table[*x as usize]
            .cmp_b(&table[*y as usize])
            .then_with(|| x.cmp(y))
    };
    if n >= PARALLEL_LEVEL {
        order.par_sort_unstable_by(by_b);
    } else {
        order.sort_unstable_by(by_b);
    }

    let mut selected = vec![false; n];
    let mut sum_selected_b = 0.0;
    for &i in &order[..k] {
        selected[i as usize] = true;
        sum_selected_b += table[i as usize].b;
    }
    let spec = CodeSpec::from_mask(m, selected.clone())?;
    Ok((
        spec,
        OrderedDesign {
            m,
            epsilon,
            b0: start.b,
            table,
            order,
            selected,
            moment_steps,
            sum_selected_b,
        },
    ))
}

/// `B` of two paths on the same `BSC(ε)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathComparison {
    pub epsilon: f64,
    pub first: Path,
    pub second: Path,
    pub b_first: f64,
    pub b_second: f64,
    /// `B_first - B_second`, evaluated on the side of `1/2` that keeps precision.
    pub difference: f64,
    pub ordering: Ordering,
}

fn path_pair(start: MomentPair, path: &Path) -> MomentPair {
    path.bits().fold(start, |p, bit| p.step(bit))
}

pub fn compare_paths(epsilon: f64, first: &Path, second: &Path) -> Result<PathComparison> {
    let start = start_pair(epsilon)?;
    let p = path_pair(start, first);
    let q = path_pair(start, second);
    Ok(PathComparison {
        epsilon,
        first: *first,
        second: *second,
        b_first: p.b,
        b_second: q.b,
        difference: p.b_difference(&q),
        ordering: p.cmp_b(&q),
    })
}

/// Swapping the bits of `10` into `01` improves the channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SbuComparison {
    pub epsilon: f64,
    /// `x = 1 - ε²`.
    pub x: f64,
    pub b01: f64,
    pub b10: f64,
    /// `B_10 - B_01`.
    pub difference: f64,
    /// `2x²(1 - x)²`.
    pub closed_form: f64,
}

pub fn sbu_compare(epsilon: f64) -> Result<SbuComparison> {
    let c = compare_paths(epsilon, &fixed_path("10"), &fixed_path("01"))?;
    let x = 1.0 - epsilon * epsilon;
    let y = epsilon * epsilon;
    Ok(SbuComparison {
        epsilon,
        x,
        b01: c.b_second,
        b10: c.b_first,
        difference: c.difference,
        closed_form: 2.0 * x * x * y * y,
    })
}

/// `0110` against `1001`.
pub fn cmu_compare(epsilon: f64) -> Result<PathComparison> {
    compare_paths(epsilon, &fixed_path("0110"), &fixed_path("1001"))
}

/// `100101` against `011010`. The sign is reported as computed.
pub fn example3_compare(epsilon: f64) -> Result<PathComparison> {
    compare_paths(epsilon, &fixed_path("100101"), &fixed_path("011010"))
}

fn fixed_path(s: &str) -> Path {
    s.parse().expect("literal path")
}

/// `eps,B_first,B_second,difference` over a grid.
pub fn comparison_curve(first: &Path, second: &Path, grid: &[f64]) -> Result<Table> {
    let mut t = Table::new(&["eps", &format!("B_{first}"), &format!("B_{second}"), "difference"]);
    for &eps in grid {
        let c = compare_paths(eps, first, second)?;
        t.push(vec![
            fmt_num(eps),
            fmt_num(c.b_first),
            fmt_num(c.b_second),
            fmt_num(c.difference),
        ]);
    }
    Ok(t)
}

/// Sign history of one pair over the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PairScan {
    pub first: Path,
    pub second: Path,
    /// Ordering of `B_first` against `B_second` at the first grid point.
    pub initial: Ordering,
    /// Brackets `(lo, hi)` of width at most [`BISECTION_TOLERANCE`] around
    /// each sign change.
    pub crossings: Vec<(f64, f64)>,
}

impl PairScan {
    pub fn permanent(&self) -> bool {
        self.crossings.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderScanReport {
    pub m: u32,
    pub weight: u32,
    pub grid: Vec<f64>,
    pub paths: Vec<Path>,
    pub pairs: Vec<PairScan>,
}

impl OrderScanReport {
    pub fn crossing_pairs(&self) -> impl Iterator<Item = &PairScan> {
        self.pairs.iter().filter(|p| !p.permanent())
    }

    pub fn all_permanent(&self) -> bool {
        self.pairs.iter().all(PairScan::permanent)
    }

    /// One row per permanent pair, one row per crossing otherwise.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["pair_a", "pair_b", "permanent", "crossing_eps_lo", "crossing_eps_hi"]);
        for p in &self.pairs {
            let (a, b) = (p.first.to_string(), p.second.to_string());
            if p.permanent() {
                t.push(vec![a.clone(), b.clone(), "true".into(), String::new(), String::new()]);
            }
            for &(lo, hi) in &p.crossings {
                t.push(vec![a.clone(), b.clone(), "false".into(), fmt_num(lo), fmt_num(hi)]);
            }
        }
        t
    }
}

fn paths_of_weight(m: u32, w: u32) -> Vec<Path> {
    Path::all(m).filter(|p| p.weight() == w).collect()
}

fn binomial(n: u32, k: u32) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

pub fn order_scan(m: u32, weight: u32, grid: &[f64]) -> Result<OrderScanReport> {
    order_scan_with_budget(m, weight, grid, ORDER_SCAN_BUDGET)
}

/// Checks every unordered pair of weight-`w` paths for a change in the sign
/// of `B_ξ - B_η` across the grid, refining each change by bisection.
pub fn order_scan_with_budget(m: u32, weight: u32, grid: &[f64], budget: u128) -> Result<OrderScanReport> {
    if !(1..=MAX_CODE_DEPTH).contains(&m) {
        return Err(Error::Depth {
            got: m,
            min: 1,
            max: MAX_CODE_DEPTH,
        });
    }
    if weight > m {
        return Err(Error::Domain {
            name: "weight",
            value: f64::from(weight),
            range: "0..=m",
        });
    }
    if grid.is_empty() {
        return Err(Error::Domain {
            name: "grid points",
            value: 0.0,
            range: ">= 1",
        });
    }
    let count = binomial(m, weight);
    let needed = count * count.saturating_sub(1) / 2 * grid.len() as u128;
    if needed > budget {
        return Err(Error::Budget { needed, limit: budget });
    }
    let starts = grid.iter().map(|&e| start_pair(e)).collect::<Result<Vec<_>>>()?;

    let paths = paths_of_weight(m, weight);
    // moments[i][g]: path i at grid point g
    let moments: Vec<Vec<MomentPair>> = paths
        .par_iter()
        .map(|p| starts.iter().map(|&s| path_pair(s, p)).collect())
        .collect();

    let pairs = (0..paths.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let (paths, moments) = (&paths, &moments);
            (i + 1..paths.len()).map(move |j| {
                let signs: Vec<Ordering> = moments[i]
                    .iter()
                    .zip(&moments[j])
                    .map(|(p, q)| p.cmp_b(q))
                    .collect();
                let mut crossings = Vec::new();
                for g in 1..grid.len() {
                    if signs[g] != signs[g - 1] {
                        crossings.push(bisect(&paths[i], &paths[j], grid[g - 1], grid[g], signs[g - 1]));
                    }
                }
                PairScan {
                    first: paths[i],
                    second: paths[j],
                    initial: signs[0],
                    crossings,
                }
            })
        })
        .collect();

    Ok(OrderScanReport {
        m,
        weight,
        grid: grid.to_vec(),
        paths,
        pairs,
    })
}

fn bisect(p: &Path, q: &Path, mut lo: f64, mut hi: f64, lo_sign: Ordering) -> (f64, f64) {
    let sign_at = |eps: f64| {
        let s = Bsc::new(eps).expect("interior grid").moment_pair();
        path_pair(s, p).cmp_b(&path_pair(s, q))
    };
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sign_at(mid) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}
