//! Open-path TSP quantities and the cost of a set under an order.
//!
//! Paths are open with free endpoints throughout: the length of a sequence
//! is the sum of its `n-1` consecutive distances.

use serde::{Deserialize, Serialize};

use crate::geometry::{dist, Point};
use crate::orders::OrderOracle;
use crate::{Error, Result};

/// Largest set solved exactly by [`tsp_exact_path`].
pub const EXACT_MAX: usize = 16;

pub fn path_length(path: &[Point]) -> f64 {
    path.windows(2).map(|w| dist(w[0], w[1])).sum()
}

/// `cost_≤(S)`: length of the path visiting `s` in the oracle's order.
/// Empty sets and singletons cost 0.
pub fn cost_under_order(oracle: &OrderOracle, s: &[Point]) -> Result<f64> {
    Ok(path_length(&oracle.sort_by_order(s)?))
}

/// Held–Karp over `(subset, endpoint)` states.
pub fn tsp_exact_path(s: &[Point]) -> Result<f64> {
    let n = s.len();
    if !(2..=EXACT_MAX).contains(&n) {
        return Err(Error::Size {
            n,
            min: 2,
            max: EXACT_MAX,
        });
    }
    let d: Vec<Vec<f64>> = s
        .iter()
        .map(|&a| s.iter().map(|&b| dist(a, b)).collect())
        .collect();
    let full = 1usize << n;
    let mut dp = vec![f64::INFINITY; full * n];
    for j in 0..n {
        dp[(1 << j) * n + j] = 0.0;
    }
    for mask in 1..full {
        for j in 0..n {
            let cur = dp[mask * n + j];
            if cur == f64::INFINITY || mask & (1 << j) == 0 {
                continue;
            }
            let mut rest = !mask & (full - 1);
            while rest != 0 {
                let k = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let slot = &mut dp[(mask | 1 << k) * n + k];
                let cand = cur + d[j][k];
                if cand < *slot {
                    *slot = cand;
                }
            }
        }
    }
    Ok(dp[(full - 1) * n..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// Minimum spanning tree weight (Prim, `O(n²)`); every Hamiltonian path is a
/// spanning tree, so this bounds the path TSP from below.
pub fn tsp_lower_mst(s: &[Point]) -> f64 {
    let n = s.len();
    if n < 2 {
        return 0.0;
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let (u, _) = best
            .iter()
            .enumerate()
            .filter(|(i, _)| !in_tree[*i])
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("vertex left");
        in_tree[u] = true;
        total += best[u];
        for v in 0..n {
            if !in_tree[v] {
                best[v] = best[v].min(dist(s[u], s[v]));
            }
        }
    }
    total
}

/// Nearest neighbour from the westmost point (ties: lowest `y`), then 2-opt
/// segment reversals until no move shortens the path.
pub fn heuristic_path(s: &[Point]) -> Vec<Point> {
    let n = s.len();
    if n < 2 {
        return s.to_vec();
    }
    let start = (0..n)
        .min_by(|&a, &b| s[a].x.total_cmp(&s[b].x).then(s[a].y.total_cmp(&s[b].y)))
        .expect("non-empty");
    let mut used = vec![false; n];
    let mut path = Vec::with_capacity(n);
    let mut cur = start;
    used[cur] = true;
    path.push(s[cur]);
    for _ in 1..n {
        let next = (0..n)
            .filter(|&k| !used[k])
            .min_by(|&a, &b| dist(s[cur], s[a]).total_cmp(&dist(s[cur], s[b])))
            .expect("unvisited point");
        used[next] = true;
        path.push(s[next]);
        cur = next;
    }
    two_opt(&mut path);
    path
}

fn two_opt(path: &mut [Point]) {
    let n = path.len();
    loop {
        let mut improved = false;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let mut delta = 0.0;
                if i > 0 {
                    delta += dist(path[i - 1], path[j]) - dist(path[i - 1], path[i]);
                }
                if j + 1 < n {
                    delta += dist(path[i], path[j + 1]) - dist(path[j], path[j + 1]);
                }
                if delta < -1e-12 {
                    path[i..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

pub fn tsp_upper_heuristic(s: &[Point]) -> f64 {
    path_length(&heuristic_path(s))
}

/// Length of an explicit path, after checking it is a permutation of `s`.
pub fn tsp_upper_tour(s: &[Point], path: &[Point]) -> Result<f64> {
    let key = |p: &Point| (p.x.to_bits(), p.y.to_bits());
    let mut a: Vec<_> = s.iter().map(key).collect();
    let mut b: Vec<_> = path.iter().map(key).collect();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Err(Error::Witness(format!(
            "tour of {} points is not a permutation of the {}-point set",
            path.len(),
            s.len()
        )));
    }
    Ok(path_length(path))
}

/// Cost under an order against TSP bounds. Ratios are `None` when the
/// denominator vanishes (sets of fewer than two points).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub n: usize,
    pub cost_order: f64,
    pub tsp_exact: Option<f64>,
    pub tsp_lower: f64,
    pub tsp_upper: f64,
    pub ratio_lower: Option<f64>,
    pub ratio_exact: Option<f64>,
}

impl RatioReport {
    pub fn ratio_defined(&self) -> bool {
        self.ratio_lower.is_some()
    }
}

pub fn measure_order_ratio(oracle: &OrderOracle, s: &[Point]) -> Result<RatioReport> {
    let sorted = oracle.sort_by_order(s)?;
    let cost_order = path_length(&sorted);
    let n = sorted.len();
    let tsp_exact = if (2..=EXACT_MAX).contains(&n) {
        Some(tsp_exact_path(&sorted)?)
    } else {
        None
    };
    let tsp_lower = tsp_lower_mst(&sorted);
    let tsp_upper = tsp_upper_heuristic(&sorted);
    let ratio = |den: f64| (den > 0.0).then(|| cost_order / den);
    Ok(RatioReport {
        n,
        cost_order,
        tsp_exact,
        tsp_lower,
        tsp_upper,
        ratio_lower: ratio(tsp_upper),
        ratio_exact: tsp_exact.and_then(ratio),
    })
}
