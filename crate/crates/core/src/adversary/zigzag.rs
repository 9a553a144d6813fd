//! Sets read off a spiral chain that never met a backtrack.

use serde::{Deserialize, Serialize};

use super::params::Params;
use super::spiral::{SpiralChain, Termination};
use crate::cyclewalk::{dichotomy, CycleWalk, DichotomyOutcome};
use crate::geometry::{dist, Point};
use crate::orders::OrderOracle;
use crate::tsp::{measure_order_ratio, path_length, tsp_upper_tour, RatioReport};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZigzagSet {
    pub outcome: DichotomyOutcome,
    /// Distinct points, in order.
    pub points: Vec<Point>,
    pub report: RatioReport,
    /// Three-ray tour (zig-zag), or the shorter of the pair-by-pair and
    /// two-sweep tours (confined).
    pub explicit_tour: f64,
    /// Chain shorter than `M²`.
    pub truncated: bool,
    /// Smallest gap between consecutive chain points, in square sides.
    pub min_step: f64,
}

impl ZigzagSet {
    pub fn tsp_upper_certified(&self) -> f64 {
        self.report.tsp_upper.min(self.explicit_tour)
    }
}

/// Ray residues of a chain as a walk on `ℤ/M`.
pub fn chain_walk(chain: &SpiralChain) -> Result<CycleWalk> {
    CycleWalk::new(chain.m, chain.rays.iter().map(|&j| j % chain.m).collect())
}

/// Builds the zig-zag or confined set of a chain without a backtrack.
///
/// Chains shorter than `M²` are accepted outside strict mode when they hold
/// at least `7s³` points.
pub fn zigzag_set(chain: &SpiralChain, params: &Params, oracle: &OrderOracle) -> Result<ZigzagSet> {
    if matches!(chain.termination, Termination::BacktrackFound(_)) {
        return Err(Error::Precondition("chain ended in a backtrack".into()));
    }
    let k = chain.len();
    let full = params.m as usize * params.m as usize;
    let s = params.s;
    let need = 7 * (s as usize).pow(3);
    let truncated = k < full;
    if truncated && (params.strict || k < need) {
        return Err(Error::Precondition(format!(
            "chain has {k} points; needs {full} (or {need} outside strict mode)"
        )));
    }
    let walk = chain_walk(chain)?;
    let outcome = dichotomy(&walk, s)?;
    let pts = &chain.points;
    let center = chain.square.center();
    let by_radius =
        |v: &mut Vec<Point>| v.sort_by(|a, b| dist(*a, center).total_cmp(&dist(*b, center)));
    let (set, explicit): (Vec<Point>, Vec<Point>) = match &outcome {
        DichotomyOutcome::ZigZag { a, i, j, .. } => {
            let keep = ((params.m / s) as usize).min(i.len());
            let mut near: Vec<Point> = i[..keep].iter().map(|&t| pts[t]).collect();
            let mut up = Vec::new();
            let mut down = Vec::new();
            for &t in &j[..keep] {
                if walk.values()[t] == (a + s * s) % params.m {
                    up.push(pts[t]);
                } else {
                    down.push(pts[t]);
                }
            }
            by_radius(&mut near);
            by_radius(&mut up);
            by_radius(&mut down);
            let set: Vec<Point> = near.iter().chain(&up).chain(&down).copied().collect();
            (set, best_ray_tour([&near, &up, &down]))
        }
        DichotomyOutcome::Confined { visits, .. } => {
            let mut pairs: Vec<(Point, Point)> = visits
                .iter()
                .filter(|&&t| t + 1 < k)
                .map(|&t| (pts[t], pts[t + 1]))
                .collect();
            pairs.sort_by(|x, y| dist(x.0, center).total_cmp(&dist(y.0, center)));
            let fwd: Vec<Point> = pairs.iter().flat_map(|&(p, q)| [p, q]).collect();
            let rev: Vec<Point> = pairs.iter().flat_map(|&(p, q)| [q, p]).collect();
            let mut firsts: Vec<Point> = pairs.iter().map(|x| x.0).collect();
            let mut seconds: Vec<Point> = pairs.iter().map(|x| x.1).collect();
            by_radius(&mut firsts);
            by_radius(&mut seconds);
            let sweep = best_ray_tour([&firsts, &seconds, &Vec::new()]);
            let tour = [rev, sweep].into_iter().fold(fwd.clone(), |b, t| {
                if path_length(&t) < path_length(&b) {
                    t
                } else {
                    b
                }
            });
            (fwd, tour)
        }
    };
    let mut uniq = set.clone();
    let key = |p: &Point| (p.x.to_bits(), p.y.to_bits());
    uniq.sort_by_key(key);
    uniq.dedup_by_key(|p| key(p));
    let mut tour = Vec::with_capacity(uniq.len());
    for p in explicit {
        if !tour.iter().any(|q: &Point| key(q) == key(&p)) {
            tour.push(p);
        }
    }
    let points = oracle.sort_by_order(&uniq)?;
    let explicit_tour = tsp_upper_tour(&points, &tour)?;
    let report = measure_order_ratio(oracle, &points)?;
    let side = chain.square.side();
    let min_step = pts
        .windows(2)
        .map(|w| dist(w[0], w[1]) / side)
        .fold(f64::INFINITY, f64::min);
    Ok(ZigzagSet {
        outcome,
        points,
        report,
        explicit_tour,
        truncated,
        min_step,
    })
}

/// Shortest concatenation of three radius-sorted groups over all group
/// orders and traversal directions.
fn best_ray_tour(groups: [&Vec<Point>; 3]) -> Vec<Point> {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut best: Option<(f64, Vec<Point>)> = None;
    for perm in PERMS {
        for dirs in 0..8u8 {
            let mut tour = Vec::new();
            for (slot, &g) in perm.iter().enumerate() {
                if dirs >> slot & 1 == 0 {
                    tour.extend(groups[g].iter().copied());
                } else {
                    tour.extend(groups[g].iter().rev().copied());
                }
            }
            let len = path_length(&tour);
            if best.as_ref().map_or(true, |(b, _)| len < *b) {
                best = Some((len, tour));
            }
        }
    }
    best.map(|(_, t)| t).unwrap_or_default()
}
