//! Random lines, the squares whose backtracks they pass through, and the
//! resulting backtracking sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::atlas::BacktrackAtlas;
use super::params::Params;
use super::spiral::Backtrack;
use crate::geometry::{
    clip_line_to_square, segment_hausdorff_within, support_half_width, AngleIndex, DiscreteLine,
    DyadicSquare, Point,
};
use crate::orders::OrderOracle;
use crate::tsp::{measure_order_ratio, tsp_upper_tour, RatioReport};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSample {
    pub line: DiscreteLine,
    pub seed: u64,
    pub index: u64,
}

/// Sample `index` of the stream for `seed`: a uniform angle in `1..=M`, then
/// a uniform offset among lines of that angle meeting `[0,1]²`.
pub fn sample_line_at(m: u32, seed: u64, index: u64) -> Result<LineSample> {
    if m == 0 {
        return Err(Error::Parameter("M must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let angle = AngleIndex::new(rng.gen_range(1..=m) as i64, m)?;
    let h = support_half_width(angle);
    let offset = rng.gen_range(-h..=h);
    Ok(LineSample {
        line: DiscreteLine::new(angle, offset),
        seed,
        index,
    })
}

pub fn sample_line(m: u32, seed: u64) -> Result<LineSample> {
    sample_line_at(m, seed, 0)
}

/// Both clipped lines lie within `½·w·2⁻ᵗ` of each other inside the square.
/// A line missing the square does not pass through.
pub fn passes_through(line: &DiscreteLine, bt: &Backtrack) -> bool {
    let eps = 0.5 * bt.r1.width;
    match (
        clip_line_to_square(line, &bt.square),
        clip_line_to_square(&bt.line, &bt.square),
    ) {
        (Some(a), Some(b)) => segment_hausdorff_within(&a, &b, eps),
        _ => false,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BadScale {
    pub scale: u32,
    pub squares: Vec<DyadicSquare>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BacktrackingSet {
    pub line: LineSample,
    pub bad: Vec<BadScale>,
    /// Backtrack points of the bad squares, deduplicated, in order.
    pub points: Vec<Point>,
    pub sigma: f64,
    /// The walk along the line with a detour to each point.
    pub detour_tour: f64,
    /// `√2 + 4wΣ`.
    pub detour_bound: f64,
    /// `2·cost + 1`.
    pub charge_lhs: f64,
    /// `l·Σ_t (Σ_Q 2^{−t} − 18/2^c)` over all used scales.
    pub charge_rhs: f64,
    pub report: RatioReport,
    /// Built from the covered squares of an incomplete atlas.
    pub partial: bool,
}

impl BacktrackingSet {
    pub fn detour_slack(&self) -> f64 {
        self.detour_bound - self.detour_tour
    }

    pub fn charge_slack(&self) -> f64 {
        self.charge_lhs - self.charge_rhs
    }
}

fn bad_squares(atlas: &BacktrackAtlas, line: &DiscreteLine) -> Vec<BadScale> {
    atlas
        .scales
        .iter()
        .map(|&t| BadScale {
            scale: t,
            squares: atlas
                .at_scale(t)
                .filter(|(_, bt)| passes_through(line, bt))
                .map(|(sq, _)| *sq)
                .collect(),
        })
        .collect()
}

fn sigma_of(bad: &[BadScale]) -> f64 {
    bad.iter()
        .map(|b| b.squares.len() as f64 * (-(b.scale as f64)).exp2())
        .sum()
}

/// The set of backtrack points hit by `line`; needs a full atlas.
pub fn backtracking_set(
    atlas: &BacktrackAtlas,
    oracle: &OrderOracle,
    line: &LineSample,
    params: &Params,
) -> Result<BacktrackingSet> {
    if let Some(sq) = atlas.first_gap() {
        return Err(Error::CaseB {
            scale: sq.scale,
            ix: sq.ix,
            iy: sq.iy,
        });
    }
    build_set(atlas, oracle, line, params, false)
}

/// As [`backtracking_set`], over the covered squares only.
pub fn backtracking_set_partial(
    atlas: &BacktrackAtlas,
    oracle: &OrderOracle,
    line: &LineSample,
    params: &Params,
) -> Result<BacktrackingSet> {
    build_set(atlas, oracle, line, params, !atlas.is_full())
}

fn build_set(
    atlas: &BacktrackAtlas,
    oracle: &OrderOracle,
    line: &LineSample,
    params: &Params,
    partial: bool,
) -> Result<BacktrackingSet> {
    let bad = bad_squares(atlas, &line.line);
    let sigma = sigma_of(&bad);
    let mut pts: Vec<Point> = bad
        .iter()
        .flat_map(|b| b.squares.iter().map(|sq| atlas.backtracks[sq].p))
        .collect();
    let key = |p: &Point| (p.x.to_bits(), p.y.to_bits());
    pts.sort_by_key(key);
    pts.dedup_by_key(|p| key(p));
    let points = oracle.sort_by_order(&pts)?;
    let mut tour = points.clone();
    tour.sort_by(|a, b| {
        line.line
            .param_of(*a)
            .total_cmp(&line.line.param_of(*b))
            .then(a.x.total_cmp(&b.x))
            .then(a.y.total_cmp(&b.y))
    });
    let detour_tour = tsp_upper_tour(&points, &tour)?;
    let report = measure_order_ratio(oracle, &points)?;
    let tail = 18.0 / (params.c as f64).exp2();
    let charge_rhs = params.l
        * bad
            .iter()
            .map(|b| b.squares.len() as f64 * (-(b.scale as f64)).exp2() - tail)
            .sum::<f64>();
    Ok(BacktrackingSet {
        line: *line,
        bad,
        points,
        sigma,
        detour_tour,
        detour_bound: std::f64::consts::SQRT_2 + 4.0 * params.w * sigma,
        charge_lhs: 2.0 * report.cost_order + 1.0,
        charge_rhs,
        report,
        partial,
    })
}

/// Builds the set for `n_lines` sampled lines and keeps the one with the
/// largest `ratio_lower` (then more points, then the earlier sample).
pub fn best_backtracking_set(
    atlas: &BacktrackAtlas,
    oracle: &OrderOracle,
    params: &Params,
    n_lines: u64,
    seed: u64,
    allow_partial: bool,
) -> Result<Option<BacktrackingSet>> {
    if !allow_partial {
        if let Some(sq) = atlas.first_gap() {
            return Err(Error::CaseB {
                scale: sq.scale,
                ix: sq.ix,
                iy: sq.iy,
            });
        }
    }
    let sets: Vec<Result<BacktrackingSet>> = (0..n_lines)
        .into_par_iter()
        .map(|i| {
            let line = sample_line_at(params.m, seed, i)?;
            backtracking_set_partial(atlas, oracle, &line, params)
        })
        .collect();
    let mut best: Option<BacktrackingSet> = None;
    for set in sets {
        let set = set?;
        let score = |s: &BacktrackingSet| (s.report.ratio_lower.unwrap_or(0.0), s.report.n);
        if best.as_ref().map_or(true, |b| {
            let (r, n) = score(&set);
            let (br, bn) = score(b);
            r > br || (r == br && n > bn)
        }) {
            best = Some(set);
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: u64,
    /// `(number of scales)·w/(2M)`.
    pub prediction: f64,
}

/// Monte Carlo mean of Σ over `n_samples` lines of the seeded stream.
pub fn estimate_sigma_expectation(
    atlas: &BacktrackAtlas,
    params: &Params,
    n_samples: u64,
    seed: u64,
) -> Result<SigmaEstimate> {
    if n_samples == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let sigmas: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| sample_line_at(params.m, seed, i).map(|l| sigma_of(&bad_squares(atlas, &l.line))))
        .collect::<Result<_>>()?;
    let n = n_samples as f64;
    let mean = sigmas.iter().sum::<f64>() / n;
    let var = if n_samples > 1 {
        sigmas.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(SigmaEstimate {
        mean,
        std_err: (var / n).sqrt(),
        n: n_samples,
        prediction: atlas.scales.len() as f64 * params.w / (2.0 * params.m as f64),
    })
}
