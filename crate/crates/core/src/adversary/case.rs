use serde::{Deserialize, Serialize};

use super::atlas::{build_atlas, BacktrackAtlas};
use super::lines::{best_backtracking_set, BacktrackingSet};
use super::params::Params;
use super::spiral::SpiralChain;
use super::zigzag::{zigzag_set, ZigzagSet};
use crate::cyclewalk::DichotomyOutcome;
use crate::geometry::{DyadicSquare, Point};
use crate::orders::OrderOracle;
use crate::tsp::RatioReport;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseKind {
    #[serde(rename = "A")]
    A,
    #[serde(rename = "B-zigzag")]
    BZigzag,
    #[serde(rename = "B-confined")]
    BConfined,
    /// Some square has no backtrack, but no chain was long enough for the
    /// walk argument; the set comes from the covered squares.
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl std::fmt::Display for CaseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseKind::A => "A",
            CaseKind::BZigzag => "B-zigzag",
            CaseKind::BConfined => "B-confined",
            CaseKind::Inconclusive => "inconclusive",
        })
    }
}

/// `lhs ≤ rhs`, with `slack = rhs − lhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl Inequality {
    pub fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        Inequality {
            name: name.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: CaseKind,
    pub covered: usize,
    pub squares: usize,
    /// The square whose chain gave the set in case B.
    pub square: Option<DyadicSquare>,
    pub points: Vec<Point>,
    pub report: RatioReport,
    pub sigma: Option<f64>,
    pub line_index: Option<u64>,
    pub chain_len: Option<usize>,
    /// The chain behind a case B set.
    pub chain: Option<SpiralChain>,
    pub walk: Option<DichotomyOutcome>,
    pub inequalities: Vec<Inequality>,
}

fn from_backtracking(case: CaseKind, atlas: &BacktrackAtlas, set: BacktrackingSet) -> CaseReport {
    let mut inequalities = vec![
        Inequality::new(
            "detour tour <= sqrt2 + 4 w sigma",
            set.detour_tour,
            set.detour_bound,
        ),
        Inequality::new("charge bound <= 2 cost + 1", set.charge_rhs, set.charge_lhs),
    ];
    optimality(&set.report, &mut inequalities);
    CaseReport {
        case,
        covered: atlas.covered(),
        squares: atlas.total(),
        square: None,
        points: set.points,
        report: set.report,
        sigma: Some(set.sigma),
        line_index: Some(set.line.index),
        chain_len: None,
        chain: None,
        walk: None,
        inequalities,
    }
}

fn optimality(report: &RatioReport, out: &mut Vec<Inequality>) {
    if let Some(exact) = report.tsp_exact {
        out.push(Inequality::new(
            "tsp exact <= cost",
            exact,
            report.cost_order,
        ));
    }
    out.push(Inequality::new(
        "tsp lower <= cost",
        report.tsp_lower,
        report.cost_order,
    ));
}

fn from_zigzag(
    atlas: &BacktrackAtlas,
    sq: DyadicSquare,
    chain: &SpiralChain,
    z: ZigzagSet,
) -> CaseReport {
    let case = if z.outcome.is_zigzag() {
        CaseKind::BZigzag
    } else {
        CaseKind::BConfined
    };
    let mut inequalities = vec![Inequality::new(
        "certified tsp upper <= explicit tour",
        z.tsp_upper_certified(),
        z.explicit_tour,
    )];
    optimality(&z.report, &mut inequalities);
    CaseReport {
        case,
        covered: atlas.covered(),
        squares: atlas.total(),
        square: Some(sq),
        points: z.points,
        report: z.report,
        sigma: None,
        line_index: None,
        chain_len: Some(chain.len()),
        chain: Some(chain.clone()),
        walk: Some(z.outcome),
        inequalities,
    }
}

/// Case A when every square of the used scales has a backtrack: the best
/// backtracking set over `n_lines` sampled lines. Otherwise case B from the
/// first uncovered square whose chain supports the walk argument, falling
/// back to an inconclusive report built from the covered squares.
pub fn run_case_dichotomy(
    oracle: &OrderOracle,
    params: &Params,
    n_lines: u64,
    seed: u64,
) -> Result<CaseReport> {
    params.validate()?;
    let atlas = build_atlas(oracle, params, &params.scales())?;
    if atlas.is_full() {
        let set = best_backtracking_set(&atlas, oracle, params, n_lines, seed, false)?
            .expect("at least one line");
        return Ok(from_backtracking(CaseKind::A, &atlas, set));
    }
    for (sq, chain) in &atlas.uncovered {
        if let Ok(z) = zigzag_set(chain, params, oracle) {
            return Ok(from_zigzag(&atlas, *sq, chain, z));
        }
    }
    let set = best_backtracking_set(&atlas, oracle, params, n_lines, seed, true)?
        .expect("at least one line");
    Ok(from_backtracking(CaseKind::Inconclusive, &atlas, set))
}
