//! Backtrack search by the spiral process on radial rays.

use serde::{Deserialize, Serialize};

use super::params::Params;
use crate::geometry::{
    dist, AngleIndex, DiscreteLine, DyadicSquare, OrientedRect, Point, Segment, Strip,
};
use crate::orders::{Cell, OrderOracle};
use crate::{Error, Result};

/// Tolerance on the real-valued chain laws.
pub const LAW_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Point,
    pub angle: AngleIndex,
}

impl Ray {
    pub fn point_at(&self, rho: f64) -> Point {
        self.origin.add(self.angle.direction().scale(rho))
    }

    pub fn distance(&self, q: Point) -> f64 {
        let d = self.angle.direction();
        let v = q.sub(self.origin);
        let along = v.dot(d);
        if along <= 0.0 {
            v.norm()
        } else {
            v.sub(d.scale(along)).norm()
        }
    }
}

pub fn radial_ray(center: Point, j: AngleIndex) -> Ray {
    Ray {
        origin: center,
        angle: j,
    }
}

/// Where the perpendicular to ray `j` through `q` meets rays `j+1` and `j−1`.
pub fn secant_observation_check(center: Point, q: Point, j: AngleIndex) -> Result<(Point, Point)> {
    let rho = dist(q, center);
    if rho == 0.0 {
        return Err(Error::Degenerate("anchor at the centre of the rays".into()));
    }
    if j.m() < 8 {
        return Err(Error::Parameter(format!("needs M >= 8, got {}", j.m())));
    }
    let far = rho / (std::f64::consts::TAU / j.m() as f64).cos();
    Ok((
        radial_ray(center, j.offset(1)).point_at(far),
        radial_ray(center, j.offset(-1)).point_at(far),
    ))
}

/// `(p, L, σ, R₁, R₂)` inside `square`; every grid point of `R₁ ∪ R₂` comes
/// after `p` in the order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Backtrack {
    pub p: Point,
    pub line: DiscreteLine,
    pub strip: Strip,
    pub r1: OrientedRect,
    pub r2: OrientedRect,
    pub square: DyadicSquare,
    pub scale: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    ExitedSquare,
    BacktrackFound(Backtrack),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralChain {
    pub square: DyadicSquare,
    pub m: u32,
    pub points: Vec<Point>,
    pub anchors: Vec<Point>,
    /// Ray index `1..=M` of each anchor.
    pub rays: Vec<u32>,
    pub termination: Termination,
}

/// Grid cells whose centres lie in `rect`.
pub fn cells_in_rect(oracle: &OrderOracle, rect: &OrientedRect) -> Vec<Cell> {
    let grid = oracle.grid();
    let n = grid.n() as f64;
    let (x0, y0, x1, y1) = rect.bbox();
    let lo = |v: f64| ((v * n - 0.5).ceil().max(0.0) as i64).min(grid.n() as i64);
    let hi = |v: f64| ((v * n - 0.5).floor().min(n - 1.0) as i64).max(-1);
    let mut out = Vec::new();
    for iy in lo(y0)..=hi(y1) {
        for ix in lo(x0)..=hi(x1) {
            let c = Cell::new(ix as u32, iy as u32);
            if rect.contains(grid.center(c)) {
                out.push(c);
            }
        }
    }
    out
}

/// One step of the construction from anchor `q` on ray `j` and point `p`.
pub(crate) struct StepGeometry {
    pub line: DiscreteLine,
    pub a: Point,
    pub b: Point,
    pub r1: OrientedRect,
    pub r2: OrientedRect,
}

pub(crate) fn step_geometry(
    center: Point,
    side: f64,
    params: &Params,
    p: Point,
    q: Point,
    j: AngleIndex,
) -> Result<StepGeometry> {
    let (a, b) = secant_observation_check(center, q, j)?;
    let along = j.offset(params.m as i64 / 4);
    let rect = |anchor: Point| {
        OrientedRect::new(
            p.add(anchor.sub(q)),
            along,
            params.l * side,
            params.w * side,
        )
    };
    Ok(StepGeometry {
        line: DiscreteLine::through(along, p),
        a,
        b,
        r1: rect(a)?,
        r2: rect(b)?,
    })
}

fn check_frame(oracle: &OrderOracle, params: &Params) -> Result<()> {
    params.validate()?;
    if oracle.grid().g != params.g {
        return Err(Error::Parameter(format!(
            "oracle grid g={} differs from params g={}",
            oracle.grid().g,
            params.g
        )));
    }
    Ok(())
}

/// Start anchor and point: the image of `(3/4, 1/2)`, snapped to the grid.
pub(crate) fn start(oracle: &OrderOracle, square: &DyadicSquare) -> (Point, Cell) {
    let q1 = square.map_from_unit(Point::new(0.75, 0.5));
    let cell = oracle.grid().nearest(q1);
    (q1, cell)
}

/// Distances closer than this count as equal when picking a candidate.
const TIE_EPS: f64 = 1e-12;

/// How equally near candidates are ranked. Grid symmetry makes such ties
/// common, and which rule reaches a backtrack depends on the order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    SmallerKey,
    LargerKey,
}

impl TieBreak {
    pub const ALL: [TieBreak; 2] = [TieBreak::SmallerKey, TieBreak::LargerKey];

    fn prefers(self, k: u64, other: u64) -> bool {
        match self {
            TieBreak::SmallerKey => k < other,
            TieBreak::LargerKey => k > other,
        }
    }
}

/// [`spiral_chain_with`] under [`TieBreak::SmallerKey`].
pub fn spiral_chain(
    oracle: &OrderOracle,
    square: DyadicSquare,
    params: &Params,
) -> Result<SpiralChain> {
    spiral_chain_with(oracle, square, params, TieBreak::SmallerKey)
}

/// Runs the spiral process in `square` for at most `M²` points.
///
/// The next point is the candidate of `R₁ ∪ R₂` nearest to its rectangle's
/// centre, which keeps each point close to its anchor.
pub fn spiral_chain_with(
    oracle: &OrderOracle,
    square: DyadicSquare,
    params: &Params,
    tie: TieBreak,
) -> Result<SpiralChain> {
    check_frame(oracle, params)?;
    let grid = oracle.grid();
    let (center, side) = (square.center(), square.side());
    let cap = params.m as usize * params.m as usize;
    let (q1, c1) = start(oracle, &square);
    let mut cell = c1;
    let mut chain = SpiralChain {
        square,
        m: params.m,
        points: vec![grid.center(c1)],
        anchors: vec![q1],
        rays: vec![params.m],
        termination: Termination::Completed,
    };
    let mut j = AngleIndex::new(params.m as i64, params.m)?;
    while chain.points.len() < cap {
        let p = *chain.points.last().expect("non-empty");
        let q = *chain.anchors.last().expect("non-empty");
        let st = step_geometry(center, side, params, p, q, j)?;
        if !square.contains_rect(&st.r1) || !square.contains_rect(&st.r2) {
            chain.termination = Termination::ExitedSquare;
            return Ok(chain);
        }
        let key = oracle.cell_key(cell);
        let mut best: Option<(f64, u64, Cell, bool)> = None;
        for (rect, first) in [(&st.r1, true), (&st.r2, false)] {
            let cells = cells_in_rect(oracle, rect);
            if cells.is_empty() {
                return Err(Error::Resolution(format!(
                    "rectangle of width {:.3e} holds no grid point at g={}",
                    rect.width, grid.g
                )));
            }
            for c in cells {
                let k = oracle.cell_key(c);
                if k < key {
                    let d = dist(grid.center(c), rect.center);
                    let better = |bd: f64, bk: u64| {
                        d < bd - TIE_EPS || ((d - bd).abs() <= TIE_EPS && tie.prefers(k, bk))
                    };
                    if best.map_or(true, |(bd, bk, _, _)| better(bd, bk)) {
                        best = Some((d, k, c, first));
                    }
                }
            }
        }
        match best {
            None => {
                chain.termination = Termination::BacktrackFound(Backtrack {
                    p,
                    line: st.line,
                    strip: Strip::new(st.line, params.w * side)?,
                    r1: st.r1,
                    r2: st.r2,
                    square,
                    scale: square.scale,
                });
                return Ok(chain);
            }
            Some((_, _, c, first)) => {
                let (anchor, nj) = if first {
                    (st.a, j.offset(1))
                } else {
                    (st.b, j.offset(-1))
                };
                cell = c;
                j = nj;
                chain.points.push(grid.center(c));
                chain.anchors.push(anchor);
                chain.rays.push(j.j());
            }
        }
    }
    Ok(chain)
}

/// Exhaustive re-check of a backtrack: geometry, then every grid point of
/// `R₁ ∪ R₂` against `p`.
pub fn verify_backtrack(oracle: &OrderOracle, bt: &Backtrack, params: &Params) -> Result<()> {
    let bad = |msg: String| Err(Error::Witness(msg));
    let side = bt.square.side();
    let (l, w) = (params.l * side, params.w * side);
    let eq = |a: f64, b: f64| (a - b).abs() <= LAW_TOL * side;
    for r in [&bt.r1, &bt.r2] {
        if !eq(r.length, l) || !eq(r.width, w) || r.angle != bt.line.angle {
            return bad("rectangle size or direction differs from the parameters".into());
        }
        if !bt.square.contains_rect(r) {
            return bad("rectangle leaves the square".into());
        }
        if !bt.strip.contains(r.center) || (r.width / 2.0) > bt.strip.halfwidth {
            return bad("rectangle is not inside the strip".into());
        }
        if r.contains(bt.p) {
            return bad("p lies inside a rectangle".into());
        }
    }
    if bt.scale != bt.square.scale || !eq(bt.strip.halfwidth, w) || bt.strip.line != bt.line {
        return bad("strip or scale inconsistent with the square".into());
    }
    if !(crate::geometry::point_line_distance(bt.p, &bt.line) < w) || !bt.square.contains(bt.p) {
        return bad("p is not in the strip inside the square".into());
    }
    let s1 = bt.line.param_of(bt.r1.center) - bt.line.param_of(bt.p);
    let s2 = bt.line.param_of(bt.r2.center) - bt.line.param_of(bt.p);
    if s1 * s2 >= 0.0 {
        return bad("rectangles are not on opposite sides of p".into());
    }
    let pc = oracle.grid().snap(bt.p)?;
    let key = oracle.cell_key(pc);
    for r in [&bt.r1, &bt.r2] {
        for c in cells_in_rect(oracle, r) {
            if oracle.cell_key(c) <= key {
                return bad(format!("grid point ({}, {}) precedes p", c.ix, c.iy));
            }
        }
    }
    Ok(())
}

/// Runs the chain under each tie rule until one ends in a backtrack, which
/// is then verified. Otherwise returns the chain of the first rule.
pub fn search_square(
    oracle: &OrderOracle,
    square: DyadicSquare,
    params: &Params,
) -> Result<SpiralChain> {
    let mut last = None;
    for tie in TieBreak::ALL {
        let chain = spiral_chain_with(oracle, square, params, tie)?;
        if let Termination::BacktrackFound(bt) = &chain.termination {
            verify_backtrack(oracle, bt, params)?;
            return Ok(chain);
        }
        // keep the primary rule's chain for the walk argument
        if last.is_none() {
            last = Some(chain);
        }
    }
    Ok(last.expect("at least one rule"))
}

/// `Some` only for a verified backtrack, found under any tie rule.
pub fn find_backtrack(
    oracle: &OrderOracle,
    square: DyadicSquare,
    params: &Params,
) -> Result<Option<Backtrack>> {
    match search_square(oracle, square, params)?.termination {
        Termination::BacktrackFound(bt) => Ok(Some(bt)),
        _ => Ok(None),
    }
}

impl SpiralChain {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks the chain laws with the anchor of point `i` (1-based) at
    /// radius `¼·sec^{i−1}` of the square side: strict order decrease, the
    /// radius and ray-distance laws within `2il`, exact anchor radii, and
    /// adjacent ray indices.
    pub fn check_laws(&self, oracle: &OrderOracle, params: &Params) -> Result<()> {
        let bad = |msg: String| Err(Error::Witness(msg));
        let (center, side) = (self.square.center(), self.square.side());
        let sec = params.sec();
        let grid = oracle.grid();
        let mut prev: Option<u64> = None;
        for (k, (&p, &q)) in self.points.iter().zip(&self.anchors).enumerate() {
            let i = (k + 1) as f64;
            let rho = 0.25 * side * sec.powi(k as i32);
            let slack = 2.0 * i * params.l * side + LAW_TOL;
            let key = oracle.cell_key(grid.snap(p)?);
            if prev.is_some_and(|pk| key >= pk) {
                return bad(format!("order does not decrease at point {}", k + 1));
            }
            prev = Some(key);
            if (dist(q, center) - rho).abs() > LAW_TOL {
                return bad(format!("anchor {} off its radius", k + 1));
            }
            if (dist(p, center) - rho).abs() > slack {
                return bad(format!("point {} breaks the radius law", k + 1));
            }
            let j = AngleIndex::new(self.rays[k] as i64, self.m)?;
            if radial_ray(center, j).distance(p) > slack
                || radial_ray(center, j).distance(q) > LAW_TOL
            {
                return bad(format!("point {} is far from its ray", k + 1));
            }
            if k > 0 {
                let d = (self.rays[k] as i64 - self.rays[k - 1] as i64).rem_euclid(self.m as i64);
                if d != 1 && d != self.m as i64 - 1 {
                    return bad(format!("rays {} and {} are not adjacent", k, k + 1));
                }
            }
        }
        Ok(())
    }

    /// Segments between consecutive points, for plotting.
    pub fn segments(&self) -> Vec<Segment> {
        self.points
            .windows(2)
            .map(|w| Segment::new(w[0], w[1]))
            .collect()
    }
}

/// An order under which the spiral process follows `steps` (`+1`: next ray
/// `j+1`, `−1`: `j−1`) until they run out or a rectangle leaves the square.
///
/// Each point is the grid point nearest to its rectangle's centre that is
/// neither used nor inside an earlier step's rectangles;
/// chain points get ranks `k−1, …, 0` and all other cells follow in
/// row-major order. Returns the order and the chain cells.
pub fn spiral_friendly_oracle(
    square: DyadicSquare,
    params: &Params,
    steps: &[i8],
) -> Result<(OrderOracle, Vec<Cell>)> {
    params.validate()?;
    let grid = crate::orders::GridSpec::new(params.g)?;
    let probe = OrderOracle::new(crate::orders::OrderKind::Rowmajor, params.g)?;
    let (center, side) = (square.center(), square.side());
    let (mut q, c1) = start(&probe, &square);
    let mut cells = vec![c1];
    let mut used = std::collections::HashSet::from([c1]);
    let mut blocked = std::collections::HashSet::new();
    let mut j = AngleIndex::new(params.m as i64, params.m)?;
    let cap = params.m as usize * params.m as usize;
    for &dir in steps.iter().take(cap - 1) {
        let p = grid.center(*cells.last().expect("non-empty"));
        let st = step_geometry(center, side, params, p, q, j)?;
        if !square.contains_rect(&st.r1) || !square.contains_rect(&st.r2) {
            break;
        }
        let (rect, anchor) = if dir > 0 {
            (&st.r1, st.a)
        } else {
            (&st.r2, st.b)
        };
        let pick = cells_in_rect(&probe, rect)
            .into_iter()
            .filter(|c| !used.contains(c) && !blocked.contains(c))
            .min_by(|x, y| {
                dist(grid.center(*x), rect.center)
                    .total_cmp(&dist(grid.center(*y), rect.center))
                    .then(x.iy.cmp(&y.iy))
                    .then(x.ix.cmp(&y.ix))
            })
            .ok_or_else(|| {
                Error::Resolution(format!(
                    "no unused grid point left in rectangle at g={}",
                    params.g
                ))
            })?;
        used.insert(pick);
        // later points must stay out of this step's rectangles, or the
        // search would skip ahead to them
        for r in [&st.r1, &st.r2] {
            blocked.extend(cells_in_rect(&probe, r).into_iter().filter(|c| *c != pick));
        }
        cells.push(pick);
        q = anchor;
        j = j.offset(dir as i64);
    }
    let k = cells.len() as u32;
    let n = grid.n();
    let mut ranks = vec![u32::MAX; grid.cell_count() as usize];
    for (i, c) in cells.iter().enumerate() {
        ranks[(c.iy * n + c.ix) as usize] = k - 1 - i as u32;
    }
    let mut next = k;
    for r in ranks.iter_mut().filter(|r| **r == u32::MAX) {
        *r = next;
        next += 1;
    }
    Ok((OrderOracle::from_ranks(params.g, ranks)?, cells))
}
