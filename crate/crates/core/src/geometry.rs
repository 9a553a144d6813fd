//! Planar primitives on the unit square.
//!
//! Everything is plain `f64`. Incidence tests use [`TAU_GEO`]; rectangle
//! membership and the segment Hausdorff test are evaluated exactly on the
//! floating-point inputs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Comparison tolerance for incidence tests.
pub const TAU_GEO: f64 = 1e-12;

/// Largest number of dyadic squares [`dyadic_squares`] will materialise.
pub const ENUM_BUDGET: u128 = 1 << 24;

/// Centre of the unit square.
pub const CENTER: Point = Point { x: 0.5, y: 0.5 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn in_unit_square(self) -> bool {
        (0.0..=1.0).contains(&self.x) && (0.0..=1.0).contains(&self.y)
    }
}

/// Euclidean distance.
pub fn dist(a: Point, b: Point) -> f64 {
    a.sub(b).norm()
}

/// One of the `m` admissible directions `j·2π/m`, with `j` kept in `1..=m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AngleIndex {
    j: u32,
    m: u32,
}

impl AngleIndex {
    pub fn new(j: i64, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("number of angles must be positive".into()));
        }
        let r = j.rem_euclid(m as i64) as u32;
        Ok(AngleIndex {
            j: if r == 0 { m } else { r },
            m,
        })
    }

    /// Rejects any angle that is not (within [`TAU_GEO`]) a multiple of `2π/m`.
    pub fn from_radians(theta: f64, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("number of angles must be positive".into()));
        }
        let k = theta / (2.0 * PI) * m as f64;
        let kr = k.round();
        if (k - kr).abs() > 1e-9 {
            return Err(Error::Parameter(format!(
                "angle {theta} is not a multiple of 2π/{m}"
            )));
        }
        AngleIndex::new(kr as i64, m)
    }

    pub fn j(self) -> u32 {
        self.j
    }

    pub fn m(self) -> u32 {
        self.m
    }

    pub fn radians(self) -> f64 {
        2.0 * PI * self.j as f64 / self.m as f64
    }

    /// Index shifted by `k` steps, cyclically.
    pub fn offset(self, k: i64) -> AngleIndex {
        let r = (self.j as i64 + k).rem_euclid(self.m as i64) as u32;
        AngleIndex {
            j: if r == 0 { self.m } else { r },
            m: self.m,
        }
    }

    /// Unit vector `(cos θ, sin θ)`; exact on multiples of a quarter turn.
    pub fn direction(self) -> Point {
        let num = 4 * self.j as u64;
        if num % self.m as u64 == 0 {
            return match (num / self.m as u64) % 4 {
                0 => Point::new(1.0, 0.0),
                1 => Point::new(0.0, 1.0),
                2 => Point::new(-1.0, 0.0),
                _ => Point::new(0.0, -1.0),
            };
        }
        let t = self.radians();
        Point::new(t.cos(), t.sin())
    }

    /// Unit normal `(-sin θ, cos θ)`, the direction rotated a quarter turn.
    pub fn normal(self) -> Point {
        let d = self.direction();
        Point::new(-d.y, d.x)
    }
}

/// A line with admissible slope, stored as its signed offset from [`CENTER`]
/// along the normal of its angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLine {
    pub angle: AngleIndex,
    pub offset: f64,
}

impl DiscreteLine {
    pub fn new(angle: AngleIndex, offset: f64) -> Self {
        DiscreteLine { angle, offset }
    }

    /// The line of the given angle through `p`.
    pub fn through(angle: AngleIndex, p: Point) -> Self {
        DiscreteLine {
            angle,
            offset: p.sub(CENTER).dot(angle.normal()),
        }
    }

    pub fn signed_distance(&self, q: Point) -> f64 {
        q.sub(CENTER).dot(self.angle.normal()) - self.offset
    }

    /// Foot of the perpendicular from the centre; origin of [`Self::at`].
    pub fn base(&self) -> Point {
        CENTER.add(self.angle.normal().scale(self.offset))
    }

    pub fn at(&self, s: f64) -> Point {
        self.base().add(self.angle.direction().scale(s))
    }

    /// Coordinate of the projection of `q` along the line direction.
    pub fn param_of(&self, q: Point) -> f64 {
        q.sub(self.base()).dot(self.angle.direction())
    }

    pub fn intersects_unit_square(&self) -> bool {
        self.offset.abs() <= support_half_width(self.angle) + TAU_GEO
    }
}

/// Half-length of the offsets for which a line of this angle meets `[0,1]²`.
pub fn support_half_width(angle: AngleIndex) -> f64 {
    let n = angle.normal();
    0.5 * (n.x.abs() + n.y.abs())
}

pub fn point_line_distance(q: Point, line: &DiscreteLine) -> f64 {
    line.signed_distance(q).abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub line: DiscreteLine,
    pub halfwidth: f64,
}

impl Strip {
    pub fn new(line: DiscreteLine, halfwidth: f64) -> Result<Self> {
        if !(halfwidth > 0.0) {
            return Err(Error::Parameter(format!(
                "strip halfwidth must be positive, got {halfwidth}"
            )));
        }
        Ok(Strip { line, halfwidth })
    }

    pub fn contains(&self, q: Point) -> bool {
        point_line_distance(q, &self.line) <= self.halfwidth
    }
}

/// Rectangle whose long side follows `angle`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedRect {
    pub center: Point,
    pub angle: AngleIndex,
    pub length: f64,
    pub width: f64,
}

impl OrientedRect {
    pub fn new(center: Point, angle: AngleIndex, length: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width <= length) {
            return Err(Error::Parameter(format!(
                "rectangle needs 0 < width <= length, got width={width} length={length}"
            )));
        }
        Ok(OrientedRect {
            center,
            angle,
            length,
            width,
        })
    }

    pub fn contains(&self, q: Point) -> bool {
        let v = q.sub(self.center);
        v.dot(self.angle.direction()).abs() <= self.length / 2.0
            && v.dot(self.angle.normal()).abs() <= self.width / 2.0
    }

    pub fn corners(&self) -> [Point; 4] {
        let a = self.angle.direction().scale(self.length / 2.0);
        let n = self.angle.normal().scale(self.width / 2.0);
        [
            self.center.add(a).add(n),
            self.center.sub(a).add(n),
            self.center.sub(a).sub(n),
            self.center.add(a).sub(n),
        ]
    }

    /// Axis-aligned bounding box as `(xmin, ymin, xmax, ymax)`.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        let c = self.corners();
        let xs = c.iter().map(|p| p.x);
        let ys = c.iter().map(|p| p.y);
        (
            xs.clone().fold(f64::INFINITY, f64::min),
            ys.clone().fold(f64::INFINITY, f64::min),
            xs.fold(f64::NEG_INFINITY, f64::max),
            ys.fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

/// Square `[ix, ix+1]·2⁻ᵗ × [iy, iy+1]·2⁻ᵗ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicSquare {
    pub scale: u32,
    pub ix: u32,
    pub iy: u32,
}

impl DyadicSquare {
    pub const UNIT: DyadicSquare = DyadicSquare {
        scale: 0,
        ix: 0,
        iy: 0,
    };

    pub fn new(scale: u32, ix: u32, iy: u32) -> Result<Self> {
        if scale > 31 || (ix as u64) >> scale != 0 || (iy as u64) >> scale != 0 {
            return Err(Error::Parameter(format!(
                "dyadic square index ({ix}, {iy}) out of range at scale {scale}"
            )));
        }
        Ok(DyadicSquare { scale, ix, iy })
    }

    pub fn side(&self) -> f64 {
        (-(self.scale as f64)).exp2()
    }

    pub fn origin(&self) -> Point {
        let s = self.side();
        Point::new(self.ix as f64 * s, self.iy as f64 * s)
    }

    pub fn center(&self) -> Point {
        let s = self.side();
        Point::new((self.ix as f64 + 0.5) * s, (self.iy as f64 + 0.5) * s)
    }

    /// Affine image of a point of the unit square in this square's frame.
    pub fn map_from_unit(&self, u: Point) -> Point {
        self.origin().add(u.scale(self.side()))
    }

    pub fn contains(&self, p: Point) -> bool {
        let o = self.origin();
        let s = self.side();
        p.x >= o.x - TAU_GEO
            && p.x <= o.x + s + TAU_GEO
            && p.y >= o.y - TAU_GEO
            && p.y <= o.y + s + TAU_GEO
    }

    pub fn contains_rect(&self, r: &OrientedRect) -> bool {
        r.corners().iter().all(|&c| self.contains(c))
    }

    /// The concentric square of three times the side, clipped to `[0,1]²`,
    /// as `(xmin, ymin, xmax, ymax)`.
    pub fn tripled(&self) -> (f64, f64, f64, f64) {
        let o = self.origin();
        let s = self.side();
        (
            (o.x - s).max(0.0),
            (o.y - s).max(0.0),
            (o.x + 2.0 * s).min(1.0),
            (o.y + 2.0 * s).min(1.0),
        )
    }

    pub fn tripled_contains(&self, p: Point) -> bool {
        let (x0, y0, x1, y1) = self.tripled();
        p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1
    }

    /// The square of scale `t` whose half-open cell holds `p`; points on the
    /// far edge of `[0,1]²` go to the last row/column.
    pub fn containing(p: Point, t: u32) -> DyadicSquare {
        let n = 1u64 << t;
        let idx = |v: f64| ((v * n as f64).floor().max(0.0) as u64).min(n - 1) as u32;
        DyadicSquare {
            scale: t,
            ix: idx(p.x),
            iy: idx(p.y),
        }
    }

    pub fn parent(&self) -> Option<DyadicSquare> {
        (self.scale > 0).then(|| DyadicSquare {
            scale: self.scale - 1,
            ix: self.ix / 2,
            iy: self.iy / 2,
        })
    }

    /// The ancestor at a coarser scale `t ≤ self.scale`.
    pub fn ancestor(&self, t: u32) -> DyadicSquare {
        let k = self.scale - t.min(self.scale);
        DyadicSquare {
            scale: self.scale - k,
            ix: self.ix >> k,
            iy: self.iy >> k,
        }
    }
}

pub fn dyadic_squares_iter(t: u32) -> impl Iterator<Item = DyadicSquare> {
    let n = 1u32 << t;
    (0..n).flat_map(move |iy| (0..n).map(move |ix| DyadicSquare { scale: t, ix, iy }))
}

/// All squares of scale `t`, row by row.
pub fn dyadic_squares(t: u32) -> Result<Vec<DyadicSquare>> {
    let needed = if t < 64 { 1u128 << (2 * t) } else { u128::MAX };
    if t > 31 || needed > ENUM_BUDGET {
        return Err(Error::Budget {
            what: "dyadic squares",
            needed,
            budget: ENUM_BUDGET,
        });
    }
    Ok(dyadic_squares_iter(t).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        dist(self.a, self.b)
    }

    pub fn point_distance(&self, q: Point) -> f64 {
        let ab = self.b.sub(self.a);
        let len2 = ab.dot(ab);
        if len2 == 0.0 {
            return dist(q, self.a);
        }
        let t = (q.sub(self.a).dot(ab) / len2).clamp(0.0, 1.0);
        dist(q, self.a.add(ab.scale(t)))
    }

    /// `sup_{p∈self} dist(p, other)`. Distance to a convex set is convex, so
    /// the supremum over a segment sits at an endpoint.
    pub fn directed_hausdorff(&self, other: &Segment) -> f64 {
        other
            .point_distance(self.a)
            .max(other.point_distance(self.b))
    }
}

pub fn segment_hausdorff(a: &Segment, b: &Segment) -> f64 {
    a.directed_hausdorff(b).max(b.directed_hausdorff(a))
}

pub fn segment_hausdorff_within(a: &Segment, b: &Segment, eps: f64) -> bool {
    segment_hausdorff(a, b) <= eps
}

/// `L ∩ Q` as a (possibly degenerate) segment, or `None` when disjoint.
pub fn clip_line_to_square(line: &DiscreteLine, q: &DyadicSquare) -> Option<Segment> {
    let o = q.origin();
    let s = q.side();
    clip_line_to_box(line, (o.x, o.y, o.x + s, o.y + s))
}

pub fn clip_line_to_box(line: &DiscreteLine, bx: (f64, f64, f64, f64)) -> Option<Segment> {
    let base = line.base();
    let d = line.angle.direction();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (b, dv, min, max) in [(base.x, d.x, bx.0, bx.2), (base.y, d.y, bx.1, bx.3)] {
        if dv.abs() < 1e-15 {
            if b < min - TAU_GEO || b > max + TAU_GEO {
                return None;
            }
        } else {
            let (t0, t1) = ((min - b) / dv, (max - b) / dv);
            lo = lo.max(t0.min(t1));
            hi = hi.min(t0.max(t1));
        }
    }
    if lo > hi + TAU_GEO {
        return None;
    }
    let hi = hi.max(lo);
    Some(Segment::new(line.at(lo), line.at(hi)))
}
