//! Total orders on the cells of a `2ᵍ × 2ᵍ` grid over the unit square.
//!
//! Points handed to an oracle must be cell centres `((i+½)2⁻ᵍ, (k+½)2⁻ᵍ)`.
//! Curve orders compare cells by their position along a discrete curve;
//! explicit orders carry a rank per cell.

use std::cmp::Ordering;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::{Error, Result};

/// Largest supported resolution exponent.
pub const MAX_G: u32 = 24;

/// Snapping tolerance, in units of one cell side.
const SNAP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub g: u32,
}

impl GridSpec {
    pub fn new(g: u32) -> Result<Self> {
        if g == 0 || g > MAX_G {
            return Err(Error::Parameter(format!(
                "grid exponent g must be in 1..={MAX_G}, got {g}"
            )));
        }
        Ok(GridSpec { g })
    }

    pub fn n(&self) -> u32 {
        1 << self.g
    }

    pub fn spacing(&self) -> f64 {
        (-(self.g as f64)).exp2()
    }

    pub fn cell_count(&self) -> u64 {
        1u64 << (2 * self.g)
    }

    pub fn center(&self, c: Cell) -> Point {
        let h = self.spacing();
        Point::new((c.ix as f64 + 0.5) * h, (c.iy as f64 + 0.5) * h)
    }

    /// Nearest cell centre, ties toward the lower index.
    pub fn nearest(&self, p: Point) -> Cell {
        let n = self.n() as f64;
        let idx = |v: f64| {
            let u = v * n - 0.5;
            let f = u.floor();
            let i = if u - f > 0.5 { f + 1.0 } else { f };
            i.clamp(0.0, n - 1.0) as u32
        };
        Cell {
            ix: idx(p.x),
            iy: idx(p.y),
        }
    }

    /// The cell whose centre is `p`, within the snapping tolerance.
    pub fn snap(&self, p: Point) -> Result<Cell> {
        let c = self.nearest(p);
        let q = self.center(c);
        let tol = SNAP_TOL * self.spacing();
        if (p.x - q.x).abs() > tol || (p.y - q.y).abs() > tol {
            return Err(Error::Snap {
                x: p.x,
                y: p.y,
                g: self.g,
            });
        }
        Ok(c)
    }

    fn linear(&self, c: Cell) -> usize {
        c.iy as usize * self.n() as usize + c.ix as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub ix: u32,
    pub iy: u32,
}

impl Cell {
    pub const fn new(ix: u32, iy: u32) -> Self {
        Cell { ix, iy }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    Sierpinski,
    Hilbert,
    Zorder,
    Rowmajor,
    File,
}

impl OrderKind {
    pub const BUILTIN: [OrderKind; 4] = [
        OrderKind::Rowmajor,
        OrderKind::Zorder,
        OrderKind::Hilbert,
        OrderKind::Sierpinski,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OrderKind::Sierpinski => "sierpinski",
            OrderKind::Hilbert => "hilbert",
            OrderKind::Zorder => "zorder",
            OrderKind::Rowmajor => "rowmajor",
            OrderKind::File => "file",
        }
    }
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OrderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "sierpinski" | "bp" => OrderKind::Sierpinski,
            "hilbert" => OrderKind::Hilbert,
            "zorder" | "morton" => OrderKind::Zorder,
            "rowmajor" => OrderKind::Rowmajor,
            "file" => OrderKind::File,
            other => {
                return Err(Error::Parameter(format!("unknown order kind `{other}`")));
            }
        })
    }
}

/// Key of a point under an oracle: the curve index of its cell, or its rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OrderKey(pub u64);

#[derive(Clone, Debug)]
pub struct OrderOracle {
    kind: OrderKind,
    grid: GridSpec,
    table: Option<Arc<Vec<u32>>>,
    sierpinski_ranks: Arc<OnceLock<Vec<u32>>>,
}

impl OrderOracle {
    /// A built-in curve order. `OrderKind::File` needs [`Self::from_ranks`].
    pub fn new(kind: OrderKind, g: u32) -> Result<Self> {
        let grid = GridSpec::new(g)?;
        if kind == OrderKind::File {
            return Err(Error::Parameter(
                "file orders are built from a rank table or an order file".into(),
            ));
        }
        Ok(OrderOracle {
            kind,
            grid,
            table: None,
            sierpinski_ranks: Arc::default(),
        })
    }

    /// Explicit order; `ranks[iy·2ᵍ + ix]` is the rank of cell `(ix, iy)` and
    /// the ranks must be a permutation of `0..4ᵍ`.
    pub fn from_ranks(g: u32, ranks: Vec<u32>) -> Result<Self> {
        let grid = GridSpec::new(g)?;
        if ranks.len() as u64 != grid.cell_count() {
            return Err(Error::Parameter(format!(
                "rank table has {} entries, grid has {}",
                ranks.len(),
                grid.cell_count()
            )));
        }
        let mut seen = vec![false; ranks.len()];
        for &r in &ranks {
            let slot = seen
                .get_mut(r as usize)
                .ok_or_else(|| Error::Parameter(format!("rank {r} out of range")))?;
            if std::mem::replace(slot, true) {
                return Err(Error::Parameter(format!("rank {r} repeated")));
            }
        }
        Ok(OrderOracle {
            kind: OrderKind::File,
            grid,
            table: Some(Arc::new(ranks)),
            sierpinski_ranks: Arc::default(),
        })
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Order-equivalent key of a cell. For the Sierpiński order this is the
    /// index of the first half-cell triangle the traversal enters, which is
    /// cheaper than the dense rank returned by [`Self::curve_key`].
    pub fn cell_key(&self, c: Cell) -> u64 {
        let g = self.grid.g;
        match self.kind {
            OrderKind::Rowmajor => ((c.iy as u64) << g) | c.ix as u64,
            OrderKind::Zorder => morton_key(c.ix, c.iy),
            OrderKind::Hilbert => hilbert_key(g, c.ix, c.iy),
            OrderKind::Sierpinski => sierpinski_cell_entry(g, c.ix, c.iy),
            OrderKind::File => {
                self.table.as_ref().expect("file order has a table")[self.grid.linear(c)] as u64
            }
        }
    }

    /// Dense key in `0..4ᵍ` for every kind.
    pub fn cell_rank(&self, c: Cell) -> u64 {
        match self.kind {
            OrderKind::Sierpinski => {
                let ranks = self
                    .sierpinski_ranks
                    .get_or_init(|| self.sierpinski_rank_table());
                ranks[self.grid.linear(c)] as u64
            }
            _ => self.cell_key(c),
        }
    }

    fn sierpinski_rank_table(&self) -> Vec<u32> {
        let n = self.grid.n();
        let mut cells: Vec<(u64, usize)> = (0..n)
            .flat_map(|iy| (0..n).map(move |ix| Cell::new(ix, iy)))
            .map(|c| (self.cell_key(c), self.grid.linear(c)))
            .collect();
        cells.sort_unstable();
        let mut ranks = vec![0u32; cells.len()];
        for (rank, (_, lin)) in cells.into_iter().enumerate() {
            ranks[lin] = rank as u32;
        }
        ranks
    }

    pub fn curve_key(&self, p: Point) -> Result<OrderKey> {
        let c = self.grid.snap(p)?;
        Ok(OrderKey(self.cell_rank(c)))
    }

    pub fn compare(&self, p: Point, q: Point) -> Result<Ordering> {
        let (a, b) = (self.grid.snap(p)?, self.grid.snap(q)?);
        Ok(self.compare_cells(a, b))
    }

    pub fn compare_cells(&self, a: Cell, b: Cell) -> Ordering {
        self.cell_key(a).cmp(&self.cell_key(b))
    }

    /// Ascending order of `points`; every point must be a distinct cell centre.
    pub fn sort_by_order(&self, points: &[Point]) -> Result<Vec<Point>> {
        let mut keyed = Vec::with_capacity(points.len());
        for &p in points {
            let c = self.grid.snap(p)?;
            keyed.push((self.cell_key(c), c, p));
        }
        keyed.sort_unstable_by_key(|&(k, c, _)| (k, c));
        if let Some(w) = keyed.windows(2).find(|w| w[0].1 == w[1].1) {
            return Err(Error::Duplicate {
                ix: w[0].1.ix,
                iy: w[0].1.iy,
            });
        }
        Ok(keyed.into_iter().map(|(_, _, p)| p).collect())
    }

    /// Cells listed in ascending order (the traversal).
    pub fn traversal(&self) -> Vec<Cell> {
        let n = self.grid.n();
        let mut cells: Vec<Cell> = (0..n)
            .flat_map(|iy| (0..n).map(move |ix| Cell::new(ix, iy)))
            .collect();
        cells.sort_by_cached_key(|&c| self.cell_key(c));
        cells
    }
}

pub fn morton_key(ix: u32, iy: u32) -> u64 {
    fn spread(v: u32) -> u64 {
        let mut x = v as u64;
        x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
        x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
        x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
        x = (x | (x << 2)) & 0x3333_3333_3333_3333;
        x = (x | (x << 1)) & 0x5555_5555_5555_5555;
        x
    }
    spread(ix) | (spread(iy) << 1)
}

/// Index of cell `(x, y)` along the Hilbert curve of order `g` that starts at
/// `(0, 0)` and ends at `(2ᵍ-1, 0)`.
pub fn hilbert_key(g: u32, x: u32, y: u32) -> u64 {
    let n = 1u64 << g;
    let (mut x, mut y) = (x as u64, y as u64);
    let mut d = 0u64;
    let mut s = n / 2;
    while s > 0 {
        let rx = u64::from(x & s > 0);
        let ry = u64::from(y & s > 0);
        d += s * s * ((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = s - 1 - (x & (s - 1));
                y = s - 1 - (y & (s - 1));
            }
            std::mem::swap(&mut x, &mut y);
        }
        x &= s - 1;
        y &= s - 1;
        s /= 2;
    }
    d
}

type IPt = (i64, i64);

fn cross(o: IPt, a: IPt, b: IPt) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Index (in `0..2·4ᵍ`) of the finest triangle containing the point `p`,
/// given in units of a quarter cell.
///
/// The square is split along the diagonal into the triangles
/// `(0,0)→(1,0)→(1,1)` and `(1,1)→(0,1)→(0,0)` (entry, right-angle vertex,
/// exit). A triangle `(a, b, c)` is bisected at the hypotenuse midpoint `m`
/// into `(a, m, b)` followed by `(b, m, c)`, which is the closed Sierpiński
/// traversal.
fn sierpinski_triangle_index(g: u32, p: IPt) -> u64 {
    let side = 4i64 << g;
    let (mut a, mut b, mut c, mut idx) = if p.1 <= p.0 {
        ((0, 0), (side, 0), (side, side), 0u64)
    } else {
        ((side, side), (0, side), (0, 0), 1u64)
    };
    for _ in 0..2 * g {
        let m = ((a.0 + c.0) / 2, (a.1 + c.1) / 2);
        let sa = cross(b, m, a).signum();
        let sp = cross(b, m, p).signum();
        if sp == 0 || sp == sa {
            (a, b, c) = (a, m, b);
            idx *= 2;
        } else {
            (a, b, c) = (b, m, c);
            idx = idx * 2 + 1;
        }
    }
    idx
}

/// First triangle index at which the Sierpiński traversal enters cell `(ix, iy)`.
pub fn sierpinski_cell_entry(g: u32, ix: u32, iy: u32) -> u64 {
    let cx = 4 * ix as i64 + 2;
    let cy = 4 * iy as i64 + 2;
    [(1, 1), (1, -1), (-1, 1), (-1, -1)]
        .iter()
        .map(|&(dx, dy)| sierpinski_triangle_index(g, (cx + dx, cy + dy)))
        .min()
        .expect("four probes")
}

/// Reads an order file: `g=<int>` on the first content line, then one
/// `ix iy` pair per line in traversal order. `#` starts a comment.
pub fn load_order_file(path: impl AsRef<Path>) -> Result<OrderOracle> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_order(&text)
}

pub fn parse_order(text: &str) -> Result<OrderOracle> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| Error::Format {
        line: 1,
        msg: "empty order file".into(),
    })?;
    let g: u32 = header
        .strip_prefix("g=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| Error::Format {
            line: hline,
            msg: format!("expected `g=<int>`, found `{header}`"),
        })?;
    let grid = GridSpec::new(g).map_err(|e| Error::Format {
        line: hline,
        msg: e.to_string(),
    })?;
    let n = grid.n();
    let mut ranks = vec![u32::MAX; grid.cell_count() as usize];
    let mut next = 0u32;
    let mut last_line = hline;
    for (lineno, l) in lines {
        last_line = lineno;
        let mut it = l.split_whitespace().map(str::parse::<u32>);
        let cell = match (it.next(), it.next(), it.next()) {
            (Some(Ok(ix)), Some(Ok(iy)), None) if ix < n && iy < n => Cell::new(ix, iy),
            _ => {
                return Err(Error::Format {
                    line: lineno,
                    msg: format!("expected `ix iy` with indices below {n}, found `{l}`"),
                })
            }
        };
        let slot = &mut ranks[grid.linear(cell)];
        if *slot != u32::MAX {
            return Err(Error::Format {
                line: lineno,
                msg: format!("duplicate cell ({}, {})", cell.ix, cell.iy),
            });
        }
        *slot = next;
        next += 1;
    }
    if let Some(missing) = ranks.iter().position(|&r| r == u32::MAX) {
        return Err(Error::Format {
            line: last_line + 1,
            msg: format!(
                "{} cells missing, first is ({}, {})",
                grid.cell_count() - next as u64,
                missing as u32 % n,
                missing as u32 / n
            ),
        });
    }
    OrderOracle::from_ranks(g, ranks)
}

/// Serialises any oracle in the order file format.
pub fn format_order(oracle: &OrderOracle) -> String {
    let mut out = format!("g={}\n", oracle.grid().g);
    for c in oracle.traversal() {
        out.push_str(&format!("{} {}\n", c.ix, c.iy));
    }
    out
}
