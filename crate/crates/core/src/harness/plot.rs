//! Static SVG figures. Each figure is a pure function of its input.

use std::fmt::Write as _;

use crate::adversary::SpiralChain;
use crate::geometry::{AngleIndex, Point};

use super::io::ResultRecord;

const SIZE: f64 = 600.0;
const PAD: f64 = 50.0;

struct Svg(String);

impl Svg {
    fn new(title: &str) -> Self {
        let mut s = String::new();
        let _ = write!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{w}\" viewBox=\"0 0 {w} {w}\">\n\
             <rect width=\"{w}\" height=\"{w}\" fill=\"white\"/>\n\
             <text x=\"{x}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{title}</text>\n",
            w = SIZE + 2.0 * PAD,
            x = SIZE / 2.0 + PAD,
        );
        Svg(s)
    }

    /// Maps `[0,1]²` to the drawing area, y up.
    fn at(&self, p: Point) -> (f64, f64) {
        (PAD + p.x * SIZE, PAD + (1.0 - p.y) * SIZE)
    }

    fn frame(&mut self) {
        let _ = writeln!(
            self.0,
            "<rect class=\"frame\" x=\"{PAD}\" y=\"{PAD}\" width=\"{SIZE}\" height=\"{SIZE}\" fill=\"none\" stroke=\"black\"/>"
        );
    }

    fn polyline(&mut self, pts: &[Point], class: &str, stroke: &str) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.at(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            self.0,
            "<polyline class=\"{class}\" points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1\"/>",
            coords.join(" ")
        );
    }

    fn markers(&mut self, pts: &[Point], r: f64, fill: &str) {
        for &p in pts {
            let (x, y) = self.at(p);
            let _ = writeln!(
                self.0,
                "<circle class=\"pt\" cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"{r}\" fill=\"{fill}\"/>"
            );
        }
    }

    fn label(&mut self, p: Point, text: &str, anchor: &str) {
        let (x, y) = self.at(p);
        let _ = writeln!(
            self.0,
            "<text x=\"{x:.1}\" y=\"{y:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"{anchor}\">{text}</text>"
        );
    }

    fn finish(mut self) -> String {
        self.0.push_str("</svg>\n");
        self.0
    }
}

/// Points with the path that visits them in the given order.
pub fn plot_set(ordered: &[Point], title: &str) -> String {
    let mut svg = Svg::new(title);
    svg.frame();
    svg.polyline(ordered, "order-path", "steelblue");
    svg.markers(ordered, 3.0, "black");
    svg.finish()
}

/// The chain's square mapped to the full frame, its `M` rays, and one
/// marker per chain point.
pub fn plot_chain(chain: &SpiralChain) -> String {
    let sq = chain.square;
    let (o, side) = (sq.origin(), sq.side());
    let local = |p: Point| p.sub(o).scale(1.0 / side);
    let mut svg = Svg::new(&format!(
        "spiral chain, M={}, {} points, square t={} ({}, {})",
        chain.m,
        chain.len(),
        sq.scale,
        sq.ix,
        sq.iy
    ));
    svg.frame();
    let c = Point::new(0.5, 0.5);
    for j in 1..=chain.m {
        if let Ok(a) = AngleIndex::new(j as i64, chain.m) {
            let end = c.add(a.direction().scale(0.5));
            svg.polyline(&[c, end], "ray", "lightgray");
        }
    }
    let pts: Vec<Point> = chain.points.iter().map(|&p| local(p)).collect();
    svg.polyline(&pts, "chain", "firebrick");
    svg.markers(&pts, 1.5, "black");
    svg.finish()
}

/// Best `ratio_lower` against `n` (log scale), with a fitted `a·log n`
/// reference curve.
pub fn plot_ratio_curve(records: &[ResultRecord]) -> String {
    let mut svg = Svg::new("order ratio against set size");
    svg.frame();
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.ratio_lower.map(|v| (r.n as f64, v)))
        .filter(|(n, _)| *n >= 2.0)
        .collect();
    if pts.is_empty() {
        svg.label(Point::new(0.5, 0.5), "no data", "middle");
        return svg.finish();
    }
    let lx = |n: f64| n.ln();
    let (xmin, xmax) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(lx(p.0)), b.max(lx(p.0)))
        });
    let xmax = if xmax > xmin { xmax } else { xmin + 1.0 };
    // least-squares fit of ratio ≈ a·ln n
    let a = pts.iter().map(|&(n, v)| v * lx(n)).sum::<f64>()
        / pts.iter().map(|&(n, _)| lx(n).powi(2)).sum::<f64>();
    let ymax = pts.iter().map(|p| p.1).fold(a * xmax, f64::max) * 1.1;
    let to = |x: f64, y: f64| Point::new((x - xmin) / (xmax - xmin), y / ymax);
    let reference: Vec<Point> = (0..=100)
        .map(|k| {
            let x = xmin + (xmax - xmin) * k as f64 / 100.0;
            to(x, a * x)
        })
        .collect();
    svg.polyline(&reference, "reference", "gray");
    svg.label(
        *reference.last().expect("non-empty"),
        &format!("{a:.3}·log n"),
        "end",
    );
    let mut data: Vec<Point> = pts.iter().map(|&(n, v)| to(lx(n), v)).collect();
    data.sort_by(|p, q| p.x.total_cmp(&q.x));
    svg.markers(&data, 4.0, "firebrick");
    svg.label(
        Point::new(0.0, -0.05),
        &format!("n = {:.0}", xmin.exp()),
        "start",
    );
    svg.label(
        Point::new(1.0, -0.05),
        &format!("n = {:.0}", xmax.exp()),
        "end",
    );
    svg.label(Point::new(-0.02, 1.0), &format!("{ymax:.2}"), "end");
    svg.finish()
}
