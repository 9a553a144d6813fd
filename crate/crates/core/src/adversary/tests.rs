use std::f64::consts::{SQRT_2, TAU};

use super::*;
use crate::cyclewalk::{make_walk, WalkKind};
use crate::geometry::{
    clip_line_to_square, dist, AngleIndex, DiscreteLine, DyadicSquare, OrientedRect, Point, Strip,
    CENTER,
};
use crate::orders::{Cell, OrderKind, OrderOracle};

fn oracle(kind: OrderKind, g: u32) -> OrderOracle {
    OrderOracle::new(kind, g).unwrap()
}

fn bt_of(chain: &SpiralChain) -> Backtrack {
    match &chain.termination {
        Termination::BacktrackFound(bt) => *bt,
        t => panic!("expected a backtrack, got {t:?}"),
    }
}

/// Containment by explicit rotation into the rectangle frame.
fn in_rect_rotated(r: &OrientedRect, q: Point) -> bool {
    let th = TAU * r.angle.j() as f64 / r.angle.m() as f64;
    let (dx, dy) = (q.x - r.center.x, q.y - r.center.y);
    let u = dx * th.cos() + dy * th.sin();
    let v = -dx * th.sin() + dy * th.cos();
    u.abs() <= r.length / 2.0 + 1e-12 && v.abs() <= r.width / 2.0 + 1e-12
}

/// Every grid cell of `[0,1]²` tested against both rectangles.
fn scan_all_cells(o: &OrderOracle, bt: &Backtrack) -> (usize, bool) {
    let grid = o.grid();
    let key = o.cell_rank(grid.snap(bt.p).unwrap());
    let (mut seen, mut ok) = (0, true);
    for iy in 0..grid.n() {
        for ix in 0..grid.n() {
            let c = Cell::new(ix, iy);
            let q = grid.center(c);
            if in_rect_rotated(&bt.r1, q) || in_rect_rotated(&bt.r2, q) {
                seen += 1;
                ok &= o.cell_rank(c) > key;
            }
        }
    }
    (seen, ok)
}

#[test]
fn radial_rays_point_where_expected() {
    let d = |j: i64| {
        radial_ray(CENTER, AngleIndex::new(j, 16).unwrap())
            .angle
            .direction()
    };
    assert_eq!(d(16), Point::new(1.0, 0.0));
    assert_eq!(d(4), Point::new(0.0, 1.0));
    assert_eq!(d(8), Point::new(-1.0, 0.0));
    let start = DyadicSquare::UNIT.map_from_unit(Point::new(0.75, 0.5));
    assert_eq!(
        radial_ray(CENTER, AngleIndex::new(16, 16).unwrap()).distance(start),
        0.0
    );
}

#[test]
fn secant_points_match_line_intersection() {
    for m in [8u32, 16, 64, 256] {
        for j in [1i64, 3, m as i64 / 2, m as i64] {
            let jj = AngleIndex::new(j, m).unwrap();
            let q = radial_ray(CENTER, jj).point_at(0.25);
            let (a, b) = secant_observation_check(CENTER, q, jj).unwrap();
            // perpendicular through q meets ray j+1: q + s·n = centre + t·e
            let n = Point::new(
                -(TAU * j as f64 / m as f64).sin(),
                (TAU * j as f64 / m as f64).cos(),
            );
            let th = TAU * (j + 1) as f64 / m as f64;
            let e = Point::new(th.cos(), th.sin());
            let det = e.x * (-n.y) - (-n.x) * e.y;
            let rhs = q.sub(CENTER);
            let t = (rhs.x * (-n.y) - (-n.x) * rhs.y) / det;
            let explicit = CENTER.add(e.scale(t));
            assert!(dist(a, explicit) < 1e-12, "M={m} j={j}");
            assert!((dist(a, CENTER) - 0.25 / (TAU / m as f64).cos()).abs() < 1e-12);
            assert!((dist(a, CENTER) - dist(b, CENTER)).abs() < 1e-15);
        }
    }
    let j = AngleIndex::new(1, 16).unwrap();
    assert!(matches!(
        secant_observation_check(CENTER, CENTER, j),
        Err(crate::Error::Degenerate(_))
    ));
    let q = Point::new(0.75, 0.5);
    assert!(secant_observation_check(CENTER, q, AngleIndex::new(4, 4).unwrap()).is_err());
}

#[test]
fn zorder_backtrack_survives_exhaustive_scan() {
    let p = Params::desk(4, 16, 12).unwrap();
    let o = oracle(OrderKind::Zorder, 12);
    let chain = spiral_chain(&o, DyadicSquare::UNIT, &p).unwrap();
    chain.check_laws(&o, &p).unwrap();
    let bt = bt_of(&chain);
    verify_backtrack(&o, &bt, &p).unwrap();
    let (seen, ok) = scan_all_cells(&o, &bt);
    assert!(seen > 0 && ok);
    assert_eq!(
        find_backtrack(&o, DyadicSquare::UNIT, &p).unwrap(),
        Some(bt)
    );
}

#[test]
fn backtracks_scale_with_their_square() {
    let p = Params::desk(4, 16, 12).unwrap();
    let o = oracle(OrderKind::Zorder, 12);
    let sq = DyadicSquare::new(2, 1, 2).unwrap();
    let bt = find_backtrack(&o, sq, &p).unwrap().expect("covered");
    assert!((bt.r1.length - p.l / 4.0).abs() < 1e-15);
    assert!((bt.r2.width - p.w / 4.0).abs() < 1e-15);
    assert!(sq.contains(bt.p) && sq.contains_rect(&bt.r1) && sq.contains_rect(&bt.r2));
    let (seen, ok) = scan_all_cells(&o, &bt);
    assert!(seen > 0 && ok);
}

#[test]
fn rowmajor_chains_never_stop_at_a_backtrack() {
    // the rectangle on the lower side of p always holds cells preceding it
    for (m, g, r) in [(16, 10, 2), (32, 12, 2), (64, 12, 1)] {
        let p = Params::desk(r, m, g).unwrap();
        let o = oracle(OrderKind::Rowmajor, g);
        let atlas = build_atlas(&o, &p, &p.scales()).unwrap();
        assert_eq!(atlas.covered(), 0);
        for chain in atlas.uncovered.values() {
            assert_eq!(chain.termination, Termination::ExitedSquare);
            chain.check_laws(&o, &p).unwrap();
        }
    }
}

#[test]
fn tampered_backtracks_are_rejected() {
    let p = Params::desk(4, 16, 12).unwrap();
    let o = oracle(OrderKind::Zorder, 12);
    let bt = find_backtrack(&o, DyadicSquare::UNIT, &p).unwrap().unwrap();
    // the same geometry under the reversed order puts every rectangle cell first
    let n = o.grid().cell_count() as u32;
    let side = o.grid().n();
    let reversed: Vec<u32> = (0..n)
        .map(|lin| n - 1 - o.cell_key(Cell::new(lin % side, lin / side)) as u32)
        .collect();
    let rev = OrderOracle::from_ranks(12, reversed).unwrap();
    assert!(verify_backtrack(&rev, &bt, &p).is_err());
    let mut narrow = bt;
    narrow.r1.width /= 2.0;
    assert!(verify_backtrack(&o, &narrow, &p).is_err());
    let mut same_side = bt;
    same_side.r2 = bt.r1;
    assert!(verify_backtrack(&o, &same_side, &p).is_err());
}

#[test]
fn friendly_order_reproduces_its_chain() {
    let p = Params::desk(0, 16, 10).unwrap();
    let (o, cells) = spiral_friendly_oracle(DyadicSquare::UNIT, &p, &[1; 300]).unwrap();
    let chain = spiral_chain(&o, DyadicSquare::UNIT, &p).unwrap();
    let again = spiral_chain(&o, DyadicSquare::UNIT, &p).unwrap();
    assert_eq!(chain, again);
    assert_eq!(chain.len(), cells.len());
    assert!(chain
        .points
        .iter()
        .zip(&cells)
        .all(|(a, c)| *a == o.grid().center(*c)));
    assert_eq!(chain.termination, Termination::ExitedSquare);
    assert!(chain.rays.windows(2).all(|w| w[1] == w[0] % 16 + 1));
    chain.check_laws(&o, &p).unwrap();
    assert_eq!(find_backtrack(&o, DyadicSquare::UNIT, &p).unwrap(), None);
}

#[test]
fn chain_laws_over_builtin_orders() {
    for (m, g) in [(16, 8), (32, 10), (64, 12)] {
        let r = (0..=4)
            .rev()
            .find(|&r| Params::desk(r, m, g).is_ok())
            .unwrap();
        let p = Params::desk(r, m, g).unwrap();
        for kind in OrderKind::BUILTIN {
            let o = oracle(kind, g);
            for t in [0, r] {
                let sq = DyadicSquare::containing(Point::new(0.3, 0.6), t);
                let chain = spiral_chain(&o, sq, &p).unwrap();
                chain.check_laws(&o, &p).unwrap();
                if let Termination::BacktrackFound(bt) = chain.termination {
                    verify_backtrack(&o, &bt, &p).unwrap();
                }
            }
        }
    }
}

#[test]
fn chain_law_checker_catches_violations() {
    let p = Params::desk(0, 16, 10).unwrap();
    let (o, _) = spiral_friendly_oracle(DyadicSquare::UNIT, &p, &[1; 300]).unwrap();
    let chain = spiral_chain(&o, DyadicSquare::UNIT, &p).unwrap();
    let mut swapped = chain.clone();
    swapped.points.swap(1, 2);
    swapped.anchors.swap(1, 2);
    assert!(swapped.check_laws(&o, &p).is_err());
    let mut jumped = chain.clone();
    jumped.rays[3] = jumped.rays[2];
    assert!(jumped.check_laws(&o, &p).is_err());
    let mut far = chain;
    far.anchors[2] = far.anchors[2].scale(1.01);
    assert!(far.check_laws(&o, &p).is_err());
}

#[test]
fn resolution_and_frame_errors() {
    let mut p = Params::desk(0, 16, 10).unwrap();
    let o = oracle(OrderKind::Hilbert, 8);
    assert!(matches!(
        spiral_chain(&o, DyadicSquare::UNIT, &p),
        Err(crate::Error::Parameter(_))
    ));
    p.w = 1e-5;
    p.l = 1.5e-5;
    let o = oracle(OrderKind::Hilbert, 10);
    assert!(matches!(
        spiral_chain(&o, DyadicSquare::UNIT, &p),
        Err(crate::Error::Resolution(_))
    ));
}

#[test]
fn atlas_examples() {
    let p = Params::desk(2, 16, 10).unwrap();
    let o = oracle(OrderKind::Zorder, 10);
    let atlas = build_atlas(&o, &p, &[0, 1, 2]).unwrap();
    assert_eq!(atlas.total(), 21);
    assert!(atlas.is_full());
    for bt in atlas.backtracks.values() {
        verify_backtrack(&o, bt, &p).unwrap();
    }
    assert_eq!(build_atlas(&o, &p, &[]).unwrap().total(), 0);
    assert!(build_atlas(&o, &p, &[3]).is_err());

    let (friendly, _) = spiral_friendly_oracle(DyadicSquare::UNIT, &p, &[1; 300]).unwrap();
    let atlas = build_atlas(&friendly, &p, &[0]).unwrap();
    assert_eq!(atlas.first_gap(), Some(DyadicSquare::UNIT));

    let deep = Params::desk(13, 16, 24).unwrap();
    let o = oracle(OrderKind::Zorder, 24);
    assert!(matches!(
        build_atlas(&o, &deep, &deep.scales()),
        Err(crate::Error::Budget { .. })
    ));
}

#[test]
fn sampled_lines_are_uniform_and_admissible() {
    let m = 16u32;
    let n = 100_000u64;
    let mut counts = vec![0u64; m as usize];
    for i in 0..n {
        let s = sample_line_at(m, 5, i).unwrap();
        assert!(s.line.intersects_unit_square());
        assert!(clip_line_to_square(&s.line, &DyadicSquare::UNIT).is_some());
        counts[s.line.angle.j() as usize - 1] += 1;
    }
    let pr = 1.0 / m as f64;
    let sigma = (n as f64 * pr * (1.0 - pr)).sqrt();
    for c in counts {
        assert!((c as f64 - n as f64 * pr).abs() <= 3.0 * sigma);
    }
    assert_eq!(sample_line(m, 9).unwrap(), sample_line(m, 9).unwrap());
    assert_ne!(sample_line_at(m, 9, 1).unwrap(), sample_line(m, 9).unwrap());
}

fn flat_backtrack(angle: AngleIndex, w: f64) -> Backtrack {
    let p = Point::new(0.5, 0.5);
    let line = DiscreteLine::through(angle, p);
    let rect =
        |s: f64| OrientedRect::new(p.add(angle.direction().scale(s)), angle, 1.5 * w, w).unwrap();
    Backtrack {
        p,
        line,
        strip: Strip::new(line, w).unwrap(),
        r1: rect(0.1),
        r2: rect(-0.1),
        square: DyadicSquare::UNIT,
        scale: 0,
    }
}

/// Two-sided Hausdorff distance by dense sampling of both clipped segments.
fn sampled_hausdorff(a: &DiscreteLine, b: &DiscreteLine, sq: &DyadicSquare) -> f64 {
    let (sa, sb) = (
        clip_line_to_square(a, sq).unwrap(),
        clip_line_to_square(b, sq).unwrap(),
    );
    let pts = |s: &crate::geometry::Segment| -> Vec<Point> {
        (0..=2000)
            .map(|k| s.a.add(s.b.sub(s.a).scale(k as f64 / 2000.0)))
            .collect()
    };
    let (pa, pb) = (pts(&sa), pts(&sb));
    let one = |x: &[Point], y: &[Point]| {
        x.iter()
            .map(|p| y.iter().map(|q| dist(*p, *q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one(&pa, &pb).max(one(&pb, &pa))
}

#[test]
fn passes_through_examples() {
    let w = 0.05;
    for j in [4i64, 1, 3, 6] {
        let angle = AngleIndex::new(j, 16).unwrap();
        let bt = flat_backtrack(angle, w);
        assert!(passes_through(&bt.line, &bt));
        let perp = DiscreteLine::through(angle.offset(4), bt.p);
        assert!(!passes_through(&perp, &bt));
        let shifted = DiscreteLine::new(angle, bt.line.offset + 0.4 * w);
        let h = sampled_hausdorff(&shifted, &bt.line, &bt.square);
        let eps = 0.5 * w;
        if h < eps * 0.999 {
            assert!(passes_through(&shifted, &bt), "j={j} h={h}");
        } else if h > eps * 1.001 {
            assert!(!passes_through(&shifted, &bt), "j={j} h={h}");
        }
        if j == 4 {
            assert!(passes_through(&shifted, &bt));
        }
        let away = DiscreteLine::new(angle, support_half(angle) + 0.2);
        assert!(!passes_through(&away, &bt));
    }
}

fn support_half(angle: AngleIndex) -> f64 {
    crate::geometry::support_half_width(angle)
}

#[test]
fn backtracking_set_examples() {
    let p = Params::desk(4, 16, 12).unwrap();
    let o = oracle(OrderKind::Zorder, 12);
    let root = build_atlas(&o, &p, &[0]).unwrap();
    let bt = root.backtracks[&DyadicSquare::UNIT];
    let through = LineSample {
        line: bt.line,
        seed: 0,
        index: 0,
    };
    let set = backtracking_set(&root, &o, &through, &p).unwrap();
    assert_eq!(set.points, vec![bt.p]);
    assert_eq!(set.sigma, 1.0);
    assert_eq!(set.detour_bound, SQRT_2 + 4.0 * p.w);
    assert!(set.detour_tour <= set.detour_bound);

    let perp = LineSample {
        line: DiscreteLine::through(bt.line.angle.offset(4), bt.p),
        seed: 0,
        index: 0,
    };
    let empty = backtracking_set(&root, &o, &perp, &p).unwrap();
    assert!(empty.points.is_empty() && empty.sigma == 0.0);
    assert_eq!(empty.report.cost_order, 0.0);
    assert!(empty.charge_slack() >= 0.0 && empty.detour_slack() >= 0.0);

    let atlas = build_atlas(&o, &p, &[0, 1]).unwrap();
    let best = best_backtracking_set(&atlas, &o, &p, 1000, 3, false)
        .unwrap()
        .unwrap();
    assert!(best.charge_lhs >= best.charge_rhs - 1e-9);
    assert!(best.detour_tour <= best.detour_bound + 1e-9);

    let (friendly, _) = spiral_friendly_oracle(
        DyadicSquare::UNIT,
        &Params::desk(0, 16, 12).unwrap(),
        &[1; 50],
    )
    .unwrap();
    let gap = build_atlas(&friendly, &p, &[0]).unwrap();
    assert!(matches!(
        backtracking_set(&gap, &friendly, &through, &p),
        Err(crate::Error::CaseB { scale: 0, .. })
    ));
}

#[test]
fn sigma_expectation_examples() {
    let p = Params::desk(4, 16, 12).unwrap();
    let none = build_atlas(&oracle(OrderKind::Rowmajor, 12), &p, &[0]).unwrap();
    assert_eq!(
        estimate_sigma_expectation(&none, &p, 1000, 1).unwrap().mean,
        0.0
    );
    let atlas = build_atlas(&oracle(OrderKind::Hilbert, 12), &p, &[0]).unwrap();
    let a = estimate_sigma_expectation(&atlas, &p, 20_000, 1).unwrap();
    let b = estimate_sigma_expectation(&atlas, &p, 40_000, 1).unwrap();
    let ratio = a.std_err / b.std_err;
    assert!((ratio - SQRT_2).abs() < 0.2 * SQRT_2, "ratio {ratio}");
    assert_eq!(a.prediction, p.w / 32.0);
    assert_eq!(
        a,
        estimate_sigma_expectation(&atlas, &p, 20_000, 1).unwrap()
    );
}

fn winding_chain(m: u32, g: u32) -> (Params, OrderOracle, SpiralChain) {
    let p = Params::desk(0, m, g).unwrap();
    let steps = make_walk(WalkKind::Winding, m, p.s, 0).unwrap().steps();
    let (o, _) = spiral_friendly_oracle(DyadicSquare::UNIT, &p, &steps).unwrap();
    let chain = spiral_chain(&o, DyadicSquare::UNIT, &p).unwrap();
    (p, o, chain)
}

#[test]
fn zigzag_set_from_winding_chain() {
    let (p, o, chain) = winding_chain(256, 11);
    assert!(chain.len() >= 7 * 216);
    chain.check_laws(&o, &p).unwrap();
    let z = zigzag_set(&chain, &p, &o).unwrap();
    assert!(z.truncated && z.outcome.is_zigzag());
    let m = z.outcome.multiplicity().min((p.m / p.s) as usize);
    assert_eq!(z.points.len(), 2 * m);
    assert!(z.min_step >= 0.1 / p.m as f64);
    assert!(z.tsp_upper_certified() <= z.explicit_tour);
    assert!(z.report.ratio_lower.unwrap() > 1.0);
    assert_eq!(z, zigzag_set(&chain, &p, &o).unwrap());
}

#[test]
fn zigzag_set_preconditions() {
    let (p, o, chain) = winding_chain(16, 10);
    assert!(matches!(
        zigzag_set(&chain, &p, &o),
        Err(crate::Error::Precondition(_))
    ));
    let zo = oracle(OrderKind::Zorder, 10);
    let bt_chain = spiral_chain(&zo, DyadicSquare::UNIT, &p).unwrap();
    assert!(matches!(
        zigzag_set(&bt_chain, &p, &zo),
        Err(crate::Error::Precondition(_))
    ));
}

#[test]
fn confined_set_from_rowmajor_chain() {
    let p = Params::desk(0, 256, 12).unwrap();
    let o = oracle(OrderKind::Rowmajor, 12);
    let chain = spiral_chain(&o, DyadicSquare::UNIT, &p).unwrap();
    chain.check_laws(&o, &p).unwrap();
    let z = zigzag_set(&chain, &p, &o).unwrap();
    assert!(!z.outcome.is_zigzag());
    // consecutive chain points are at least 0.1/M apart, so any tour is too
    assert!(z.explicit_tour >= 0.1 / p.m as f64);
    assert!(z.explicit_tour <= 2.0 * z.report.tsp_upper);
    assert!(z.tsp_upper_certified() <= z.report.tsp_upper);
    assert!(z.min_step >= 0.1 / p.m as f64);
    assert!(z.report.ratio_lower.unwrap() > 1.0);
}

#[test]
fn case_dichotomy_examples() {
    let p = Params::desk(4, 16, 12).unwrap();
    let rep = run_case_dichotomy(&oracle(OrderKind::Zorder, 12), &p, 200, 1).unwrap();
    assert_eq!(rep.case, CaseKind::A);
    assert!(!rep.points.is_empty());
    assert!(rep.inequalities.iter().all(|i| i.holds(1e-9)));
    if let Some(exact) = rep.report.tsp_exact {
        assert!(rep.report.cost_order >= exact - 1e-12);
    }

    let pb = Params::desk(0, 256, 12).unwrap();
    let rep = run_case_dichotomy(&oracle(OrderKind::Rowmajor, 12), &pb, 10, 1).unwrap();
    assert_eq!(rep.case, CaseKind::BConfined);
    assert_eq!(rep.square, Some(DyadicSquare::UNIT));

    let (pw, fo, _) = winding_chain(256, 11);
    let rep = run_case_dichotomy(&fo, &pw, 10, 1).unwrap();
    assert_eq!(rep.case, CaseKind::BZigzag);
    assert!(rep.inequalities.iter().all(|i| i.holds(1e-9)));

    let small = Params::desk(2, 16, 10).unwrap();
    let rep = run_case_dichotomy(&oracle(OrderKind::Rowmajor, 10), &small, 10, 1).unwrap();
    assert_eq!(rep.case, CaseKind::Inconclusive);
    assert_eq!(rep.covered, 0);
    assert!(rep.points.is_empty());
}
