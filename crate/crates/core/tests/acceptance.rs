//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Runs without the libtest harness so the lines always print.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use utsp_core::adversary::{
    backtracking_set_partial, build_atlas, estimate_sigma_expectation, icbrt, sample_line_at,
    spiral_chain_with, verify_backtrack, CaseKind, Params, Termination, TieBreak,
};
use utsp_core::cyclewalk::{dichotomy, make_walk, WalkKind};
use utsp_core::geometry::{dist, dyadic_squares, Point};
use utsp_core::harness::{cmd_attack, ExperimentConfig, RECORDS_FILE};
use utsp_core::orders::{OrderKind, OrderOracle};
use utsp_core::tsp::{tsp_exact_path, tsp_lower_mst, tsp_upper_heuristic};

const TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn first_failure(failures: &[String]) -> String {
    failures
        .first()
        .map(|f| format!("; first: {f}"))
        .unwrap_or_default()
}

fn walk_soundness() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    let mut failures = Vec::new();
    let mut run = |kind: WalkKind, m: u32, s: u32, seed: u64| {
        runs += 1;
        let res = make_walk(kind, m, s, seed).and_then(|w| {
            let out = dichotomy(&w, s)?;
            out.validate(&w, s)
        });
        if let Err(e) = res {
            failures.push(format!("{kind} M={m} s={s} seed={seed}: {e}"));
        }
    };
    for m in [27, 64, 125, 1000] {
        for s in 1..=icbrt(m) {
            for kind in [
                WalkKind::Winding,
                WalkKind::Constant,
                WalkKind::Revolution,
                WalkKind::Tight,
            ] {
                run(kind, m, s, 0);
            }
        }
    }
    for seed in 0..1000 {
        run(WalkKind::Random, 64, 4, seed);
    }
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "{runs} walks, {} failures, {:.1}s (limit 60s){}",
            failures.len(),
            elapsed.as_secs_f64(),
            first_failure(&failures)
        ),
    )
}

fn walk_branches() -> Outcome {
    let scenario = |kind| -> Result<bool, String> {
        let w = make_walk(kind, 1000, 10, 0).map_err(|e| e.to_string())?;
        Ok(dichotomy(&w, 10).map_err(|e| e.to_string())?.is_zigzag())
    };
    let got: Vec<_> = [WalkKind::Winding, WalkKind::Constant, WalkKind::Revolution]
        .into_iter()
        .map(scenario)
        .collect();
    check(
        got == [Ok(true), Ok(false), Ok(false)],
        format!("winding/constant/revolution zig-zag = {got:?}, want [true, false, false]"),
    )
}

/// Largest feasible number of scales, less one.
fn working_r(m: u32, g: u32) -> Option<u32> {
    (1..g)
        .rev()
        .find(|&r| Params::desk(r, m, g).is_ok())
        .map(|r| r - 1)
}

fn chain_laws() -> Outcome {
    let start = Instant::now();
    let mut chains = 0usize;
    let mut backtracks = 0usize;
    let mut failures = Vec::new();
    for m in [16, 32, 64] {
        for g in [8, 10, 12] {
            let Some(r) = working_r(m, g) else {
                failures.push(format!("no feasible r at M={m} g={g}"));
                continue;
            };
            let params = Params::desk(r, m, g).expect("feasible");
            let squares: Vec<_> = params
                .scales()
                .into_iter()
                .flat_map(|t| dyadic_squares(t).unwrap())
                .collect();
            for kind in OrderKind::BUILTIN {
                let oracle = OrderOracle::new(kind, g).unwrap();
                let results: Vec<(bool, Option<String>)> = squares
                    .par_iter()
                    .flat_map_iter(|&sq| TieBreak::ALL.into_iter().map(move |tie| (sq, tie)))
                    .map(|(sq, tie)| {
                        let res = spiral_chain_with(&oracle, sq, &params, tie).and_then(|c| {
                            c.check_laws(&oracle, &params)?;
                            match &c.termination {
                                Termination::BacktrackFound(bt) => {
                                    verify_backtrack(&oracle, bt, &params).map(|_| true)
                                }
                                _ => Ok(false),
                            }
                        });
                        match res {
                            Ok(bt) => (bt, None),
                            Err(e) => (
                                false,
                                Some(format!("{kind} M={m} g={g} {sq:?} {tie:?}: {e}")),
                            ),
                        }
                    })
                    .collect();
                chains += results.len();
                for (bt, err) in results {
                    backtracks += bt as usize;
                    failures.extend(err);
                }
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(600),
        format!(
            "{chains} chains, {backtracks} backtracks re-verified, {} failures, {:.1}s (limit 600s){}",
            failures.len(),
            elapsed.as_secs_f64(),
            first_failure(&failures)
        ),
    )
}

/// Detour and charge inequalities over 1000 sampled lines per built-in order.
fn line_corpus() -> (Outcome, Outcome) {
    let params = Params::desk(4, 16, 12).unwrap();
    let (mut sets, mut nonempty) = (0usize, 0usize);
    let (mut detour_bad, mut charge_bad) = (Vec::new(), Vec::new());
    let (mut detour_min, mut charge_min) = (f64::INFINITY, f64::INFINITY);
    for kind in OrderKind::BUILTIN {
        let oracle = OrderOracle::new(kind, 12).unwrap();
        let atlas = build_atlas(&oracle, &params, &params.scales()).unwrap();
        let built: Vec<_> = (0..1000u64)
            .into_par_iter()
            .map(|i| {
                let line = sample_line_at(params.m, 7, i)?;
                backtracking_set_partial(&atlas, &oracle, &line, &params)
            })
            .collect::<Result<_, _>>()
            .unwrap();
        for b in built {
            sets += 1;
            nonempty += !b.points.is_empty() as usize;
            detour_min = detour_min.min(b.detour_bound - b.detour_tour);
            charge_min = charge_min.min(b.charge_lhs - b.charge_rhs);
            if b.detour_tour > b.detour_bound + TOL {
                detour_bad.push((kind, b.line.index));
            }
            if b.charge_rhs > b.charge_lhs + TOL {
                charge_bad.push((kind, b.line.index));
            }
        }
    }
    (
        check(
            detour_bad.is_empty(),
            format!(
                "{sets} sets ({nonempty} non-empty), {} violations, min slack {detour_min:.4}",
                detour_bad.len()
            ),
        ),
        check(
            charge_bad.is_empty(),
            format!(
                "{sets} sets, {} violations, min slack {charge_min:.4}",
                charge_bad.len()
            ),
        ),
    )
}

fn expectation_bound() -> Outcome {
    let params = Params::desk(4, 16, 12).unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for kind in [OrderKind::Zorder, OrderKind::Hilbert, OrderKind::Sierpinski] {
        let oracle = OrderOracle::new(kind, 12).unwrap();
        let atlas = build_atlas(&oracle, &params, &[0]).unwrap();
        if !atlas.is_full() {
            pass = false;
            parts.push(format!("{kind}: root uncovered"));
            continue;
        }
        let est = estimate_sigma_expectation(&atlas, &params, 100_000, 11).unwrap();
        let bound = params.w / (2.0 * params.m as f64);
        pass &= est.mean >= bound - 3.0 * est.std_err;
        parts.push(format!(
            "{kind}: {:.3e} ± {:.1e} vs {bound:.3e}",
            est.mean, est.std_err
        ));
    }
    check(pass, parts.join("; "))
}

fn brute_force(pts: &[Point]) -> f64 {
    fn go(pts: &[Point], used: &mut [bool], last: usize, left: usize, acc: f64, best: &mut f64) {
        if left == 0 {
            *best = best.min(acc);
            return;
        }
        for i in 0..pts.len() {
            if !used[i] {
                used[i] = true;
                go(pts, used, i, left - 1, acc + dist(pts[last], pts[i]), best);
                used[i] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    for s in 0..pts.len() {
        let mut used = vec![false; pts.len()];
        used[s] = true;
        go(pts, &mut used, s, pts.len() - 1, 0.0, &mut best);
    }
    best
}

fn random_set(rng: &mut ChaCha8Rng, max: usize) -> Vec<Point> {
    let n = rng.gen_range(2..=max);
    (0..n).map(|_| Point::new(rng.gen(), rng.gen())).collect()
}

fn tsp_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sets: Vec<_> = (0..1000).map(|_| random_set(&mut rng, 8)).collect();
    let worst = sets
        .par_iter()
        .map(|s| (tsp_exact_path(s).unwrap() - brute_force(s)).abs())
        .reduce(|| 0.0, f64::max);
    let sandwich_bad = (0..1000)
        .map(|_| random_set(&mut rng, 12))
        .filter(|s| {
            let exact = tsp_exact_path(s).unwrap();
            !(tsp_lower_mst(s) <= exact + TOL && exact <= tsp_upper_heuristic(s) + TOL)
        })
        .count();
    check(
        worst <= TOL && sandwich_bad == 0,
        format!("max |exact - brute force| = {worst:.2e} over 1000 sets; {sandwich_bad} sandwich violations over 1000 sets"),
    )
}

const PINNED_SIERPINSKI: [f64; 5] = [
    1.0,
    1.5,
    1.7142857142857142,
    2.4117647058823515,
    2.5483870967741935,
];

fn ratio_growth() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg =
        ExperimentConfig::parse("order=sierpinski\ng=8..12\nM=16\nr=auto\nseed=0\nlines=1000\n")
            .unwrap();
    cfg.out = dir.path().to_path_buf();
    let recs = cmd_attack(&cfg).unwrap();
    let ratios: Vec<f64> = recs.iter().map(|r| r.ratio_lower.unwrap_or(0.0)).collect();
    let all_a = recs.iter().all(|r| r.case == CaseKind::A);
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let pinned = ratios.len() == 5
        && ratios
            .iter()
            .zip(PINNED_SIERPINSKI)
            .all(|(a, b)| (a - b).abs() <= TOL);
    let ns: Vec<usize> = recs.iter().map(|r| r.n).collect();
    check(
        all_a && increasing && pinned,
        format!("g=8..12 n={ns:?} ratio={ratios:.4?} case A everywhere={all_a} increasing={increasing} pinned={pinned}"),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let mut cfg =
            ExperimentConfig::parse("order=sierpinski\ng=9..10\nM=16\nseed=4,5\nlines=500\n")
                .unwrap();
        cfg.out = dir.path().join(sub);
        cmd_attack(&cfg).unwrap();
        std::fs::read(cfg.out.join(RECORDS_FILE)).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    check(
        !a.is_empty() && a == b,
        format!("{} record bytes, identical={}", a.len(), a == b),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |name: &str, o: Outcome| {
        failed += !o.pass as usize;
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    };
    report("walk dichotomy soundness", walk_soundness());
    report("walk dichotomy branches", walk_branches());
    report("spiral chain laws", chain_laws());
    let (detour, charge) = line_corpus();
    report("detour tour bound", detour);
    report("charge inequality", charge);
    report("expectation bound", expectation_bound());
    report("tsp oracle equivalence", tsp_oracles());
    report("sierpinski ratio growth", ratio_growth());
    report("attack determinism", determinism());
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
