//! Experiment configuration, the attack runner and its artefacts.

mod config;
mod io;
mod plot;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{parse_list, Auto, ExperimentConfig, Mode, PointConfig};
pub use io::{
    append_lines, format_set, load_set, parse_records, parse_set, summary_line, PointSet,
    ResultRecord, SUMMARY_HEADER,
};
pub use plot::{plot_chain, plot_ratio_curve, plot_set};

use crate::adversary::{
    build_atlas, chain_walk, run_case_dichotomy, verify_backtrack, CaseReport, Params, SpiralChain,
    LAW_TOL,
};
use crate::cyclewalk::{dichotomy, make_walk, DichotomyOutcome, WalkKind};
use crate::orders::OrderOracle;
use crate::tsp::{measure_order_ratio, RatioReport};
use crate::{Error, Result};

pub const RECORDS_FILE: &str = "records.ndjson";
pub const SUMMARY_FILE: &str = "summary.csv";

struct PointRun {
    record: ResultRecord,
    set_text: String,
    chain_json: Option<String>,
    wall_ms: u128,
}

fn run_point(cfg: &ExperimentConfig, pc: &PointConfig) -> Result<PointRun> {
    let start = Instant::now();
    let oracle = cfg.oracle(pc.g)?;
    let params = cfg.params(pc.g)?;
    let report = run_case_dichotomy(&oracle, &params, pc.lines, pc.seed)?;
    if cfg.verify {
        verify_report(&oracle, &params, &report)?;
    }
    let record = ResultRecord::new(pc, params.s, &report, cfg.verify);
    let set_text = format_set(&report.points, pc.g, &pc.order);
    let chain_json = match &report.chain {
        Some(c) => Some(
            serde_json::to_string_pretty(c)
                .map_err(|e| Error::Construction(format!("chain encoding: {e}")))?,
        ),
        None => None,
    };
    Ok(PointRun {
        record,
        set_text,
        chain_json,
        wall_ms: start.elapsed().as_millis(),
    })
}

/// Re-runs every exhaustive scan and validator behind a case report: all
/// backtracks, the laws of every uncovered chain, the walk witness, the
/// recorded inequalities and the ratio measurement itself.
pub fn verify_report(oracle: &OrderOracle, params: &Params, report: &CaseReport) -> Result<()> {
    let atlas = build_atlas(oracle, params, &params.scales())?;
    if atlas.covered() != report.covered || atlas.total() != report.squares {
        return Err(Error::Witness(format!(
            "atlas covers {}/{} squares, report says {}/{}",
            atlas.covered(),
            atlas.total(),
            report.covered,
            report.squares
        )));
    }
    atlas
        .backtracks
        .values()
        .collect::<Vec<_>>()
        .par_iter()
        .try_for_each(|bt| verify_backtrack(oracle, bt, params))?;
    atlas
        .uncovered
        .values()
        .collect::<Vec<_>>()
        .par_iter()
        .try_for_each(|c| c.check_laws(oracle, params))?;
    if let (Some(chain), Some(outcome)) = (&report.chain, &report.walk) {
        outcome.validate(&chain_walk(chain)?, params.s)?;
    }
    if let Some(bad) = report.inequalities.iter().find(|q| !q.holds(LAW_TOL)) {
        return Err(Error::Witness(format!(
            "{} fails: {} > {}",
            bad.name, bad.lhs, bad.rhs
        )));
    }
    let again = measure_order_ratio(oracle, &report.points)?;
    if again != report.report {
        return Err(Error::Witness(
            "ratio measurement is not reproducible".into(),
        ));
    }
    Ok(())
}

/// Runs every configuration point in parallel and writes the artefacts from
/// a single thread: one record line per point, the point sets, the case B
/// chains and the timing summary.
pub fn cmd_attack(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let points = cfg.points()?;
    let out = &cfg.out;
    for dir in [out.clone(), out.join("sets"), out.join("chains")] {
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let runs: Vec<PointRun> = points
        .par_iter()
        .map(|pc| run_point(cfg, pc))
        .collect::<Result<_>>()?;
    let mut lines = Vec::with_capacity(runs.len());
    let mut summary = Vec::with_capacity(runs.len());
    for run in &runs {
        let set_path = out.join(&run.record.set_file);
        std::fs::write(&set_path, &run.set_text).map_err(|e| Error::io(&set_path, e))?;
        if let Some(json) = &run.chain_json {
            let p = out
                .join("chains")
                .join(format!("{}.json", run.record.config_hash));
            std::fs::write(&p, json).map_err(|e| Error::io(&p, e))?;
        }
        lines.push(run.record.to_line()?);
        summary.push(summary_line(&run.record, run.wall_ms));
    }
    append_lines(&out.join(RECORDS_FILE), None, &lines)?;
    append_lines(&out.join(SUMMARY_FILE), Some(SUMMARY_HEADER), &summary)?;
    Ok(runs.into_iter().map(|r| r.record).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct WalkDump {
    pub kind: String,
    #[serde(rename = "M")]
    pub m: u32,
    pub s: u32,
    pub seed: u64,
    pub len: usize,
    pub outcome: DichotomyOutcome,
    pub valid: bool,
}

pub fn cmd_walk(kind: WalkKind, m: u32, s: u32, seed: u64) -> Result<WalkDump> {
    let walk = make_walk(kind, m, s, seed)?;
    let outcome = dichotomy(&walk, s)?;
    let valid = outcome.validate(&walk, s).is_ok();
    Ok(WalkDump {
        kind: kind.to_string(),
        m,
        s,
        seed,
        len: walk.len(),
        outcome,
        valid,
    })
}

/// Measures a point-set file against an order. The grid comes from the
/// oracle; a `g=` header that disagrees is an error.
pub fn cmd_ratio(oracle: &OrderOracle, set_path: &Path) -> Result<RatioReport> {
    let set = load_set(set_path)?;
    if let Some(g) = set.g {
        if g != oracle.grid().g {
            return Err(Error::Config {
                field: "g".into(),
                msg: format!("set file has g={g}, order has g={}", oracle.grid().g),
            });
        }
    }
    measure_order_ratio(oracle, &set.points)
}

/// Which figure an input file turns into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Records,
    Chain,
    Set,
}

/// Renders a record file as the ratio curve, an exported chain as the chain
/// figure and a set file (with its `order=` header, if any) as the ordered
/// point set.
pub fn cmd_plot(input: &Path, output: &Path) -> Result<PlotKind> {
    let text = std::fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let trimmed = text.trim_start();
    let (kind, svg) =
        if trimmed.starts_with('{') && serde_json::from_str::<SpiralChain>(&text).is_ok() {
            let chain: SpiralChain = serde_json::from_str(&text).expect("checked above");
            (PlotKind::Chain, plot_chain(&chain))
        } else if trimmed.is_empty() || trimmed.starts_with('{') {
            (PlotKind::Records, plot_ratio_curve(&parse_records(&text)?))
        } else {
            let set = parse_set(&text)?;
            let ordered = match (&set.order, set.g) {
                (Some(name), Some(g)) => match name.parse() {
                    Ok(kind) => OrderOracle::new(kind, g)?.sort_by_order(&set.points)?,
                    Err(_) => set.points.clone(),
                },
                _ => set.points.clone(),
            };
            let title = format!(
                "{} points, order {}",
                ordered.len(),
                set.order.as_deref().unwrap_or("as listed")
            );
            (PlotKind::Set, plot_set(&ordered, &title))
        };
    std::fs::write(output, svg).map_err(|e| Error::io(output, e))?;
    Ok(kind)
}
