//! Point-set files and result records.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Mode, PointConfig};
use crate::adversary::{CaseKind, CaseReport, Inequality};
use crate::geometry::{DyadicSquare, Point};
use crate::{Error, Result};

/// `# g=<g> order=<name>`, then one `x y` line per point.
pub fn format_set(points: &[Point], g: u32, order: &str) -> String {
    let mut out = format!("# g={g} order={order}\n");
    for p in points {
        out.push_str(&format!("{} {}\n", p.x, p.y));
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointSet {
    pub g: Option<u32>,
    pub order: Option<String>,
    pub points: Vec<Point>,
}

pub fn parse_set(text: &str) -> Result<PointSet> {
    let mut set = PointSet::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |msg: String| Error::Format { line: i + 1, msg };
        if let Some(comment) = line.strip_prefix('#') {
            for field in comment.split_whitespace() {
                match field.split_once('=') {
                    Some(("g", v)) => {
                        set.g = Some(
                            v.parse()
                                .map_err(|_| err(format!("bad grid exponent `{v}`")))?,
                        )
                    }
                    Some(("order", v)) => set.order = Some(v.to_string()),
                    _ => {}
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut coord = |name: &str| -> Result<f64> {
            let tok = it
                .next()
                .ok_or_else(|| err(format!("missing {name} coordinate")))?;
            let v: f64 = tok
                .parse()
                .map_err(|_| err(format!("bad {name} coordinate `{tok}`")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(err(format!("{name}={v} outside [0,1]")));
            }
            Ok(v)
        };
        let p = Point::new(coord("x")?, coord("y")?);
        if it.next().is_some() {
            return Err(err("expected exactly two numbers".into()));
        }
        set.points.push(p);
    }
    Ok(set)
}

pub fn load_set(path: &Path) -> Result<PointSet> {
    parse_set(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// One line of the record file. Wall time is kept out so that reruns are
/// byte-identical; it goes to the summary table instead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config_hash: String,
    pub order: String,
    pub g: u32,
    #[serde(rename = "M")]
    pub m: u32,
    pub r: u32,
    pub l: f64,
    pub w: f64,
    pub c: u32,
    pub s: u32,
    pub mode: Mode,
    pub seed: u64,
    pub lines: u64,
    pub case: CaseKind,
    pub n: usize,
    pub cost_order: f64,
    pub tsp_lower: f64,
    pub tsp_exact: Option<f64>,
    pub tsp_upper: f64,
    pub ratio_lower: Option<f64>,
    pub ratio_exact: Option<f64>,
    pub sigma: Option<f64>,
    pub covered: usize,
    pub squares: usize,
    pub square: Option<DyadicSquare>,
    pub chain_len: Option<usize>,
    pub inequalities: Vec<Inequality>,
    pub set_file: String,
    pub verified: bool,
}

impl ResultRecord {
    pub fn new(pc: &PointConfig, s: u32, rep: &CaseReport, verified: bool) -> Self {
        let hash = pc.hash();
        ResultRecord {
            set_file: format!("sets/{hash}.txt"),
            config_hash: hash,
            order: pc.order.clone(),
            g: pc.g,
            m: pc.m,
            r: pc.r,
            l: pc.l,
            w: pc.w,
            c: pc.c,
            s,
            mode: pc.mode,
            seed: pc.seed,
            lines: pc.lines,
            case: rep.case,
            n: rep.report.n,
            cost_order: rep.report.cost_order,
            tsp_lower: rep.report.tsp_lower,
            tsp_exact: rep.report.tsp_exact,
            tsp_upper: rep.report.tsp_upper,
            ratio_lower: rep.report.ratio_lower,
            ratio_exact: rep.report.ratio_exact,
            sigma: rep.sigma,
            covered: rep.covered,
            squares: rep.squares,
            square: rep.square,
            chain_len: rep.chain_len,
            inequalities: rep.inequalities.clone(),
            verified,
        }
    }

    pub fn to_line(&self) -> Result<String> {
        serde_json::to_string(self)
            .map_err(|e| Error::Construction(format!("record encoding: {e}")))
    }
}

pub fn parse_records(text: &str) -> Result<Vec<ResultRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Format {
                line: i + 1,
                msg: e.to_string(),
            })
        })
        .collect()
}

/// Appends whole lines in a single write each, so an interrupted run leaves
/// only complete lines behind.
pub fn append_lines(path: &Path, header: Option<&str>, lines: &[String]) -> Result<()> {
    let fresh = !path.exists();
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut buf = String::new();
    if fresh {
        if let Some(h) = header {
            buf.push_str(h);
            buf.push('\n');
        }
    }
    for l in lines {
        buf.push_str(l);
        buf.push('\n');
    }
    f.write_all(buf.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    f.flush().map_err(|e| Error::io(path, e))
}

pub const SUMMARY_HEADER: &str =
    "config_hash,order,g,M,r,seed,case,n,cost_order,tsp_upper,ratio_lower,wall_ms";

pub fn summary_line(r: &ResultRecord, wall_ms: u128) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.config_hash,
        r.order,
        r.g,
        r.m,
        r.r,
        r.seed,
        r.case,
        r.n,
        r.cost_order,
        r.tsp_upper,
        r.ratio_lower.map(|v| v.to_string()).unwrap_or_default(),
        wall_ms
    )
}
