//! Experiment configuration: a flat `key=value` format mirroring the CLI.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adversary::{default_params, Params};
use crate::orders::{load_order_file, OrderKind, OrderOracle};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    Desk,
}

/// A value given explicitly or left to the parameter rules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Auto<T> {
    Auto,
    Value(T),
}

impl<T: std::str::FromStr> Auto<T> {
    fn parse(field: &str, v: &str) -> Result<Self> {
        if v == "auto" {
            return Ok(Auto::Auto);
        }
        v.parse().map(Auto::Value).map_err(|_| Error::Config {
            field: field.into(),
            msg: format!("expected a number or `auto`, got `{v}`"),
        })
    }
}

impl<T: std::fmt::Display> std::fmt::Display for Auto<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Auto::Auto => f.write_str("auto"),
            Auto::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub order: OrderKind,
    pub order_file: Option<PathBuf>,
    pub g: Vec<u32>,
    pub m: u32,
    pub r: Auto<u32>,
    pub l: Auto<f64>,
    pub w: Auto<f64>,
    pub c: Auto<u32>,
    pub mode: Mode,
    pub seeds: Vec<u64>,
    pub lines: u64,
    pub out: PathBuf,
    pub verify: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            order: OrderKind::Hilbert,
            order_file: None,
            g: vec![10],
            m: 16,
            r: Auto::Auto,
            l: Auto::Auto,
            w: Auto::Auto,
            c: Auto::Auto,
            mode: Mode::Desk,
            seeds: vec![0],
            lines: 1000,
            out: PathBuf::from("results"),
            verify: false,
        }
    }
}

/// One `(g, seed)` point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub order: String,
    pub g: u32,
    pub m: u32,
    pub r: u32,
    pub l: f64,
    pub w: f64,
    pub c: u32,
    pub mode: Mode,
    pub seed: u64,
    pub lines: u64,
}

fn cfg_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        msg: msg.into(),
    }
}

/// `a..b` (inclusive), or a comma-separated list.
pub fn parse_list<T>(field: &str, v: &str) -> Result<Vec<T>>
where
    T: std::str::FromStr + Copy + Into<u64> + TryFrom<u64>,
{
    let num = |s: &str| {
        s.trim()
            .parse::<T>()
            .map_err(|_| cfg_err(field, format!("`{s}` is not a non-negative integer")))
    };
    let out: Vec<T> = if let Some((a, b)) = v.split_once("..") {
        let (a, b): (u64, u64) = (num(a)?.into(), num(b)?.into());
        if a > b {
            return Err(cfg_err(field, format!("empty range {v}")));
        }
        (a..=b)
            .map(|x| T::try_from(x).map_err(|_| cfg_err(field, "value out of range")))
            .collect::<Result<_>>()?
    } else {
        v.split(',').map(num).collect::<Result<_>>()?
    };
    if out.is_empty() {
        return Err(cfg_err(field, "empty list"));
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let int = |f: &str| {
            v.parse::<u64>()
                .map_err(|_| cfg_err(f, format!("`{v}` is not an integer")))
        };
        match key.trim() {
            "order" => {
                self.order = v
                    .parse()
                    .map_err(|e: Error| cfg_err("order", e.to_string()))?
            }
            "order_file" => {
                self.order_file = Some(PathBuf::from(v));
                self.order = OrderKind::File;
            }
            "g" => self.g = parse_list("g", v)?,
            "M" | "m" => self.m = int("M")? as u32,
            "r" => self.r = Auto::parse("r", v)?,
            "l" => self.l = Auto::parse("l", v)?,
            "w" => self.w = Auto::parse("w", v)?,
            "c" => self.c = Auto::parse("c", v)?,
            "mode" => {
                self.mode = match v {
                    "strict" => Mode::Strict,
                    "desk" => Mode::Desk,
                    _ => {
                        return Err(cfg_err(
                            "mode",
                            format!("expected strict or desk, got `{v}`"),
                        ))
                    }
                }
            }
            "strict" => {
                self.mode = if v == "true" {
                    Mode::Strict
                } else {
                    Mode::Desk
                }
            }
            "seed" | "seeds" => self.seeds = parse_list("seed", v)?,
            "lines" => self.lines = int("lines")?,
            "out" => self.out = PathBuf::from(v),
            "verify" => {
                self.verify = v
                    .parse()
                    .map_err(|_| cfg_err("verify", "expected true or false"))?
            }
            other => return Err(cfg_err(other, "unknown key")),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Format {
                line: i + 1,
                msg: format!("expected key=value, found `{line}`"),
            })?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Checks everything that can be checked before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.m < 8 || self.m % 4 != 0 {
            return Err(cfg_err(
                "M",
                format!("must be a multiple of 4 and at least 8, got {}", self.m),
            ));
        }
        if self.order == OrderKind::File && self.order_file.is_none() {
            return Err(cfg_err("order_file", "order `file` needs an order file"));
        }
        if self.lines == 0 {
            return Err(cfg_err("lines", "need at least one line"));
        }
        for &g in &self.g {
            crate::orders::GridSpec::new(g).map_err(|e| cfg_err("g", e.to_string()))?;
        }
        Ok(())
    }

    pub fn oracle(&self, g: u32) -> Result<OrderOracle> {
        match &self.order_file {
            Some(path) => {
                let o = load_order_file(path)?;
                if o.grid().g != g {
                    return Err(cfg_err(
                        "g",
                        format!("order file has g={}, config has g={g}", o.grid().g),
                    ));
                }
                Ok(o)
            }
            None => OrderOracle::new(self.order, g),
        }
    }

    /// Deepest number of scales with one scale of slack below the largest
    /// feasible one at this grid.
    pub fn auto_r(&self, g: u32) -> u32 {
        let feasible = (0..g).rev().find(|&r| Params::desk(r, self.m, g).is_ok());
        feasible.map_or(0, |r| r.saturating_sub(1))
    }

    /// Resolves `auto` fields and explicit overrides into parameters.
    pub fn params(&self, g: u32) -> Result<Params> {
        let r = match self.r {
            Auto::Value(r) => r,
            Auto::Auto => self.auto_r(g),
        };
        let mut p = match self.mode {
            Mode::Strict => {
                let mut p = default_params(r, self.m, true)?;
                p.g = g;
                p
            }
            Mode::Desk => Params::desk(r, self.m, g)?,
        };
        if let Auto::Value(l) = self.l {
            p.l = l;
        }
        if let Auto::Value(w) = self.w {
            p.w = w;
        }
        if let Auto::Value(c) = self.c {
            p = p.with_c(c)?;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn points(&self) -> Result<Vec<PointConfig>> {
        self.validate()?;
        let mut out = Vec::new();
        for &g in &self.g {
            let p = self.params(g)?;
            for &seed in &self.seeds {
                out.push(PointConfig {
                    order: self.order_name(),
                    g,
                    m: p.m,
                    r: p.r,
                    l: p.l,
                    w: p.w,
                    c: p.c,
                    mode: self.mode,
                    seed,
                    lines: self.lines,
                });
            }
        }
        Ok(out)
    }

    fn order_name(&self) -> String {
        match &self.order_file {
            Some(p) => format!("file:{}", p.display()),
            None => self.order.to_string(),
        }
    }
}

impl PointConfig {
    /// Sorted `key=value` lines; floats in shortest round-trip form.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let mode = match self.mode {
            Mode::Strict => "strict",
            Mode::Desk => "desk",
        };
        for (k, v) in [
            ("M", self.m.to_string()),
            ("c", self.c.to_string()),
            ("g", self.g.to_string()),
            ("l", self.l.to_string()),
            ("lines", self.lines.to_string()),
            ("mode", mode.to_string()),
            ("order", self.order.clone()),
            ("r", self.r.to_string()),
            ("seed", self.seed.to_string()),
            ("w", self.w.to_string()),
        ] {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
