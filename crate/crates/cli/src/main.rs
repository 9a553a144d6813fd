use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use utsp_core::cyclewalk::WalkKind;
use utsp_core::harness::{self, ExperimentConfig, PlotKind};
use utsp_core::orders::{load_order_file, OrderKind, OrderOracle};

#[derive(Parser)]
#[command(
    name = "utsp",
    about = "Adversarial point sets against linear orders of the unit square"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the case analysis for every configuration point and write records.
    Attack(AttackArgs),
    /// Generate a walk on the M-cycle and print its dichotomy witness.
    Walk {
        #[arg(long)]
        kind: WalkKind,
        #[arg(long = "M")]
        m: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Measure a point-set file against an order.
    Ratio {
        #[arg(long, required_unless_present = "order_file")]
        order: Option<OrderKind>,
        #[arg(long)]
        order_file: Option<PathBuf>,
        #[arg(long)]
        set: PathBuf,
        /// Grid exponent; defaults to the set file's `g=` header.
        #[arg(long)]
        g: Option<u32>,
    },
    /// Render records, a set file or an exported chain as SVG.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Every flag mirrors a config key and overrides the config file.
#[derive(clap::Args)]
struct AttackArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    order_file: Option<String>,
    /// A grid exponent, `a..b` or a comma list.
    #[arg(long)]
    g: Option<String>,
    #[arg(long = "M")]
    m: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    l: Option<String>,
    #[arg(long)]
    w: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    lines: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Re-run every exhaustive certificate scan before writing.
    #[arg(long)]
    verify: bool,
}

impl AttackArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("order", &self.order),
            ("order_file", &self.order_file),
            ("g", &self.g),
            ("M", &self.m),
            ("r", &self.r),
            ("l", &self.l),
            ("w", &self.w),
            ("c", &self.c),
            ("seed", &self.seed),
            ("lines", &self.lines),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.strict {
            cfg.set("mode", "strict")?;
        }
        if self.verify {
            cfg.verify = true;
        }
        Ok(cfg)
    }
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Attack(args) => {
            let cfg = args.config()?;
            let records = harness::cmd_attack(&cfg)?;
            for r in &records {
                println!(
                    "{} g={} seed={} case={} n={} ratio_lower={}",
                    &r.config_hash[..12],
                    r.g,
                    r.seed,
                    r.case,
                    r.n,
                    r.ratio_lower.map_or("-".to_string(), |v| format!("{v:.6}")),
                );
            }
            eprintln!(
                "{} record(s) appended to {}",
                records.len(),
                cfg.out.join(harness::RECORDS_FILE).display()
            );
        }
        Cmd::Walk { kind, m, s, seed } => {
            let dump = harness::cmd_walk(kind, m, s, seed)?;
            println!("{}", serde_json::to_string_pretty(&dump)?);
            if !dump.valid {
                bail!("witness failed validation");
            }
        }
        Cmd::Ratio {
            order,
            order_file,
            set,
            g,
        } => {
            let g = match g {
                Some(g) => Some(g),
                None => harness::load_set(&set)?.g,
            };
            let oracle = match (order_file, order) {
                (Some(path), _) => load_order_file(&path)?,
                (None, Some(kind)) => {
                    let g = g.context(
                        "no grid exponent: pass --g or add a `# g=` header to the set file",
                    )?;
                    OrderOracle::new(kind, g)?
                }
                (None, None) => unreachable!("clap requires one of them"),
            };
            let report = harness::cmd_ratio(&oracle, &set)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Cmd::Plot { input, out } => {
            let kind = harness::cmd_plot(&input, &out)?;
            let what = match kind {
                PlotKind::Records => "ratio curve",
                PlotKind::Chain => "spiral chain",
                PlotKind::Set => "point set",
            };
            eprintln!("wrote {what} to {}", out.display());
        }
    }
    Ok(())
}
