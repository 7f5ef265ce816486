//! Command-line front end: reproducible training runs, evaluation, staged
//! sweeps, graph generation and splitting, and numerical validation.

pub mod config;
pub mod run;
pub mod sweep;
pub mod validate;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dimreg::graph::{generate_erdos_renyi, generate_sbm, load_edge_list, split_edges, write_edge_list, SplitRatios};
use dimreg::pipeline::SweepGrid;
use dimreg::trainer::{subseed, Stream};

use crate::config::RunConfig;
use crate::validate::Selector;

#[derive(Debug, Parser)]
#[command(name = "dimreg", version, about = "Skip-gram graph embeddings with dimension regularization")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ConfigArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Replaces the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sets a config value, e.g. `train.eta=0.1`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl ConfigArgs {
    pub fn load(&self) -> Result<RunConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        RunConfig::load(&self.config, &overrides)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Sbm,
    Er,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train embeddings into `<out>/<config hash>/`.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
    /// Link-prediction metrics for a finished run, or for explicit files.
    Eval {
        /// Run directory written by `train`.
        #[arg(long, conflicts_with_all = ["embeddings", "split"])]
        run: Option<PathBuf>,
        #[arg(long, requires_all = ["split", "config"])]
        embeddings: Option<PathBuf>,
        /// Prefix of the `.train/.valid/.test/.testneg` files.
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Report path (default: printed only, or `metrics.json` in the run).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Staged grid search; finished cells in the CSV are not rerun.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Grid (JSON); missing lists take the default grid.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Result log.
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Numerical checks; exit status 0 only if all pass.
    Validate {
        #[arg(value_enum)]
        selector: Selector,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "validation")]
        out: PathBuf,
    },
    /// Write a synthetic graph as an edge list.
    Generate {
        #[arg(long, value_enum, default_value = "sbm")]
        model: Model,
        #[arg(long)]
        n: usize,
        /// Edge probability (Erdős–Rényi).
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, default_value_t = 2)]
        blocks: usize,
        #[arg(long, default_value_t = 0.5)]
        p_within: f64,
        #[arg(long, default_value_t = 0.05)]
        p_between: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split an edge list into train/valid/test plus test negatives.
    Split {
        #[arg(long)]
        input: PathBuf,
        /// Output prefix.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.7)]
        train: f64,
        #[arg(long, default_value_t = 0.1)]
        valid: f64,
        #[arg(long, default_value_t = 0.2)]
        test: f64,
    },
}

/// Parses `args` and runs the command. Returns the process exit status.
pub fn run<I, T>(args: I) -> Result<u8>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    if let Some(threads) = cli.threads {
        // Fails only if a pool already exists, e.g. on a second call in-process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match cli.command {
        Command::Train { cfg, out } => {
            let cfg = cfg.load()?;
            let summary = run::train(&cfg, &out)?;
            println!("{}", serde_json::to_string(&summary)?);
        }
        Command::Eval {
            run,
            embeddings,
            split,
            config,
            seed,
            out,
        } => {
            let report = match (run, embeddings, split) {
                (Some(dir), _, _) => run::eval_run_dir(&dir)?,
                (None, Some(emb), Some(split)) => {
                    let path = config.context("--config is required with --embeddings")?;
                    let mut overrides = Vec::new();
                    if let Some(seed) = seed {
                        overrides.push(format!("seed={seed}"));
                    }
                    let cfg = RunConfig::load(&path, &overrides)?;
                    run::eval(&emb, &split, &cfg)?
                }
                _ => anyhow::bail!("eval needs --run DIR or --embeddings, --split and --config"),
            };
            let json = serde_json::to_string_pretty(&report)?;
            if let Some(out) = out {
                fs::write(&out, json.clone() + "\n").with_context(|| format!("writing {}", out.display()))?;
            }
            println!("{json}");
        }
        Command::Sweep { cfg, grid, out } => {
            let base = cfg.load()?;
            let grid = match grid {
                Some(path) => read_grid(&path)?,
                None => SweepGrid::default(),
            };
            let rows = sweep::run(&base, &grid, &out)?;
            for r in rows.iter().filter(|r| r.best) {
                println!(
                    "best {}: {} valid {:.4} test {:.4}",
                    r.record.stage, r.run_id, r.record.valid_auc, r.record.test_auc
                );
            }
        }
        Command::Validate { selector, seed, out } => {
            let summary = validate::run(selector, seed, &out)?;
            for c in &summary.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return Ok(if summary.passed { 0 } else { 1 });
        }
        Command::Generate {
            model,
            n,
            p,
            blocks,
            p_within,
            p_between,
            seed,
            out,
        } => {
            let g = match model {
                Model::Sbm => generate_sbm(n, blocks, p_within, p_between, seed)?,
                Model::Er => generate_erdos_renyi(n, p, seed)?,
            };
            write_edge_list(&out, g.edges(), g.labels())?;
            println!("{} nodes, {} edges -> {}", g.node_count(), g.edge_count(), out.display());
        }
        Command::Split {
            input,
            out,
            seed,
            train,
            valid,
            test,
        } => {
            let (g, _) = load_edge_list(&input, false)?;
            let ratios = SplitRatios { train, valid, test };
            let split = split_edges(&g, ratios, subseed(seed, Stream::Split))?;
            split.write(&out, g.labels())?;
            println!(
                "train {}, valid {}, test {} (+{} negatives) -> {}.*",
                split.train.len(),
                split.valid.len(),
                split.test.len(),
                split.test_negative.len(),
                out.display()
            );
        }
    }
    Ok(0)
}

fn read_grid(path: &Path) -> Result<SweepGrid> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid grid {}", path.display()))
}
