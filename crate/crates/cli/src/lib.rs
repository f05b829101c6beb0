//! Command-line runner for the first-passage percolation laboratory.
//!
//! `fpplab run <experiment>` resolves a configuration, runs the estimator,
//! and writes CSV rows with a JSON sidecar; `fpplab plot` turns rows into
//! two-column plot data.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod plot;
pub mod runner;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{ConfigPatch, Direction, Experiment, Fixture};
use plot::XAxis;

#[derive(Debug, Parser)]
#[command(name = "fpplab", version, about = "Planar first-passage percolation experiments")]
pub struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write result rows.
    Run(RunArgs),
    /// Extract plot data from result rows.
    Plot(PlotArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    #[arg(value_enum)]
    pub experiment: Option<Experiment>,
    /// Weight law, e.g. `uniform:1:1.5`, `shiftexp:0:1`, `tri:0:0.5:1`.
    #[arg(long)]
    pub dist: Option<String>,
    /// Comma-separated sizes.
    #[arg(long, value_parser = parse_sizes)]
    pub n: Option<Sizes>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Mask factor `C` in `K = Λ(⌈C n⌉)`.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub scale: Option<u32>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key = value` file or a JSON sidecar from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub max_seconds: Option<u64>,
    /// Gaussian shift constant `c` of the weight transform.
    #[arg(long)]
    pub coupling: Option<f64>,
    /// Required good-edge density `a` per crossing.
    #[arg(long)]
    pub a: Option<f64>,
    /// Confinement detection factor `C'`.
    #[arg(long)]
    pub detect_factor: Option<f64>,
    /// `ν(B)` for the good-ratio experiment.
    #[arg(long)]
    pub good_measure: Option<f64>,
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    #[arg(long, value_enum)]
    pub direction: Option<Direction>,
}

/// A comma-separated list of sizes given as one flag value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sizes(pub Vec<u32>);

fn parse_sizes(s: &str) -> Result<Sizes, String> {
    config::parse_list(s).map(Sizes).map_err(|e| e.to_string())
}

impl RunArgs {
    pub fn patch(&self) -> ConfigPatch {
        ConfigPatch {
            experiment: self.experiment,
            dist: self.dist.clone(),
            n_values: self.n.as_ref().map(|s| s.0.clone()),
            m: self.m,
            kappa: self.kappa,
            delta: self.delta,
            mask_factor: self.c,
            scale: self.scale,
            replicates: self.reps,
            master_seed: self.seed,
            out: self.out.clone(),
            max_seconds: self.max_seconds,
            coupling: self.coupling,
            crossing_ratio: self.a,
            detect_factor: self.detect_factor,
            good_measure: self.good_measure,
            fixture: self.fixture,
            scale_rule: None,
            direction: self.direction,
        }
    }
}

/// Defaults, then the config file, then flags.
pub fn parse_config(args: &RunArgs) -> Result<config::ExperimentConfig, config::ConfigError> {
    let base = match &args.config {
        Some(path) => ConfigPatch::from_file(path)?,
        None => ConfigPatch::default(),
    };
    base.merged(&args.patch()).resolve()
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub x: XAxis,
    #[arg(long)]
    pub y: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the κ recorded in the input's sidecar (default 0.1).
    #[arg(long)]
    pub kappa: Option<f64>,
}
