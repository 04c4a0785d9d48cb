//! Reproducible dimension experiments on homothetic self-similar sets.
//!
//! Each experiment reads a TOML [`config::Config`], runs a pipeline from
//! `fraclab-core`, and produces a [`report::Report`] whose JSON, CSV and
//! `.dat` outputs depend only on the config, the seed and the cell cap.

use std::str::FromStr;
use std::sync::Mutex;

pub mod config;
pub mod experiments;
pub mod report;
pub mod sampling;

pub use config::{Config, LoadedConfig};
pub use report::Report;

/// The experiments understood by the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Cprod2,
    Tprod,
    Tdistance,
    Cradproj,
    Ltech1,
    OverlapDemo,
    Sweep,
    Estimate,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Cprod2,
        Experiment::Tprod,
        Experiment::Tdistance,
        Experiment::Cradproj,
        Experiment::Ltech1,
        Experiment::OverlapDemo,
        Experiment::Sweep,
        Experiment::Estimate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Cprod2 => "cprod2",
            Experiment::Tprod => "tprod",
            Experiment::Tdistance => "tdistance",
            Experiment::Cradproj => "cradproj",
            Experiment::Ltech1 => "ltech1",
            Experiment::OverlapDemo => "overlap-demo",
            Experiment::Sweep => "sweep",
            Experiment::Estimate => "estimate",
        }
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
            format!("unknown experiment {s:?}; expected one of {}", names.join(", "))
        })
    }
}

/// Run-wide settings and the log of resource caps that were hit.
#[derive(Debug)]
pub struct RunContext {
    pub seed: u64,
    pub max_cells: usize,
    pub config_sha256: String,
    caps: Mutex<Vec<String>>,
}

impl RunContext {
    pub fn new(seed: u64, max_cells: usize, config_source: &str) -> Self {
        Self {
            seed,
            max_cells,
            config_sha256: report::sha256_hex(config_source.as_bytes()),
            caps: Mutex::new(Vec::new()),
        }
    }

    pub fn cap(&self, what: String) {
        self.caps.lock().expect("cap log").push(what);
    }

    pub fn take_caps(&self) -> Vec<String> {
        std::mem::take(&mut *self.caps.lock().expect("cap log"))
    }
}

/// Runs one experiment. `seed` and `max_cells` override the config.
pub fn run(experiment: Experiment, cfg: &LoadedConfig, seed: Option<u64>, max_cells: Option<usize>) -> anyhow::Result<Report> {
    let seed = seed.or(cfg.config.seed).unwrap_or(0);
    let max_cells = max_cells.unwrap_or(fraclab_core::DEFAULT_MAX_CELLS);
    let ctx = RunContext::new(seed, max_cells, &cfg.source);
    let report = match experiment {
        Experiment::Cprod2 => experiments::cprod2(cfg, &ctx)?,
        Experiment::Tprod => experiments::tprod(cfg, &ctx)?,
        Experiment::Tdistance => experiments::tdistance(cfg, &ctx)?,
        Experiment::Cradproj => experiments::cradproj(cfg, &ctx)?,
        Experiment::Ltech1 => experiments::ltech1(cfg, &ctx)?,
        Experiment::OverlapDemo => experiments::overlap_demo(cfg, &ctx)?,
        Experiment::Sweep => experiments::sweep(cfg, &ctx)?,
        Experiment::Estimate => experiments::estimate(cfg, &ctx)?,
    };
    Ok(report.finish(ctx.take_caps()))
}
