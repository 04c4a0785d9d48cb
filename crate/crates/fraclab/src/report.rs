//! Experiment reports and their files: JSON for the report itself, CSV for
//! tables and gnuplot-style `.dat` files for log-log plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use fraclab_core::dimension::BoxCountResult;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtLeast,
    AtMost,
    IsTrue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            comparison: Comparison::AtLeast,
            pass: value >= limit,
        }
    }

    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            comparison: Comparison::AtMost,
            pass: value <= limit,
        }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            limit: 1.0,
            comparison: Comparison::IsTrue,
            pass: ok,
        }
    }
}

/// A CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self {
            name: name.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.rows.push(row.into_iter().map(|c| c.to_string()).collect());
    }

    /// One row per scale plus a summary row carrying slope and r².
    pub fn box_counts(name: &str, r: &BoxCountResult) -> Self {
        let mut t = Table::new(name, &["delta", "count", "log_inv_delta", "log_count", "slope", "r_squared"]);
        for (d, n) in r.scales.iter().zip(&r.counts) {
            t.push([
                d.to_string(),
                n.to_string(),
                (-d.ln()).to_string(),
                (*n as f64).ln().to_string(),
                String::new(),
                String::new(),
            ]);
        }
        t.push([
            "summary".to_string(),
            String::new(),
            String::new(),
            String::new(),
            r.slope.to_string(),
            r.r_squared.to_string(),
        ]);
        t
    }
}

/// `log(1/δ) log N` pairs for plotting.
pub fn loglog_dat(r: &BoxCountResult) -> String {
    let mut s = String::from("# log(1/delta) log(N)\n");
    for (d, n) in r.scales.iter().zip(&r.counts) {
        let _ = writeln!(s, "{} {}", -d.ln(), (*n as f64).ln());
    }
    let _ = writeln!(s, "# slope {} intercept {} r2 {}", r.slope, r.intercept, r.r_squared);
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub max_cells: usize,
    /// Every resource cap that truncated or thinned a computation.
    pub caps_hit: Vec<String>,
    /// The exact statement being tested.
    pub claim: String,
    /// False when the input lies outside the statement's hypothesis.
    pub hypothesis_holds: bool,
    pub target: Option<f64>,
    pub estimate: Option<f64>,
    pub abs_error: Option<f64>,
    pub reliable: Option<bool>,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub notes: Vec<String>,
    pub details: serde_json::Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub plots: Vec<(String, String)>,
}

impl Report {
    pub fn new(experiment: &str, claim: &str, ctx: &crate::RunContext) -> Self {
        Self {
            experiment: experiment.into(),
            version: VERSION.into(),
            config_sha256: ctx.config_sha256.clone(),
            seed: ctx.seed,
            max_cells: ctx.max_cells,
            caps_hit: Vec::new(),
            claim: claim.into(),
            hypothesis_holds: true,
            target: None,
            estimate: None,
            abs_error: None,
            reliable: None,
            checks: Vec::new(),
            pass: false,
            notes: Vec::new(),
            details: serde_json::Value::Null,
            tables: Vec::new(),
            plots: Vec::new(),
        }
    }

    /// Records an estimate against its target along with the box-count table
    /// and plot data.
    pub fn set_estimate(&mut self, target: f64, result: &BoxCountResult) {
        self.target = Some(target);
        self.estimate = Some(result.slope);
        self.abs_error = Some((result.slope - target).abs());
        self.reliable = Some(result.is_reliable());
        self.tables.push(Table::box_counts("boxcount", result));
        self.plots.push(("loglog".into(), loglog_dat(result)));
    }

    /// Applies the declared thresholds to the recorded estimate.
    pub fn apply_thresholds(&mut self, t: &crate::config::Thresholds) {
        if let Some(est) = self.estimate {
            if let Some(min) = t.min_estimate {
                self.checks.push(Check::at_least("estimate", est, min));
            }
            if let (Some(tol), Some(err)) = (t.max_abs_error, self.abs_error) {
                self.checks.push(Check::at_most("abs_error", err, tol));
            }
        }
        if let Some(min) = t.min_r_squared {
            if let Some(r2) = self.tables.iter().find(|t| t.name == "boxcount").and_then(summary_r2) {
                self.checks.push(Check::at_least("r_squared", r2, min));
            }
        }
    }

    pub fn finish(mut self, caps: Vec<String>) -> Self {
        self.caps_hit = caps;
        self.pass = self.checks.iter().all(|c| c.pass);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Writes `<experiment>.json`, `<experiment>_<table>.csv` and
    /// `<experiment>_<plot>.dat` into `dir`; returns the paths written.
    pub fn write(&self, dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let stem = self.experiment.replace('-', "_");
        let mut written = Vec::new();
        let json = dir.join(format!("{stem}.json"));
        fs::write(&json, self.to_json())?;
        written.push(json);
        for t in &self.tables {
            let path = dir.join(format!("{stem}_{}.csv", t.name));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(&t.headers)?;
            for row in &t.rows {
                w.write_record(row)?;
            }
            w.flush()?;
            written.push(path);
        }
        for (name, body) in &self.plots {
            let path = dir.join(format!("{stem}_{name}.dat"));
            fs::write(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn summary_r2(t: &Table) -> Option<f64> {
    t.rows.last().and_then(|r| r.get(5)).and_then(|v| v.parse().ok())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}
