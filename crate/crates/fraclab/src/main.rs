use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fraclab::{run, Experiment, LoadedConfig};

#[derive(Debug, Parser)]
#[command(name = "fraclab", version, about = "Dimension experiments on self-similar sets")]
struct Cli {
    /// cprod2, tprod, tdistance, cradproj, ltech1, overlap-demo, sweep or estimate
    experiment: Experiment,
    /// TOML experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = "fraclab-out")]
    out: PathBuf,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on cells, tuples and pairs held at once
    #[arg(long)]
    max_cells: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cfg = LoadedConfig::from_path(&cli.config)?;
    let report = run(cli.experiment, &cfg, cli.seed, cli.max_cells)?;
    let files = report.write(&cli.out)?;
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    println!(
        "{}: estimate {} target {} {}",
        report.experiment,
        fmt(report.estimate),
        fmt(report.target),
        if report.pass { "PASS" } else { "FAIL" }
    );
    for c in report.checks.iter().filter(|c| !c.pass) {
        println!("  failed {}: {} vs {}", c.name, c.value, c.limit);
    }
    for cap in &report.caps_hit {
        println!("  cap: {cap}");
    }
    println!("  wrote {} files to {}", files.len(), cli.out.display());
    Ok(report.pass)
}
