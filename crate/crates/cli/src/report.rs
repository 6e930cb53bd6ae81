//! `banditsim report`: turn a long-form results table into plot-ready CSVs:
//! the per-step success-rate curve and the final-count box statistics.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use banditsim_core::sim::{read_results_csv, records_to_trajectories, summarize};
use banditsim_core::{Error, Result};
use clap::Args;

use crate::manifest::RunManifest;

#[derive(Args)]
pub struct ReportArgs {
    /// Results CSV produced by `run` or `compare`
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory (created if missing)
    #[arg(long)]
    pub out: PathBuf,
}

pub fn execute(args: ReportArgs) -> Result<()> {
    let started = Instant::now();
    let file = File::open(&args.input)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.input.display())))?;
    let records = read_results_csv(file)?;
    let trajectories = records_to_trajectories(&records)?;
    let summary = summarize(&trajectories)?;
    std::fs::create_dir_all(&args.out)?;

    let mut curve = BufWriter::new(File::create(args.out.join("curve.csv"))?);
    writeln!(curve, "n,mean_rate,se_rate")?;
    for (n, (m, se)) in summary.mean_rate.iter().zip(&summary.se_rate).enumerate() {
        writeln!(curve, "{n},{m},{se}")?;
    }
    curve.flush()?;

    let mut boxfile = BufWriter::new(File::create(args.out.join("box.csv"))?);
    let b = &summary.final_counts;
    writeln!(boxfile, "stat,value")?;
    writeln!(boxfile, "median,{}", b.median)?;
    writeln!(boxfile, "q25,{}", b.q25)?;
    writeln!(boxfile, "q75,{}", b.q75)?;
    writeln!(boxfile, "whisker_low,{}", b.whisker_low)?;
    writeln!(boxfile, "whisker_high,{}", b.whisker_high)?;
    for outlier in &b.outliers {
        writeln!(boxfile, "outlier,{outlier}")?;
    }
    boxfile.flush()?;

    let mut manifest = RunManifest::new(
        "report",
        serde_json::json!({ "input": args.input.display().to_string() }),
    );
    manifest.outputs = vec!["curve.csv".into(), "box.csv".into()];
    manifest.finish(started, &args.out.join("manifest.json"))?;

    println!(
        "{}: {} replications, median final count {}",
        args.out.display(),
        trajectories.len(),
        b.median
    );
    Ok(())
}
