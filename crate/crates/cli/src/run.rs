//! `banditsim run`: execute one configured experiment and write the results
//! table, the summary, and the manifest.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::time::Instant;

use banditsim_core::config::experiment_from_path;
use banditsim_core::sim::{run_experiment, write_results_csv, write_summary_csv};
use banditsim_core::Result;
use clap::Args;

use crate::manifest::RunManifest;

#[derive(Args)]
pub struct RunArgs {
    /// Experiment configuration file
    #[arg(long)]
    pub config: PathBuf,
    /// Override the seed from the config file
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (created if missing)
    #[arg(long)]
    pub out: PathBuf,
}

pub fn execute(args: RunArgs) -> Result<()> {
    let started = Instant::now();
    let mut config = experiment_from_path(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    std::fs::create_dir_all(&args.out)?;

    let result = run_experiment(&config)?;

    let results_path = args.out.join("results.csv");
    write_results_csv(BufWriter::new(File::create(&results_path)?), &result)?;
    write_summary_csv(
        BufWriter::new(File::create(args.out.join("summary.csv"))?),
        &result.summary,
    )?;

    let mut manifest = RunManifest::new(
        "run",
        serde_json::to_value(&config).expect("config always serializes"),
    );
    manifest.seed = Some(config.seed);
    manifest.outputs = vec!["results.csv".into(), "summary.csv".into()];
    manifest.finish(started, &args.out.join("manifest.json"))?;

    let final_rate = result.summary.mean_rate.last().copied().unwrap_or(0.0);
    println!(
        "{}: {} replications x {} patients, policy {}, mean final success rate {final_rate:.4}",
        args.out.display(),
        config.replications,
        config.num_patients,
        config.policy.kind.name(),
    );
    Ok(())
}
