//! `banditsim compare`: run several policies under matched seeds so their
//! truths, contexts, and outcome draws coincide replication by replication,
//! then tabulate paired differences.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use banditsim_core::config::experiment_from_path;
use banditsim_core::num::{mean, sample_sd};
use banditsim_core::policy::PolicyKind;
use banditsim_core::sim::{run_experiment, write_results_csv, ExperimentResult};
use banditsim_core::{Error, Result};
use clap::Args;

use crate::manifest::RunManifest;

#[derive(Args)]
pub struct CompareArgs {
    /// Experiment configuration file (its [policy] kind is ignored)
    #[arg(long)]
    pub config: PathBuf,
    /// Comma-separated policies, e.g. kg,thompson,exploit,explore
    #[arg(long)]
    pub policies: String,
    /// Override the seed from the config file
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (created if missing)
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_policies(raw: &str) -> Result<Vec<PolicyKind>> {
    let mut kinds = Vec::new();
    for part in raw.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let kind = PolicyKind::parse(part)
            .map_err(|_| Error::Config(format!("--policies: unknown policy '{part}'")))?;
        if kinds.contains(&kind) {
            return Err(Error::Config(format!("--policies lists '{part}' twice")));
        }
        kinds.push(kind);
    }
    if kinds.len() < 2 {
        return Err(Error::Config("--policies needs at least two policies".into()));
    }
    Ok(kinds)
}

pub fn execute(args: CompareArgs) -> Result<()> {
    let started = Instant::now();
    let mut base = experiment_from_path(&args.config)?;
    if let Some(seed) = args.seed {
        base.seed = seed;
    }
    let kinds = parse_policies(&args.policies)?;
    std::fs::create_dir_all(&args.out)?;

    let mut runs: Vec<(&'static str, ExperimentResult)> = Vec::with_capacity(kinds.len());
    for kind in &kinds {
        let mut config = base.clone();
        config.policy.kind = *kind;
        runs.push((kind.name(), run_experiment(&config)?));
    }

    let mut outputs = Vec::new();
    for (name, result) in &runs {
        let file = format!("results_{name}.csv");
        write_results_csv(BufWriter::new(File::create(args.out.join(&file))?), result)?;
        outputs.push(file);
    }

    let mut summary = BufWriter::new(File::create(args.out.join("summary_by_policy.csv"))?);
    writeln!(summary, "policy,n,mean_rate,se_rate")?;
    for (name, result) in &runs {
        let s = &result.summary;
        for (n, (m, se)) in s.mean_rate.iter().zip(&s.se_rate).enumerate() {
            writeln!(summary, "{name},{n},{m},{se}")?;
        }
    }
    summary.flush()?;
    outputs.push("summary_by_policy.csv".into());

    // Paired differences of final success rates: replication r of every
    // policy shares one truth, context stream, and outcome noise.
    let horizon = base.num_patients as f64;
    let mut diffs_csv = BufWriter::new(File::create(args.out.join("differences.csv"))?);
    writeln!(diffs_csv, "policy_a,policy_b,mean_diff,se_diff")?;
    for i in 0..runs.len() {
        for j in (i + 1)..runs.len() {
            let (name_a, a) = &runs[i];
            let (name_b, b) = &runs[j];
            let diffs: Vec<f64> = a
                .finals
                .iter()
                .zip(&b.finals)
                .map(|(x, y)| (f64::from(*x) - f64::from(*y)) / horizon)
                .collect();
            let se = sample_sd(&diffs) / (diffs.len() as f64).sqrt();
            writeln!(diffs_csv, "{name_a},{name_b},{},{se}", mean(&diffs))?;
        }
    }
    diffs_csv.flush()?;
    outputs.push("differences.csv".into());

    let mut manifest = RunManifest::new(
        "compare",
        serde_json::to_value(&base).expect("config always serializes"),
    );
    manifest.seed = Some(base.seed);
    manifest.policies = Some(kinds.iter().map(|k| k.name().to_string()).collect());
    manifest.outputs = outputs;
    manifest.finish(started, &args.out.join("manifest.json"))?;

    for (name, result) in &runs {
        let rate = result.summary.mean_rate.last().copied().unwrap_or(0.0);
        println!("{name}: mean final success rate {rate:.4}");
    }
    Ok(())
}
