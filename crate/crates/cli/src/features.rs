//! `banditsim features`: column clustering, community detection, and
//! cross-validated L1 feature selection on flat binary matrices.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use banditsim_core::features::{
    connected_components, cosine_graph, cv_select, spectral_communities, BinaryMatrix, Partition,
};
use banditsim_core::model::RESERVED_COLUMNS;
use banditsim_core::rng::{derive_rng, StreamKind};
use banditsim_core::{Error, Result};
use clap::{Args, Subcommand};

use crate::manifest::RunManifest;

#[derive(Subcommand)]
pub enum FeaturesCmd {
    /// Group columns into connected components of the cosine graph
    Cluster(ClusterArgs),
    /// Split the cosine graph into modularity communities
    Communities(CommunitiesArgs),
    /// L1 logistic path with cross-validated penalty selection
    Lasso(LassoArgs),
}

#[derive(Args)]
pub struct ClusterArgs {
    /// Flat CSV of binary columns
    #[arg(long)]
    pub input: PathBuf,
    /// Minimum cosine similarity for an edge
    #[arg(long, default_value_t = 0.8)]
    pub threshold: f64,
    /// Output CSV (node,group)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct CommunitiesArgs {
    /// Flat CSV of binary columns
    #[arg(long)]
    pub input: PathBuf,
    /// Minimum cosine similarity for an edge
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Output CSV (node,group)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct LassoArgs {
    /// Flat CSV of binary columns plus a label column
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the label column (values 0/1 or -1/+1)
    #[arg(long)]
    pub label: String,
    /// Penalty grid size
    #[arg(long, default_value_t = 25)]
    pub nlambda: usize,
    /// Cross-validation folds
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Fold-shuffle seed
    #[arg(long)]
    pub seed: u64,
    /// Output CSV (lambda,cv_mean,cv_se,nnz,is_min,is_1se); the selected
    /// feature names go to selected.txt in the same directory
    #[arg(long)]
    pub out: PathBuf,
}

pub fn execute(cmd: FeaturesCmd) -> Result<()> {
    match cmd {
        FeaturesCmd::Cluster(args) => cluster(args),
        FeaturesCmd::Communities(args) => communities(args),
        FeaturesCmd::Lasso(args) => lasso(args),
    }
}

fn read_matrix(path: &Path, extra_exclude: &[&str]) -> Result<BinaryMatrix> {
    let file = File::open(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut exclude: Vec<&str> = RESERVED_COLUMNS.to_vec();
    exclude.extend_from_slice(extra_exclude);
    BinaryMatrix::from_csv_reader(file, &exclude)
}

fn write_partition(path: &Path, matrix: &BinaryMatrix, partition: &Partition) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "node,group")?;
    for (i, name) in matrix.names().iter().enumerate() {
        writeln!(w, "{name},{}", partition.group_of(i))?;
    }
    w.flush()?;
    Ok(())
}

/// Manifests for file-valued outputs live next to the file as
/// `<file>.manifest.json`.
fn sibling_manifest(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn cluster(args: ClusterArgs) -> Result<()> {
    let started = Instant::now();
    let matrix = read_matrix(&args.input, &[])?;
    let graph = cosine_graph(&matrix, args.threshold)?;
    let partition = connected_components(&graph);
    write_partition(&args.out, &matrix, &partition)?;

    let mut manifest = RunManifest::new(
        "features cluster",
        serde_json::json!({
            "input": args.input.display().to_string(),
            "threshold": args.threshold,
        }),
    );
    manifest.outputs = vec![args.out.display().to_string()];
    manifest.finish(started, &sibling_manifest(&args.out))?;

    println!(
        "{}: {} columns, {} edges, {} components",
        args.out.display(),
        matrix.n_cols(),
        graph.edge_count(),
        partition.num_groups()
    );
    Ok(())
}

fn communities(args: CommunitiesArgs) -> Result<()> {
    let started = Instant::now();
    let matrix = read_matrix(&args.input, &[])?;
    let graph = cosine_graph(&matrix, args.threshold)?;
    let detected = spectral_communities(&graph);
    write_partition(&args.out, &matrix, &detected.partition)?;

    let mut manifest = RunManifest::new(
        "features communities",
        serde_json::json!({
            "input": args.input.display().to_string(),
            "threshold": args.threshold,
        }),
    );
    manifest.outputs = vec![args.out.display().to_string()];
    manifest.finish(started, &sibling_manifest(&args.out))?;

    println!(
        "{}: {} communities, modularity {}",
        args.out.display(),
        detected.partition.num_groups(),
        detected.modularity
    );
    Ok(())
}

fn read_labels(path: &Path, label: &str) -> Result<Vec<f64>> {
    let file = File::open(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().from_reader(file);
    let headers = reader.headers()?.clone();
    let idx = headers
        .iter()
        .position(|h| h == label)
        .ok_or_else(|| Error::Schema(format!("no column named '{label}' in {}", path.display())))?;
    let mut y = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let raw = row.get(idx).unwrap_or("").trim();
        let value = match raw {
            "1" | "+1" => 1.0,
            "0" | "-1" => 0.0,
            other => {
                return Err(Error::Parse(format!(
                    "line {}: label '{label}' must be 0/1 or -1/+1, got '{other}'",
                    i + 2
                )))
            }
        };
        y.push(value);
    }
    Ok(y)
}

fn lasso(args: LassoArgs) -> Result<()> {
    let started = Instant::now();
    let y = read_labels(&args.input, &args.label)?;
    let matrix = read_matrix(&args.input, &[args.label.as_str()])?;
    let columns: Vec<Vec<f64>> = (0..matrix.n_cols())
        .map(|j| matrix.column(j).iter().map(|&v| f64::from(v)).collect())
        .collect();

    let mut rng = derive_rng(args.seed, StreamKind::Folds, 0);
    let selection = cv_select(&columns, &y, args.nlambda, args.folds, &mut rng)?;
    let path = &selection.path;
    let cv_mean = path.cv_mean.as_ref().expect("cv_select fills the curves");
    let cv_se = path.cv_se.as_ref().expect("cv_select fills the curves");

    let mut w = BufWriter::new(File::create(&args.out)?);
    writeln!(w, "lambda,cv_mean,cv_se,nnz,is_min,is_1se")?;
    for (i, lambda) in path.lambdas.iter().enumerate() {
        writeln!(
            w,
            "{lambda},{},{},{},{},{}",
            cv_mean[i],
            cv_se[i],
            path.support(i).len(),
            u8::from(i == selection.lambda_min_index),
            u8::from(i == selection.lambda_1se_index),
        )?;
    }
    w.flush()?;

    let selected_path = args.out.with_file_name("selected.txt");
    let names: Vec<String> = selection
        .selected
        .iter()
        .map(|&j| matrix.names()[j].clone())
        .collect();
    std::fs::write(&selected_path, names.join("\n") + "\n")?;

    let mut manifest = RunManifest::new(
        "features lasso",
        serde_json::json!({
            "input": args.input.display().to_string(),
            "label": args.label,
            "nlambda": args.nlambda,
            "folds": args.folds,
        }),
    );
    manifest.seed = Some(args.seed);
    manifest.outputs = vec![
        args.out.display().to_string(),
        selected_path.display().to_string(),
    ];
    manifest.finish(started, &sibling_manifest(&args.out))?;

    println!(
        "{}: lambda_min {}, lambda_1se {}, {} features selected",
        args.out.display(),
        selection.lambda_min,
        selection.lambda_1se,
        names.len()
    );
    Ok(())
}
