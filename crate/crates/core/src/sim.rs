//! Reproducible Monte-Carlo harness: truth generation, patient-context
//! streams, sequential episodes with online belief updates, and
//! multi-replication aggregation of cumulative successes.
//!
//! Randomness is organized as counter-derived streams keyed on
//! `(seed, stream kind, replication)`, so replications are independent, the
//! execution order of replications is irrelevant, and two runs that share a
//! seed see identical truths, contexts, and outcome draws no matter which
//! policy is making the decisions. Outcome noise is pre-drawn per
//! `(replication, step, action)`, which makes cross-policy comparisons under
//! one seed exactly paired: only the decisions differ.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{update, BeliefState};
use crate::error::{Error, Result};
use crate::model::{assemble, Action, ActionSpace, Dataset, Outcome, PatientContext};
use crate::num::{dot, logistic, mean, quantile, sample_sd};
use crate::policy::PolicyConfig;
use crate::rng::{derive_rng, StreamKind};

/// Ground-truth weights over the encoded design vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthModel {
    pub w_star: Vec<f64>,
}

/// Where patient contexts come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ContextSpec {
    /// Independent binary features, each 1 with probability `density`.
    Synthetic { num_features: usize, density: f64 },
    /// Rows replayed from a CSV file in file order (see `Dataset`).
    Csv { path: PathBuf },
}

/// Who picks the action each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assignment {
    /// The configured policy decides from its belief state.
    Policy,
    /// A cheating baseline that reads the truth and takes the best action;
    /// an upper-bound sanity harness, not a competitor.
    Oracle,
}

/// Everything needed to reproduce one experiment bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Patients per episode (the horizon N).
    pub num_patients: usize,
    pub num_physicians: usize,
    /// Zero disables the facility block entirely.
    pub num_facilities: usize,
    pub contexts: ContextSpec,
    /// Truth weights are drawn i.i.d. Normal(0, sigma_truth^2) per coordinate.
    pub sigma_truth: f64,
    /// Load truth weights verbatim (one value per line) instead of drawing.
    pub truth_path: Option<PathBuf>,
    /// Prior precision of every belief coordinate.
    pub prior_lambda: f64,
    pub policy: PolicyConfig,
    pub replications: usize,
    pub seed: u64,
    /// Reuse one truth draw across replications instead of redrawing.
    pub shared_truth: bool,
    pub assignment: Assignment,
}

impl ExperimentConfig {
    /// A synthetic-context config with conventional defaults; adjust fields
    /// as needed.
    pub fn synthetic(
        num_patients: usize,
        num_physicians: usize,
        num_features: usize,
        density: f64,
        replications: usize,
        seed: u64,
    ) -> Self {
        Self {
            num_patients,
            num_physicians,
            num_facilities: 0,
            contexts: ContextSpec::Synthetic { num_features, density },
            sigma_truth: 1.0,
            truth_path: None,
            prior_lambda: 1.0,
            policy: PolicyConfig::new(crate::policy::PolicyKind::KnowledgeGradient),
            replications,
            seed,
            shared_truth: false,
            assignment: Assignment::Policy,
        }
    }

    pub fn action_space(&self) -> Result<ActionSpace> {
        ActionSpace::new(self.num_physicians, self.num_facilities)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_patients < 1 {
            return Err(Error::Config("num_patients must be at least 1".into()));
        }
        if self.num_physicians < 1 {
            return Err(Error::Config("num_physicians must be at least 1".into()));
        }
        if self.replications < 1 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if !(self.sigma_truth >= 0.0 && self.sigma_truth.is_finite()) {
            return Err(Error::Config(format!(
                "sigma_truth must be finite and non-negative, got {}",
                self.sigma_truth
            )));
        }
        if !(self.prior_lambda > 0.0 && self.prior_lambda.is_finite()) {
            return Err(Error::Config(format!(
                "prior_lambda must be finite and positive, got {}",
                self.prior_lambda
            )));
        }
        if !(self.policy.eta > 0.0 && self.policy.eta.is_finite()) {
            return Err(Error::Config(format!(
                "eta must be finite and positive, got {}",
                self.policy.eta
            )));
        }
        if let crate::policy::Tau::Fixed(t) = self.policy.tau {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!(
                    "tau must be finite and non-negative, got {t}"
                )));
            }
        }
        if let ContextSpec::Synthetic { density, .. } = self.contexts {
            if !(0.0..=1.0).contains(&density) {
                return Err(Error::Config(format!(
                    "density must lie in [0, 1], got {density}"
                )));
            }
        }
        Ok(())
    }
}

/// One decision and its consequence.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub n: usize,
    pub context_id: String,
    pub action: Action,
    pub outcome: Outcome,
    pub cum_success: u32,
}

/// One replication's full history.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<StepRecord>,
    pub final_successes: u32,
}

/// Box-plot statistics with 1.5 IQR whiskers.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    /// Smallest value at or above `q25 - 1.5 IQR`.
    pub whisker_low: f64,
    /// Largest value at or below `q75 + 1.5 IQR`.
    pub whisker_high: f64,
    /// Values beyond the whiskers, ascending.
    pub outliers: Vec<f64>,
}

/// Cross-replication aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Mean cumulative success rate per step across replications.
    pub mean_rate: Vec<f64>,
    /// Standard error of the per-step rate across replications.
    pub se_rate: Vec<f64>,
    /// Distribution of final success counts.
    pub final_counts: BoxStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub trajectories: Vec<Trajectory>,
    /// Final success count per replication.
    pub finals: Vec<u32>,
    pub summary: RunSummary,
}

/// Draw (or load) ground-truth weights of length `dimension`.
pub fn gen_truth<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    dimension: usize,
    rng: &mut R,
) -> Result<TruthModel> {
    if let Some(path) = &config.truth_path {
        return load_truth(path, dimension);
    }
    if config.sigma_truth == 0.0 {
        return Ok(TruthModel { w_star: vec![0.0; dimension] });
    }
    let normal = Normal::new(0.0, config.sigma_truth)
        .map_err(|e| Error::Config(format!("invalid sigma_truth: {e}")))?;
    Ok(TruthModel {
        w_star: (0..dimension).map(|_| normal.sample(rng)).collect(),
    })
}

fn load_truth(path: &Path, dimension: usize) -> Result<TruthModel> {
    let text = std::fs::read_to_string(path)?;
    let mut w_star = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let v: f64 = trimmed.parse().map_err(|_| {
            Error::Config(format!(
                "{}:{}: expected a number, got '{trimmed}'",
                path.display(),
                lineno + 1
            ))
        })?;
        w_star.push(v);
    }
    if w_star.len() != dimension {
        return Err(Error::Config(format!(
            "truth file {} has {} weights, the experiment needs {dimension}",
            path.display(),
            w_star.len()
        )));
    }
    Ok(TruthModel { w_star })
}

/// The context stream for replication `rep`: synthetic draws from the
/// context rng stream, or the CSV rows replayed in file order.
pub fn gen_contexts(config: &ExperimentConfig, rep: u64) -> Result<Vec<PatientContext>> {
    match &config.contexts {
        ContextSpec::Synthetic { num_features, density } => {
            let mut rng = derive_rng(config.seed, StreamKind::Contexts, rep);
            Ok((0..config.num_patients)
                .map(|n| {
                    let features = (0..*num_features)
                        .map(|_| if rng.random::<f64>() < *density { 1.0 } else { 0.0 })
                        .collect();
                    PatientContext::new(format!("r{rep}-p{n}"), features)
                })
                .collect())
        }
        ContextSpec::Csv { path } => {
            let dataset = Dataset::from_csv_path(path)?;
            let rows: Vec<PatientContext> = dataset.contexts().cloned().collect();
            check_context_count(rows.len(), config.num_patients)?;
            Ok(rows)
        }
    }
}

fn check_context_count(available: usize, needed: usize) -> Result<()> {
    if available < needed {
        return Err(Error::Config(format!(
            "context source provides {available} rows, the experiment needs {needed}"
        )));
    }
    Ok(())
}

/// Probability of a successful outcome under the truth for one encoded
/// (context, action) pair.
pub fn true_success_prob(truth: &TruthModel, phi: &[f64]) -> Result<f64> {
    if truth.w_star.len() != phi.len() {
        return Err(Error::Dimension(format!(
            "truth has dimension {}, instance has {}",
            truth.w_star.len(),
            phi.len()
        )));
    }
    Ok(logistic(dot(&truth.w_star, phi)))
}

/// Outcome noise for one replication: `uniforms[n][a]` decides the outcome
/// of action `a` at step `n`, whichever policy asks.
fn outcome_uniforms(config: &ExperimentConfig, rep: u64, num_actions: usize) -> Vec<Vec<f64>> {
    let mut rng = derive_rng(config.seed, StreamKind::Outcomes, rep);
    (0..config.num_patients)
        .map(|_| (0..num_actions).map(|_| rng.random::<f64>()).collect())
        .collect()
}

/// Run one replication: start from the prior, and for each patient choose an
/// action, observe the Bernoulli outcome under the truth, and absorb it with
/// exactly one belief update.
pub fn run_episode(
    config: &ExperimentConfig,
    truth: &TruthModel,
    contexts: &[PatientContext],
    rep: u64,
) -> Result<Trajectory> {
    config.validate()?;
    let space = config.action_space()?;
    check_context_count(contexts.len(), config.num_patients)?;
    let dimension = space.dimension(contexts[0].features.len());
    if truth.w_star.len() != dimension {
        return Err(Error::Dimension(format!(
            "truth has dimension {}, the design vector has {dimension}",
            truth.w_star.len()
        )));
    }

    let actions = space.actions();
    let uniforms = outcome_uniforms(config, rep, actions.len());
    let mut policy_rng = derive_rng(config.seed, StreamKind::Policy, rep);
    let mut state = BeliefState::prior(dimension, config.prior_lambda)?;
    let horizon = config.num_patients;

    let mut steps = Vec::with_capacity(horizon);
    let mut cum = 0u32;
    for (n, context) in contexts.iter().take(horizon).enumerate() {
        let action = match config.assignment {
            Assignment::Policy => {
                config
                    .policy
                    .choose(&state, context, &space, n, horizon, &mut policy_rng)?
            }
            Assignment::Oracle => oracle_choice(truth, context, &space, &actions)?,
        };
        let phi = assemble(context, action, &space)?;
        let p = true_success_prob(truth, phi.phi())?;
        let a_idx = space.action_index(action)?;
        let outcome = if uniforms[n][a_idx] < p { Outcome::Success } else { Outcome::Failure };
        state = update(&state, phi.phi(), outcome)?;
        if outcome == Outcome::Success {
            cum += 1;
        }
        steps.push(StepRecord {
            n,
            context_id: context.id.clone(),
            action,
            outcome,
            cum_success: cum,
        });
    }
    Ok(Trajectory { steps, final_successes: cum })
}

/// Best action under the truth; ties go to the lowest action index.
fn oracle_choice(
    truth: &TruthModel,
    context: &PatientContext,
    space: &ActionSpace,
    actions: &[Action],
) -> Result<Action> {
    let mut best = actions[0];
    let mut best_p = f64::NEG_INFINITY;
    for &action in actions {
        let phi = assemble(context, action, space)?;
        let p = true_success_prob(truth, phi.phi())?;
        if p > best_p {
            best_p = p;
            best = action;
        }
    }
    Ok(best)
}

/// Run all replications concurrently and aggregate. Replication `r` derives
/// its own truth/context/outcome/policy streams, so results do not depend on
/// scheduling or thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let space = config.action_space()?;

    // Contexts from a file are fixed across replications; load them once.
    let fixed_contexts: Option<Arc<Vec<PatientContext>>> = match &config.contexts {
        ContextSpec::Csv { .. } => Some(Arc::new(gen_contexts(config, 0)?)),
        ContextSpec::Synthetic { .. } => None,
    };
    let probe_dim = match &config.contexts {
        ContextSpec::Synthetic { num_features, .. } => space.dimension(*num_features),
        ContextSpec::Csv { .. } => {
            let rows = fixed_contexts.as_ref().expect("loaded above");
            check_context_count(rows.len(), config.num_patients)?;
            space.dimension(rows[0].features.len())
        }
    };

    // A file-loaded or shared truth is drawn once from stream index 0.
    let shared: Option<Arc<TruthModel>> = if config.shared_truth || config.truth_path.is_some() {
        let mut rng = derive_rng(config.seed, StreamKind::Truth, 0);
        Some(Arc::new(gen_truth(config, probe_dim, &mut rng)?))
    } else {
        None
    };

    let trajectories: Vec<Trajectory> = (0..config.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let truth = match &shared {
                Some(t) => (**t).clone(),
                None => {
                    let mut rng = derive_rng(config.seed, StreamKind::Truth, rep);
                    gen_truth(config, probe_dim, &mut rng)?
                }
            };
            let contexts = match &fixed_contexts {
                Some(rows) => (**rows).clone(),
                None => gen_contexts(config, rep)?,
            };
            run_episode(config, &truth, &contexts, rep)
        })
        .collect::<Result<Vec<_>>>()?;

    let finals: Vec<u32> = trajectories.iter().map(|t| t.final_successes).collect();
    let summary = summarize(&trajectories)?;
    Ok(ExperimentResult { trajectories, finals, summary })
}

/// Box statistics of `values` under the inclusive linear-interpolation
/// quantile rule.
pub fn box_stats(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::Domain("box statistics need at least one value".into()));
    }
    if !values.iter().all(|v| v.is_finite()) {
        return Err(Error::Domain("box statistics need finite values".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q25 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q75 = quantile(&sorted, 0.75);
    let iqr = q75 - q25;
    let lo_fence = q25 - 1.5 * iqr;
    let hi_fence = q75 + 1.5 * iqr;
    let whisker_low = *sorted.iter().find(|v| **v >= lo_fence).expect("median is in-fence");
    let whisker_high = *sorted.iter().rev().find(|v| **v <= hi_fence).expect("median is in-fence");
    let outliers = sorted
        .iter()
        .copied()
        .filter(|v| *v < lo_fence || *v > hi_fence)
        .collect();
    Ok(BoxStats { median, q25, q75, whisker_low, whisker_high, outliers })
}

/// Per-step mean/standard-error success-rate curves and the final-count box
/// statistics for a set of equal-length trajectories.
pub fn summarize(trajectories: &[Trajectory]) -> Result<RunSummary> {
    if trajectories.is_empty() {
        return Err(Error::Domain("summary needs at least one replication".into()));
    }
    let horizon = trajectories[0].steps.len();
    if trajectories.iter().any(|t| t.steps.len() != horizon) {
        return Err(Error::Dimension("trajectories have unequal lengths".into()));
    }
    let mut mean_rate = Vec::with_capacity(horizon);
    let mut se_rate = Vec::with_capacity(horizon);
    let mut rates = vec![0.0; trajectories.len()];
    for n in 0..horizon {
        for (r, t) in trajectories.iter().enumerate() {
            rates[r] = f64::from(t.steps[n].cum_success) / (n + 1) as f64;
        }
        // Reduce in sorted order so the summary is exactly invariant under
        // permutation of the replications.
        rates.sort_by(f64::total_cmp);
        mean_rate.push(mean(&rates));
        se_rate.push(sample_sd(&rates) / (rates.len() as f64).sqrt());
    }
    let finals: Vec<f64> = trajectories
        .iter()
        .map(|t| f64::from(t.final_successes))
        .collect();
    Ok(RunSummary { mean_rate, se_rate, final_counts: box_stats(&finals)? })
}

/// One row of the long-form results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub rep: u64,
    pub n: usize,
    pub action: Action,
    pub outcome: Outcome,
    pub cum_success: u32,
}

/// Write the long-form results table: `rep,n,action_p,action_f,outcome,cum_success`.
pub fn write_results_csv<W: std::io::Write>(writer: W, result: &ExperimentResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["rep", "n", "action_p", "action_f", "outcome", "cum_success"])?;
    for (rep, t) in result.trajectories.iter().enumerate() {
        for step in &t.steps {
            w.write_record([
                rep.to_string(),
                step.n.to_string(),
                step.action.physician.to_string(),
                step.action.facility.map(|f| f.to_string()).unwrap_or_default(),
                (step.outcome.sign() as i64).to_string(),
                step.cum_success.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a long-form results table. Rows must arrive grouped by replication
/// with steps numbered 0, 1, ... within each group.
pub fn read_results_csv<R: std::io::Read>(reader: R) -> Result<Vec<ResultRecord>> {
    let mut r = csv::ReaderBuilder::new().from_reader(reader);
    let headers = r.headers()?.clone();
    let expected = ["rep", "n", "action_p", "action_f", "outcome", "cum_success"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Schema(format!(
            "results header must be {}, got {}",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut records = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let field = |idx: usize| row.get(idx).unwrap_or("");
        let parse_u64 = |idx: usize, name: &str| -> Result<u64> {
            field(idx).parse().map_err(|_| {
                Error::Parse(format!("line {line}: {name} must be an integer, got '{}'", field(idx)))
            })
        };
        let rep = parse_u64(0, "rep")?;
        let n = parse_u64(1, "n")? as usize;
        let physician = parse_u64(2, "action_p")? as usize;
        let facility = if field(3).is_empty() {
            None
        } else {
            Some(parse_u64(3, "action_f")? as usize)
        };
        let outcome_raw: f64 = field(4).parse().map_err(|_| {
            Error::Parse(format!("line {line}: outcome must be +1 or -1, got '{}'", field(4)))
        })?;
        let outcome = Outcome::from_value(outcome_raw)?;
        let cum_success = parse_u64(5, "cum_success")? as u32;
        records.push(ResultRecord {
            rep,
            n,
            action: Action::new(physician, facility),
            outcome,
            cum_success,
        });
    }
    if records.is_empty() {
        return Err(Error::Schema("results file has no data rows".into()));
    }
    validate_record_order(&records)?;
    Ok(records)
}

fn validate_record_order(records: &[ResultRecord]) -> Result<()> {
    let mut expected_n = 0usize;
    let mut current_rep = records[0].rep;
    if records[0].n != 0 {
        return Err(Error::Schema("first step of a replication must be n=0".into()));
    }
    for rec in records {
        if rec.rep != current_rep {
            current_rep = rec.rep;
            expected_n = 0;
        }
        if rec.n != expected_n {
            return Err(Error::Schema(format!(
                "replication {}: expected step {expected_n}, got {}",
                rec.rep, rec.n
            )));
        }
        expected_n += 1;
    }
    Ok(())
}

/// Regroup a results table into per-replication cumulative-success columns.
pub fn records_to_trajectories(records: &[ResultRecord]) -> Result<Vec<Trajectory>> {
    let mut trajectories = Vec::new();
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut current_rep = records[0].rep;
    let mut prev_cum = 0u32;
    for rec in records {
        if rec.rep != current_rep {
            let final_successes = steps.last().map_or(0, |s| s.cum_success);
            trajectories.push(Trajectory { steps: std::mem::take(&mut steps), final_successes });
            current_rep = rec.rep;
            prev_cum = 0;
        }
        let gained = u32::from(rec.outcome == Outcome::Success);
        if rec.cum_success != prev_cum + gained {
            return Err(Error::Schema(format!(
                "replication {}, step {}: cum_success {} does not follow from the outcomes",
                rec.rep, rec.n, rec.cum_success
            )));
        }
        prev_cum = rec.cum_success;
        steps.push(StepRecord {
            n: rec.n,
            context_id: String::new(),
            action: rec.action,
            outcome: rec.outcome,
            cum_success: rec.cum_success,
        });
    }
    let final_successes = steps.last().map_or(0, |s| s.cum_success);
    trajectories.push(Trajectory { steps, final_successes });
    Ok(trajectories)
}

/// Write the summary: the per-step curve block, then a one-row final-count
/// block.
pub fn write_summary_csv<W: std::io::Write>(mut writer: W, summary: &RunSummary) -> Result<()> {
    writeln!(writer, "n,mean_rate,se_rate")?;
    for (n, (m, s)) in summary.mean_rate.iter().zip(&summary.se_rate).enumerate() {
        writeln!(writer, "{n},{m},{s}")?;
    }
    writeln!(writer, "final_median,final_q25,final_q75")?;
    writeln!(
        writer,
        "{},{},{}",
        summary.final_counts.median, summary.final_counts.q25, summary.final_counts.q75
    )?;
    Ok(())
}
