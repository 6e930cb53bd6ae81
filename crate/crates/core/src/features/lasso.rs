//! L1-penalized logistic regression along a regularization path, with
//! stratified cross-validated penalty selection.
//!
//! The solver is iteratively reweighted least squares with coordinate-wise
//! soft-threshold updates and warm starts along a decreasing penalty grid.
//! The intercept is never penalized. The fitted objective is
//! `mean negative log-likelihood + lambda * ||w||_1`, which puts the largest
//! useful penalty at `lambda_max = max_j |x_j . (y - mean(y))| / n`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::{logistic, mean, sample_sd};

/// Clamp on fitted probabilities inside the reweighting step.
const PROB_FLOOR: f64 = 1e-5;
/// Floor on working weights `p (1 - p)`.
const WEIGHT_FLOOR: f64 = 1e-5;
/// Clamp on probabilities inside deviance evaluation.
const DEVIANCE_FLOOR: f64 = 1e-10;
/// Outer (reweighting) convergence: max coefficient change.
const OUTER_TOL: f64 = 1e-7;
/// Inner (coordinate descent) convergence on the quadratic model.
const INNER_TOL: f64 = 1e-9;
const MAX_IRLS: usize = 100;
const MAX_CD: usize = 1_000;

/// Coefficients and deviances along a decreasing penalty grid, plus
/// cross-validation curves when produced by [`cv_select`].
#[derive(Debug, Clone, PartialEq)]
pub struct LassoPath {
    /// Strictly decreasing penalty grid.
    pub lambdas: Vec<f64>,
    /// Unpenalized intercept per grid point.
    pub intercepts: Vec<f64>,
    /// Penalized coefficients per grid point.
    pub coefficients: Vec<Vec<f64>>,
    /// Mean binomial deviance on the training data per grid point.
    pub train_deviance: Vec<f64>,
    /// Mean held-out deviance per grid point (after cross-validation).
    pub cv_mean: Option<Vec<f64>>,
    /// Standard error of the fold deviances per grid point.
    pub cv_se: Option<Vec<f64>>,
    /// Set when the response was single-class (or carried no signal) and the
    /// path collapsed to intercept-only fits on a placeholder grid.
    pub degenerate: bool,
}

impl LassoPath {
    /// Indices of nonzero coefficients at grid point `index`.
    pub fn support(&self, index: usize) -> Vec<usize> {
        self.coefficients[index]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Outcome of cross-validated penalty selection.
#[derive(Debug, Clone, PartialEq)]
pub struct CvSelection {
    /// Full-data path with the cross-validation curves filled in.
    pub path: LassoPath,
    pub lambda_min: f64,
    pub lambda_min_index: usize,
    /// Largest penalty whose deviance is within one standard error of the
    /// minimum; never smaller than `lambda_min`.
    pub lambda_1se: f64,
    pub lambda_1se_index: usize,
    /// Support of the full-data fit at `lambda_1se`.
    pub selected: Vec<usize>,
}

/// Conventional smallest-penalty fraction: wider paths when rows outnumber
/// columns, shorter ones in the high-dimensional regime.
pub fn default_lambda_min_ratio(n_rows: usize, n_cols: usize) -> f64 {
    if n_rows < n_cols {
        1e-2
    } else {
        1e-4
    }
}

fn validate_inputs(columns: &[Vec<f64>], y: &[f64]) -> Result<()> {
    if columns.is_empty() {
        return Err(Error::Domain("at least one feature column is required".into()));
    }
    let n = y.len();
    if n == 0 {
        return Err(Error::Domain("at least one row is required".into()));
    }
    for (j, col) in columns.iter().enumerate() {
        if col.len() != n {
            return Err(Error::Dimension(format!(
                "column {j} has {} rows, response has {n}",
                col.len()
            )));
        }
        if !col.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!("column {j} contains a non-finite value")));
        }
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        if lo == hi && lo != 0.0 {
            return Err(Error::Domain(format!(
                "column {j} is constant and duplicates the intercept"
            )));
        }
    }
    if !y.iter().all(|&v| v == 0.0 || v == 1.0) {
        return Err(Error::Domain("responses must be 0 or 1".into()));
    }
    Ok(())
}

/// Largest penalty with an all-zero solution, from the zero-coefficient
/// stationarity condition.
fn lambda_max(columns: &[Vec<f64>], y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let ybar = mean(y);
    columns
        .iter()
        .map(|col| {
            col.iter()
                .zip(y)
                .map(|(x, yi)| x * (yi - ybar))
                .sum::<f64>()
                .abs()
                / n
        })
        .fold(0.0, f64::max)
}

fn log_spaced(top: f64, count: usize, ratio: f64) -> Vec<f64> {
    if count == 1 {
        return vec![top];
    }
    (0..count)
        .map(|k| top * ratio.powf(k as f64 / (count - 1) as f64))
        .collect()
}

fn mean_deviance(columns: &[Vec<f64>], y: &[f64], w0: f64, w: &[f64]) -> f64 {
    let n = y.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut eta = w0;
        for (j, col) in columns.iter().enumerate() {
            if w[j] != 0.0 {
                eta += w[j] * col[i];
            }
        }
        let p = logistic(eta).clamp(DEVIANCE_FLOOR, 1.0 - DEVIANCE_FLOOR);
        acc -= 2.0 * if y[i] == 1.0 { p.ln() } else { (1.0 - p).ln() };
    }
    acc / n as f64
}

/// Warm-started fit at every grid point. Assumes validated inputs.
fn fit_grid(
    columns: &[Vec<f64>],
    y: &[f64],
    lambdas: &[f64],
) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) {
    let n = y.len();
    let p = columns.len();
    let nf = n as f64;
    let ybar = mean(y).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    let null_intercept = (ybar / (1.0 - ybar)).ln();
    let lam_top = lambda_max(columns, y);
    let mut w0 = null_intercept;
    let mut w = vec![0.0; p];

    let mut intercepts = Vec::with_capacity(lambdas.len());
    let mut coefficients = Vec::with_capacity(lambdas.len());
    let mut deviances = Vec::with_capacity(lambdas.len());

    let mut eta = vec![0.0; n];
    let mut omega = vec![0.0; n];
    let mut resid = vec![0.0; n];
    let mut denom = vec![0.0; p];

    for &lambda in lambdas {
        // At or above lambda_max the null model is the exact optimum
        // (zero-coefficient stationarity holds), so skip the solver rather
        // than let round-off smear the zeros.
        if lambda >= lam_top && lam_top > 0.0 {
            w0 = null_intercept;
            w.iter_mut().for_each(|c| *c = 0.0);
            intercepts.push(w0);
            coefficients.push(w.clone());
            deviances.push(mean_deviance(columns, y, w0, &w));
            continue;
        }
        for _ in 0..MAX_IRLS {
            let prev0 = w0;
            let prev = w.clone();

            // Quadratic model at the current iterate.
            for i in 0..n {
                eta[i] = w0;
            }
            for (j, col) in columns.iter().enumerate() {
                if w[j] != 0.0 {
                    for i in 0..n {
                        eta[i] += w[j] * col[i];
                    }
                }
            }
            let mut denom0 = 0.0;
            for i in 0..n {
                let pi = logistic(eta[i]).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
                let om = (pi * (1.0 - pi)).max(WEIGHT_FLOOR);
                omega[i] = om;
                // residual of the working response z against eta
                resid[i] = (y[i] - pi) / om;
                denom0 += om;
            }
            denom0 /= nf;
            for (j, col) in columns.iter().enumerate() {
                denom[j] = col.iter().zip(&omega).map(|(x, om)| om * x * x).sum::<f64>() / nf;
            }

            // Coordinate descent on the penalized weighted least squares.
            for _ in 0..MAX_CD {
                let mut dmax = 0.0f64;
                let g0: f64 = omega.iter().zip(&resid).map(|(om, r)| om * r).sum::<f64>() / nf;
                let d0 = g0 / denom0;
                if d0 != 0.0 {
                    w0 += d0;
                    for r in resid.iter_mut() {
                        *r -= d0;
                    }
                    dmax = dmax.max(d0.abs());
                }
                for (j, col) in columns.iter().enumerate() {
                    if denom[j] == 0.0 {
                        continue; // all-zero column: coefficient stays 0
                    }
                    let gj: f64 = col
                        .iter()
                        .zip(&omega)
                        .zip(&resid)
                        .map(|((x, om), r)| x * om * r)
                        .sum::<f64>()
                        / nf;
                    let num = gj + denom[j] * w[j];
                    let new = soft_threshold(num, lambda) / denom[j];
                    let delta = new - w[j];
                    if delta != 0.0 {
                        w[j] = new;
                        for (r, x) in resid.iter_mut().zip(col) {
                            *r -= delta * x;
                        }
                        dmax = dmax.max(delta.abs());
                    }
                }
                if dmax < INNER_TOL {
                    break;
                }
            }

            let change = w
                .iter()
                .zip(&prev)
                .map(|(a, b)| (a - b).abs())
                .fold((w0 - prev0).abs(), f64::max);
            if change < OUTER_TOL {
                break;
            }
        }
        intercepts.push(w0);
        coefficients.push(w.clone());
        deviances.push(mean_deviance(columns, y, w0, &w));
    }
    (intercepts, coefficients, deviances)
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn degenerate_path(columns: &[Vec<f64>], y: &[f64], n_lambda: usize, ratio: f64) -> LassoPath {
    let ybar = mean(y).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    let w0 = (ybar / (1.0 - ybar)).ln();
    let zeros = vec![0.0; columns.len()];
    let dev = mean_deviance(columns, y, w0, &zeros);
    let lambdas = log_spaced(1.0, n_lambda, ratio);
    LassoPath {
        intercepts: vec![w0; lambdas.len()],
        coefficients: vec![zeros; lambdas.len()],
        train_deviance: vec![dev; lambdas.len()],
        lambdas,
        cv_mean: None,
        cv_se: None,
        degenerate: true,
    }
}

/// Fit the path on a log-spaced grid from `lambda_max` down to
/// `lambda_max * lambda_min_ratio`.
///
/// A single-class response cannot anchor the grid; it yields an
/// intercept-only path flagged `degenerate` on a placeholder grid.
pub fn lasso_path(
    columns: &[Vec<f64>],
    y: &[f64],
    n_lambda: usize,
    lambda_min_ratio: f64,
) -> Result<LassoPath> {
    validate_inputs(columns, y)?;
    if n_lambda == 0 {
        return Err(Error::Domain("the grid needs at least one penalty value".into()));
    }
    if !(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0) {
        return Err(Error::Domain(format!(
            "lambda_min_ratio must lie in (0, 1), got {lambda_min_ratio}"
        )));
    }
    let top = lambda_max(columns, y);
    if top <= 0.0 {
        return Ok(degenerate_path(columns, y, n_lambda, lambda_min_ratio));
    }
    let lambdas = log_spaced(top, n_lambda, lambda_min_ratio);
    let (intercepts, coefficients, train_deviance) = fit_grid(columns, y, &lambdas);
    Ok(LassoPath {
        lambdas,
        intercepts,
        coefficients,
        train_deviance,
        cv_mean: None,
        cv_se: None,
        degenerate: false,
    })
}

/// Fit the path on a caller-supplied strictly decreasing grid.
pub fn lasso_path_at(columns: &[Vec<f64>], y: &[f64], lambdas: &[f64]) -> Result<LassoPath> {
    validate_inputs(columns, y)?;
    if lambdas.is_empty() {
        return Err(Error::Domain("the grid needs at least one penalty value".into()));
    }
    if !lambdas.iter().all(|l| l.is_finite() && *l >= 0.0) {
        return Err(Error::Domain("penalties must be finite and non-negative".into()));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("the penalty grid must be strictly decreasing".into()));
    }
    if lambda_max(columns, y) <= 0.0 {
        let mut path = degenerate_path(columns, y, 1, 0.5);
        path.lambdas = lambdas.to_vec();
        path.intercepts = vec![path.intercepts[0]; lambdas.len()];
        path.coefficients = vec![path.coefficients[0].clone(); lambdas.len()];
        path.train_deviance = vec![path.train_deviance[0]; lambdas.len()];
        return Ok(path);
    }
    let (intercepts, coefficients, train_deviance) = fit_grid(columns, y, lambdas);
    Ok(LassoPath {
        lambdas: lambdas.to_vec(),
        intercepts,
        coefficients,
        train_deviance,
        cv_mean: None,
        cv_se: None,
        degenerate: false,
    })
}

/// Shuffle each outcome class and deal the samples round-robin, so the class
/// mix of every fold matches the data as closely as possible. Errors when a
/// fold would inevitably swallow an entire class (its training complement
/// would see a single class).
pub fn stratified_folds<R: Rng + ?Sized>(
    y: &[f64],
    k_folds: usize,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    use rand::seq::SliceRandom;
    if k_folds < 2 {
        return Err(Error::Domain("cross-validation needs at least 2 folds".into()));
    }
    if k_folds > y.len() {
        return Err(Error::Domain(format!(
            "{k_folds} folds for {} rows",
            y.len()
        )));
    }
    let mut class0: Vec<usize> = Vec::new();
    let mut class1: Vec<usize> = Vec::new();
    for (i, &v) in y.iter().enumerate() {
        match v {
            v if v == 0.0 => class0.push(i),
            v if v == 1.0 => class1.push(i),
            other => {
                return Err(Error::Domain(format!("responses must be 0 or 1, got {other}")))
            }
        }
    }
    if class0.is_empty() || class1.is_empty() {
        return Err(Error::Domain("both outcome classes are required".into()));
    }
    class0.shuffle(rng);
    class1.shuffle(rng);

    let mut folds = vec![Vec::new(); k_folds];
    let mut counter = 0usize;
    for idx in class0.iter().chain(&class1) {
        folds[counter % k_folds].push(*idx);
        counter += 1;
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    for fold in &folds {
        let in_fold0 = fold.iter().filter(|i| y[**i] == 0.0).count();
        let in_fold1 = fold.len() - in_fold0;
        if in_fold0 == class0.len() || in_fold1 == class1.len() {
            return Err(Error::Domain(
                "stratification impossible: a fold would hold every sample of one class".into(),
            ));
        }
    }
    Ok(folds)
}

/// Cross-validate the path and select penalties by minimum held-out deviance
/// and by the one-standard-error rule.
pub fn cv_select<R: Rng + ?Sized>(
    columns: &[Vec<f64>],
    y: &[f64],
    n_lambda: usize,
    k_folds: usize,
    rng: &mut R,
) -> Result<CvSelection> {
    validate_inputs(columns, y)?;
    let folds = stratified_folds(y, k_folds, rng)?;
    let ratio = default_lambda_min_ratio(y.len(), columns.len());
    let mut full = lasso_path(columns, y, n_lambda, ratio)?;

    let fold_deviances: Vec<Vec<f64>> = folds
        .par_iter()
        .map(|fold| held_out_deviances(columns, y, fold, &full.lambdas))
        .collect();

    let k = k_folds as f64;
    let n_grid = full.lambdas.len();
    let mut cv_mean = Vec::with_capacity(n_grid);
    let mut cv_se = Vec::with_capacity(n_grid);
    for l in 0..n_grid {
        let devs: Vec<f64> = fold_deviances.iter().map(|f| f[l]).collect();
        cv_mean.push(mean(&devs));
        cv_se.push(sample_sd(&devs) / k.sqrt());
    }

    let lambda_min_index = cv_mean
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.total_cmp(b))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    let threshold = cv_mean[lambda_min_index] + cv_se[lambda_min_index];
    let lambda_1se_index = (0..n_grid)
        .find(|&i| cv_mean[i] <= threshold)
        .unwrap_or(lambda_min_index);

    let selection = CvSelection {
        lambda_min: full.lambdas[lambda_min_index],
        lambda_min_index,
        lambda_1se: full.lambdas[lambda_1se_index],
        lambda_1se_index,
        selected: full.support(lambda_1se_index),
        path: {
            full.cv_mean = Some(cv_mean);
            full.cv_se = Some(cv_se);
            full
        },
    };
    Ok(selection)
}

/// Fit on the complement of `fold`, evaluate mean deviance on `fold`.
fn held_out_deviances(
    columns: &[Vec<f64>],
    y: &[f64],
    fold: &[usize],
    lambdas: &[f64],
) -> Vec<f64> {
    let in_fold: std::collections::HashSet<usize> = fold.iter().copied().collect();
    let train_rows: Vec<usize> = (0..y.len()).filter(|i| !in_fold.contains(i)).collect();
    let train_cols: Vec<Vec<f64>> = columns
        .iter()
        .map(|col| train_rows.iter().map(|&i| col[i]).collect())
        .collect();
    let train_y: Vec<f64> = train_rows.iter().map(|&i| y[i]).collect();
    let (intercepts, coefficients, _) = fit_grid(&train_cols, &train_y, lambdas);

    lambdas
        .iter()
        .enumerate()
        .map(|(l, _)| {
            let mut acc = 0.0;
            for &i in fold {
                let mut eta = intercepts[l];
                for (j, col) in columns.iter().enumerate() {
                    if coefficients[l][j] != 0.0 {
                        eta += coefficients[l][j] * col[i];
                    }
                }
                let p = logistic(eta).clamp(DEVIANCE_FLOOR, 1.0 - DEVIANCE_FLOOR);
                acc -= 2.0 * if y[i] == 1.0 { p.ln() } else { (1.0 - p).ln() };
            }
            acc / fold.len() as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_rng, StreamKind};
    use rand::Rng;

    /// Two informative columns and noise; labels follow column 0.
    fn toy_data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = derive_rng(seed, StreamKind::Policy, 50);
        let mut cols = vec![Vec::with_capacity(n); 3];
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let signal: f64 = if rng.random_range(0.0..1.0) < 0.5 { 1.0 } else { 0.0 };
            let label = if rng.random_range(0.0..1.0) < 0.85 {
                signal
            } else {
                1.0 - signal
            };
            cols[0].push(signal);
            cols[1].push(rng.random_range(0.0..1.0f64).round());
            cols[2].push(rng.random_range(0.0..1.0f64).round());
            y.push(label);
        }
        (cols, y)
    }

    #[test]
    fn grid_starts_at_lambda_max_and_zeroes_everything_there() {
        let (cols, y) = toy_data(120, 1);
        let path = lasso_path(&cols, &y, 25, 1e-3).unwrap();
        let oracle_max = banditsim_testkit::lasso_lambda_max(&cols, &y);
        assert!((path.lambdas[0] - oracle_max).abs() < 1e-12);
        assert!(path.coefficients[0].iter().all(|&c| c == 0.0));
        assert_eq!(path.lambdas.len(), 25);
        assert!(path.lambdas.windows(2).all(|w| w[1] < w[0]));
        assert!((path.lambdas[24] - oracle_max * 1e-3).abs() < 1e-12);
    }

    #[test]
    fn above_lambda_max_stays_exactly_zero() {
        let (cols, y) = toy_data(90, 2);
        let top = banditsim_testkit::lasso_lambda_max(&cols, &y);
        let path = lasso_path_at(&cols, &y, &[top * 1.01]).unwrap();
        assert!(path.coefficients[0].iter().all(|&c| c == 0.0));
        // subgradient certificate at w = 0
        let ybar = mean(&y);
        for col in &cols {
            let corr: f64 =
                col.iter().zip(&y).map(|(x, yi)| x * (yi - ybar)).sum::<f64>() / y.len() as f64;
            assert!(corr.abs() <= top * 1.01 + 1e-12);
        }
    }

    #[test]
    fn informative_column_enters_first() {
        let (cols, y) = toy_data(200, 3);
        let path = lasso_path(&cols, &y, 40, 1e-3).unwrap();
        let entry = |j: usize| {
            path.coefficients
                .iter()
                .position(|c| c[j] != 0.0)
                .unwrap_or(usize::MAX)
        };
        assert!(
            entry(0) < entry(1) && entry(0) < entry(2),
            "entries: {:?}",
            (entry(0), entry(1), entry(2))
        );
    }

    #[test]
    fn solution_matches_proximal_gradient_oracle() {
        let (cols, y) = toy_data(80, 4);
        let top = banditsim_testkit::lasso_lambda_max(&cols, &y);
        let lambda = top * 0.05;
        let path = lasso_path_at(&cols, &y, &[lambda]).unwrap();
        let (o_w0, o_w) = banditsim_testkit::ista_lasso_logistic(&cols, &y, lambda, 400_000);
        assert!(
            (path.intercepts[0] - o_w0).abs() < 1e-3,
            "intercept {} vs oracle {}",
            path.intercepts[0],
            o_w0
        );
        for j in 0..cols.len() {
            assert!(
                (path.coefficients[0][j] - o_w[j]).abs() < 1e-3,
                "coef {j}: {} vs oracle {}",
                path.coefficients[0][j],
                o_w[j]
            );
        }
    }

    #[test]
    fn training_deviance_never_increases_along_the_path() {
        let (cols, y) = toy_data(150, 5);
        let path = lasso_path(&cols, &y, 30, 1e-3).unwrap();
        for pair in path.train_deviance.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-6,
                "deviance rose: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn single_class_response_degenerates_cleanly() {
        let cols = vec![vec![1.0, 0.0, 1.0, 0.0]];
        let y = vec![1.0, 1.0, 1.0, 1.0];
        let path = lasso_path(&cols, &y, 5, 1e-2).unwrap();
        assert!(path.degenerate);
        assert!(path.coefficients.iter().all(|c| c.iter().all(|&v| v == 0.0)));
        assert!(path.intercepts.iter().all(|&v| v > 0.0));
        assert_eq!(path.lambdas.len(), 5);
    }

    #[test]
    fn constant_nonzero_column_is_rejected_but_zero_column_is_fine() {
        let y = vec![0.0, 1.0, 0.0, 1.0];
        let constant = vec![vec![2.0; 4], vec![0.0, 1.0, 0.0, 1.0]];
        assert!(lasso_path(&constant, &y, 5, 1e-2).is_err());
        let with_zero = vec![vec![0.0; 4], vec![0.0, 1.0, 0.0, 1.0]];
        let path = lasso_path(&with_zero, &y, 5, 1e-2).unwrap();
        assert!(path.coefficients.iter().all(|c| c[0] == 0.0));
    }

    #[test]
    fn stratified_folds_partition_and_mix_classes() {
        let y: Vec<f64> = (0..23).map(|i| if i % 3 == 0 { 1.0 } else { 0.0 }).collect();
        let mut rng = derive_rng(8, StreamKind::Policy, 0);
        let folds = stratified_folds(&y, 5, &mut rng).unwrap();
        let mut seen = vec![false; y.len()];
        for fold in &folds {
            assert!(!fold.is_empty());
            for &i in fold {
                assert!(!seen[i]);
                seen[i] = true;
            }
            let ones = fold.iter().filter(|&&i| y[i] == 1.0).count();
            assert!(ones < 8, "fold holds the whole positive class");
        }
        assert!(seen.iter().all(|&s| s));

        let mut r1 = derive_rng(8, StreamKind::Policy, 1);
        let mut r2 = derive_rng(8, StreamKind::Policy, 1);
        assert_eq!(
            stratified_folds(&y, 5, &mut r1).unwrap(),
            stratified_folds(&y, 5, &mut r2).unwrap()
        );
    }

    #[test]
    fn folds_reject_impossible_stratification() {
        let mut rng = derive_rng(9, StreamKind::Policy, 0);
        // one positive sample: its fold's complement would be single-class
        let y = vec![0.0, 0.0, 0.0, 1.0];
        assert!(stratified_folds(&y, 2, &mut rng).is_err());
        assert!(stratified_folds(&y, 1, &mut rng).is_err());
        assert!(stratified_folds(&[0.0, 1.0], 3, &mut rng).is_err());
        assert!(stratified_folds(&[0.0; 4], 2, &mut rng).is_err());
    }

    #[test]
    fn cv_selects_a_valid_lambda_pair() {
        let (cols, y) = toy_data(160, 6);
        let mut rng = derive_rng(10, StreamKind::Policy, 0);
        let sel = cv_select(&cols, &y, 25, 10, &mut rng).unwrap();
        assert!(sel.lambda_1se >= sel.lambda_min);
        assert!(sel.lambda_1se_index <= sel.lambda_min_index);
        let cv = sel.path.cv_mean.as_ref().unwrap();
        assert_eq!(cv.len(), 25);
        assert!(sel.selected.contains(&0), "signal column not selected");

        let mut r1 = derive_rng(10, StreamKind::Policy, 0);
        let sel2 = cv_select(&cols, &y, 25, 10, &mut r1).unwrap();
        assert_eq!(sel.lambda_1se_index, sel2.lambda_1se_index);
        assert_eq!(sel.selected, sel2.selected);
    }

    #[test]
    fn leave_one_out_on_a_tiny_separable_set_runs() {
        let cols = vec![vec![0.0, 0.0, 1.0, 1.0]];
        let y = vec![0.0, 0.0, 1.0, 1.0];
        let mut rng = derive_rng(11, StreamKind::Policy, 0);
        let sel = cv_select(&cols, &y, 10, 4, &mut rng).unwrap();
        assert!(sel.lambda_1se >= sel.lambda_min);
        assert!(sel.lambda_min > 0.0);
    }

    #[test]
    fn noise_labels_select_almost_nothing_at_one_se() {
        let mut rng = derive_rng(12, StreamKind::Policy, 0);
        for rep in 0..5 {
            let n = 120;
            let cols: Vec<Vec<f64>> = (0..12)
                .map(|_| (0..n).map(|_| rng.random_range(0.0..1.0f64).round()).collect())
                .collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0f64).round()).collect();
            let mut cv_rng = derive_rng(13, StreamKind::Policy, rep);
            let sel = cv_select(&cols, &y, 20, 5, &mut cv_rng).unwrap();
            assert!(
                sel.selected.len() <= 3,
                "noise run {rep} selected {:?}",
                sel.selected
            );
        }
    }
}
