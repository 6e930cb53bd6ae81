//! Online Bayesian logistic regression with an independent-Gaussian belief.
//!
//! The belief over weights is `w_j ~ Normal(m_j, 1/q_j)` with diagonal
//! precision. One observation updates the belief in two steps: the posterior
//! mode becomes the new mean (found by a Laplace/MAP step), and the curvature
//! of the log-likelihood at the mode is added to the precision. Prediction
//! moderates the logistic by the latent variance so that uncertain beliefs
//! give probabilities closer to 1/2.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Outcome;
use crate::num::{dot, logistic};

/// Bisection tolerance on the scalar root of the mode equation.
const MODE_TOL: f64 = 1e-10;
/// Iteration cap for the bisection; far beyond what the tolerance needs.
const MODE_MAX_ITER: usize = 200;

/// Independent-Gaussian belief over the weight vector: means `m` and
/// precisions `q` (all positive, all finite).
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    m: Vec<f64>,
    q: Vec<f64>,
}

/// Moderated prediction for one design vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveResult {
    /// Mean of the latent score `w . phi`.
    pub mu_b: f64,
    /// Variance of the latent score under the belief.
    pub sigma2_b: f64,
    /// Moderated success probability.
    pub p_success: f64,
}

#[derive(Serialize, Deserialize)]
struct BeliefStateJson {
    d: usize,
    m: Vec<f64>,
    q: Vec<f64>,
}

impl BeliefState {
    /// Zero-mean prior with uniform precision `lambda`.
    pub fn prior(d: usize, lambda: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("belief dimension must be at least 1".into()));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "prior precision must be positive and finite, got {lambda}"
            )));
        }
        Ok(Self { m: vec![0.0; d], q: vec![lambda; d] })
    }

    pub fn new(m: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if m.is_empty() || m.len() != q.len() {
            return Err(Error::Dimension(format!(
                "mean has length {}, precision has length {}",
                m.len(),
                q.len()
            )));
        }
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("belief means must be finite".into()));
        }
        if !q.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::Domain("belief precisions must be positive and finite".into()));
        }
        Ok(Self { m, q })
    }

    pub fn dimension(&self) -> usize {
        self.m.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.m
    }

    pub fn precision(&self) -> &[f64] {
        &self.q
    }

    /// Serialize as `{"d": ..., "m": [...], "q": [...]}`. The encoding keeps
    /// full double precision, so a round trip restores the state exactly.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&BeliefStateJson {
            d: self.dimension(),
            m: self.m.clone(),
            q: self.q.clone(),
        })
        .expect("belief states contain only finite numbers")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BeliefStateJson = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("belief state json: {e}")))?;
        if raw.d != raw.m.len() {
            return Err(Error::Dimension(format!(
                "declared dimension {} does not match mean length {}",
                raw.d,
                raw.m.len()
            )));
        }
        Self::new(raw.m, raw.q)
    }
}

fn check_dims(state: &BeliefState, phi: &[f64]) -> Result<()> {
    if phi.len() != state.dimension() {
        return Err(Error::Dimension(format!(
            "design vector has length {}, belief has dimension {}",
            phi.len(),
            state.dimension()
        )));
    }
    if !phi.iter().all(|v| v.is_finite()) {
        return Err(Error::Domain("design vector entries must be finite".into()));
    }
    Ok(())
}

/// One-observation belief update.
///
/// The posterior mode solves `m'_j = m_j + y (phi_j / q_j) rho` with
/// `rho = logistic(-y m'.phi)`, which collapses to a scalar fixed point:
/// `rho = logistic(-y m.phi - rho s)` where `s = sum_j phi_j^2 / q_j`. The
/// map `g(rho) = rho - logistic(-y m.phi - rho s)` is strictly increasing
/// with `g(0) < 0 < g(1)`, so bisection on [0, 1] finds the unique root.
/// Precisions then gain the observed curvature:
/// `q'_j = q_j + zeta (1 - zeta) phi_j^2` with `zeta = logistic(-m'.phi)`.
pub fn update(state: &BeliefState, phi: &[f64], y: Outcome) -> Result<BeliefState> {
    check_dims(state, phi)?;
    let y = y.sign();
    let mphi = dot(state.mean(), phi);
    let s: f64 = phi
        .iter()
        .zip(state.precision())
        .map(|(p, q)| p * p / q)
        .sum();

    let g = |rho: f64| rho - logistic(-y * mphi - rho * s);
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut converged = false;
    for _ in 0..MODE_MAX_ITER {
        if hi - lo < MODE_TOL {
            converged = true;
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if !converged {
        return Err(Error::Numeric(
            "posterior mode bisection did not converge".into(),
        ));
    }
    let rho = 0.5 * (lo + hi);

    let m: Vec<f64> = state
        .mean()
        .iter()
        .zip(phi)
        .zip(state.precision())
        .map(|((m, p), q)| m + y * (p / q) * rho)
        .collect();

    let zeta = logistic(-dot(&m, phi));
    let curv = zeta * (1.0 - zeta);
    let q: Vec<f64> = state
        .precision()
        .iter()
        .zip(phi)
        .map(|(q, p)| q + curv * p * p)
        .collect();

    Ok(BeliefState { m, q })
}

/// Moderated predictive success probability for a design vector.
///
/// `mu_b = m.phi`, `sigma2_b = sum_j phi_j^2 / q_j`, and the returned
/// probability is `logistic(kappa mu_b)` with
/// `kappa = (1 + pi sigma2_b / 8)^(-1/2)`.
pub fn predict(state: &BeliefState, phi: &[f64]) -> Result<PredictiveResult> {
    check_dims(state, phi)?;
    let mu_b = dot(state.mean(), phi);
    let sigma2_b: f64 = phi
        .iter()
        .zip(state.precision())
        .map(|(p, q)| p * p / q)
        .sum();
    let kappa = (1.0 + std::f64::consts::PI * sigma2_b / 8.0).powf(-0.5);
    Ok(PredictiveResult { mu_b, sigma2_b, p_success: logistic(kappa * mu_b) })
}

/// One draw of the full weight vector: `w_j ~ Normal(m_j, 1/q_j)`.
pub fn sample_weights<R: Rng + ?Sized>(state: &BeliefState, rng: &mut R) -> Vec<f64> {
    state
        .mean()
        .iter()
        .zip(state.precision())
        .map(|(&m, &q)| Normal::new(m, q.sqrt().recip()).expect("positive sd").sample(rng))
        .collect()
}

/// Widen (eta > 1) or sharpen (eta < 1) the belief by scaling every variance
/// by `eta^2`, i.e. `q'_j = q_j / eta^2`. Means are untouched.
pub fn reshape(state: &BeliefState, eta: f64) -> Result<BeliefState> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Domain(format!(
            "reshape factor must be positive and finite, got {eta}"
        )));
    }
    let inv = eta * eta;
    Ok(BeliefState {
        m: state.m.clone(),
        q: state.q.iter().map(|q| q / inv).collect(),
    })
}
