//! Assignment policies.
//!
//! All policies score the same candidate set (every action in the space for
//! the current patient) and never mutate the belief they are given. The
//! knowledge-gradient policy values an action by how much the best available
//! moderated success probability improves after a hypothetical observation of
//! that action, averaged over both outcomes; a tunable horizon weight `tau`
//! trades that learning value against immediate success probability, and a
//! reshaping factor `eta` widens or sharpens the belief used for the
//! hypothetical step.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bayes::{predict, reshape, sample_weights, update, BeliefState};
use crate::error::{Error, Result};
use crate::model::{assemble, Action, ActionSpace, EncodedInstance, Outcome, PatientContext};
use crate::num::{dot, logistic};

/// Which policy to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    KnowledgeGradient,
    Thompson,
    Exploit,
    Explore,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::KnowledgeGradient => "kg",
            PolicyKind::Thompson => "thompson",
            PolicyKind::Exploit => "exploit",
            PolicyKind::Explore => "explore",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "kg" => Ok(PolicyKind::KnowledgeGradient),
            "thompson" => Ok(PolicyKind::Thompson),
            "exploit" => Ok(PolicyKind::Exploit),
            "explore" => Ok(PolicyKind::Explore),
            other => Err(Error::Domain(format!(
                "unknown policy '{other}' (expected kg, thompson, exploit, or explore)"
            ))),
        }
    }
}

/// Learning weight applied to the knowledge-gradient term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tau {
    /// Constant weight.
    Fixed(f64),
    /// Patients still to come after the current one: `horizon - step - 1`.
    HorizonRemaining,
}

impl Tau {
    pub fn value_at(self, step: usize, horizon: usize) -> f64 {
        match self {
            Tau::Fixed(t) => t,
            Tau::HorizonRemaining => horizon.saturating_sub(step + 1) as f64,
        }
    }
}

/// A policy plus its tuning knobs. `tau` only affects the knowledge-gradient
/// policy; `eta` reshapes the belief inside the knowledge-gradient lookahead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    pub tau: Tau,
    pub eta: f64,
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self { kind, tau: Tau::HorizonRemaining, eta: 1.0 }
    }

    /// Dispatch one decision at `step` of an episode with `horizon` patients.
    pub fn choose<R: Rng + ?Sized>(
        &self,
        state: &BeliefState,
        context: &PatientContext,
        space: &ActionSpace,
        step: usize,
        horizon: usize,
        rng: &mut R,
    ) -> Result<Action> {
        match self.kind {
            PolicyKind::KnowledgeGradient => {
                let tau = self.tau.value_at(step, horizon);
                choose_kg(state, context, space, tau, self.eta, rng)
            }
            PolicyKind::Thompson => choose_thompson(state, context, space, rng),
            PolicyKind::Exploit => choose_exploit(state, context, space, rng),
            PolicyKind::Explore => Ok(choose_explore(space, rng)),
        }
    }
}

/// Per-action breakdown of a knowledge-gradient decision.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredAction {
    pub action: Action,
    /// Moderated success probability under the unreshaped belief.
    pub exploit_score: f64,
    pub kg_value: f64,
    /// `exploit_score + tau * kg_value`.
    pub total: f64,
}

fn encode_all(context: &PatientContext, space: &ActionSpace) -> Result<Vec<EncodedInstance>> {
    space
        .actions()
        .into_iter()
        .map(|a| assemble(context, a, space))
        .collect()
}

/// Best moderated success probability over the candidate set.
fn best_p(state: &BeliefState, encoded: &[EncodedInstance]) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for inst in encoded {
        best = best.max(predict(state, inst.phi())?.p_success);
    }
    Ok(best)
}

/// Expected one-step improvement of the best predictive probability after a
/// hypothetical observation of `encoded[idx]`, all under the reshaped belief.
fn kg_one(
    reshaped: &BeliefState,
    encoded: &[EncodedInstance],
    idx: usize,
    v_now: f64,
) -> Result<f64> {
    let phi = encoded[idx].phi();
    let p_plus = predict(reshaped, phi)?.p_success;
    let after_success = update(reshaped, phi, Outcome::Success)?;
    let after_failure = update(reshaped, phi, Outcome::Failure)?;
    Ok(p_plus * best_p(&after_success, encoded)?
        + (1.0 - p_plus) * best_p(&after_failure, encoded)?
        - v_now)
}

/// Knowledge-gradient value of one action for the current patient.
pub fn kg_value(
    state: &BeliefState,
    context: &PatientContext,
    action: Action,
    space: &ActionSpace,
    eta: f64,
) -> Result<f64> {
    let idx = space.action_index(action)?;
    let encoded = encode_all(context, space)?;
    let reshaped = reshape(state, eta)?;
    let v_now = best_p(&reshaped, &encoded)?;
    kg_one(&reshaped, &encoded, idx, v_now)
}

/// Score every action for the current patient: the exploitation term uses the
/// belief as-is, the knowledge-gradient term uses the reshaped belief.
pub fn scored_actions(
    state: &BeliefState,
    context: &PatientContext,
    space: &ActionSpace,
    tau: f64,
    eta: f64,
) -> Result<Vec<ScoredAction>> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!(
            "tau must be non-negative and finite, got {tau}"
        )));
    }
    let actions = space.actions();
    let encoded = encode_all(context, space)?;
    let reshaped = reshape(state, eta)?;
    let v_now = best_p(&reshaped, &encoded)?;
    let mut out = Vec::with_capacity(actions.len());
    for (idx, action) in actions.into_iter().enumerate() {
        let exploit_score = predict(state, encoded[idx].phi())?.p_success;
        let kg = kg_one(&reshaped, &encoded, idx, v_now)?;
        out.push(ScoredAction {
            action,
            exploit_score,
            kg_value: kg,
            total: exploit_score + tau * kg,
        });
    }
    Ok(out)
}

/// Argmax with uniform random tie-breaking. The generator is consumed only
/// when there is an actual tie, so score-identical policies consume identical
/// randomness.
fn argmax_tiebreak<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> usize {
    debug_assert!(!scores.is_empty());
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == best)
        .map(|(i, _)| i)
        .collect();
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.random_range(0..ties.len())]
    }
}

/// Maximize `exploit + tau * kg` over the action space.
pub fn choose_kg<R: Rng + ?Sized>(
    state: &BeliefState,
    context: &PatientContext,
    space: &ActionSpace,
    tau: f64,
    eta: f64,
    rng: &mut R,
) -> Result<Action> {
    let scored = scored_actions(state, context, space, tau, eta)?;
    let totals: Vec<f64> = scored.iter().map(|s| s.total).collect();
    Ok(scored[argmax_tiebreak(&totals, rng)].action)
}

/// One shared posterior draw, scored by the plug-in success probability.
pub fn choose_thompson<R: Rng + ?Sized>(
    state: &BeliefState,
    context: &PatientContext,
    space: &ActionSpace,
    rng: &mut R,
) -> Result<Action> {
    let actions = space.actions();
    let encoded = encode_all(context, space)?;
    if encoded[0].len() != state.dimension() {
        return Err(Error::Dimension(format!(
            "design vector has length {}, belief has dimension {}",
            encoded[0].len(),
            state.dimension()
        )));
    }
    let w = sample_weights(state, rng);
    let scores: Vec<f64> = encoded.iter().map(|e| logistic(dot(&w, e.phi()))).collect();
    Ok(actions[argmax_tiebreak(&scores, rng)])
}

/// Pure exploitation: maximize the moderated success probability.
pub fn choose_exploit<R: Rng + ?Sized>(
    state: &BeliefState,
    context: &PatientContext,
    space: &ActionSpace,
    rng: &mut R,
) -> Result<Action> {
    let actions = space.actions();
    let encoded = encode_all(context, space)?;
    let mut scores = Vec::with_capacity(actions.len());
    for inst in &encoded {
        scores.push(predict(state, inst.phi())?.p_success);
    }
    Ok(actions[argmax_tiebreak(&scores, rng)])
}

/// Uniform over the action space.
pub fn choose_explore<R: Rng + ?Sized>(space: &ActionSpace, rng: &mut R) -> Action {
    let actions = space.actions();
    actions[rng.random_range(0..actions.len())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_rng, StreamKind};

    fn two_action_setup() -> (BeliefState, PatientContext, ActionSpace) {
        // d = 3: bias plus one indicator per action; no patient features.
        let state = BeliefState::new(vec![0.0; 3], vec![1.0, 10.0, 0.1]).unwrap();
        let context = PatientContext::new("p", vec![]);
        let space = ActionSpace::new(2, 0).unwrap();
        (state, context, space)
    }

    #[test]
    fn kg_prefers_the_uncertain_action() {
        let (state, context, space) = two_action_setup();
        let kg1 = kg_value(&state, &context, Action::new(1, None), &space, 1.0).unwrap();
        let kg2 = kg_value(&state, &context, Action::new(2, None), &space, 1.0).unwrap();
        assert!(
            kg2 > kg1,
            "low-precision arm should carry more learning value: {kg1} vs {kg2}"
        );
    }

    #[test]
    fn choose_kg_with_large_tau_takes_the_informative_action() {
        let (state, context, space) = two_action_setup();
        let mut rng = derive_rng(1, StreamKind::Policy, 0);
        let action = choose_kg(&state, &context, &space, 10.0, 1.0, &mut rng).unwrap();
        assert_eq!(action, Action::new(2, None));
    }

    #[test]
    fn tau_zero_reduces_to_exploitation() {
        for seed in 0..200 {
            let mut rng = derive_rng(seed, StreamKind::Policy, 7);
            let d = 1 + 2 + 3;
            let m: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
            let q: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..10.0)).collect();
            let state = BeliefState::new(m, q).unwrap();
            let context =
                PatientContext::new("p", vec![rng.random_range(0.0..1.0f64).round(), 1.0]);
            let space = ActionSpace::new(3, 0).unwrap();

            let mut rng_a = derive_rng(seed, StreamKind::Policy, 1000);
            let mut rng_b = derive_rng(seed, StreamKind::Policy, 1000);
            let kg = choose_kg(&state, &context, &space, 0.0, 0.5, &mut rng_a).unwrap();
            let exploit = choose_exploit(&state, &context, &space, &mut rng_b).unwrap();
            assert_eq!(kg, exploit);
        }
    }

    #[test]
    fn tiny_eta_collapses_learning_value() {
        let (state, context, space) = two_action_setup();
        for action in space.actions() {
            let kg = kg_value(&state, &context, action, &space, 1e-6).unwrap();
            assert!(kg.abs() < 1e-6, "kg at eta=1e-6 was {kg}");
        }
    }

    #[test]
    fn degenerate_belief_has_no_learning_value() {
        let state = BeliefState::new(vec![0.2; 3], vec![1e12; 3]).unwrap();
        let context = PatientContext::new("p", vec![]);
        let space = ActionSpace::new(2, 0).unwrap();
        for action in space.actions() {
            let kg = kg_value(&state, &context, action, &space, 1.0).unwrap();
            assert!(kg.abs() < 1e-9);
        }
    }

    #[test]
    fn kg_is_nearly_nonnegative_near_the_prior_mean() {
        // With exact inference the value is a Jensen gap, hence nonnegative;
        // the Laplace and moderated-prediction approximations stay within
        // 1e-3 of that as long as the mean is at the prior. Precisions span
        // two orders of magnitude and the total dimension varies up to 10.
        let mut min_kg = f64::INFINITY;
        for seed in 0..1000u64 {
            let mut rng = derive_rng(seed, StreamKind::Policy, 253);
            let physicians = rng.random_range(2..5usize);
            let d_x = rng.random_range(1..(9 - physicians));
            let space = ActionSpace::new(physicians, 0).unwrap();
            let d = space.dimension(d_x);
            let q: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..10.0)).collect();
            let state = BeliefState::new(vec![0.0; d], q).unwrap();
            let features: Vec<f64> =
                (0..d_x).map(|_| rng.random_range(0.0..1.0f64).round()).collect();
            let context = PatientContext::new("p", features);
            let eta = if seed % 2 == 0 { 0.5 } else { 1.0 };
            for action in space.actions() {
                let v = kg_value(&state, &context, action, &space, eta).unwrap();
                min_kg = min_kg.min(v);
            }
        }
        assert!(min_kg >= -1e-3, "kg dipped to {min_kg}");
    }

    #[test]
    fn kg_is_invariant_to_relabeling_actions() {
        // Swapping two physician labels (and the matching belief coordinates)
        // must not change any action's value: the max inside V ranges over
        // the same set of predictions either way.
        let d_x = 2;
        let space = ActionSpace::new(3, 0).unwrap();
        let d = space.dimension(d_x);
        let block = 1 + d_x; // first physician coordinate
        for seed in 0..50u64 {
            let mut rng = derive_rng(seed, StreamKind::Policy, 255);
            let m: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
            let q: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..5.0)).collect();
            let context = PatientContext::new(
                "p",
                (0..d_x).map(|_| rng.random_range(0.0..1.0f64).round()).collect(),
            );

            let mut m_swapped = m.clone();
            let mut q_swapped = q.clone();
            m_swapped.swap(block, block + 2);
            q_swapped.swap(block, block + 2);
            let state = BeliefState::new(m, q).unwrap();
            let relabeled = BeliefState::new(m_swapped, q_swapped).unwrap();

            for (p, p_swapped) in [(1, 3), (2, 2), (3, 1)] {
                let v = kg_value(&state, &context, Action::new(p, None), &space, 0.7).unwrap();
                let v_relabeled =
                    kg_value(&relabeled, &context, Action::new(p_swapped, None), &space, 0.7)
                        .unwrap();
                assert_eq!(v, v_relabeled, "physician {p} changed value after relabeling");
            }
        }
    }

    #[test]
    fn scored_actions_compose_total_from_parts() {
        let (state, context, space) = two_action_setup();
        let scored = scored_actions(&state, &context, &space, 3.0, 0.5).unwrap();
        assert_eq!(scored.len(), 2);
        for s in &scored {
            assert_eq!(s.total, s.exploit_score + 3.0 * s.kg_value);
            assert!(s.exploit_score > 0.0 && s.exploit_score < 1.0);
        }
    }

    #[test]
    fn fresh_prior_breaks_ties_uniformly() {
        let state = BeliefState::prior(1 + 4, 1.0).unwrap();
        let context = PatientContext::new("p", vec![]);
        let space = ActionSpace::new(4, 0).unwrap();
        let mut rng = derive_rng(5, StreamKind::Policy, 0);
        let mut counts = [0usize; 4];
        for _ in 0..2000 {
            let a = choose_exploit(&state, &context, &space, &mut rng).unwrap();
            counts[a.physician - 1] += 1;
        }
        for &c in &counts {
            assert!(
                (c as i64 - 500).unsigned_abs() < 90,
                "tie-breaking skewed: {counts:?}"
            );
        }
    }

    #[test]
    fn explore_is_uniform_and_reproducible() {
        let space = ActionSpace::new(3, 2).unwrap();
        let mut rng = derive_rng(11, StreamKind::Policy, 0);
        let mut counts = vec![0usize; space.num_actions()];
        for _ in 0..6000 {
            let a = choose_explore(&space, &mut rng);
            counts[space.action_index(a).unwrap()] += 1;
        }
        for &c in &counts {
            assert!((c as i64 - 1000).unsigned_abs() < 150, "explore skewed: {counts:?}");
        }
        let mut r1 = derive_rng(11, StreamKind::Policy, 1);
        let mut r2 = derive_rng(11, StreamKind::Policy, 1);
        for _ in 0..100 {
            assert_eq!(choose_explore(&space, &mut r1), choose_explore(&space, &mut r2));
        }
    }

    #[test]
    fn thompson_with_sharp_posterior_matches_exploit() {
        let d = 1 + 3;
        let mut m = vec![0.0; d];
        m[1] = 0.3;
        m[2] = 1.1;
        m[3] = -0.4;
        let state = BeliefState::new(m, vec![1e12; d]).unwrap();
        let context = PatientContext::new("p", vec![]);
        let space = ActionSpace::new(3, 0).unwrap();
        let mut rng = derive_rng(3, StreamKind::Policy, 0);
        let exploit = choose_exploit(&state, &context, &space, &mut rng).unwrap();
        let mut agree = 0;
        for _ in 0..1000 {
            if choose_thompson(&state, &context, &space, &mut rng).unwrap() == exploit {
                agree += 1;
            }
        }
        assert!(agree >= 990, "agreement {agree}/1000");
    }

    #[test]
    fn tau_schedule_counts_remaining_patients() {
        assert_eq!(Tau::HorizonRemaining.value_at(0, 212), 211.0);
        assert_eq!(Tau::HorizonRemaining.value_at(211, 212), 0.0);
        assert_eq!(Tau::Fixed(2.5).value_at(7, 212), 2.5);
    }

    #[test]
    fn invalid_arguments_are_domain_errors() {
        let (state, context, space) = two_action_setup();
        let mut rng = derive_rng(0, StreamKind::Policy, 0);
        assert!(choose_kg(&state, &context, &space, -1.0, 1.0, &mut rng).is_err());
        assert!(choose_kg(&state, &context, &space, 1.0, 0.0, &mut rng).is_err());
        let wrong_dim = BeliefState::prior(2, 1.0).unwrap();
        assert!(choose_exploit(&wrong_dim, &context, &space, &mut rng).is_err());
        assert!(choose_thompson(&wrong_dim, &context, &space, &mut rng).is_err());
        assert!(kg_value(&state, &context, Action::new(3, None), &space, 1.0).is_err());
    }

    #[test]
    fn policies_do_not_mutate_the_belief() {
        let (state, context, space) = two_action_setup();
        let snapshot = state.clone();
        let mut rng = derive_rng(2, StreamKind::Policy, 0);
        let _ = choose_kg(&state, &context, &space, 5.0, 0.5, &mut rng).unwrap();
        let _ = choose_thompson(&state, &context, &space, &mut rng).unwrap();
        let _ = choose_exploit(&state, &context, &space, &mut rng).unwrap();
        assert_eq!(state, snapshot);
    }
}
