//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line with the measured quantities. Run with
//! `cargo test --test acceptance -- --nocapture` to see every line.

use std::time::Instant;

use banditsim_core::bayes::{predict, update, BeliefState};
use banditsim_core::features::{
    connected_components, cosine_graph, cv_select, lasso_path, lasso_path_at, spectral_communities,
    BinaryMatrix, SimilarityGraph,
};
use banditsim_core::model::{ActionSpace, Outcome, PatientContext};
use banditsim_core::num::{mean, sample_sd};
use banditsim_core::policy::{choose_exploit, choose_kg, kg_value, PolicyConfig, PolicyKind, Tau};
use banditsim_core::rng::{derive_rng, StreamKind};
use banditsim_core::sim::{run_experiment, ExperimentConfig, ExperimentResult};
use banditsim_testkit as oracle;
use banditsim_testkit::SplitMix64;

fn verdict(criterion: &str, pass: bool, details: &str) {
    eprintln!(
        "[acceptance] {criterion}: {} — {details}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {details}");
}

fn final_rate(result: &ExperimentResult) -> f64 {
    *result.summary.mean_rate.last().expect("non-empty curve")
}

/// Paired mean difference of final success rates and its standard error.
fn paired_diff(a: &ExperimentResult, b: &ExperimentResult, horizon: f64) -> (f64, f64) {
    let diffs: Vec<f64> = a
        .finals
        .iter()
        .zip(&b.finals)
        .map(|(x, y)| (f64::from(*x) - f64::from(*y)) / horizon)
        .collect();
    (mean(&diffs), sample_sd(&diffs) / (diffs.len() as f64).sqrt())
}

#[test]
fn criterion_1_benchmark_reproduction() {
    let started = Instant::now();
    let mut base = ExperimentConfig::synthetic(212, 20, 31, 0.1, 500, 411);
    base.policy = PolicyConfig {
        kind: PolicyKind::KnowledgeGradient,
        tau: Tau::HorizonRemaining,
        eta: 0.5,
    };
    let kg = run_experiment(&base).unwrap();
    let mut cfg = base.clone();
    cfg.policy.kind = PolicyKind::Explore;
    let explore = run_experiment(&cfg).unwrap();
    cfg.policy.kind = PolicyKind::Thompson;
    let thompson = run_experiment(&cfg).unwrap();

    let (r_kg, r_ex, r_th) = (final_rate(&kg), final_rate(&explore), final_rate(&thompson));
    let relative = (r_kg - r_ex) / r_ex;
    let (d_ex, se_ex) = paired_diff(&kg, &explore, 212.0);
    let ci_low = d_ex - 1.96 * se_ex;
    let (d_th, se_th) = paired_diff(&kg, &thompson, 212.0);
    let avg_over_time =
        |r: &ExperimentResult| mean(&r.summary.mean_rate);
    let elapsed = started.elapsed().as_secs_f64();

    let pass = relative >= 0.15 && ci_low > 0.0 && d_th >= -2.0 * se_th && elapsed < 900.0;
    verdict(
        "criterion 1 benchmark reproduction",
        pass,
        &format!(
            "final rates kg {r_kg:.4} explore {r_ex:.4} thompson {r_th:.4}; \
             kg over explore {:.1}% (need >= 15%), paired 95% CI low {ci_low:.4} (need > 0); \
             kg - thompson {d_th:.4} (allowed floor {:.4}); \
             time-averaged rates kg {:.4} explore {:.4}; {elapsed:.0}s",
            relative * 100.0,
            -2.0 * se_th,
            avg_over_time(&kg),
            avg_over_time(&explore),
        ),
    );
}

#[test]
fn criterion_2_posterior_update_oracle() {
    let started = Instant::now();
    let mut rng = SplitMix64(77);
    let mut worst_gap = 0.0f64;
    let mut worst_residual = 0.0f64;
    for _ in 0..100 {
        let d = 1 + (rng.next_u64() % 10) as usize;
        let m: Vec<f64> = (0..d).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
        let q: Vec<f64> = (0..d).map(|_| 0.5 + 2.5 * rng.next_f64()).collect();
        let phi: Vec<f64> = (0..d).map(|_| 3.0 * rng.next_f64() - 1.5).collect();
        let y = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };

        let state = BeliefState::new(m.clone(), q.clone()).unwrap();
        let updated = update(&state, &phi, Outcome::from_value(y).unwrap()).unwrap();
        let reference = oracle::newton_map(&m, &q, &phi, y);
        for (a, b) in updated.mean().iter().zip(&reference) {
            worst_gap = worst_gap.max((a - b).abs());
        }
        let residual = oracle::map_gradient(&m, &q, &phi, y, updated.mean())
            .iter()
            .fold(0.0f64, |acc, g| acc.max(g.abs()));
        worst_residual = worst_residual.max(residual);
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_gap < 1e-6 && worst_residual < 1e-8 && elapsed < 10.0;
    verdict(
        "criterion 2 posterior-update oracle",
        pass,
        &format!(
            "100 instances, worst coordinate gap {worst_gap:.2e} (need < 1e-6), \
             worst stationarity residual {worst_residual:.2e} (need < 1e-8); {elapsed:.1}s"
        ),
    );
}

#[test]
fn criterion_3_predictive_approximation() {
    let started = Instant::now();
    let mut rng = SplitMix64(303);
    let mut worst_formula = 0.0f64;
    let mut worst_mc = 0.0f64;
    for i in 0..50 {
        let d = 2 + (rng.next_u64() % 7) as usize;
        let m: Vec<f64> = (0..d).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
        let q: Vec<f64> = (0..d).map(|_| 0.3 + 3.7 * rng.next_f64()).collect();
        let phi: Vec<f64> = (0..d).map(|_| 2.0 * rng.next_f64() - 1.0).collect();

        let state = BeliefState::new(m.clone(), q.clone()).unwrap();
        let pred = predict(&state, &phi).unwrap();

        // independent closed-form evaluation
        let mu: f64 = m.iter().zip(&phi).map(|(a, b)| a * b).sum();
        let sigma2: f64 = phi.iter().zip(&q).map(|(p, qi)| p * p / qi).sum();
        let kappa = 1.0 / (1.0 + std::f64::consts::PI * sigma2 / 8.0).sqrt();
        let p_formula = 1.0 / (1.0 + (-kappa * mu).exp());
        worst_formula = worst_formula.max((pred.p_success - p_formula).abs());

        let p_mc = oracle::mc_logistic_gaussian(mu, sigma2, 1_000_000, 1_000 + i);
        worst_mc = worst_mc.max((pred.p_success - p_mc).abs());
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_formula < 1e-12 && worst_mc < 0.02 && elapsed < 30.0;
    verdict(
        "criterion 3 predictive approximation",
        pass,
        &format!(
            "50 states, worst closed-form gap {worst_formula:.2e} (need < 1e-12), \
             worst Monte-Carlo gap {worst_mc:.4} (need < 0.02, 10^6 draws each); {elapsed:.1}s"
        ),
    );
}

fn random_belief(rng: &mut SplitMix64, d: usize, spread: f64, q_lo: f64, q_hi: f64) -> BeliefState {
    let m: Vec<f64> = (0..d).map(|_| spread * (2.0 * rng.next_f64() - 1.0)).collect();
    let q: Vec<f64> = (0..d).map(|_| q_lo + (q_hi - q_lo) * rng.next_f64()).collect();
    BeliefState::new(m, q).unwrap()
}

fn random_context(rng: &mut SplitMix64, d_x: usize) -> PatientContext {
    let features: Vec<f64> = (0..d_x)
        .map(|_| if rng.next_f64() < 0.5 { 1.0 } else { 0.0 })
        .collect();
    PatientContext::new("ctx", features)
}

#[test]
fn criterion_4_knowledge_gradient_sanity() {
    let started = Instant::now();

    // Near-nonnegativity holds up to approximation error around the prior
    // mean, where exact inference makes the value a Jensen gap; random
    // precisions span two orders of magnitude and d varies up to 10.
    let mut rng = SplitMix64(44);
    let mut min_kg = f64::INFINITY;
    for i in 0..1000 {
        let physicians = 2 + (rng.next_u64() % 3) as usize;
        let d_x = 1 + (rng.next_u64() % (9 - physicians as u64)) as usize;
        let space = ActionSpace::new(physicians, 0).unwrap();
        let d = space.dimension(d_x);
        let actions = space.actions();
        let state = random_belief(&mut rng, d, 0.0, 0.1, 10.0);
        let context = random_context(&mut rng, d_x);
        let action = actions[(rng.next_u64() % actions.len() as u64) as usize];
        let eta = if i % 2 == 0 { 0.5 } else { 1.0 };
        let v = kg_value(&state, &context, action, &space, eta).unwrap();
        min_kg = min_kg.min(v);
    }
    let nonneg = min_kg >= -1e-3;

    let space = ActionSpace::new(4, 0).unwrap();
    let d_x = 3;
    let d = space.dimension(d_x);
    let actions = space.actions();

    let mut mismatches = 0usize;
    for i in 0..1000 {
        let state = random_belief(&mut rng, d, 2.0, 0.2, 5.0);
        let context = random_context(&mut rng, d_x);
        let mut rng_a = derive_rng(9000, StreamKind::Policy, i);
        let mut rng_b = rng_a.clone();
        let a = choose_kg(&state, &context, &space, 0.0, 1.0, &mut rng_a).unwrap();
        let b = choose_exploit(&state, &context, &space, &mut rng_b).unwrap();
        if a != b {
            mismatches += 1;
        }
    }

    let mut max_tiny = 0.0f64;
    for _ in 0..100 {
        let state = random_belief(&mut rng, d, 2.0, 0.2, 5.0);
        let context = random_context(&mut rng, d_x);
        for &action in &actions {
            let v = kg_value(&state, &context, action, &space, 1e-6).unwrap();
            max_tiny = max_tiny.max(v.abs());
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    let pass = nonneg && mismatches == 0 && max_tiny < 1e-6 && elapsed < 60.0;
    verdict(
        "criterion 4 knowledge-gradient sanity",
        pass,
        &format!(
            "min kg over 1000 states {min_kg:.2e} (need >= -1e-3); \
             tau=0 vs exploitation mismatches {mismatches}/1000 (need 0); \
             max |kg| at eta=1e-6 {max_tiny:.2e} (need < 1e-6); {elapsed:.1}s"
        ),
    );
}

/// A random binary design with both outcome classes and no constant column.
fn random_lasso_instance(rng: &mut SplitMix64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut columns: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| f64::from(u8::from(rng.next_f64() < 0.4))).collect())
        .collect();
    for col in &mut columns {
        if col.iter().all(|&v| v == col[0]) {
            col[0] = 1.0 - col[0];
        }
    }
    let mut y: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.next_f64() < 0.5))).collect();
    y[0] = 0.0;
    y[1] = 1.0;
    (columns, y)
}

#[test]
fn criterion_5_lasso_suite() {
    let started = Instant::now();
    let mut rng = SplitMix64(55);
    let mut max_coef_at_top = 0.0f64;
    let mut subgradient_ok = true;
    let mut max_deviance_rise = 0.0f64;
    let mut ordering_ok = true;
    for i in 0..50 {
        let (columns, y) = random_lasso_instance(&mut rng, 60, 6);
        let lam_top = oracle::lasso_lambda_max(&columns, &y);
        let above = lasso_path_at(&columns, &y, &[lam_top * 1.01]).unwrap();
        for &c in &above.coefficients[0] {
            max_coef_at_top = max_coef_at_top.max(c.abs());
        }
        let ybar = mean(&y);
        for col in &columns {
            let corr: f64 = col
                .iter()
                .zip(&y)
                .map(|(x, yi)| x * (yi - ybar))
                .sum::<f64>()
                / y.len() as f64;
            subgradient_ok &= corr.abs() <= lam_top * 1.01 + 1e-12;
        }

        let path = lasso_path(&columns, &y, 15, 1e-3).unwrap();
        for pair in path.train_deviance.windows(2) {
            max_deviance_rise = max_deviance_rise.max(pair[1] - pair[0]);
        }

        if i < 10 {
            let mut cv_rng = derive_rng(550, StreamKind::Folds, i as u64);
            let sel = cv_select(&columns, &y, 15, 5, &mut cv_rng).unwrap();
            ordering_ok &= sel.lambda_1se >= sel.lambda_min;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = max_coef_at_top == 0.0
        && subgradient_ok
        && max_deviance_rise <= 1e-6
        && ordering_ok
        && elapsed < 60.0;
    verdict(
        "criterion 5 lasso suite",
        pass,
        &format!(
            "50 instances: max coefficient above lambda_max {max_coef_at_top:.2e} \
             (need 0, subgradient check {}), worst deviance rise {max_deviance_rise:.2e} \
             (need <= 1e-6), lambda_1se >= lambda_min always {}; {elapsed:.1}s",
            if subgradient_ok { "ok" } else { "violated" },
            if ordering_ok { "ok" } else { "violated" },
        ),
    );
}

fn random_graph(rng: &mut SplitMix64, max_nodes: usize, edge_prob: f64) -> (usize, Vec<(usize, usize)>) {
    let n = 2 + (rng.next_u64() % (max_nodes as u64 - 1)) as usize;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.next_f64() < edge_prob {
                edges.push((i, j));
            }
        }
    }
    (n, edges)
}

fn graph_from(n: usize, edges: &[(usize, usize)]) -> SimilarityGraph {
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let weighted: Vec<(usize, usize, f64)> = edges.iter().map(|&(a, b)| (a, b, 1.0)).collect();
    SimilarityGraph::from_edges(names, weighted).unwrap()
}

#[test]
fn criterion_6_graph_suite() {
    let started = Instant::now();
    let mut rng = SplitMix64(66);

    let mut component_mismatches = 0usize;
    let mut min_q = f64::INFINITY;
    for _ in 0..200 {
        let (n, edges) = random_graph(&mut rng, 12, 0.25);
        let graph = graph_from(n, &edges);
        let partition = connected_components(&graph);
        let reach = oracle::reachability(n, &edges);
        for i in 0..n {
            for j in 0..n {
                let same = partition.group_of(i) == partition.group_of(j);
                if same != reach[i][j] {
                    component_mismatches += 1;
                }
            }
        }
        min_q = min_q.min(spectral_communities(&graph).modularity);
    }

    // at threshold 1, components are exactly the classes of identical columns
    let mut class_ok = true;
    for _ in 0..20 {
        let patterns: Vec<Vec<u8>> = (0..4)
            .map(|_| {
                let mut col: Vec<u8> = (0..9).map(|_| u8::from(rng.next_f64() < 0.5)).collect();
                if col.iter().all(|&v| v == 0) {
                    col[0] = 1;
                }
                col
            })
            .collect();
        let columns: Vec<Vec<u8>> =
            (0..12).map(|j| patterns[j % 4].clone()).collect();
        let names: Vec<String> = (0..12).map(|j| format!("c{j}")).collect();
        let matrix = BinaryMatrix::new(names, columns.clone()).unwrap();
        let graph = cosine_graph(&matrix, 1.0).unwrap();
        let partition = connected_components(&graph);
        for i in 0..12 {
            for j in 0..12 {
                let same_group = partition.group_of(i) == partition.group_of(j);
                let same_column = columns[i] == columns[j];
                class_ok &= same_group == same_column;
            }
        }
    }

    // two 4-cliques joined by one bridge
    let mut edges = Vec::new();
    for block in [0usize, 4] {
        for i in block..block + 4 {
            for j in (i + 1)..block + 4 {
                edges.push((i, j));
            }
        }
    }
    edges.push((3, 4));
    let cliques = spectral_communities(&graph_from(8, &edges));
    let split_ok = cliques.partition.num_groups() == 2
        && (0..4).all(|i| cliques.partition.group_of(i) == cliques.partition.group_of(0))
        && (4..8).all(|i| cliques.partition.group_of(i) == cliques.partition.group_of(4))
        && cliques.partition.group_of(0) != cliques.partition.group_of(4);

    let elapsed = started.elapsed().as_secs_f64();
    let pass = component_mismatches == 0 && class_ok && split_ok && min_q >= 0.0 && elapsed < 30.0;
    verdict(
        "criterion 6 graph suite",
        pass,
        &format!(
            "components vs reachability mismatches {component_mismatches} over 200 graphs (need 0); \
             threshold-1 identical-column classes {}; joined 4-cliques recovered {}; \
             min modularity {min_q:.3} (need >= 0); {elapsed:.1}s",
            if class_ok { "ok" } else { "violated" },
            if split_ok { "yes" } else { "no" },
        ),
    );
}

#[test]
fn criterion_7_binary_determinism() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("exp.cfg");
    std::fs::write(
        &config_path,
        "[experiment]\nnum_patients = 30\nnum_physicians = 3\nreplications = 20\nseed = 5\n\n\
         [policy]\nkind = kg\neta = 0.5\n\n[features]\nnum_features = 4\ndensity = 0.3\n",
    )
    .unwrap();

    let mut outputs: Vec<Vec<u8>> = Vec::new();
    for (label, threads) in [("a", None), ("b", None), ("t1", Some("1")), ("t4", Some("4"))] {
        let out = dir.path().join(label);
        let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_banditsim"));
        cmd.args(["run", "--config", config_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        cmd.env_remove("BANDITSIM_THREADS");
        if let Some(t) = threads {
            cmd.env("BANDITSIM_THREADS", t);
        }
        let status = cmd.output().expect("binary runs");
        assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
        outputs.push(std::fs::read(out.join("results.csv")).unwrap());
    }
    let repeat_identical = outputs[0] == outputs[1];
    let threads_identical = outputs[0] == outputs[2] && outputs[2] == outputs[3];

    let elapsed = started.elapsed().as_secs_f64();
    let pass = repeat_identical && threads_identical && elapsed < 60.0;
    verdict(
        "criterion 7 determinism",
        pass,
        &format!(
            "repeated run byte-identical {repeat_identical}; \
             thread caps 1 and 4 byte-identical {threads_identical}; {elapsed:.1}s"
        ),
    );
}

#[test]
fn criterion_8_null_truth_calibration() {
    let started = Instant::now();
    let mut report = String::new();
    let mut pass = true;
    for kind in [
        PolicyKind::KnowledgeGradient,
        PolicyKind::Thompson,
        PolicyKind::Exploit,
        PolicyKind::Explore,
    ] {
        let mut cfg = ExperimentConfig::synthetic(25, 4, 5, 0.3, 500, 88);
        cfg.sigma_truth = 0.0;
        cfg.policy = PolicyConfig { kind, tau: Tau::HorizonRemaining, eta: 0.5 };
        let result = run_experiment(&cfg).unwrap();
        let rate = final_rate(&result);
        let se = *result.summary.se_rate.last().unwrap();
        let ok = (rate - 0.5).abs() <= 3.0 * se;
        pass &= ok;
        report.push_str(&format!("{} {rate:.4} (se {se:.4}) ", kind.name()));
    }
    let elapsed = started.elapsed().as_secs_f64();
    verdict(
        "criterion 8 null-truth calibration",
        pass,
        &format!("mean final rates with w*=0, 500 replications: {report}all within 3 se of 0.5; {elapsed:.0}s"),
    );
}
