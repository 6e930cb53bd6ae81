//! Reference implementations used by the test suites.
//!
//! Everything in this crate is deliberately written by a different route than
//! the production code it checks: a dense damped-Newton minimizer instead of
//! the scalar bisection used by the belief update, a full proximal-gradient
//! solver instead of coordinate descent, brute-force enumeration instead of
//! graph traversal, and a self-contained RNG instead of the `rand` stack.
//! None of it is compiled into the shipped library or binary.

/// Numerically stable logistic function (independent copy).
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Gradient of `0.5 * sum_j q_j (w_j - m_j)^2 + log(1 + exp(-y * w.phi))`.
pub fn map_gradient(m: &[f64], q: &[f64], phi: &[f64], y: f64, w: &[f64]) -> Vec<f64> {
    let wphi: f64 = w.iter().zip(phi).map(|(a, b)| a * b).sum();
    let rho = logistic(-y * wphi);
    (0..m.len())
        .map(|j| q[j] * (w[j] - m[j]) - y * phi[j] * rho)
        .collect()
}

/// Posterior mode of the one-observation logistic update, found by damped
/// Newton iteration with a dense linear solve. Generic numerical route,
/// independent of any closed-form reduction.
pub fn newton_map(m: &[f64], q: &[f64], phi: &[f64], y: f64) -> Vec<f64> {
    let d = m.len();
    let mut w = m.to_vec();
    for _ in 0..200 {
        let g = map_gradient(m, q, phi, y, &w);
        if g.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-13 {
            break;
        }
        let wphi: f64 = w.iter().zip(phi).map(|(a, b)| a * b).sum();
        let rho = logistic(-y * wphi);
        let curv = rho * (1.0 - rho);
        // Hessian = diag(q) + curv * phi phi^T
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                h[i * d + j] = curv * phi[i] * phi[j];
            }
            h[i * d + i] += q[i];
        }
        let step = solve_dense(&mut h, &g, d);
        // Backtracking keeps the iteration inside the convex basin.
        let f0 = map_objective(m, q, phi, y, &w);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = (0..d).map(|j| w[j] - t * step[j]).collect();
            if map_objective(m, q, phi, y, &trial) <= f0 || t < 1e-8 {
                w = trial;
                break;
            }
            t *= 0.5;
        }
    }
    w
}

fn map_objective(m: &[f64], q: &[f64], phi: &[f64], y: f64, w: &[f64]) -> f64 {
    let quad: f64 = (0..m.len())
        .map(|j| 0.5 * q[j] * (w[j] - m[j]).powi(2))
        .sum();
    let wphi: f64 = w.iter().zip(phi).map(|(a, b)| a * b).sum();
    let z = -y * wphi;
    // log(1 + exp(z)) without overflow
    let soft = if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    };
    quad + soft
}

/// Gaussian elimination with partial pivoting; consumes `a` (row-major d x d).
fn solve_dense(a: &mut [f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut x = b.to_vec();
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&i, &j| a[i * d + col].abs().total_cmp(&a[j * d + col].abs()))
            .unwrap();
        if pivot != col {
            for k in 0..d {
                a.swap(col * d + k, pivot * d + k);
            }
            x.swap(col, pivot);
        }
        let p = a[col * d + col];
        for row in col + 1..d {
            let f = a[row * d + col] / p;
            if f == 0.0 {
                continue;
            }
            for k in col..d {
                a[row * d + k] -= f * a[col * d + k];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..d).rev() {
        let mut acc = x[col];
        for k in col + 1..d {
            acc -= a[col * d + k] * x[k];
        }
        x[col] = acc / a[col * d + col];
    }
    x
}

/// SplitMix64: tiny self-contained generator for oracle Monte Carlo.
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in (0, 1).
    pub fn next_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    /// Standard normal via Box-Muller.
    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Monte-Carlo estimate of `E[logistic(b)]` for `b ~ Normal(mu, sigma2)`.
pub fn mc_logistic_gaussian(mu: f64, sigma2: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = SplitMix64(seed);
    let sd = sigma2.sqrt();
    let mut acc = 0.0;
    for _ in 0..samples {
        acc += logistic(mu + sd * rng.next_normal());
    }
    acc / samples as f64
}

/// Transitive closure by Floyd-Warshall over an undirected edge list.
pub fn reachability(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        reach[i][i] = true;
    }
    for &(a, b) in edges {
        reach[a][b] = true;
        reach[b][a] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

/// Modularity of a labeled partition, computed directly from the definition
/// `Q = sum_g [ e_g / m - (K_g / 2m)^2 ]` (within-group edges and degree mass).
pub fn modularity(n: usize, edges: &[(usize, usize)], groups: &[usize]) -> f64 {
    let m = edges.len();
    if m == 0 {
        return 0.0;
    }
    let ngroups = groups.iter().copied().max().unwrap_or(0) + 1;
    let mut within = vec![0.0; ngroups];
    let mut degree_mass = vec![0.0; ngroups];
    for &(a, b) in edges {
        if groups[a] == groups[b] {
            within[groups[a]] += 1.0;
        }
        degree_mass[groups[a]] += 1.0;
        degree_mass[groups[b]] += 1.0;
    }
    let _ = n;
    let m = m as f64;
    (0..ngroups)
        .map(|g| within[g] / m - (degree_mass[g] / (2.0 * m)).powi(2))
        .sum()
}

/// Exhaustive best bisection: maximizes modularity over every 2-coloring
/// (including the trivial one-group coloring). Only sensible for small n.
pub fn best_two_partition(n: usize, edges: &[(usize, usize)]) -> (Vec<usize>, f64) {
    assert!(n <= 20, "exhaustive search only works for small graphs");
    let mut best_groups = vec![0; n];
    let mut best_q = modularity(n, edges, &best_groups);
    for mask in 1u32..(1 << (n - 1)) {
        let groups: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
        let q = modularity(n, edges, &groups);
        if q > best_q {
            best_q = q;
            best_groups = groups;
        }
    }
    (best_groups, best_q)
}

/// Largest penalty at which every penalized coefficient of the logistic
/// lasso stays at zero: `lambda_max = max_j |x_j . (y - mean(y))| / n`.
pub fn lasso_lambda_max(columns: &[Vec<f64>], y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let ybar = y.iter().sum::<f64>() / n;
    columns
        .iter()
        .map(|col| col.iter().zip(y).map(|(x, yi)| x * (yi - ybar)).sum::<f64>().abs() / n)
        .fold(0.0, f64::max)
}

/// L1-penalized logistic regression by plain proximal gradient (ISTA) with an
/// unpenalized intercept. Slow but an entirely different algorithm from
/// coordinate descent, which makes it a useful cross-check.
pub fn ista_lasso_logistic(
    columns: &[Vec<f64>],
    y: &[f64],
    lambda: f64,
    iterations: usize,
) -> (f64, Vec<f64>) {
    let n = y.len();
    let p = columns.len();
    let nf = n as f64;
    // Lipschitz bound for the mean logistic loss: (1/4n) * ||[1 X]||_F^2.
    let mut lip = n as f64; // ones column
    for col in columns {
        lip += col.iter().map(|v| v * v).sum::<f64>();
    }
    lip /= 4.0 * nf;
    let step = 1.0 / lip;
    let mut w0 = 0.0;
    let mut w = vec![0.0; p];
    for _ in 0..iterations {
        let mut resid = vec![0.0; n]; // p_i - y_i
        for i in 0..n {
            let mut eta = w0;
            for j in 0..p {
                eta += w[j] * columns[j][i];
            }
            resid[i] = logistic(eta) - y[i];
        }
        let g0: f64 = resid.iter().sum::<f64>() / nf;
        w0 -= step * g0;
        for j in 0..p {
            let gj: f64 = columns[j].iter().zip(&resid).map(|(x, r)| x * r).sum::<f64>() / nf;
            let raw = w[j] - step * gj;
            let thr = step * lambda;
            w[j] = if raw > thr {
                raw - thr
            } else if raw < -thr {
                raw + thr
            } else {
                0.0
            };
        }
    }
    (w0, w)
}

/// Quantile by linear interpolation between order statistics (inclusive
/// endpoints): position `(len - 1) * p`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
