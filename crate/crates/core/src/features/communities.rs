//! Modularity-based community detection by recursive spectral bisection.
//!
//! Each candidate group is split along the sign pattern of the leading
//! eigenvector of its (generalized) modularity matrix
//! `B(g)_ij = A_ij - k_i k_j / 2m - delta_ij sum_{l in g} B_il`,
//! found by power iteration on the matrix shifted into the positive
//! spectrum. A split is kept only when its exact modularity gain is
//! positive; otherwise the group is final. Splitting starts from the
//! connected components, so communities never straddle components.

use super::graph::{connected_components, Partition, SimilarityGraph};

const GAIN_EPS: f64 = 1e-10;
const POWER_TOL: f64 = 1e-9;
const POWER_MAX_ITER: usize = 10_000;

/// A node partition together with its modularity.
#[derive(Debug, Clone, PartialEq)]
pub struct Communities {
    pub partition: Partition,
    pub modularity: f64,
}

/// Split the graph into modularity communities. An edgeless graph comes back
/// as all singletons with modularity defined as 0.
pub fn spectral_communities(graph: &SimilarityGraph) -> Communities {
    let n = graph.node_count();
    let m = graph.edge_count();
    if m == 0 {
        return Communities {
            partition: Partition::new((0..n).collect()),
            modularity: 0.0,
        };
    }
    let degrees: Vec<f64> = (0..n).map(|i| graph.degree(i) as f64).collect();
    let two_m = 2.0 * m as f64;

    let mut final_groups: Vec<Vec<usize>> = Vec::new();
    let mut work: Vec<Vec<usize>> = connected_components(graph).groups();
    while let Some(group) = work.pop() {
        match try_split(graph, &degrees, two_m, &group) {
            Some((left, right)) => {
                work.push(left);
                work.push(right);
            }
            None => final_groups.push(group),
        }
    }

    let mut labels = vec![0usize; n];
    for (id, group) in final_groups.iter().enumerate() {
        for &node in group {
            labels[node] = id;
        }
    }
    let partition = Partition::new(labels);
    let modularity = partition_modularity(graph, &partition);
    Communities { partition, modularity }
}

/// Modularity `Q = sum_g [ e_g / m - (K_g / 2m)^2 ]` of a partition, where
/// `e_g` counts within-group edges and `K_g` sums group degrees.
pub(crate) fn partition_modularity(graph: &SimilarityGraph, partition: &Partition) -> f64 {
    let m = graph.edge_count();
    if m == 0 {
        return 0.0;
    }
    let mut within = vec![0.0; partition.num_groups()];
    let mut degree_mass = vec![0.0; partition.num_groups()];
    for &(a, b, _) in graph.edges() {
        if partition.group_of(a) == partition.group_of(b) {
            within[partition.group_of(a)] += 1.0;
        }
        degree_mass[partition.group_of(a)] += 1.0;
        degree_mass[partition.group_of(b)] += 1.0;
    }
    let m = m as f64;
    (0..partition.num_groups())
        .map(|g| within[g] / m - (degree_mass[g] / (2.0 * m)).powi(2))
        .sum()
}

/// Attempt one spectral bisection of `group`; `None` when no positive-gain
/// split exists (or the group is a single node).
fn try_split(
    graph: &SimilarityGraph,
    degrees: &[f64],
    two_m: f64,
    group: &[usize],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let ng = group.len();
    if ng < 2 {
        return None;
    }

    // Dense generalized modularity matrix restricted to the group.
    let mut b = vec![0.0; ng * ng];
    for (i, &gi) in group.iter().enumerate() {
        for (j, &gj) in group.iter().enumerate() {
            let adj = if i != j && graph.has_edge(gi, gj) { 1.0 } else { 0.0 };
            b[i * ng + j] = adj - degrees[gi] * degrees[gj] / two_m;
        }
    }
    for i in 0..ng {
        let row_sum: f64 = (0..ng).map(|j| b[i * ng + j]).sum();
        b[i * ng + i] -= row_sum;
    }

    let shift = (0..ng)
        .map(|i| (0..ng).map(|j| b[i * ng + j].abs()).sum::<f64>())
        .fold(0.0, f64::max);

    // Power iteration on B + shift*I: the dominant eigenvalue is the most
    // positive eigenvalue of B, shifted into [0, 2*shift].
    let mut v: Vec<f64> = (0..ng).map(|i| 1.0 + 1e-3 * (i % 7) as f64).collect();
    normalize(&mut v);
    let mut w = vec![0.0; ng];
    for _ in 0..POWER_MAX_ITER {
        for i in 0..ng {
            let mut acc = shift * v[i];
            for j in 0..ng {
                acc += b[i * ng + j] * v[j];
            }
            w[i] = acc;
        }
        if !normalize(&mut w) {
            return None; // start vector annihilated; no usable direction
        }
        let delta = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut w);
        if delta < POWER_TOL {
            break;
        }
    }

    let signs: Vec<f64> = v.iter().map(|&x| if x >= 0.0 { 1.0 } else { -1.0 }).collect();
    // Exact gain of the sign split: (1/4m) s^T B(g) s.
    let mut gain = 0.0;
    for i in 0..ng {
        let mut acc = 0.0;
        for j in 0..ng {
            acc += b[i * ng + j] * signs[j];
        }
        gain += signs[i] * acc;
    }
    gain /= 2.0 * two_m;
    if gain <= GAIN_EPS {
        return None;
    }

    let mut left = Vec::new();
    let mut right = Vec::new();
    for (i, &node) in group.iter().enumerate() {
        if signs[i] > 0.0 {
            left.push(node);
        } else {
            right.push(node);
        }
    }
    if left.is_empty() || right.is_empty() {
        return None;
    }
    Some((left, right))
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return false;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    true
}
