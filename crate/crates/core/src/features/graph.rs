//! Cosine-similarity graphs over binary columns and their components.

use std::collections::HashMap;
use std::io::Read;

use crate::error::{Error, Result};

/// Named binary columns of equal length; the unit of graph construction.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMatrix {
    names: Vec<String>,
    columns: Vec<Vec<u8>>,
    n_rows: usize,
}

impl BinaryMatrix {
    pub fn new<S: Into<String>>(names: Vec<S>, columns: Vec<Vec<u8>>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() != columns.len() {
            return Err(Error::Dimension(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let mut seen = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if seen.insert(name.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate column name '{name}'")));
            }
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(Error::Dimension(format!(
                    "column '{name}' has {} rows, expected {n_rows}",
                    col.len()
                )));
            }
            if col.iter().any(|&v| v > 1) {
                return Err(Error::Domain(format!(
                    "column '{name}' contains a value outside {{0, 1}}"
                )));
            }
        }
        Ok(Self { names, columns, n_rows })
    }

    /// Read a flat CSV of 0/1 columns, skipping any column named in
    /// `exclude` (identifier or label columns).
    pub fn from_csv_reader<R: Read>(reader: R, exclude: &[&str]) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = csv.headers()?.clone();
        let keep: Vec<(usize, String)> = headers
            .iter()
            .enumerate()
            .filter(|(_, name)| !exclude.contains(name))
            .map(|(i, name)| (i, name.to_string()))
            .collect();
        let mut columns: Vec<Vec<u8>> = vec![Vec::new(); keep.len()];
        for record in csv.records() {
            let record = record?;
            for (slot, (i, name)) in keep.iter().enumerate() {
                let raw = record.get(*i).unwrap_or("").trim();
                let value = match raw {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(Error::Parse(format!(
                            "column '{name}': expected 0 or 1, got '{other}'"
                        )))
                    }
                };
                columns[slot].push(value);
            }
        }
        Self::new(keep.into_iter().map(|(_, n)| n).collect(), columns)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, i: usize) -> &[u8] {
        &self.columns[i]
    }

    /// Collapse columns into groups by OR-pooling: a row's value for a group
    /// is 1 when any member column is 1. Group names follow `partition`
    /// order as `g<id>`.
    pub fn pooled(&self, partition: &Partition) -> Result<BinaryMatrix> {
        if partition.len() != self.n_cols() {
            return Err(Error::Dimension(format!(
                "partition covers {} nodes, matrix has {} columns",
                partition.len(),
                self.n_cols()
            )));
        }
        let ngroups = partition.num_groups();
        let mut columns = vec![vec![0u8; self.n_rows]; ngroups];
        for (col, &group) in partition.assignment().iter().enumerate() {
            for (row, &v) in self.columns[col].iter().enumerate() {
                columns[group][row] |= v;
            }
        }
        let names: Vec<String> = (0..ngroups).map(|g| format!("g{g}")).collect();
        BinaryMatrix::new(names, columns)
    }
}

/// Undirected graph whose nodes are matrix columns; each edge stores the
/// cosine similarity that put it over the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    names: Vec<String>,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize, f64)>,
}

impl SimilarityGraph {
    /// Build from an explicit edge list (mainly for tests and small tools).
    pub fn from_edges<S: Into<String>>(names: Vec<S>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let n = names.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::Domain(format!("invalid edge ({a}, {b}) for {n} nodes")));
            }
            let (lo, hi) = (a.min(b), a.max(b));
            adjacency[lo].push(hi);
            adjacency[hi].push(lo);
            normalized.push((lo, hi, w));
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        normalized.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        Ok(Self { names, adjacency, edges: normalized })
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }
}

/// Grouping of graph nodes into contiguous ids starting at 0, numbered by
/// first appearance in node order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    num_groups: usize,
}

impl Partition {
    /// Relabels arbitrary group labels into the canonical contiguous form.
    pub fn new(raw: Vec<usize>) -> Self {
        let mut relabel: HashMap<usize, usize> = HashMap::new();
        let mut assignment = Vec::with_capacity(raw.len());
        for label in raw {
            let next = relabel.len();
            assignment.push(*relabel.entry(label).or_insert(next));
        }
        let num_groups = relabel.len();
        Self { assignment, num_groups }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    pub fn group_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Node ids of each group, in group order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_groups];
        for (node, &g) in self.assignment.iter().enumerate() {
            out[g].push(node);
        }
        out
    }

    /// True when both partitions induce the same grouping, whatever the ids.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.len() == other.len() && {
            let a = Partition::new(self.assignment.clone());
            let b = Partition::new(other.assignment.clone());
            a.assignment == b.assignment
        }
    }
}

/// Connect columns whose cosine similarity reaches `threshold`.
///
/// For binary columns the cosine is `|a & b| / sqrt(|a| |b|)`. All-zero
/// columns have no direction and stay isolated.
pub fn cosine_graph(matrix: &BinaryMatrix, threshold: f64) -> Result<SimilarityGraph> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Domain(format!(
            "threshold must lie in [0, 1], got {threshold}"
        )));
    }
    let n = matrix.n_cols();
    let ones: Vec<f64> = (0..n)
        .map(|i| matrix.column(i).iter().map(|&v| v as f64).sum())
        .collect();
    let mut edges = Vec::new();
    for a in 0..n {
        if ones[a] == 0.0 {
            continue;
        }
        for b in a + 1..n {
            if ones[b] == 0.0 {
                continue;
            }
            let both: f64 = matrix
                .column(a)
                .iter()
                .zip(matrix.column(b))
                .map(|(&x, &y)| (x & y) as f64)
                .sum();
            let cosine = both / (ones[a] * ones[b]).sqrt();
            if cosine >= threshold {
                edges.push((a, b, cosine));
            }
        }
    }
    SimilarityGraph::from_edges(matrix.names().to_vec(), edges)
}

/// Label connected components by breadth-first search in node order.
pub fn connected_components(graph: &SimilarityGraph) -> Partition {
    let n = graph.node_count();
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        labels[start] = next;
        queue.push_back(start);
        while let Some(node) = queue.pop_front() {
            for &nbr in graph.neighbors(node) {
                if labels[nbr] == usize::MAX {
                    labels[nbr] = next;
                    queue.push_back(nbr);
                }
            }
        }
        next += 1;
    }
    Partition::new(labels)
}
