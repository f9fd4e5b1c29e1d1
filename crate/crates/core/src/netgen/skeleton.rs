use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::NetError;

/// A directed interbank edge. Default shocks flow from `debtor` to
/// `creditor`, stress shocks the other way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub debtor: u32,
    pub creditor: u32,
}

impl Edge {
    pub fn new(debtor: usize, creditor: usize) -> Self {
        Edge { debtor: debtor as u32, creditor: creditor as u32 }
    }
}

/// Directed graph of interbank exposures with adjacency in both directions.
///
/// For node `v`, the in-edges come from its debtors (count `j_v`) and the
/// out-edges go to its creditors (count `k_v`).
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    n: usize,
    edges: Vec<Edge>,
    in_offsets: Vec<usize>,
    in_index: Vec<usize>,
    out_offsets: Vec<usize>,
    out_index: Vec<usize>,
}

fn csr(n: usize, keys: impl Iterator<Item = usize> + Clone) -> (Vec<usize>, Vec<usize>) {
    let mut offsets = vec![0usize; n + 1];
    for k in keys.clone() {
        offsets[k + 1] += 1;
    }
    for v in 0..n {
        offsets[v + 1] += offsets[v];
    }
    let mut fill = offsets.clone();
    let mut index = vec![0usize; offsets[n]];
    for (e, k) in keys.enumerate() {
        index[fill[k]] = e;
        fill[k] += 1;
    }
    (offsets, index)
}

impl Skeleton {
    /// Validates and indexes an edge list: no self-loops, no repeated edges.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self, NetError> {
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            let (v, w) = (e.debtor as usize, e.creditor as usize);
            if v >= n || w >= n {
                return Err(NetError::NodeOutOfRange { node: v.max(w), n });
            }
            if v == w {
                return Err(NetError::SelfLoop(v));
            }
            if !seen.insert(*e) {
                return Err(NetError::DuplicateEdge(v, w));
            }
        }
        Ok(Self::from_trusted(n, edges))
    }

    pub(crate) fn from_trusted(n: usize, edges: Vec<Edge>) -> Self {
        let (in_offsets, in_index) = csr(n, edges.iter().map(|e| e.creditor as usize));
        let (out_offsets, out_index) = csr(n, edges.iter().map(|e| e.debtor as usize));
        Skeleton { n, edges, in_offsets, in_index, out_offsets, out_index }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_trusted(n, Vec::new())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    /// `j_v`: number of debtors of `v`.
    pub fn in_degree(&self, v: usize) -> usize {
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    /// `k_v`: number of creditors of `v`.
    pub fn out_degree(&self, v: usize) -> usize {
        self.out_offsets[v + 1] - self.out_offsets[v]
    }

    /// Indices of edges pointing into `v`.
    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_index[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    /// Indices of edges leaving `v`.
    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_index[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    /// Node type `(j, k)`.
    pub fn node_type(&self, v: usize) -> (usize, usize) {
        (self.in_degree(v), self.out_degree(v))
    }

    /// Edge type `(k, j)`: out-degree of the debtor, in-degree of the creditor.
    pub fn edge_type(&self, e: usize) -> (usize, usize) {
        let edge = self.edges[e];
        (self.out_degree(edge.debtor as usize), self.in_degree(edge.creditor as usize))
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.in_degree(v).max(self.out_degree(v))).max().unwrap_or(0)
    }

    /// Mean in-degree, which equals the mean out-degree.
    pub fn mean_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.edges.len() as f64 / self.n as f64
        }
    }

    pub fn has_edge(&self, debtor: usize, creditor: usize) -> bool {
        self.out_edges(debtor).iter().any(|&e| self.edges[e].creditor as usize == creditor)
    }
}
