//! Signed networks: storage, edge-list I/O, BSBM sampling and balance diagnostics.
//!
//! A [`SignedGraph`] is an undirected simple graph whose edges carry a sign in
//! `{-1, +1}`. Absent pairs read as `0` and the diagonal is always `0`.

mod balance;
mod io;
mod params;
mod sample;

pub use balance::{empirical_balance, population_balance, BalanceCounts, MAX_ENUMERATION_K};
pub use io::{
    load_edge_list, read_edge_list_file, read_labels, read_labels_file, save_edge_list,
    write_edge_list_file, write_labels, write_labels_file,
};
pub use params::BsbmParams;
pub use sample::sample_bsbm;

use crate::error::{Error, Result};

/// Symmetric sparse signed adjacency in CSR form.
///
/// Row `i` holds the neighbours of `i` sorted by node id, each with its sign.
/// Every undirected edge is stored twice (once per endpoint).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGraph {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedGraph {
    /// Graph with `n` isolated nodes.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            signs: Vec::new(),
        }
    }

    /// Build from undirected signed edges. Either orientation is accepted.
    ///
    /// Repeated pairs with the same sign collapse to one edge; repeated pairs
    /// with different signs, self-loops, signs outside `{-1, 1}` and ids `>= n`
    /// are rejected. Errors report the 1-based position of the offending edge.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, i8)>,
    {
        let mut canon: Vec<(usize, usize, i8, usize)> = Vec::new();
        for (pos, (u, v, s)) in edges.into_iter().enumerate() {
            let line = pos + 1;
            if u >= n || v >= n {
                return Err(Error::NodeOutOfRange { node: u.max(v), n });
            }
            if u == v {
                return Err(Error::SelfLoop { line, node: u });
            }
            if s != 1 && s != -1 {
                return Err(Error::Parse {
                    line,
                    msg: format!("sign must be -1 or 1, got {s}"),
                });
            }
            canon.push((u.min(v), u.max(v), s, line));
        }
        Self::from_canonical(n, canon)
    }

    /// `edges` carries (i < j, sign, source line).
    pub(crate) fn from_canonical(n: usize, mut edges: Vec<(usize, usize, i8, usize)>) -> Result<Self> {
        edges.sort_by_key(|&(i, j, _, line)| (i, j, line));
        let mut dedup: Vec<(usize, usize, i8)> = Vec::with_capacity(edges.len());
        for (i, j, s, line) in edges {
            if let Some(&(pi, pj, ps)) = dedup.last() {
                if pi == i && pj == j {
                    if ps != s {
                        return Err(Error::ConflictingDuplicate { line, u: i, v: j });
                    }
                    continue;
                }
            }
            dedup.push((i, j, s));
        }

        let mut row_ptr = vec![0usize; n + 1];
        for &(i, j, _) in &dedup {
            row_ptr[i + 1] += 1;
            row_ptr[j + 1] += 1;
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        let nnz = row_ptr[n];
        let mut cols = vec![0usize; nnz];
        let mut signs = vec![0i8; nnz];
        let mut fill = row_ptr.clone();
        // `dedup` is sorted by (i, j), so appending in this order keeps every row sorted:
        // row r first receives its smaller neighbours (as j), then its larger ones (as i).
        let mut by_lower: Vec<(usize, usize, i8)> = dedup.iter().map(|&(i, j, s)| (j, i, s)).collect();
        by_lower.sort_unstable();
        for &(j, i, s) in &by_lower {
            cols[fill[j]] = i;
            signs[fill[j]] = s;
            fill[j] += 1;
        }
        for &(i, j, s) in &dedup {
            cols[fill[i]] = j;
            signs[fill[i]] = s;
            fill[i] += 1;
        }
        Ok(Self {
            n,
            row_ptr,
            cols,
            signs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.cols.len() / 2
    }

    pub fn positive_count(&self) -> usize {
        self.signs.iter().filter(|&&s| s > 0).count() / 2
    }

    pub fn negative_count(&self) -> usize {
        self.signs.iter().filter(|&&s| s < 0).count() / 2
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Neighbour ids of `i`, ascending.
    pub fn neighbor_ids(&self, i: usize) -> &[usize] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Signs aligned with [`neighbor_ids`](Self::neighbor_ids).
    pub fn neighbor_signs(&self, i: usize) -> &[i8] {
        &self.signs[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        self.neighbor_ids(i)
            .iter()
            .copied()
            .zip(self.neighbor_signs(i).iter().copied())
    }

    /// `A(i, j)`: the sign of the edge, or 0 when absent (always 0 on the diagonal).
    pub fn sign(&self, i: usize, j: usize) -> i8 {
        if i == j || i >= self.n || j >= self.n {
            return 0;
        }
        match self.neighbor_ids(i).binary_search(&j) {
            Ok(p) => self.neighbor_signs(i)[p],
            Err(_) => 0,
        }
    }

    /// Canonical edge list: `(i, j, s)` with `i < j`, sorted by `(i, j)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i)
                .filter(move |&(j, _)| j > i)
                .map(move |(j, s)| (i, j, s))
        })
    }

    pub fn average_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.cols.len() as f64 / self.n as f64
        }
    }

    /// Relabel nodes: node `i` becomes `perm[i]`.
    pub fn permute_nodes(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::LengthMismatch(perm.len(), self.n));
        }
        Self::from_edges(self.n, self.edges().map(|(i, j, s)| (perm[i], perm[j], s)))
    }

    /// Sign-stripped or negative-dropped copy, see [`BinarizeMode`].
    pub fn binarize(&self, mode: BinarizeMode) -> Self {
        let edges: Vec<(usize, usize, i8, usize)> = match mode {
            BinarizeMode::Connectivity => self.edges().map(|(i, j, _)| (i, j, 1, 0)).collect(),
            BinarizeMode::Merge => self
                .edges()
                .filter(|&(_, _, s)| s > 0)
                .map(|(i, j, s)| (i, j, s, 0))
                .collect(),
        };
        Self::from_canonical(self.n, edges).expect("edges of a valid graph stay valid")
    }
}

/// How [`SignedGraph::binarize`] discards sign information.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinarizeMode {
    /// Keep every edge, set its sign to +1 (the unsigned graph `|A|`).
    Connectivity,
    /// Drop negative edges, i.e. merge them with non-edges.
    Merge,
}

/// Hard community assignment with values in `0..k`.
///
/// Not every community needs to be occupied.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labels {
    k: usize,
    z: Vec<usize>,
}

impl Labels {
    pub fn new(z: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("community count must be at least 1".into()));
        }
        if let Some(&bad) = z.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for K = {k}"
            )));
        }
        Ok(Self { k, z })
    }

    /// Infer `k` as one more than the largest label.
    pub fn from_vec(z: Vec<usize>) -> Self {
        let k = z.iter().copied().max().map_or(1, |m| m + 1);
        Self { k, z }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.z
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.z
    }

    pub fn get(&self, i: usize) -> usize {
        self.z[i]
    }

    /// Class sizes, length `k`.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.k];
        for &l in &self.z {
            c[l] += 1;
        }
        c
    }

    /// Communities with no members.
    pub fn empty_classes(&self) -> Vec<usize> {
        self.counts()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == 0)
            .map(|(l, _)| l)
            .collect()
    }
}
