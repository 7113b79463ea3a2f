//! Spectral clustering with perturbations: a regularized adjacency embedding
//! followed by k-means. Used to seed the fitter and as the SCP baseline.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{top_eigenpairs, LanczosConfig};
use crate::{seeded_rng, Labels, SignedGraph};

/// Default weight of the all-ones perturbation, relative to the average degree.
pub const DEFAULT_TAU_REG: f64 = 0.25;
/// Number of k-means restarts used by [`scp_init`].
pub const SCP_KMEANS_RESTARTS: usize = 10;
const LLOYD_MAX_ITER: usize = 300;

/// Row-major `n x dim` point cloud; row `i` holds node `i`'s coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    n: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Embedding {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("rows have different lengths".into()));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            n: rows.len(),
            dim,
            data: rows.concat(),
        })
    }

    /// Build from column vectors (each of length `n`).
    pub fn from_columns(n: usize, cols: &[Vec<f64>]) -> Self {
        let dim = cols.len();
        let mut data = vec![0.0; n * dim];
        for (c, col) in cols.iter().enumerate() {
            for (i, &x) in col.iter().enumerate() {
                data[i * dim + c] = x;
            }
        }
        Self { n, dim, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.dim + c]).collect()
    }
}

/// Leading `k` eigenvectors (by `|lambda|`) of `|A| + (tau_reg * dbar / n) J`.
///
/// The rank-one term is applied as `x -> c (1ᵀx) 1`. On a graph with no
/// edges `dbar = 0` would switch the perturbation off entirely, so the
/// coefficient falls back to `tau_reg / n` there.
pub fn regularized_spectral_embedding(graph: &SignedGraph, k: usize, tau_reg: f64, seed: u64) -> Result<Embedding> {
    let n = graph.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("K = {k} must be in 1..={n}")));
    }
    if !(tau_reg >= 0.0) || !tau_reg.is_finite() {
        return Err(Error::InvalidArgument(format!("tau_reg = {tau_reg} must be non-negative")));
    }
    let dbar = graph.average_degree();
    let c = tau_reg * if dbar > 0.0 { dbar } else { 1.0 } / n as f64;
    let op = |x: &[f64], y: &mut [f64]| {
        let shift = c * x.iter().sum::<f64>();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = graph.neighbor_ids(i).iter().map(|&j| x[j]).sum::<f64>() + shift;
        }
    };
    let cfg = LanczosConfig {
        seed,
        ..LanczosConfig::default()
    };
    let pairs = top_eigenpairs(n, k, op, &cfg)?;
    Ok(Embedding::from_columns(n, &pairs.vectors))
}

/// Result of one k-means run.
#[derive(Debug, Clone)]
pub struct KmeansFit {
    pub labels: Labels,
    /// Within-cluster sum of squares of the returned partition.
    pub objective: f64,
    /// Objective after every Lloyd update of the winning run.
    pub trace: Vec<f64>,
    /// Index of the winning restart.
    pub restart: usize,
}

/// Best-of-`restarts` Lloyd's algorithm with k-means++ seeding.
pub fn kmeans(points: &Embedding, k: usize, seed: u64, restarts: usize) -> Result<Labels> {
    Ok(kmeans_detailed(points, k, seed, restarts)?.labels)
}

/// As [`kmeans`], also returning the objective and the per-iteration trace.
///
/// Restart `r` uses seed `seed + r`; restarts run in parallel and the winner is
/// the smallest objective, ties going to the lower restart index.
pub fn kmeans_detailed(points: &Embedding, k: usize, seed: u64, restarts: usize) -> Result<KmeansFit> {
    let n = points.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("K = {k} must be in 1..={n}")));
    }
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let runs: Vec<(Vec<usize>, f64, Vec<f64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| lloyd(points, k, seed.wrapping_add(r as u64)))
        .collect();
    let (restart, (z, objective, trace)) = runs
        .into_iter()
        .enumerate()
        .reduce(|best, cur| if cur.1 .1 < best.1 .1 { cur } else { best })
        .expect("restarts >= 1");
    Ok(KmeansFit {
        labels: Labels::new(z, k)?,
        objective,
        trace,
        restart,
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_seeds(points: &Embedding, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = points.n();
    let mut centers = vec![points.row(rng.random_range(0..n)).to_vec()];
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    idx = i;
                    break;
                }
                u -= w;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        let c = points.row(pick).to_vec();
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), &c));
        }
        centers.push(c);
    }
    centers
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, ctr) in centers.iter().enumerate() {
        let d = sq_dist(p, ctr);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn update_centers(points: &Embedding, z: &[usize], k: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let dim = points.dim();
    let mut centers = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (i, &l) in z.iter().enumerate() {
        counts[l] += 1;
        for (c, x) in centers[l].iter_mut().zip(points.row(i)) {
            *c += x;
        }
    }
    for (ctr, &m) in centers.iter_mut().zip(&counts) {
        if m > 0 {
            ctr.iter_mut().for_each(|x| *x /= m as f64);
        }
    }
    (centers, counts)
}

fn objective(points: &Embedding, z: &[usize], centers: &[Vec<f64>]) -> f64 {
    z.iter().enumerate().map(|(i, &l)| sq_dist(points.row(i), &centers[l])).sum()
}

/// Move the point farthest from its center in the largest cluster into each empty one.
fn repair_empty(points: &Embedding, z: &mut [usize], k: usize) {
    loop {
        let (centers, counts) = update_centers(points, z, k);
        let Some(empty) = counts.iter().position(|&m| m == 0) else {
            return;
        };
        let largest = (0..k).max_by_key(|&l| (counts[l], std::cmp::Reverse(l))).expect("k >= 1");
        if counts[largest] < 2 {
            return;
        }
        let far = (0..z.len())
            .filter(|&i| z[i] == largest)
            .map(|i| (i, sq_dist(points.row(i), &centers[largest])))
            .fold((usize::MAX, -1.0), |b, c| if c.1 > b.1 { c } else { b })
            .0;
        z[far] = empty;
    }
}

fn lloyd(points: &Embedding, k: usize, seed: u64) -> (Vec<usize>, f64, Vec<f64>) {
    let mut rng = seeded_rng(seed);
    let n = points.n();
    let mut centers = plus_plus_seeds(points, k, &mut rng);
    let mut z: Vec<usize> = (0..n).map(|i| nearest(points.row(i), &centers).0).collect();
    let mut trace = Vec::new();
    for _ in 0..LLOYD_MAX_ITER {
        repair_empty(points, &mut z, k);
        centers = update_centers(points, &z, k).0;
        trace.push(objective(points, &z, &centers));
        let mut changed = false;
        for (i, zi) in z.iter_mut().enumerate() {
            let (c, d) = nearest(points.row(i), &centers);
            // only move on a strict improvement so equal-distance points never cycle
            if c != *zi && d < sq_dist(points.row(i), &centers[*zi]) {
                *zi = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let obj = *trace.last().expect("at least one Lloyd step");
    (z, obj, trace)
}

/// Spectral clustering with perturbations on the connectivity pattern `|A|`.
pub fn scp_init(graph: &SignedGraph, k: usize, tau_reg: f64, seed: u64) -> Result<Labels> {
    let n = graph.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("K = {k} must be in 1..={n}")));
    }
    if k == 1 {
        return Labels::new(vec![0; n], 1);
    }
    // the embedding only reads neighbor ids, so signs are already ignored
    let emb = regularized_spectral_embedding(graph, k, tau_reg, seed)?;
    kmeans(&emb, k, seed, SCP_KMEANS_RESTARTS)
}

/// Spectral clustering on the signed adjacency `A`: the leading `k` eigenvectors
/// by `|lambda|`, each scaled by `|lambda|`, then k-means. No rank-one
/// perturbation is added since a constant shift would bias toward positive ties.
pub fn signed_spectral_init(graph: &SignedGraph, k: usize, seed: u64) -> Result<Labels> {
    let n = graph.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("K = {k} must be in 1..={n}")));
    }
    if k == 1 {
        return Labels::new(vec![0; n], 1);
    }
    let op = |x: &[f64], y: &mut [f64]| {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = graph.neighbors(i).map(|(j, s)| f64::from(s) * x[j]).sum();
        }
    };
    let cfg = LanczosConfig {
        seed,
        ..LanczosConfig::default()
    };
    let pairs = top_eigenpairs(n, k, op, &cfg)?;
    let cols: Vec<Vec<f64>> = pairs
        .values
        .iter()
        .zip(&pairs.vectors)
        .map(|(lam, v)| v.iter().map(|x| x * lam.abs()).collect())
        .collect();
    kmeans(&Embedding::from_columns(n, &cols), k, seed, SCP_KMEANS_RESTARTS)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cliques(m: usize) -> SignedGraph {
        let mut edges = Vec::new();
        for base in [0, m] {
            for i in 0..m {
                for j in (i + 1)..m {
                    edges.push((base + i, base + j, 1i8));
                }
            }
        }
        SignedGraph::from_edges(2 * m, edges).unwrap()
    }

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    #[test]
    fn cliques_are_separated() {
        let g = two_cliques(5);
        let z = scp_init(&g, 2, 0.0, 1).unwrap();
        let truth: Vec<usize> = (0..10).map(|i| i / 5).collect();
        assert!(same_partition(z.as_slice(), &truth));
    }

    #[test]
    fn empty_graph_embeds_to_constant() {
        let g = SignedGraph::empty(8);
        let emb = regularized_spectral_embedding(&g, 1, DEFAULT_TAU_REG, 3).unwrap();
        let c = 1.0 / 8f64.sqrt();
        assert!(emb.column(0).iter().all(|&v| (v - c).abs() < 1e-10));
    }

    #[test]
    fn columns_are_orthonormal() {
        let g = two_cliques(6);
        let emb = regularized_spectral_embedding(&g, 3, DEFAULT_TAU_REG, 5).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let d: f64 = emb.column(a).iter().zip(emb.column(b)).map(|(x, y)| x * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-8, "({a},{b}) -> {d}");
            }
        }
    }

    #[test]
    fn single_community_is_all_zero() {
        let z = scp_init(&two_cliques(3), 1, DEFAULT_TAU_REG, 0).unwrap();
        assert!(z.as_slice().iter().all(|&l| l == 0));
    }

    #[test]
    fn k_larger_than_n_rejected() {
        assert!(regularized_spectral_embedding(&SignedGraph::empty(3), 4, 0.25, 0).is_err());
    }

    #[test]
    fn kmeans_separates_obvious_pairs() {
        let pts = Embedding::from_rows(&[vec![0.0], vec![0.1], vec![10.0], vec![10.1]]).unwrap();
        let z = kmeans(&pts, 2, 0, 3).unwrap();
        assert!(same_partition(z.as_slice(), &[0, 0, 1, 1]));
    }

    #[test]
    fn identical_points_give_zero_objective() {
        let pts = Embedding::from_rows(&vec![vec![1.5, -2.0]; 6]).unwrap();
        let fit = kmeans_detailed(&pts, 2, 7, 4).unwrap();
        assert_eq!(fit.objective, 0.0);
        assert_eq!(fit.labels.len(), 6);
    }

    #[test]
    fn empty_cluster_repair_keeps_all_classes() {
        let pts = Embedding::from_rows(&[vec![0.0], vec![0.0], vec![0.0], vec![5.0]]).unwrap();
        let fit = kmeans_detailed(&pts, 3, 0, 1).unwrap();
        assert!(fit.labels.empty_classes().is_empty());
    }

    #[test]
    fn restarts_parallel_equals_sequential() {
        let mut rng = seeded_rng(4);
        let rows: Vec<Vec<f64>> = (0..80).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let pts = Embedding::from_rows(&rows).unwrap();
        let fit = kmeans_detailed(&pts, 4, 11, 6).unwrap();
        let seq: Vec<f64> = (0..6).map(|r| lloyd(&pts, 4, 11 + r).1).collect();
        let best = seq.iter().cloned().fold(f64::INFINITY, f64::min);
        let first = seq.iter().position(|&o| o == best).unwrap();
        assert_eq!(fit.objective, best);
        assert_eq!(fit.restart, first);
        assert_eq!(fit.labels.as_slice(), lloyd(&pts, 4, 11 + first as u64).0.as_slice());
    }
}
