//! Comparison methods: sign-only matrix completion (MC) and the binary profile
//! pseudo-likelihood (PPL, PPL-merge). The connectivity-only spectral method is
//! [`crate::spectral_init::scp_init`].

use crate::error::{Error, Result};
use crate::fitter::{fit, FitConfig};
use crate::linalg::{top_eigenpairs, LanczosConfig};
use crate::spectral_init::{kmeans, Embedding, SCP_KMEANS_RESTARTS};
use crate::{BinarizeMode, Labels, SignedGraph};

pub const DEFAULT_MC_ITERS: usize = 30;

/// Soft-impute completion of the signed adjacency, treating non-edges (and the
/// diagonal) as missing, then k-means on the rank-`K` factor.
///
/// Each round takes the rank-`K` truncated SVD of the current fill `X`, then
/// resets the observed entries to their signs. `X` is symmetric, so its SVD
/// comes from the `K` eigenpairs of largest `|lambda|`. `X` is never formed:
/// `X = A + L - P_obs(L)` with `L` the low-rank part.
pub fn fit_mc(graph: &SignedGraph, k: usize, iters: usize, seed: u64) -> Result<Labels> {
    let n = graph.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("K = {k} must be in 1..={n}")));
    }
    if k == 1 {
        return Labels::new(vec![0; n], 1);
    }
    let mut low: Vec<(f64, Vec<f64>)> = Vec::new();
    for it in 0..iters.max(1) {
        let op = |x: &[f64], y: &mut [f64]| {
            let proj: Vec<f64> = low.iter().map(|(lam, v)| lam * dot(v, x)).collect();
            for (i, yi) in y.iter_mut().enumerate() {
                let mut s = 0.0;
                for (j, sign) in graph.neighbors(i) {
                    // observed entry: the sign itself replaces the low-rank value
                    let lij: f64 = low.iter().map(|(lam, v)| lam * v[i] * v[j]).sum();
                    s += f64::from(sign) * x[j] - lij * x[j];
                }
                s += low.iter().zip(&proj).map(|((_, v), p)| v[i] * p).sum::<f64>();
                *yi = s;
            }
        };
        let cfg = LanczosConfig {
            seed: seed.wrapping_add(it as u64),
            ..LanczosConfig::default()
        };
        let pairs = top_eigenpairs(n, k, op, &cfg)?;
        low = pairs.values.into_iter().zip(pairs.vectors).collect();
    }
    let cols: Vec<Vec<f64>> = low
        .iter()
        .map(|(lam, v)| v.iter().map(|x| x * lam.abs()).collect())
        .collect();
    kmeans(&Embedding::from_columns(n, &cols), k, seed, SCP_KMEANS_RESTARTS)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The fitter on the binarized graph with the sign model switched off.
/// `merge = false` keeps all edges (PPL); `merge = true` drops negative edges (PPL-merge).
pub fn fit_ppl_binary(graph: &SignedGraph, k: usize, cfg: &FitConfig, merge: bool) -> Result<Labels> {
    let mode = if merge {
        BinarizeMode::Merge
    } else {
        BinarizeMode::Connectivity
    };
    let cfg = FitConfig {
        k,
        frozen_q: true,
        ..cfg.clone()
    };
    Ok(fit(&graph.binarize(mode), &cfg)?.labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anti_aligned(m: usize) -> SignedGraph {
        let n = 2 * m;
        let side = |i: usize| if i < m { 1i8 } else { -1 };
        let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j, side(i) * side(j))));
        SignedGraph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn mc_splits_complete_rank_one_pattern() {
        let z = fit_mc(&anti_aligned(6), 2, DEFAULT_MC_ITERS, 1).unwrap();
        let truth: Vec<usize> = (0..12).map(|i| i / 6).collect();
        let s = z.as_slice();
        assert!((0..12).all(|i| (0..12).all(|j| (s[i] == s[j]) == (truth[i] == truth[j]))));
    }

    #[test]
    fn mc_on_empty_graph_returns_labels() {
        let z = fit_mc(&SignedGraph::empty(10), 2, 3, 0).unwrap();
        assert_eq!(z.len(), 10);
    }

    #[test]
    fn ppl_is_sign_blind() {
        let g = anti_aligned(5);
        let flipped = SignedGraph::from_edges(10, g.edges().map(|(i, j, s)| (i, j, if (i + j) % 3 == 0 { -s } else { s }))).unwrap();
        let cfg = FitConfig::new(2);
        assert_eq!(
            fit_ppl_binary(&g, 2, &cfg, false).unwrap(),
            fit_ppl_binary(&flipped, 2, &cfg, false).unwrap()
        );
    }
}
