use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::bsbm_em::{PairMask, PROB_EPS};
use crate::error::{Error, Result};
use crate::fitter::{fit_masked, FitConfig};
use crate::{seeded_rng, SignedGraph};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSelection {
    pub chosen: usize,
    /// `(K, mean held-out log-probability)` in grid order.
    pub scores: Vec<(usize, f64)>,
}

/// Choose K by V-fold holdout over node pairs with default fit settings.
pub fn select_k(graph: &SignedGraph, k_grid: &[usize], folds: usize, seed: u64) -> Result<KSelection> {
    select_k_with(graph, k_grid, folds, &FitConfig { seed, ..FitConfig::default() })
}

/// Choose K by V-fold holdout over node pairs.
///
/// Unordered pairs are shuffled with `cfg.seed` and dealt round-robin into
/// `folds` folds. For each fold and each K the model is fitted with that fold's
/// pairs masked out, and each hidden pair is scored by the log-probability of
/// its outcome (`+1`, `-1` or no edge) under the fitted `P`, `Q` and hard
/// labels. A K's score is the mean over all held-out pairs; the best score wins
/// and ties go to the smaller K.
pub fn select_k_with(graph: &SignedGraph, k_grid: &[usize], folds: usize, cfg: &FitConfig) -> Result<KSelection> {
    let n = graph.n();
    if folds < 2 {
        return Err(Error::InvalidArgument("at least 2 folds are required".into()));
    }
    if k_grid.is_empty() {
        return Err(Error::InvalidArgument("K grid is empty".into()));
    }
    if let Some(&k) = k_grid.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::InvalidArgument(format!("K = {k} must be in 1..={n}")));
    }
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    pairs.shuffle(&mut seeded_rng(cfg.seed));
    let mut fold_pairs = vec![Vec::new(); folds];
    for (pos, pair) in pairs.into_iter().enumerate() {
        fold_pairs[pos % folds].push(pair);
    }
    if let Some(v) = fold_pairs.iter().position(Vec::is_empty) {
        return Err(Error::EmptyFold(v));
    }
    let masks = fold_pairs
        .iter()
        .map(|p| PairMask::new(n, p.iter().copied()))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..folds).flat_map(|v| k_grid.iter().map(move |&k| (v, k))).collect();
    let sums = jobs
        .par_iter()
        .map(|&(v, k)| {
            let fitted = fit_masked(graph, &FitConfig { k, ..cfg.clone() }, &masks[v])?;
            let z = fitted.labels.as_slice();
            let p = fitted.params.p();
            let clamp = |x: f64| x.clamp(PROB_EPS, 1.0 - PROB_EPS);
            let total: f64 = fold_pairs[v]
                .iter()
                .map(|&(i, j)| {
                    let (a, b) = (z[i], z[j]);
                    let (pe, q) = (clamp(p[(a, b)]), clamp(fitted.params.q_entry(a, b)));
                    match graph.sign(i, j) {
                        1 => pe.ln() + q.ln(),
                        -1 => pe.ln() + (1.0 - q).ln(),
                        _ => (1.0 - pe).ln(),
                    }
                })
                .sum();
            Ok(total)
        })
        .collect::<Vec<Result<f64>>>();

    let held_out: usize = fold_pairs.iter().map(Vec::len).sum();
    let mut scores: Vec<(usize, f64)> = k_grid.iter().map(|&k| (k, 0.0)).collect();
    for (&(_, k), s) in jobs.iter().zip(sums) {
        let s = s?;
        let slot = scores.iter_mut().find(|(kk, _)| *kk == k).expect("K from the grid");
        slot.1 += s;
    }
    for s in &mut scores {
        s.1 /= held_out as f64;
    }
    let mut order: Vec<&(usize, f64)> = scores.iter().collect();
    order.sort_by_key(|(k, _)| *k);
    let mut best = order[0];
    for cand in &order[1..] {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    Ok(KSelection { chosen: best.0, scores })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_grid_returns_that_k() {
        let g = SignedGraph::from_edges(6, [(0, 1, 1), (2, 3, -1), (4, 5, 1)]).unwrap();
        assert_eq!(select_k(&g, &[2], 2, 0).unwrap().chosen, 2);
    }

    #[test]
    fn empty_graph_ties_to_smallest() {
        let sel = select_k(&SignedGraph::empty(12), &[4, 2, 3], 3, 1).unwrap();
        assert_eq!(sel.chosen, 2);
        let expected = (1.0 - PROB_EPS).ln();
        assert!(sel.scores.iter().all(|&(_, s)| s == sel.scores[0].1));
        assert!((sel.scores[0].1 - expected).abs() < 1e-15);
    }

    #[test]
    fn too_few_pairs_is_an_empty_fold() {
        let g = SignedGraph::empty(2);
        assert!(matches!(select_k(&g, &[1], 2, 0), Err(Error::EmptyFold(1))));
        assert!(select_k(&g, &[1], 1, 0).is_err());
    }
}
