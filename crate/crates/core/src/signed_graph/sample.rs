use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::{BsbmParams, Labels, SignedGraph};
use crate::error::{Error, Result};
use crate::seeded_rng;

/// Draw labels `z_i ~ Cat(pi)` and then every pair `i < j` independently:
/// an edge with probability `P(z_i, z_j)`, positive with probability `Q(z_i, z_j)`.
///
/// Pairs are visited in `(i, j)` order so the output is a pure function of `seed`.
pub fn sample_bsbm(params: &BsbmParams, n: usize, seed: u64) -> Result<(SignedGraph, Labels)> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 nodes, got {n}")));
    }
    let k = params.k();
    let mut rng = seeded_rng(seed);
    let cat = WeightedIndex::new(params.pi())
        .map_err(|e| Error::InvalidParams(format!("pi cannot be sampled: {e}")))?;
    let z: Vec<usize> = (0..n).map(|_| cat.sample(&mut rng)).collect();

    let p = params.p();
    let q = params.q();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (z[i], z[j]);
            if rng.random::<f64>() < p[(a, b)] {
                let s = if rng.random::<f64>() < q[(a, b)] { 1 } else { -1 };
                edges.push((i, j, s, 0));
            }
        }
    }
    let graph = SignedGraph::from_canonical(n, edges)?;
    Ok((graph, Labels::new(z, k)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn zero_edge_probability_gives_empty_graph() {
        let params = BsbmParams::planted(
            vec![0.5, 0.5],
            0.0,
            0.0,
            DMatrix::from_element(2, 2, 0.3),
            vec![1, -1],
        )
        .unwrap();
        let (g, z) = sample_bsbm(&params, 50, 3).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(z.len(), 50);
    }

    #[test]
    fn degenerate_single_community_is_complete_positive() {
        let params = BsbmParams::planted(vec![1.0], 1.0, 1.0, DMatrix::from_element(1, 1, 1.0), vec![1]).unwrap();
        let (g, z) = sample_bsbm(&params, 4, 11).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.positive_count(), 6);
        assert!(z.as_slice().iter().all(|&l| l == 0));
    }

    #[test]
    fn same_seed_is_reproducible() {
        let params = BsbmParams::planted(
            vec![0.3, 0.7],
            0.2,
            0.05,
            DMatrix::from_element(2, 2, 0.6),
            vec![1, -1],
        )
        .unwrap();
        let a = sample_bsbm(&params, 200, 42).unwrap();
        let b = sample_bsbm(&params, 200, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_bsbm(&params, 200, 43).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn rejects_tiny_n() {
        let params = BsbmParams::planted(vec![1.0], 0.5, 0.5, DMatrix::from_element(1, 1, 0.5), vec![1]).unwrap();
        assert!(sample_bsbm(&params, 1, 0).is_err());
    }
}
