use super::{BsbmParams, SignedGraph};
use crate::error::{Error, Result};

/// Largest K for which the K³ enumeration in [`population_balance`] runs.
pub const MAX_ENUMERATION_K: usize = 64;

/// `E(A_ij A_jk A_ki | |A_ij A_jk A_ki| = 1)` for three distinct nodes, by exact
/// enumeration of the label triple.
///
/// Given labels `(a, b, c)`, each sign has mean `2Q - 1 = eta nu nu`, and the
/// three `nu` factors pair up, so the numerator term is
/// `P_ab P_bc P_ca eta_ab eta_bc eta_ca`.
pub fn population_balance(params: &BsbmParams) -> Result<f64> {
    let k = params.k();
    if k > MAX_ENUMERATION_K {
        return Err(Error::InvalidArgument(format!(
            "K = {k} exceeds the enumeration limit {MAX_ENUMERATION_K}"
        )));
    }
    let (pi, p) = (params.pi(), params.p());
    let q = params.q();
    let mut num = 0.0;
    let mut den = 0.0;
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                let w = pi[a] * pi[b] * pi[c] * p[(a, b)] * p[(b, c)] * p[(c, a)];
                if w == 0.0 {
                    continue;
                }
                den += w;
                num += w * (2.0 * q[(a, b)] - 1.0) * (2.0 * q[(b, c)] - 1.0) * (2.0 * q[(c, a)] - 1.0);
            }
        }
    }
    if den == 0.0 {
        return Err(Error::ZeroProbabilityEvent);
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BalanceCounts {
    pub balanced: usize,
    pub unbalanced: usize,
}

/// Classify every closed triangle by the sign of its edge product.
pub fn empirical_balance(graph: &SignedGraph) -> BalanceCounts {
    let mut out = BalanceCounts::default();
    for i in 0..graph.n() {
        let (ni, si) = (graph.neighbor_ids(i), graph.neighbor_signs(i));
        for (x, &j) in ni.iter().enumerate() {
            if j <= i {
                continue;
            }
            let s_ij = si[x];
            let (nj, sj) = (graph.neighbor_ids(j), graph.neighbor_signs(j));
            // merge-intersect the sorted rows, counting only k > j
            let (mut a, mut b) = (x + 1, nj.partition_point(|&v| v <= j));
            while a < ni.len() && b < nj.len() {
                match ni[a].cmp(&nj[b]) {
                    std::cmp::Ordering::Less => a += 1,
                    std::cmp::Ordering::Greater => b += 1,
                    std::cmp::Ordering::Equal => {
                        if s_ij * si[a] * sj[b] > 0 {
                            out.balanced += 1;
                        } else {
                            out.unbalanced += 1;
                        }
                        a += 1;
                        b += 1;
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use nalgebra::DMatrix;
    use rand::Rng;

    fn single(eta: f64) -> BsbmParams {
        BsbmParams::planted(vec![1.0], 0.3, 0.3, DMatrix::from_element(1, 1, eta), vec![1]).unwrap()
    }

    #[test]
    fn single_community_is_eta_cubed() {
        assert!((population_balance(&single(0.5)).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn zero_eta_gives_zero() {
        let eta = DMatrix::zeros(3, 3);
        let p = BsbmParams::planted(vec![0.2, 0.3, 0.5], 0.1, 0.05, eta, vec![1, -1, 1]).unwrap();
        assert_eq!(population_balance(&p).unwrap(), 0.0);
    }

    #[test]
    fn all_zero_p_is_an_error() {
        let p = BsbmParams::planted(vec![0.5, 0.5], 0.0, 0.0, DMatrix::from_element(2, 2, 0.4), vec![1, 1]);
        assert!(matches!(population_balance(&p.unwrap()), Err(Error::ZeroProbabilityEvent)));
    }

    #[test]
    fn invariant_under_flip_and_permutation() {
        let mut rng = seeded_rng(9);
        for _ in 0..20 {
            let k = rng.random_range(1..6);
            let mut pi: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
            let s: f64 = pi.iter().sum();
            pi.iter_mut().for_each(|x| *x /= s);
            let s2: f64 = pi.iter().sum();
            pi[0] += 1.0 - s2;
            let mut p = DMatrix::zeros(k, k);
            let mut eta = DMatrix::zeros(k, k);
            for a in 0..k {
                for b in a..k {
                    p[(a, b)] = rng.random_range(0.05..1.0);
                    p[(b, a)] = p[(a, b)];
                    eta[(a, b)] = rng.random_range(0.0..1.0);
                    eta[(b, a)] = eta[(a, b)];
                }
            }
            let nu = (0..k).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
            let params = BsbmParams::new(pi, p, eta, nu).unwrap();
            let base = population_balance(&params).unwrap();
            let flipped = population_balance(&params.flipped()).unwrap();
            assert!((base - flipped).abs() < 1e-14);
            let mut perm: Vec<usize> = (0..k).collect();
            perm.rotate_left(1);
            let permuted = population_balance(&params.permuted(&perm).unwrap()).unwrap();
            assert!((base - permuted).abs() < 1e-12, "{base} vs {permuted}");
        }
    }

    #[test]
    fn triangle_classification() {
        let tri = |s: [i8; 3]| {
            SignedGraph::from_edges(3, [(0, 1, s[0]), (1, 2, s[1]), (0, 2, s[2])]).unwrap()
        };
        let c = |g: &SignedGraph| {
            let b = empirical_balance(g);
            (b.balanced, b.unbalanced)
        };
        assert_eq!(c(&tri([1, 1, 1])), (1, 0));
        assert_eq!(c(&tri([1, -1, -1])), (1, 0));
        assert_eq!(c(&tri([1, 1, -1])), (0, 1));
        assert_eq!(c(&tri([-1, -1, -1])), (0, 1));
        let path = SignedGraph::from_edges(3, [(0, 1, 1), (1, 2, 1)]).unwrap();
        assert_eq!(c(&path), (0, 0));
    }

    #[test]
    fn k4_counts_all_four_triangles() {
        let edges: Vec<_> = (0..4)
            .flat_map(|i| ((i + 1)..4).map(move |j| (i, j, if i == 0 { -1 } else { 1 })))
            .collect();
        let g = SignedGraph::from_edges(4, edges).unwrap();
        let b = empirical_balance(&g);
        // triangles through node 0 have two negative edges
        assert_eq!((b.balanced, b.unbalanced), (4, 0));
    }
}
