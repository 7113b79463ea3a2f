//! Matrix-free symmetric eigensolver used by the spectral initializer and the
//! matrix-completion baseline.
//!
//! Lanczos with full reorthogonalization. When the Krylov space becomes
//! invariant (exactly repeated eigenvalues, low-rank operators) the iteration
//! continues from a fresh random vector orthogonal to the basis, so repeated
//! eigenvalues are resolved with their full multiplicity.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::seeded_rng;

#[derive(Debug, Clone, Copy)]
pub struct LanczosConfig {
    /// Maximum Krylov dimension (number of operator applications).
    pub max_iter: usize,
    /// Residual tolerance relative to the largest Ritz value magnitude.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Sorted by decreasing magnitude.
    pub values: Vec<f64>,
    /// `vectors[c]` is the unit eigenvector for `values[c]`.
    pub vectors: Vec<Vec<f64>>,
    pub iterations: usize,
    /// Largest relative residual `|A x - theta x| / max|theta|` among the returned pairs.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    // two passes of classical Gram-Schmidt keep the basis orthonormal to working precision
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            axpy(-c, v, w);
        }
    }
}

/// Indices of the `k` Ritz values of largest magnitude (ties: larger value first).
fn top_by_magnitude(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(values[b].total_cmp(&values[a]))
    });
    idx.truncate(k);
    idx
}

struct Ritz {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    take: Vec<usize>,
    residual: f64,
}

/// Eigen-decompose the (block) tridiagonal projection and score the top-`k` pairs.
/// `b` is the norm of the pending Lanczos residual vector.
fn rayleigh_ritz(alpha: &[f64], beta: &[f64], k: usize, b: f64) -> Ritz {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let take = top_by_magnitude(&values, k.min(m));
    let theta_max = values.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    let residual = take
        .iter()
        .map(|&c| (b * eig.eigenvectors[(m - 1, c)]).abs())
        .fold(0.0f64, f64::max)
        / theta_max.max(1e-300);
    Ritz {
        values,
        vectors: eig.eigenvectors,
        take,
        residual,
    }
}

/// The `k` eigenpairs of largest `|lambda|` of the symmetric operator `op` on `R^n`.
///
/// `op(x, y)` must write `A x` into `y` (which arrives zeroed).
pub fn top_eigenpairs<F>(n: usize, k: usize, op: F, cfg: &LanczosConfig) -> Result<EigenPairs>
where
    F: Fn(&[f64], &mut [f64]),
{
    if k > n {
        return Err(Error::InvalidArgument(format!("requested {k} eigenpairs of a {n}x{n} operator")));
    }
    if k == 0 {
        return Ok(EigenPairs {
            values: vec![],
            vectors: vec![],
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut rng = seeded_rng(cfg.seed);
    let mut random_unit = |basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        for _ in 0..8 {
            let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            orthogonalize(&mut v, basis);
            let nv = norm(&v);
            if nv > 1e-8 {
                v.iter_mut().for_each(|x| *x /= nv);
                return Some(v);
            }
        }
        None
    };

    let cap = cfg.max_iter.min(n).max(k);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cap);
    let mut alpha: Vec<f64> = Vec::with_capacity(cap);
    let mut beta: Vec<f64> = Vec::with_capacity(cap);
    basis.push(random_unit(&[]).expect("a random Gaussian vector is nonzero"));

    let mut w = vec![0.0; n];
    let mut block_start = 0usize;
    let mut next_check = (k + 10).min(cap);
    let last: Ritz;

    loop {
        let m = basis.len();
        w.iter_mut().for_each(|x| *x = 0.0);
        op(&basis[m - 1], &mut w);
        let a = dot(&basis[m - 1], &w);
        alpha.push(a);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);

        let scale = alpha.iter().chain(beta.iter()).fold(0.0f64, |s, x| s.max(x.abs()));
        let breakdown = b == 0.0 || b <= 1e-12 * scale;
        let full = m >= n;
        let block_len = m - block_start;

        if breakdown || full {
            // every block so far spans an invariant subspace, so all Ritz pairs are exact
            let ritz = rayleigh_ritz(&alpha, &beta, k, 0.0);
            // a random vector that is itself an eigenvector means the whole remaining
            // complement is one eigenspace with eigenvalue `a`
            let complement_known = block_len == 1
                && ritz.take.len() == k
                && a.abs() <= ritz.values[*ritz.take.last().expect("k >= 1")].abs();
            if full || complement_known {
                last = ritz;
                break;
            }
            if m >= cap {
                return Err(Error::EigenNonConvergence {
                    iterations: m,
                    residual: f64::INFINITY,
                });
            }
            match random_unit(&basis) {
                Some(v) => {
                    beta.push(0.0);
                    basis.push(v);
                    block_start = m;
                    next_check = next_check.max(m + (k + 10).min(n - m));
                    continue;
                }
                None => {
                    last = ritz;
                    break;
                }
            }
        }

        if m >= next_check || m >= cap {
            let ritz = rayleigh_ritz(&alpha, &beta, k, b);
            let converged = ritz.take.len() == k && ritz.residual <= cfg.tol;
            if converged {
                last = ritz;
                break;
            }
            if m >= cap {
                return Err(Error::EigenNonConvergence {
                    iterations: m,
                    residual: ritz.residual,
                });
            }
            next_check = (m + (m / 10).max(5)).min(cap);
        }

        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(std::mem::replace(&mut w, vec![0.0; n]));
    }

    let Ritz {
        values: vals,
        vectors: s,
        take,
        residual,
    } = last;
    let m = s.nrows();
    let mut vectors: Vec<Vec<f64>> = take
        .iter()
        .map(|&c| {
            let mut y = vec![0.0; n];
            for r in 0..m {
                axpy(s[(r, c)], &basis[r], &mut y);
            }
            y
        })
        .collect();
    for c in 0..vectors.len() {
        let (done, rest) = vectors.split_at_mut(c);
        orthogonalize(&mut rest[0], done);
        let nv = norm(&rest[0]);
        rest[0].iter_mut().for_each(|x| *x /= nv);
        canonical_sign(&mut rest[0]);
    }
    Ok(EigenPairs {
        values: take.iter().map(|&c| vals[c]).collect(),
        vectors,
        iterations: m,
        residual,
    })
}

/// Flip `v` so that its largest-magnitude entry (first on ties) is positive.
fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
