//! Meta-group assignment: maximize `nuᵀ M nu` over `nu ∈ {±1}^K`.
//!
//! Small instances are enumerated exactly. Larger ones use a rank-limited
//! (Burer-Monteiro) relaxation of the semidefinite program followed by random
//! hyperplane rounding.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bsbm_em::SuffStats;
use crate::error::{Error, Result};
use crate::seeded_rng;

/// Largest K solved by exhaustive search under [`MaxcutMode::Auto`].
pub const DEFAULT_K_EXACT: usize = 20;
pub const DEFAULT_ROUNDS: usize = 50;
const RELAX_MAX_ITER: usize = 2000;
const RELAX_GRAD_TOL: f64 = 1e-7;
const SYM_TOL: f64 = 1e-10;

/// Symmetric, finite `K x K` matrix defining the objective `nuᵀ M nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    m: DMatrix<f64>,
}

impl QuadraticForm {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument(format!("matrix is {:?}, not square", m.shape())));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let k = m.nrows();
        for a in 0..k {
            for b in (a + 1)..k {
                if (m[(a, b)] - m[(b, a)]).abs() > SYM_TOL * (1.0 + m[(a, b)].abs()) {
                    return Err(Error::InvalidArgument(format!("matrix is not symmetric at ({a}, {b})")));
                }
            }
        }
        Ok(Self { m })
    }

    pub fn k(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// `nuᵀ M nu`, accumulated in a fixed order so that `nu` and `-nu` score identically.
    pub fn objective(&self, nu: &[i8]) -> f64 {
        let k = self.k();
        let mut diag = 0.0;
        let mut off = 0.0;
        for a in 0..k {
            diag += self.m[(a, a)];
            let mut row = 0.0;
            for b in (a + 1)..k {
                row += self.m[(a, b)] * f64::from(nu[a] * nu[b]);
            }
            off += row;
        }
        diag + 2.0 * off
    }
}

/// `T log(2T/(T+S)) + S log(2S/(T+S))`, i.e. `(T+S) KL(Bern(T/(T+S)) || Bern(1/2))`.
pub fn u_value(t: f64, s: f64) -> f64 {
    let tot = t + s;
    if tot <= 0.0 {
        return 0.0;
    }
    let term = |x: f64| if x > 0.0 { x * (2.0 * x / tot).ln() } else { 0.0 };
    // exact zero when T = S, and clipped at zero against rounding
    (term(t) + term(s)).max(0.0)
}

/// `M = sign(T - S) ∘ U`, symmetrized by averaging.
pub fn build_quadratic(stats: &SuffStats) -> QuadraticForm {
    let k = stats.k();
    let cell = |a: usize, b: usize| {
        let (t, s) = (stats.t[(a, b)], stats.s[(a, b)]);
        let sign = if t > s {
            1.0
        } else if t < s {
            -1.0
        } else {
            0.0
        };
        sign * u_value(t, s)
    };
    let m = DMatrix::from_fn(k, k, |a, b| 0.5 * (cell(a, b) + cell(b, a)));
    QuadraticForm { m }
}

/// `nu` scaled so that its first entry is `+1`.
fn normalized(mut nu: Vec<i8>) -> Vec<i8> {
    if nu.first() == Some(&-1) {
        nu.iter_mut().for_each(|s| *s = -*s);
    }
    nu
}

/// Keep the better of two candidates; ties go to the lexicographically smaller
/// vector (with `-1 < +1`).
fn better(best: Option<(f64, Vec<i8>)>, obj: f64, nu: Vec<i8>) -> Option<(f64, Vec<i8>)> {
    match best {
        Some((b, bnu)) if b > obj || (b == obj && bnu <= nu) => Some((b, bnu)),
        _ => Some((obj, nu)),
    }
}

/// Exhaustive search over the `2^(K-1)` assignments with `nu_1 = +1`.
pub fn solve_exact(form: &QuadraticForm, k_exact: usize) -> Result<Vec<i8>> {
    let k = form.k();
    if k > k_exact || k >= 63 {
        return Err(Error::TooLargeForExact { k, limit: k_exact });
    }
    if k == 0 {
        return Ok(vec![]);
    }
    let mut best = None;
    let mut nu = vec![1i8; k];
    for mask in 0u64..(1u64 << (k - 1)) {
        for (l, s) in nu.iter_mut().enumerate().skip(1) {
            *s = if mask >> (k - 1 - l) & 1 == 1 { -1 } else { 1 };
        }
        best = better(best, form.objective(&nu), nu.clone());
    }
    Ok(best.expect("at least one candidate").1)
}

/// Default factorization rank `min(K, ceil(sqrt(2K)) + 1)`.
pub fn default_rank(k: usize) -> usize {
    k.min(((2 * k) as f64).sqrt().ceil() as usize + 1)
}

fn relaxed_value(m: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    (v.transpose() * m * v).trace()
}

fn normalize_rows(v: &mut DMatrix<f64>) {
    for mut row in v.row_iter_mut() {
        let nr = row.norm();
        if nr > 0.0 {
            row /= nr;
        } else {
            row.fill(0.0);
            row[0] = 1.0;
        }
    }
}

/// Projected gradient ascent on unit-norm rows, halving the step on any decrease.
fn burer_monteiro(m: &DMatrix<f64>, rank: usize, seed: u64) -> DMatrix<f64> {
    let k = m.nrows();
    let mut rng = seeded_rng(seed);
    let mut v = DMatrix::from_fn(k, rank, |_, _| StandardNormal.sample(&mut rng));
    normalize_rows(&mut v);
    let scale = m.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    if scale == 0.0 {
        return v;
    }
    let mut step = 1.0 / (scale * k as f64);
    let mut val = relaxed_value(m, &v);
    for _ in 0..RELAX_MAX_ITER {
        let g = 2.0 * m * &v;
        // tangent component of the gradient on each sphere
        let mut proj = g.clone();
        for l in 0..k {
            let c = g.row(l).dot(&v.row(l));
            let vl = v.row(l) * c;
            let mut row = proj.row_mut(l);
            row -= vl;
        }
        if proj.norm() <= RELAX_GRAD_TOL * scale {
            break;
        }
        loop {
            let mut cand = &v + step * &g;
            normalize_rows(&mut cand);
            let cv = relaxed_value(m, &cand);
            if cv >= val {
                v = cand;
                val = cv;
                step *= 1.5;
                break;
            }
            step *= 0.5;
            if step < 1e-16 {
                return v;
            }
        }
    }
    v
}

/// Relaxation plus `rounds` random-hyperplane roundings; the sign pattern of
/// the leading eigenvector of `M` is also tried. Round `r` draws its hyperplane
/// from seed `seed + r + 1`, the factorization itself from `seed`.
pub fn solve_relaxed(form: &QuadraticForm, rank: Option<usize>, rounds: usize, seed: u64) -> Result<Vec<i8>> {
    let k = form.k();
    if form.m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if rounds == 0 {
        return Err(Error::InvalidArgument("rounds must be at least 1".into()));
    }
    if k <= 1 {
        return Ok(vec![1; k]);
    }
    let rank = rank.unwrap_or_else(|| default_rank(k));
    if rank < 2 {
        return Err(Error::InvalidArgument(format!("rank must be at least 2, got {rank}")));
    }
    let v = burer_monteiro(&form.m, rank, seed);

    let sign = |x: f64| if x < 0.0 { -1i8 } else { 1i8 };
    let mut candidates: Vec<Vec<i8>> = (0..rounds)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded_rng(seed.wrapping_add(r as u64 + 1));
            let g: Vec<f64> = (0..rank).map(|_| StandardNormal.sample(&mut rng)).collect();
            normalized((0..k).map(|l| sign((0..rank).map(|c| v[(l, c)] * g[c]).sum())).collect())
        })
        .collect();
    let eig = SymmetricEigen::new(form.m.clone());
    let top = eig.eigenvalues.imax();
    candidates.push(normalized(eig.eigenvectors.column(top).iter().map(|&x| sign(x)).collect()));

    let best = candidates
        .into_iter()
        .fold(None, |best, nu| better(best, form.objective(&nu), nu));
    Ok(best.expect("at least one candidate").1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxcutMode {
    /// Exact when `K <= k_exact`, relaxed otherwise.
    #[default]
    Auto,
    Exact,
    Relaxed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxcutConfig {
    pub mode: MaxcutMode,
    pub k_exact: usize,
    pub rounds: usize,
    pub seed: u64,
}

impl Default for MaxcutConfig {
    fn default() -> Self {
        Self {
            mode: MaxcutMode::Auto,
            k_exact: DEFAULT_K_EXACT,
            rounds: DEFAULT_ROUNDS,
            seed: 0,
        }
    }
}

/// Dispatch on `cfg.mode`. In relaxed mode an `incumbent` assignment, if
/// given, competes with the rounded candidates so the objective never drops
/// below the incumbent's.
pub fn solve(form: &QuadraticForm, cfg: &MaxcutConfig, incumbent: Option<&[i8]>) -> Result<Vec<i8>> {
    let exact = match cfg.mode {
        MaxcutMode::Exact => true,
        MaxcutMode::Relaxed => false,
        MaxcutMode::Auto => form.k() <= cfg.k_exact,
    };
    if exact {
        return solve_exact(form, cfg.k_exact);
    }
    let nu = solve_relaxed(form, None, cfg.rounds, cfg.seed)?;
    Ok(match incumbent {
        Some(inc) if inc.len() == nu.len() => {
            let inc = normalized(inc.to_vec());
            let (a, b) = (form.objective(&nu), form.objective(&inc));
            better(better(None, a, nu), b, inc).expect("two candidates").1
        }
        _ => nu,
    })
}
