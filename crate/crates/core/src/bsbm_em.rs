//! Pseudo-likelihood evaluation and the inner EM updates for fixed column labels.
//!
//! Row `i` of the adjacency matrix is modelled as a mixture over its own
//! community `z_i`, with every column `j` governed by the fixed label `e_j`.
//! All sums over `j` include `j = i`; the diagonal reads as a non-edge.
//!
//! Everything reduces to per-row class counts: for row `i` and column class
//! `l'`, how many positive edges, negative edges and non-edges (self pair
//! included) fall in that class. Those counts depend only on `e`, so the inner
//! EM loop costs `O(n K^2)` per iteration.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::maxcut::{self, MaxcutConfig};
use crate::{BsbmParams, Labels, SignedGraph};

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]` before any log.
pub const PROB_EPS: f64 = 1e-12;
const ROW_SUM_TOL: f64 = 1e-10;

/// Row-stochastic `n x K` matrix of membership probabilities, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    n: usize,
    k: usize,
    tau: Vec<f64>,
}

impl Posterior {
    pub fn new(n: usize, k: usize, tau: Vec<f64>) -> Result<Self> {
        if tau.len() != n * k {
            return Err(Error::LengthMismatch(tau.len(), n * k));
        }
        for (i, row) in tau.chunks(k.max(1)).enumerate() {
            let s: f64 = row.iter().sum();
            if row.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidArgument(format!("row {i} of tau is not a probability vector")));
            }
        }
        Ok(Self { n, k, tau })
    }

    pub fn one_hot(labels: &Labels) -> Self {
        let (n, k) = (labels.len(), labels.k());
        let mut tau = vec![0.0; n * k];
        for (i, &l) in labels.as_slice().iter().enumerate() {
            tau[i * k + l] = 1.0;
        }
        Self { n, k, tau }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.tau[i * self.k..(i + 1) * self.k]
    }

    pub fn get(&self, i: usize, l: usize) -> f64 {
        self.tau[i * self.k + l]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.tau
    }

    /// `sum_i tau_il` for each class.
    pub fn class_mass(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.k];
        for row in self.tau.chunks(self.k) {
            for (a, x) in m.iter_mut().zip(row) {
                *a += x;
            }
        }
        m
    }

    /// Row-wise argmax; ties go to the smallest label.
    pub fn argmax(&self) -> Labels {
        let z = self
            .tau
            .chunks(self.k)
            .map(|row| {
                let mut best = 0;
                for (l, &x) in row.iter().enumerate() {
                    if x > row[best] {
                        best = l;
                    }
                }
                best
            })
            .collect();
        Labels::new(z, self.k).expect("argmax is always in range")
    }
}

/// Expected positive-edge (`t`), negative-edge (`s`) and non-edge (`r`) counts
/// between row class `l` and column class `l'`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuffStats {
    pub t: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

impl SuffStats {
    pub fn k(&self) -> usize {
        self.t.nrows()
    }

    /// `(X + Xᵀ) / 2` for each of the three matrices.
    ///
    /// With `P` and `eta` constrained symmetric, the M-step maximizer depends on
    /// the stats only through these symmetric parts.
    pub fn symmetrized(&self) -> Self {
        let sym = |m: &DMatrix<f64>| (m + m.transpose()) * 0.5;
        Self {
            t: sym(&self.t),
            s: sym(&self.s),
            r: sym(&self.r),
        }
    }
}

/// Node pairs hidden from fitting (used for holdout scoring). Hidden pairs are
/// dropped from every product over `j` and from all three count matrices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairMask {
    hidden: Vec<Vec<usize>>,
    pairs: usize,
}

impl PairMask {
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut hidden = vec![Vec::new(); n];
        for (u, v) in pairs {
            if u >= n || v >= n {
                return Err(Error::NodeOutOfRange { node: u.max(v), n });
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("cannot hide self pair ({u}, {u})")));
            }
            hidden[u].push(v);
            hidden[v].push(u);
        }
        let mut count = 0;
        for h in &mut hidden {
            h.sort_unstable();
            h.dedup();
            count += h.len();
        }
        Ok(Self {
            hidden,
            pairs: count / 2,
        })
    }

    pub fn n(&self) -> usize {
        self.hidden.len()
    }

    /// Number of hidden unordered pairs.
    pub fn len(&self) -> usize {
        self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs == 0
    }

    pub fn partners(&self, i: usize) -> &[usize] {
        &self.hidden[i]
    }

    pub fn is_hidden(&self, i: usize, j: usize) -> bool {
        self.hidden[i].binary_search(&j).is_ok()
    }
}

/// Per-row counts by column class, `n x K` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RowCounts {
    n: usize,
    k: usize,
    pos: Vec<f64>,
    neg: Vec<f64>,
    non: Vec<f64>,
}

impl RowCounts {
    pub fn new(graph: &SignedGraph, e: &Labels, mask: Option<&PairMask>) -> Result<Self> {
        let n = graph.n();
        if e.len() != n {
            return Err(Error::LengthMismatch(e.len(), n));
        }
        if let Some(m) = mask {
            if m.n() != n {
                return Err(Error::LengthMismatch(m.n(), n));
            }
        }
        let k = e.k();
        let ez = e.as_slice();
        let colcount: Vec<f64> = e.counts().into_iter().map(|c| c as f64).collect();
        let rows: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut pos = vec![0.0; k];
                let mut neg = vec![0.0; k];
                let mut obs = colcount.clone();
                if let Some(m) = mask {
                    for &j in m.partners(i) {
                        obs[ez[j]] -= 1.0;
                    }
                }
                for (j, s) in graph.neighbors(i) {
                    if mask.is_some_and(|m| m.is_hidden(i, j)) {
                        continue;
                    }
                    if s > 0 {
                        pos[ez[j]] += 1.0;
                    } else {
                        neg[ez[j]] += 1.0;
                    }
                }
                let non = (0..k).map(|l| obs[l] - pos[l] - neg[l]).collect();
                (pos, neg, non)
            })
            .collect();
        let mut out = Self {
            n,
            k,
            pos: Vec::with_capacity(n * k),
            neg: Vec::with_capacity(n * k),
            non: Vec::with_capacity(n * k),
        };
        for (p, q, r) in rows {
            out.pos.extend(p);
            out.neg.extend(q);
            out.non.extend(r);
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn pos(&self, i: usize) -> &[f64] {
        &self.pos[i * self.k..(i + 1) * self.k]
    }

    pub fn neg(&self, i: usize) -> &[f64] {
        &self.neg[i * self.k..(i + 1) * self.k]
    }

    pub fn non(&self, i: usize) -> &[f64] {
        &self.non[i * self.k..(i + 1) * self.k]
    }
}

/// Clamped log-probabilities of the three outcomes for each class pair.
#[derive(Debug, Clone)]
pub struct LogTables {
    pub log_pi: Vec<f64>,
    /// `log(P Q)`
    pub pos: DMatrix<f64>,
    /// `log(P (1 - Q))`
    pub neg: DMatrix<f64>,
    /// `log(1 - P)`
    pub non: DMatrix<f64>,
    /// Number of `P` or `Q` cells that needed clamping.
    pub clamped: usize,
}

impl LogTables {
    pub fn new(params: &BsbmParams) -> Self {
        let k = params.k();
        let q = params.q();
        let mut clamped = 0;
        let mut clamp = |x: f64| {
            let c = x.clamp(PROB_EPS, 1.0 - PROB_EPS);
            if c != x {
                clamped += 1;
            }
            c
        };
        let p = DMatrix::from_fn(k, k, |a, b| clamp(params.p()[(a, b)]));
        let q = DMatrix::from_fn(k, k, |a, b| clamp(q[(a, b)]));
        Self {
            log_pi: params.pi().iter().map(|x| x.ln()).collect(),
            pos: p.zip_map(&q, |p, q| p.ln() + q.ln()),
            neg: p.zip_map(&q, |p, q| p.ln() + (1.0 - q).ln()),
            non: p.map(|p| (1.0 - p).ln()),
            clamped,
        }
    }

    /// `log pi_l + sum_j log Pr(A_ij | z_i = l, e_j)` for each `l`.
    fn row_log_mass(&self, counts: &RowCounts, i: usize, out: &mut [f64]) {
        let (pos, neg, non) = (counts.pos(i), counts.neg(i), counts.non(i));
        for (l, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for m in 0..counts.k() {
                // skip zero counts so that clamped logs never meet 0 * (-inf)
                if pos[m] != 0.0 {
                    s += pos[m] * self.pos[(l, m)];
                }
                if neg[m] != 0.0 {
                    s += neg[m] * self.neg[(l, m)];
                }
                if non[m] != 0.0 {
                    s += non[m] * self.non[(l, m)];
                }
            }
            *o = self.log_pi[l] + s;
        }
    }
}

fn log_sum_exp(x: &[f64]) -> f64 {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + x.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn check_k(params: &BsbmParams, k: usize) -> Result<()> {
    if params.k() != k {
        return Err(Error::KMismatch {
            expected: params.k(),
            got: k,
        });
    }
    Ok(())
}

/// Output of [`e_step_counts`].
#[derive(Debug, Clone)]
pub struct EStep {
    pub tau: Posterior,
    /// Log-pseudo-likelihood at the parameters that produced `tau`.
    pub lpl: f64,
    /// Rows whose log-masses were all `-inf`; they are set to `pi`.
    pub degenerate_rows: usize,
    pub clamped: usize,
}

/// E-step on precomputed row counts; also returns the pseudo-likelihood for free.
pub fn e_step_counts(counts: &RowCounts, params: &BsbmParams) -> Result<EStep> {
    let k = counts.k();
    check_k(params, k)?;
    let tables = LogTables::new(params);
    let rows: Vec<(Vec<f64>, f64, bool)> = (0..counts.n())
        .into_par_iter()
        .map(|i| {
            let mut lm = vec![0.0; k];
            tables.row_log_mass(counts, i, &mut lm);
            let z = log_sum_exp(&lm);
            if z == f64::NEG_INFINITY {
                return (params.pi().to_vec(), z, true);
            }
            let row: Vec<f64> = lm.iter().map(|v| (v - z).exp()).collect();
            // renormalize so rows sum to one to within a few ulps
            let s: f64 = row.iter().sum();
            (row.into_iter().map(|x| x / s).collect(), z, false)
        })
        .collect();
    let mut tau = Vec::with_capacity(counts.n() * k);
    let mut lpl = 0.0;
    let mut degenerate = 0;
    for (row, z, bad) in rows {
        tau.extend(row);
        lpl += z;
        degenerate += usize::from(bad);
    }
    Ok(EStep {
        tau: Posterior { n: counts.n(), k, tau },
        lpl,
        degenerate_rows: degenerate,
        clamped: tables.clamped,
    })
}

/// Posterior of the row labels given column labels `e`.
pub fn e_step(graph: &SignedGraph, params: &BsbmParams, e: &Labels) -> Result<Posterior> {
    check_k(params, e.k())?;
    Ok(e_step_counts(&RowCounts::new(graph, e, None)?, params)?.tau)
}

/// `sum_i log sum_l pi_l prod_j Pr(A_ij | l, e_j)`, evaluated with log-sum-exp.
pub fn log_pseudo_likelihood(graph: &SignedGraph, params: &BsbmParams, e: &Labels) -> Result<f64> {
    check_k(params, e.k())?;
    log_pseudo_likelihood_counts(&RowCounts::new(graph, e, None)?, params)
}

pub fn log_pseudo_likelihood_counts(counts: &RowCounts, params: &BsbmParams) -> Result<f64> {
    check_k(params, counts.k())?;
    let tables = LogTables::new(params);
    let k = counts.k();
    let per_row: Vec<f64> = (0..counts.n())
        .into_par_iter()
        .map(|i| {
            let mut lm = vec![0.0; k];
            tables.row_log_mass(counts, i, &mut lm);
            log_sum_exp(&lm)
        })
        .collect();
    Ok(per_row.iter().sum())
}

/// `T = tauᵀ pos`, `S = tauᵀ neg`, `R = tauᵀ non` over the precomputed counts.
pub fn sufficient_stats_counts(counts: &RowCounts, tau: &Posterior) -> Result<SuffStats> {
    let k = counts.k();
    if tau.n() != counts.n() || tau.k() != k {
        return Err(Error::LengthMismatch(tau.n() * tau.k(), counts.n() * k));
    }
    let mut t = DMatrix::zeros(k, k);
    let mut s = DMatrix::zeros(k, k);
    let mut r = DMatrix::zeros(k, k);
    // sequential in i: fixed summation order regardless of thread count
    for i in 0..counts.n() {
        let row = tau.row(i);
        let (pos, neg, non) = (counts.pos(i), counts.neg(i), counts.non(i));
        for l in 0..k {
            let w = row[l];
            if w == 0.0 {
                continue;
            }
            for m in 0..k {
                t[(l, m)] += w * pos[m];
                s[(l, m)] += w * neg[m];
                r[(l, m)] += w * non[m];
            }
        }
    }
    Ok(SuffStats { t, s, r })
}

pub fn sufficient_stats(graph: &SignedGraph, tau: &Posterior, e: &Labels) -> Result<SuffStats> {
    if tau.k() != e.k() {
        return Err(Error::KMismatch {
            expected: e.k(),
            got: tau.k(),
        });
    }
    sufficient_stats_counts(&RowCounts::new(graph, e, None)?, tau)
}

/// `pi = mean(tau)` and `P = (T + S) / (T + S + R)` on the symmetrized stats;
/// empty cells get `P = 0`.
pub fn m_step_pi_p(tau: &Posterior, stats: &SuffStats) -> (Vec<f64>, DMatrix<f64>) {
    let n = tau.n() as f64;
    let mut pi: Vec<f64> = tau.class_mass().into_iter().map(|m| m / n).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    let st = stats.symmetrized();
    let p = DMatrix::from_fn(stats.k(), stats.k(), |a, b| {
        let hit = st.t[(a, b)] + st.s[(a, b)];
        let den = hit + st.r[(a, b)];
        if den > 0.0 {
            (hit / den).clamp(0.0, 1.0)
        } else {
            0.0
        }
    });
    (pi, p)
}

/// `eta = max(nu_l nu_l' (T - S) / (T + S), 0)` on the symmetrized stats
/// (zero where `T + S = 0`), and the implied `Q`.
pub fn m_step_q(stats: &SuffStats, nu: &[i8]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let k = stats.k();
    if nu.len() != k {
        return Err(Error::LengthMismatch(nu.len(), k));
    }
    let st = stats.symmetrized();
    let eta = DMatrix::from_fn(k, k, |a, b| {
        let tot = st.t[(a, b)] + st.s[(a, b)];
        if tot > 0.0 {
            ((st.t[(a, b)] - st.s[(a, b)]) / tot * f64::from(nu[a] * nu[b])).clamp(0.0, 1.0)
        } else {
            0.0
        }
    });
    let q = DMatrix::from_fn(k, k, |a, b| (1.0 + eta[(a, b)] * f64::from(nu[a] * nu[b])) / 2.0);
    Ok((eta, q))
}

/// Full M-step. With `frozen_q` the sign model is switched off (`eta = 0`,
/// `nu = 1`) and only `(pi, P)` are estimated.
pub fn m_step(
    tau: &Posterior,
    stats: &SuffStats,
    maxcut_cfg: &MaxcutConfig,
    incumbent_nu: Option<&[i8]>,
    frozen_q: bool,
) -> Result<BsbmParams> {
    let k = stats.k();
    let (pi, p) = m_step_pi_p(tau, stats);
    if frozen_q {
        return BsbmParams::new(pi, p, DMatrix::zeros(k, k), vec![1; k]);
    }
    let form = maxcut::build_quadratic(&stats.symmetrized());
    let nu = maxcut::solve(&form, maxcut_cfg, incumbent_nu)?;
    let (eta, _) = m_step_q(stats, &nu)?;
    BsbmParams::new(pi, p, eta, nu)
}

/// Plug-in estimates from hard labels: class frequencies, edge densities over
/// all ordered pairs (self pairs included), and the sign frequencies projected
/// onto the balanced family through the same max-cut and truncation as the M-step.
pub fn initial_params(graph: &SignedGraph, e0: &Labels, maxcut_cfg: &MaxcutConfig) -> Result<BsbmParams> {
    let counts = RowCounts::new(graph, e0, None)?;
    let tau = Posterior::one_hot(e0);
    let stats = sufficient_stats_counts(&counts, &tau)?;
    m_step(&tau, &stats, maxcut_cfg, None, false)
}

/// Column-label update: each node `j` independently takes the label `l'`
/// maximizing `sum_i sum_l tau_il log Pr(A_ij | l, l')`.
///
/// Ties keep the current label when it is among the maximizers, otherwise the
/// smallest maximizing label wins.
pub fn update_column_labels(
    graph: &SignedGraph,
    tau: &Posterior,
    params: &BsbmParams,
    e: &Labels,
    mask: Option<&PairMask>,
) -> Result<Labels> {
    let k = params.k();
    check_k(params, tau.k())?;
    let n = graph.n();
    if tau.n() != n || e.len() != n {
        return Err(Error::LengthMismatch(tau.n(), n));
    }
    let tables = LogTables::new(params);
    let total = tau.class_mass();
    let z: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut pos = vec![0.0; k];
            let mut neg = vec![0.0; k];
            let mut obs = total.clone();
            if let Some(m) = mask {
                for &i in m.partners(j) {
                    obs.iter_mut().zip(tau.row(i)).for_each(|(o, t)| *o -= t);
                }
            }
            for (i, s) in graph.neighbors(j) {
                if mask.is_some_and(|m| m.is_hidden(i, j)) {
                    continue;
                }
                let dst = if s > 0 { &mut pos } else { &mut neg };
                dst.iter_mut().zip(tau.row(i)).for_each(|(d, t)| *d += t);
            }
            let score = |m: usize| -> f64 {
                (0..k)
                    .map(|l| {
                        let non = obs[l] - pos[l] - neg[l];
                        pos[l] * tables.pos[(l, m)] + neg[l] * tables.neg[(l, m)] + non * tables.non[(l, m)]
                    })
                    .sum()
            };
            let scores: Vec<f64> = (0..k).map(score).collect();
            let best = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let cur = e.get(j);
            if scores[cur] >= best {
                cur
            } else {
                scores.iter().position(|&s| s == best).expect("max is attained")
            }
        })
        .collect();
    Labels::new(z, k)
}
