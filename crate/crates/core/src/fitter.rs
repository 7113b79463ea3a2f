//! Profile pseudo-likelihood maximization: alternate an inner EM over the
//! parameters (column labels fixed) with a per-node update of the column labels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bsbm_em::{
    e_step_counts, m_step, sufficient_stats_counts, update_column_labels, EStep, PairMask, Posterior, RowCounts,
};
use crate::error::{Error, Result};
use crate::maxcut::{MaxcutConfig, MaxcutMode, DEFAULT_K_EXACT, DEFAULT_ROUNDS};
use crate::spectral_init::{scp_init, signed_spectral_init, DEFAULT_TAU_REG};
use crate::{BsbmParams, Labels, SignedGraph};

/// Source of the initial column labels for each restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitStrategy {
    /// Spectral clustering with perturbations on `|A|` for every restart.
    Connectivity,
    /// Spectral clustering on the signed adjacency for every restart.
    Signed,
    /// Connectivity for even restart indices, signed for odd ones.
    #[default]
    Alternate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    /// Relative change of the pseudo-likelihood that ends the inner EM.
    pub inner_tol: f64,
    pub inner_max: usize,
    /// Relative change of the pseudo-likelihood that ends the outer loop.
    pub outer_tol: f64,
    pub outer_max: usize,
    pub tau_reg: f64,
    pub init: InitStrategy,
    pub maxcut_mode: MaxcutMode,
    pub k_exact: usize,
    pub rounds: usize,
    /// Disable the sign model (`eta = 0`, `Q = 1/2`): the binary pseudo-likelihood.
    pub frozen_q: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            k: 2,
            seed: 0,
            restarts: 3,
            inner_tol: 1e-6,
            inner_max: 100,
            outer_tol: 1e-6,
            outer_max: 50,
            tau_reg: DEFAULT_TAU_REG,
            init: InitStrategy::default(),
            maxcut_mode: MaxcutMode::Auto,
            k_exact: DEFAULT_K_EXACT,
            rounds: DEFAULT_ROUNDS,
            frozen_q: false,
        }
    }
}

impl FitConfig {
    pub fn new(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.k == 0 {
            return bad("K must be at least 1");
        }
        if !(self.inner_tol > 0.0 && self.outer_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.inner_max == 0 || self.outer_max == 0 || self.restarts == 0 || self.rounds == 0 {
            return bad("iteration caps, restarts and rounds must be at least 1");
        }
        if !(self.tau_reg >= 0.0) {
            return bad("tau_reg must be non-negative");
        }
        Ok(())
    }

    fn maxcut(&self, seed: u64) -> MaxcutConfig {
        MaxcutConfig {
            mode: self.maxcut_mode,
            k_exact: self.k_exact,
            rounds: self.rounds,
            seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FitWarnings {
    /// Clamped `P`/`Q` cells summed over every E-step.
    pub clamped: usize,
    /// Rows whose likelihood vanished under every class.
    pub degenerate_rows: usize,
    /// Labels that no node received in the output.
    pub empty_classes: Vec<usize>,
    /// Inner EM loops stopped by `inner_max` rather than the tolerance.
    pub inner_capped: usize,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Row-wise argmax of `tau`.
    pub labels: Labels,
    pub tau: Posterior,
    pub params: BsbmParams,
    /// Final column labels.
    pub column_labels: Labels,
    /// Pseudo-likelihood at the start and after every outer iteration.
    pub lpl_trace: Vec<f64>,
    pub inner_iters: Vec<usize>,
    pub converged: bool,
    pub warnings: FitWarnings,
    /// Index of the winning restart.
    pub restart: usize,
}

impl FitResult {
    pub fn final_lpl(&self) -> f64 {
        *self.lpl_trace.last().expect("trace always has the initial value")
    }
}

/// Fit with `restarts` spectral initializations (restart `r` uses seed `seed + r`
/// and the initializer chosen by `cfg.init`) and keep the one with the largest
/// final pseudo-likelihood; ties go to the lowest restart index.
pub fn fit(graph: &SignedGraph, cfg: &FitConfig) -> Result<FitResult> {
    fit_restarts(graph, cfg, None, |r, seed| initial_labels(graph, cfg, r, seed))
}

fn initial_labels(graph: &SignedGraph, cfg: &FitConfig, restart: usize, seed: u64) -> Result<Labels> {
    let signed = match cfg.init {
        InitStrategy::Connectivity => false,
        InitStrategy::Signed => true,
        InitStrategy::Alternate => restart % 2 == 1,
    };
    if signed {
        signed_spectral_init(graph, cfg.k, seed)
    } else {
        scp_init(graph, cfg.k, cfg.tau_reg, seed)
    }
}

/// Single run from the given column labels (no spectral step, one restart).
pub fn fit_from_labels(graph: &SignedGraph, cfg: &FitConfig, e0: &Labels) -> Result<FitResult> {
    cfg.validate()?;
    if e0.k() != cfg.k {
        return Err(Error::KMismatch {
            expected: cfg.k,
            got: e0.k(),
        });
    }
    run_once(graph, cfg, e0.clone(), cfg.seed, None)
}

/// As [`fit`], with the pairs in `mask` treated as unobserved. The spectral
/// initializers see the graph with hidden edges removed.
pub fn fit_masked(graph: &SignedGraph, cfg: &FitConfig, mask: &PairMask) -> Result<FitResult> {
    let visible = SignedGraph::from_edges(graph.n(), graph.edges().filter(|&(i, j, _)| !mask.is_hidden(i, j)))?;
    fit_restarts(graph, cfg, Some(mask), |r, seed| initial_labels(&visible, cfg, r, seed))
}

fn fit_restarts<F>(graph: &SignedGraph, cfg: &FitConfig, mask: Option<&PairMask>, init: F) -> Result<FitResult>
where
    F: Fn(usize, u64) -> Result<Labels> + Sync,
{
    cfg.validate()?;
    if graph.n() == 0 {
        return Err(Error::InvalidArgument("graph has no nodes".into()));
    }
    let runs: Vec<Result<FitResult>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let seed = cfg.seed.wrapping_add(r as u64);
            let mut res = run_once(graph, cfg, init(r, seed)?, seed, mask)?;
            res.restart = r;
            Ok(res)
        })
        .collect();
    let mut best: Option<FitResult> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.final_lpl() > b.final_lpl()) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

fn rel_change(new: f64, old: f64) -> f64 {
    (new - old).abs() / new.abs().max(f64::MIN_POSITIVE)
}

fn run_once(graph: &SignedGraph, cfg: &FitConfig, mut e: Labels, seed: u64, mask: Option<&PairMask>) -> Result<FitResult> {
    if e.len() != graph.n() {
        return Err(Error::LengthMismatch(e.len(), graph.n()));
    }
    let mc = cfg.maxcut(seed);
    let mut warnings = FitWarnings::default();
    let note = |est: &EStep, w: &mut FitWarnings| {
        w.clamped += est.clamped;
        w.degenerate_rows += est.degenerate_rows;
    };

    let mut counts = RowCounts::new(graph, &e, mask)?;
    let tau0 = Posterior::one_hot(&e);
    let mut params = m_step(&tau0, &sufficient_stats_counts(&counts, &tau0)?, &mc, None, cfg.frozen_q)?;
    let mut est = e_step_counts(&counts, &params)?;
    note(&est, &mut warnings);
    let mut trace = vec![est.lpl];
    let mut inner_iters = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.outer_max {
        // inner EM; it always ends on an E-step so `est.tau` is the exact
        // posterior under the final parameters and current column labels
        let mut prev = est.lpl;
        let mut it = 0;
        let mut inner_done = false;
        while it < cfg.inner_max {
            let stats = sufficient_stats_counts(&counts, &est.tau)?;
            params = m_step(&est.tau, &stats, &mc, Some(params.nu()), cfg.frozen_q)?;
            est = e_step_counts(&counts, &params)?;
            note(&est, &mut warnings);
            it += 1;
            if rel_change(est.lpl, prev) < cfg.inner_tol {
                inner_done = true;
                break;
            }
            prev = est.lpl;
        }
        inner_iters.push(it);
        warnings.inner_capped += usize::from(!inner_done);

        let e_new = update_column_labels(graph, &est.tau, &params, &e, mask)?;
        if e_new == e {
            trace.push(est.lpl);
            converged = true;
            break;
        }
        e = e_new;
        counts = RowCounts::new(graph, &e, mask)?;
        est = e_step_counts(&counts, &params)?;
        note(&est, &mut warnings);
        let before = *trace.last().expect("non-empty");
        trace.push(est.lpl);
        if rel_change(est.lpl, before) < cfg.outer_tol {
            converged = true;
            break;
        }
    }

    let labels = est.tau.argmax();
    warnings.empty_classes = labels.empty_classes();
    Ok(FitResult {
        labels,
        tau: est.tau,
        params,
        column_labels: e,
        lpl_trace: trace,
        inner_iters,
        converged,
        warnings,
        restart: 0,
    })
}

/// Signal statistics of the planted `K`-community model with within/between
/// edge intensities `a`, `b` (edge probability `a/m`, `b/m`) and sign strengths `c`, `d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyDiagnostics {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// `(a(1+c) - b(1-d))^2 / (a(1+c) + b(1-d))`
    pub s1: f64,
    /// `(a(1-c) - b(1+d))^2 / (a(1-c) + b(1+d))`
    pub s2: f64,
    /// `(a(1+c) - b(1+d))^2 / (a(1+c) + b(1+d))`
    pub s3: f64,
    /// `(a(1-c) - b(1-d))^2 / (a(1-c) + b(1-d))`
    pub s4: f64,
    /// `ac - bd`
    pub s5: f64,
    /// `ac + bd`, the sign condition for two communities.
    pub s5_two_communities: f64,
    pub logn: f64,
}

impl ConsistencyDiagnostics {
    /// `[S1, S2, S3, S4, S5] / log n`.
    pub fn ratios(&self) -> [f64; 5] {
        [self.s1, self.s2, self.s3, self.s4, self.s5].map(|s| s / self.logn)
    }
}

fn gap_ratio(x: f64, y: f64) -> f64 {
    let num = (x - y).powi(2);
    let den = x + y;
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

pub fn consistency_diagnostics(a: f64, b: f64, c: f64, d: f64, n: usize) -> Result<ConsistencyDiagnostics> {
    if !(a >= 0.0 && b >= 0.0) || !(0.0..=1.0).contains(&c) || !(0.0..=1.0).contains(&d) || n < 2 {
        return Err(Error::InvalidArgument(
            "need a, b >= 0, c, d in [0, 1] and n >= 2".into(),
        ));
    }
    Ok(ConsistencyDiagnostics {
        a,
        b,
        c,
        d,
        s1: gap_ratio(a * (1.0 + c), b * (1.0 - d)),
        s2: gap_ratio(a * (1.0 - c), b * (1.0 + d)),
        s3: gap_ratio(a * (1.0 + c), b * (1.0 + d)),
        s4: gap_ratio(a * (1.0 - c), b * (1.0 - d)),
        s5: a * c - b * d,
        s5_two_communities: a * c + b * d,
        logn: (n as f64).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cliques(m: usize, blocks: usize) -> SignedGraph {
        let mut edges = Vec::new();
        for b in 0..blocks {
            for i in 0..m {
                for j in (i + 1)..m {
                    edges.push((b * m + i, b * m + j, 1i8));
                }
            }
        }
        SignedGraph::from_edges(m * blocks, edges).unwrap()
    }

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    #[test]
    fn diagnostics_hand_values() {
        let d = consistency_diagnostics(40.0, 40.0, 0.6, 0.6, 1000).unwrap();
        assert!((d.s1 - 28.8).abs() < 1e-12);
        assert!((d.ratios()[0] - 28.8 / 1000f64.ln()).abs() < 1e-12);
        assert!((d.ratios()[0] - 4.17).abs() < 5e-3);
        assert_eq!(d.s5, 0.0);
        assert!((d.s5_two_communities - 48.0).abs() < 1e-12);

        let z = consistency_diagnostics(5.0, 2.0, 0.0, 0.0, 10).unwrap();
        assert!((z.s1 - 9.0 / 7.0).abs() < 1e-15);
        assert_eq!(z.s1, z.s2);

        let zero = consistency_diagnostics(0.0, 0.0, 0.5, 0.5, 10).unwrap();
        assert_eq!(zero.s1, 0.0);
        assert!(consistency_diagnostics(1.0, 1.0, 1.5, 0.0, 10).is_err());
    }

    #[test]
    fn separated_cliques_recovered() {
        let g = cliques(6, 2);
        let truth: Vec<usize> = (0..12).map(|i| i / 6).collect();
        for seed in 0..5 {
            let cfg = FitConfig {
                seed,
                ..FitConfig::new(2)
            };
            let res = fit(&g, &cfg).unwrap();
            assert!(same_partition(res.labels.as_slice(), &truth), "seed {seed}");
            assert!(res.converged);
        }
    }

    #[test]
    fn config_validation() {
        assert!(FitConfig { inner_tol: 0.0, ..FitConfig::new(2) }.validate().is_err());
        assert!(FitConfig { restarts: 0, ..FitConfig::new(2) }.validate().is_err());
        assert!(FitConfig::new(0).validate().is_err());
        let parsed: FitConfig = serde_json::from_str("{\"k\": 3, \"restarts\": 1}").unwrap();
        assert_eq!(parsed.k, 3);
        assert_eq!(parsed.inner_max, 100);
        assert!(serde_json::from_str::<FitConfig>("{\"bogus\": 1}").is_err());
    }

    #[test]
    fn hook_rejects_wrong_k() {
        let g = cliques(3, 2);
        let e0 = Labels::new(vec![0; 6], 1).unwrap();
        assert!(fit_from_labels(&g, &FitConfig::new(2), &e0).is_err());
    }
}
