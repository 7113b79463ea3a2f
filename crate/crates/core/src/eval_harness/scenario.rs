use std::io::Write;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::nmi;
use crate::baselines::{fit_mc, fit_ppl_binary, DEFAULT_MC_ITERS};
use crate::error::{Error, Result};
use crate::fitter::{fit, FitConfig};
use crate::signed_graph::sample_bsbm;
use crate::spectral_init::{scp_init, DEFAULT_TAU_REG};
use crate::{seeded_rng, BsbmParams, Labels, SignedGraph};

/// Names accepted by [`builtin_scenario`].
pub const BUILTIN_SCENARIOS: [&str; 10] = ["a", "b", "c", "d", "e", "f", "app-c2", "app-c3", "app-e", "app-f"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "bsbm")]
    Bsbm,
    #[serde(rename = "mc")]
    Mc,
    #[serde(rename = "scp")]
    Scp,
    #[serde(rename = "ppl")]
    Ppl,
    #[serde(rename = "ppl-merge")]
    PplMerge,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Bsbm, Method::Mc, Method::Scp, Method::Ppl, Method::PplMerge];

    pub fn name(self) -> &'static str {
        match self {
            Method::Bsbm => "bsbm",
            Method::Mc => "mc",
            Method::Scp => "scp",
            Method::Ppl => "ppl",
            Method::PplMerge => "ppl-merge",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// Meta-group signs of the planted model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuPattern {
    /// `+1, -1, +1, ...`
    Alternating,
    /// The first `m` communities get `-1`, the rest `+1`.
    Negatives(usize),
}

impl NuPattern {
    pub fn signs(self, k: usize) -> Vec<i8> {
        match self {
            NuPattern::Alternating => (0..k).map(|l| if l % 2 == 0 { 1 } else { -1 }).collect(),
            NuPattern::Negatives(m) => (0..k).map(|l| if l < m { -1 } else { 1 }).collect(),
        }
    }
}

/// The parameter varied across a scenario. Each value overrides the matching
/// base field of [`ScenarioConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "param", content = "values", rename_all = "snake_case")]
pub enum Sweep {
    /// No sweep: a single point at the base settings.
    None,
    PIn(Vec<f64>),
    /// Number of `-1` entries of `nu`.
    Negatives(Vec<usize>),
    /// `[lo, hi]` bounds of the uniform draw of `eta`.
    EtaBand(Vec<[f64; 2]>),
    N(Vec<usize>),
    K(Vec<usize>),
}

impl Sweep {
    fn len(&self) -> usize {
        match self {
            Sweep::None => 1,
            Sweep::PIn(v) => v.len(),
            Sweep::Negatives(v) => v.len(),
            Sweep::EtaBand(v) => v.len(),
            Sweep::N(v) => v.len(),
            Sweep::K(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub n: usize,
    pub k: usize,
    /// Community proportions; uniform when absent.
    #[serde(default)]
    pub pi: Option<Vec<f64>>,
    /// Proportions used at a given K when K is swept; matched by length.
    #[serde(default)]
    pub pi_by_k: Vec<Vec<f64>>,
    pub p_in: f64,
    pub p_bt: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub nu: NuPattern,
    pub sweep: Sweep,
    pub replications: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    /// Restarts for the pseudo-likelihood fits (bsbm, ppl, ppl-merge).
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_mc_iters")]
    pub mc_iters: usize,
    /// Record wall-clock time per row. Off makes the output bitwise reproducible.
    #[serde(default = "default_true")]
    pub record_runtime: bool,
}

fn default_restarts() -> usize {
    FitConfig::default().restarts
}

fn default_mc_iters() -> usize {
    DEFAULT_MC_ITERS
}

fn default_true() -> bool {
    true
}

/// One fully specified simulation setting.
#[derive(Debug, Clone, PartialEq)]
struct Point {
    label: String,
    n: usize,
    pi: Vec<f64>,
    p_in: f64,
    p_bt: f64,
    eta: [f64; 2],
    nu: Vec<i8>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        if self.sweep.len() == 0 {
            return bad("sweep has no values".into());
        }
        for i in 0..self.sweep.len() {
            let pt = self.point(i)?;
            let k = pt.pi.len();
            if !unit(pt.p_in) || !unit(pt.p_bt) {
                return bad(format!("edge probabilities must lie in [0, 1] at sweep value {}", pt.label));
            }
            if !(unit(pt.eta[0]) && unit(pt.eta[1]) && pt.eta[0] <= pt.eta[1]) {
                return bad(format!("eta bounds must satisfy 0 <= lo <= hi <= 1 at sweep value {}", pt.label));
            }
            if k == 0 || k > pt.n {
                return bad(format!("K = {k} must be in 1..=n (n = {})", pt.n));
            }
            if let NuPattern::Negatives(m) = self.nu {
                if m > k && !matches!(self.sweep, Sweep::Negatives(_)) {
                    return bad(format!("{m} negative signs exceed K = {k}"));
                }
            }
            if let Sweep::Negatives(v) = &self.sweep {
                if v[i] > k {
                    return bad(format!("{} negative signs exceed K = {k}", v[i]));
                }
            }
            // shape and simplex checks of the model itself
            BsbmParams::planted(pt.pi.clone(), pt.p_in, pt.p_bt, DMatrix::zeros(k, k), pt.nu.clone())?;
        }
        Ok(())
    }

    fn pi_for(&self, k: usize) -> Vec<f64> {
        if let Some(pi) = self.pi_by_k.iter().find(|p| p.len() == k) {
            return pi.clone();
        }
        match &self.pi {
            Some(pi) if pi.len() == k => pi.clone(),
            Some(pi) => pi.clone(), // wrong length; reported by validation
            None => vec![1.0 / k as f64; k],
        }
    }

    fn point(&self, idx: usize) -> Result<Point> {
        let mut pt = Point {
            label: "-".into(),
            n: self.n,
            pi: self.pi_for(self.k),
            p_in: self.p_in,
            p_bt: self.p_bt,
            eta: [self.eta_lo, self.eta_hi],
            nu: self.nu.signs(self.k),
        };
        let out_of_range = || Error::InvalidArgument(format!("sweep index {idx} out of range"));
        match &self.sweep {
            Sweep::None => {}
            Sweep::PIn(v) => {
                pt.p_in = *v.get(idx).ok_or_else(out_of_range)?;
                pt.label = pt.p_in.to_string();
            }
            Sweep::Negatives(v) => {
                let m = *v.get(idx).ok_or_else(out_of_range)?;
                pt.nu = NuPattern::Negatives(m).signs(self.k);
                pt.label = format!("{m}:{}", self.k.saturating_sub(m));
            }
            Sweep::EtaBand(v) => {
                pt.eta = *v.get(idx).ok_or_else(out_of_range)?;
                pt.label = format!("{}-{}", pt.eta[0], pt.eta[1]);
            }
            Sweep::N(v) => {
                pt.n = *v.get(idx).ok_or_else(out_of_range)?;
                pt.label = pt.n.to_string();
            }
            Sweep::K(v) => {
                let k = *v.get(idx).ok_or_else(out_of_range)?;
                pt.pi = self.pi_for(k);
                pt.nu = self.nu.signs(k);
                pt.label = k.to_string();
            }
        }
        Ok(pt)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Built-in settings for the simulation panels. Defaults shared by all: n = 1000,
/// K = 3, uniform proportions, `P_in = 0.13`, `P_bt = 0.07`, `eta ~ U[0, 1]`,
/// alternating `nu`, 100 replications, all five methods.
pub fn builtin_scenario(id: &str) -> Result<ScenarioConfig> {
    let base = ScenarioConfig {
        scenario: id.to_string(),
        n: 1000,
        k: 3,
        pi: None,
        pi_by_k: Vec::new(),
        p_in: 0.13,
        p_bt: 0.07,
        eta_lo: 0.0,
        eta_hi: 1.0,
        nu: NuPattern::Alternating,
        sweep: Sweep::None,
        replications: 100,
        base_seed: 0,
        methods: Method::ALL.to_vec(),
        restarts: default_restarts(),
        mc_iters: DEFAULT_MC_ITERS,
        record_runtime: true,
    };
    let bands = Sweep::EtaBand(vec![[0.1, 0.2], [0.2, 0.3], [0.3, 0.4], [0.4, 0.5], [0.5, 0.6]]);
    let sizes = Sweep::N(vec![100, 250, 500, 1000, 2000]);
    let ks = Sweep::K(vec![2, 4, 6, 8]);
    let cfg = match id {
        "a" => ScenarioConfig {
            sweep: Sweep::PIn(vec![0.05, 0.07, 0.09, 0.11, 0.13]),
            ..base
        },
        "b" => ScenarioConfig {
            k: 8,
            p_in: 0.15,
            p_bt: 0.06,
            nu: NuPattern::Negatives(1),
            sweep: Sweep::Negatives(vec![1, 2, 3, 4]),
            ..base
        },
        "c" | "app-c2" => ScenarioConfig {
            k: 2,
            p_in: 0.1,
            pi: (id == "app-c2").then(|| vec![0.3, 0.7]),
            sweep: bands,
            ..base
        },
        "d" | "app-c3" => ScenarioConfig {
            p_in: 0.1,
            pi: (id == "app-c3").then(|| vec![0.2, 0.3, 0.5]),
            sweep: bands,
            ..base
        },
        "e" | "app-e" => ScenarioConfig {
            pi: (id == "app-e").then(|| vec![0.2, 0.3, 0.5]),
            sweep: sizes,
            ..base
        },
        "f" | "app-f" => ScenarioConfig {
            pi_by_k: if id == "app-f" {
                vec![
                    vec![0.3, 0.7],
                    vec![0.1, 0.2, 0.3, 0.4],
                    vec![0.05, 0.15, 0.15, 0.2, 0.2, 0.25],
                    vec![0.05, 0.05, 0.1, 0.1, 0.1, 0.15, 0.2, 0.25],
                ]
            } else {
                Vec::new()
            },
            sweep: ks,
            ..base
        },
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown scenario {other:?}; expected one of {}",
                BUILTIN_SCENARIOS.join(", ")
            )))
        }
    };
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario: String,
    pub sweep: String,
    pub rep: usize,
    pub method: Method,
    /// Missing when the method failed.
    pub nmi: Option<f64>,
    pub runtime_ms: f64,
    pub seed: u64,
    /// Empty on success.
    pub error: String,
}

fn draw_instance(pt: &Point, seed: u64) -> Result<(SignedGraph, Labels)> {
    let k = pt.pi.len();
    let mut rng = seeded_rng(seed);
    // eta uses its own stream so the graph draw is unaffected by the band
    rng.set_stream(1);
    let mut eta = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let v = if pt.eta[0] < pt.eta[1] {
                rng.random_range(pt.eta[0]..=pt.eta[1])
            } else {
                pt.eta[0]
            };
            eta[(a, b)] = v;
            eta[(b, a)] = v;
        }
    }
    let params = BsbmParams::planted(pt.pi.clone(), pt.p_in, pt.p_bt, eta, pt.nu.clone())?;
    sample_bsbm(&params, pt.n, seed)
}

fn run_method(cfg: &ScenarioConfig, method: Method, graph: &SignedGraph, k: usize, seed: u64) -> Result<Labels> {
    let fit_cfg = FitConfig {
        k,
        seed,
        restarts: cfg.restarts,
        ..FitConfig::default()
    };
    match method {
        Method::Bsbm => Ok(fit(graph, &fit_cfg)?.labels),
        Method::Mc => fit_mc(graph, k, cfg.mc_iters, seed),
        Method::Scp => scp_init(graph, k, DEFAULT_TAU_REG, seed),
        Method::Ppl => fit_ppl_binary(graph, k, &fit_cfg, false),
        Method::PplMerge => fit_ppl_binary(graph, k, &fit_cfg, true),
    }
}

/// Run every (sweep value, replication, method) cell. Replication `r` uses seed
/// `base_seed + r` for both the graph draw and the methods. Cells run in
/// parallel; rows come back in (sweep, rep, method) order. A failing cell yields
/// a row with the error message instead of aborting the run.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let points = (0..cfg.sweep.len()).map(|i| cfg.point(i)).collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|s| (0..cfg.replications).map(move |r| (s, r)))
        .collect();
    let rows: Vec<Vec<ResultRow>> = cells
        .par_iter()
        .map(|&(s, rep)| {
            let pt = &points[s];
            let seed = cfg.base_seed.wrapping_add(rep as u64);
            let instance = draw_instance(pt, seed);
            cfg.methods
                .par_iter()
                .map(|&method| {
                    let start = Instant::now();
                    let outcome = instance.as_ref().map_err(Error::to_string).and_then(|(g, truth)| {
                        run_method(cfg, method, g, pt.pi.len(), seed)
                            .and_then(|z| nmi(z.as_slice(), truth.as_slice()))
                            .map_err(|e| e.to_string())
                    });
                    let runtime_ms = if cfg.record_runtime {
                        start.elapsed().as_secs_f64() * 1e3
                    } else {
                        0.0
                    };
                    let (nmi, error) = match outcome {
                        Ok(v) => (Some(v), String::new()),
                        Err(e) => (None, e),
                    };
                    ResultRow {
                        scenario: cfg.scenario.clone(),
                        sweep: pt.label.clone(),
                        rep,
                        method,
                        nmi,
                        runtime_ms,
                        seed,
                        error,
                    }
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Write rows as CSV with the header `scenario,sweep,rep,method,nmi,runtime_ms,seed,error`.
pub fn write_csv<W: Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(["scenario", "sweep", "rep", "method", "nmi", "runtime_ms", "seed", "error"])?;
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
