use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bsbm::baselines::{fit_mc, fit_ppl_binary, DEFAULT_MC_ITERS};
use bsbm::eval_harness::{builtin_scenario, nmi, run_scenario, select_k_with, write_csv, ScenarioConfig, BUILTIN_SCENARIOS};
use bsbm::fitter::{consistency_diagnostics, fit, FitConfig, FitResult};
use bsbm::signed_graph::{read_edge_list_file, read_labels_file, sample_bsbm, write_edge_list_file, write_labels_file};
use bsbm::spectral_init::{scp_init, DEFAULT_TAU_REG};
use bsbm::BsbmParams;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "bsbm", version, about = "Community detection in signed networks with the balanced stochastic block model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a signed graph and its true labels from a parameter file.
    Generate {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_graph: PathBuf,
        #[arg(long)]
        out_labels: PathBuf,
    },
    /// Fit the model by profile pseudo-likelihood.
    Fit {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        restarts: Option<usize>,
        /// JSON file with fit settings; command-line flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_labels: PathBuf,
        #[arg(long)]
        out_params: Option<PathBuf>,
        #[arg(long)]
        out_trace: Option<PathBuf>,
    },
    /// Run one of the comparison methods.
    Baseline {
        #[arg(long, value_enum)]
        method: BaselineMethod,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_labels: PathBuf,
    },
    /// Normalized mutual information between two label files.
    Nmi {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Run a simulation scenario and write a CSV of per-replication results.
    Simulate {
        #[arg(long)]
        scenario: String,
        /// JSON scenario file replacing the built-in settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        replications: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Choose the number of communities by holdout over node pairs.
    SelectK {
        #[arg(long)]
        graph: PathBuf,
        /// Inclusive range `lo:hi` or a comma-separated list.
        #[arg(long, default_value = "2:8")]
        grid: String,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        restarts: Option<usize>,
    },
    /// Signal statistics of the planted model and their ratios to log n.
    Diagnose {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long, allow_negative_numbers = true)]
        d: f64,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineMethod {
    Mc,
    Scp,
    Ppl,
    PplMerge,
}

enum Failure {
    Usage(String),
    Data(String),
    NotConverged,
}

impl From<bsbm::Error> for Failure {
    fn from(e: bsbm::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

/// Attach the offending path to file errors.
fn at<T, E: std::fmt::Display>(path: &Path, r: std::result::Result<T, E>) -> std::result::Result<T, Failure> {
    r.map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

type CliResult = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DATA)
        }
        Err(Failure::NotConverged) => {
            eprintln!("warning: fit did not converge; partial results written");
            ExitCode::from(EXIT_NOT_CONVERGED)
        }
    }
}

fn check_k(k: usize) -> CliResult {
    if k == 0 {
        return Err(Failure::Usage("--k must be at least 1".into()));
    }
    Ok(())
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Generate {
            params,
            n,
            seed,
            out_graph,
            out_labels,
        } => {
            let params = at(&params, BsbmParams::read_file(&params))?;
            let (graph, labels) = sample_bsbm(&params, n, seed)?;
            at(&out_graph, write_edge_list_file(&graph, &out_graph))?;
            at(&out_labels, write_labels_file(&labels, &out_labels))?;
            eprintln!("sampled n={n}, {} edges ({} negative)", graph.edge_count(), graph.negative_count());
            Ok(())
        }
        Command::Fit {
            graph,
            k,
            seed,
            restarts,
            config,
            out_labels,
            out_params,
            out_trace,
        } => {
            check_k(k)?;
            let mut cfg = match config {
                Some(path) => {
                    let text = at(&path, std::fs::read_to_string(&path))?;
                    at(&path, serde_json::from_str(&text))?
                }
                None => FitConfig::default(),
            };
            cfg.k = k;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = restarts {
                cfg.restarts = r;
            }
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let graph = at(&graph, read_edge_list_file(&graph))?;
            let res = fit(&graph, &cfg)?;
            at(&out_labels, write_labels_file(&res.labels, &out_labels))?;
            if let Some(path) = out_params {
                at(&path, res.params.write_file(&path))?;
            }
            if let Some(path) = out_trace {
                write_trace(&res, &path)?;
            }
            report_fit(&res);
            if res.converged {
                Ok(())
            } else {
                Err(Failure::NotConverged)
            }
        }
        Command::Baseline {
            method,
            graph,
            k,
            seed,
            out_labels,
        } => {
            check_k(k)?;
            let graph = at(&graph, read_edge_list_file(&graph))?;
            let cfg = FitConfig {
                seed,
                ..FitConfig::new(k)
            };
            let labels = match method {
                BaselineMethod::Mc => fit_mc(&graph, k, DEFAULT_MC_ITERS, seed)?,
                BaselineMethod::Scp => scp_init(&graph, k, DEFAULT_TAU_REG, seed)?,
                BaselineMethod::Ppl => fit_ppl_binary(&graph, k, &cfg, false)?,
                BaselineMethod::PplMerge => fit_ppl_binary(&graph, k, &cfg, true)?,
            };
            at(&out_labels, write_labels_file(&labels, &out_labels))?;
            Ok(())
        }
        Command::Nmi { a, b } => {
            let a = at(&a, read_labels_file(&a, None))?;
            let b = at(&b, read_labels_file(&b, None))?;
            println!("{}", nmi(a.as_slice(), b.as_slice())?);
            Ok(())
        }
        Command::Simulate {
            scenario,
            config,
            replications,
            seed,
            out,
        } => {
            let mut cfg = match config {
                Some(path) => at(&path, ScenarioConfig::read_file(&path))?,
                None => builtin_scenario(&scenario).map_err(|_| {
                    Failure::Usage(format!(
                        "unknown scenario {scenario:?}; expected one of {}",
                        BUILTIN_SCENARIOS.join(", ")
                    ))
                })?,
            };
            cfg.scenario = scenario;
            if let Some(r) = replications {
                cfg.replications = r;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let rows = run_scenario(&cfg)?;
            let file = at(&out, File::create(&out))?;
            at(&out, write_csv(&rows, BufWriter::new(file)))?;
            let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
            eprintln!("{} rows written to {} ({failed} failed cells)", rows.len(), out.display());
            Ok(())
        }
        Command::SelectK {
            graph,
            grid,
            folds,
            seed,
            restarts,
        } => {
            let grid = parse_grid(&grid)?;
            if folds < 2 {
                return Err(Failure::Usage("--folds must be at least 2".into()));
            }
            let graph = at(&graph, read_edge_list_file(&graph))?;
            let cfg = FitConfig {
                seed,
                restarts: restarts.unwrap_or(FitConfig::default().restarts),
                ..FitConfig::default()
            };
            let sel = select_k_with(&graph, &grid, folds, &cfg)?;
            for (k, score) in &sel.scores {
                println!("K={k} score={score:.6}");
            }
            println!("chosen K={}", sel.chosen);
            Ok(())
        }
        Command::Diagnose { a, b, c, d, n } => {
            let diag = consistency_diagnostics(a, b, c, d, n).map_err(|e| Failure::Usage(e.to_string()))?;
            let stats = [diag.s1, diag.s2, diag.s3, diag.s4, diag.s5];
            for (v, (s, r)) in stats.iter().zip(diag.ratios()).enumerate() {
                println!("S{} = {s:.6}  S{}/log n = {r:.6}", v + 1, v + 1);
            }
            println!("ac + bd = {:.6}  (ac + bd)/log n = {:.6}", diag.s5_two_communities, diag.s5_two_communities / diag.logn);
            Ok(())
        }
    }
}

fn parse_grid(spec: &str) -> std::result::Result<Vec<usize>, Failure> {
    let bad = || Failure::Usage(format!("bad --grid {spec:?}; use lo:hi or a comma-separated list"));
    let grid: Vec<usize> = if let Some((lo, hi)) = spec.split_once(':') {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        (lo..=hi).collect()
    } else {
        spec.split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<std::result::Result<_, _>>()?
    };
    if grid.is_empty() || grid.contains(&0) {
        return Err(bad());
    }
    Ok(grid)
}

fn write_trace(res: &FitResult, path: &Path) -> CliResult {
    let mut w = BufWriter::new(at(path, File::create(path))?);
    writeln!(w, "outer,lpl,inner_iters")?;
    for (t, lpl) in res.lpl_trace.iter().enumerate() {
        // entry 0 is the starting value; entry t > 0 follows outer step t
        let inner = if t == 0 { 0 } else { res.inner_iters[t - 1] };
        writeln!(w, "{t},{lpl},{inner}")?;
    }
    w.flush()?;
    Ok(())
}

fn report_fit(res: &FitResult) {
    let w = &res.warnings;
    eprintln!(
        "final log pseudo-likelihood {:.6} after {} outer steps (restart {}, converged: {})",
        res.final_lpl(),
        res.inner_iters.len(),
        res.restart,
        res.converged
    );
    if w.clamped > 0 || w.degenerate_rows > 0 || !w.empty_classes.is_empty() || w.inner_capped > 0 {
        eprintln!(
            "warnings: {} clamped cells, {} degenerate rows, empty classes {:?}, {} capped inner loops",
            w.clamped, w.degenerate_rows, w.empty_classes, w.inner_capped
        );
    }
}
