//! C ABI over the `bsbm` crate.
//!
//! Every entry point returns a [`BsbmStatus`]; on failure a description is
//! available from [`bsbm_last_error`] on the same thread. Graphs and fit
//! results are opaque handles released with their `_free` function. Matrices
//! cross the boundary as row-major `K x K` arrays and labels are 0-based.
//! Panics never unwind into C; they surface as `BSBM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use bsbm::baselines::{fit_mc, fit_ppl_binary, DEFAULT_MC_ITERS};
use bsbm::eval_harness::nmi;
use bsbm::fitter::{fit, FitConfig, FitResult};
use bsbm::nalgebra::DMatrix;
use bsbm::signed_graph::{read_edge_list_file, sample_bsbm, write_edge_list_file};
use bsbm::spectral_init::{scp_init, DEFAULT_TAU_REG};
use bsbm::{BsbmParams, Error, SignedGraph};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsbmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Numerical = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsbmMethod {
    Mc = 0,
    Scp = 1,
    Ppl = 2,
    PplMerge = 3,
}

/// Settings for [`bsbm_fit`]; obtain defaults from [`bsbm_fit_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BsbmFitOptions {
    pub k: usize,
    pub seed: u64,
    pub restarts: usize,
    pub inner_tol: f64,
    pub inner_max: usize,
    pub outer_tol: f64,
    pub outer_max: usize,
}

/// Opaque signed graph.
pub struct BsbmGraph(SignedGraph);

/// Opaque fit result.
pub struct BsbmFit(FitResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> BsbmStatus {
    match err {
        Error::Parse { .. } | Error::SelfLoop { .. } | Error::ConflictingDuplicate { .. } | Error::Json(_) | Error::Csv(_) => {
            BsbmStatus::Parse
        }
        Error::Io(_) => BsbmStatus::Io,
        Error::ZeroProbabilityEvent | Error::EigenNonConvergence { .. } | Error::NonFinite => BsbmStatus::Numerical,
        _ => BsbmStatus::InvalidArgument,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Run `f`, translating errors and panics into a status plus last-error text.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> BsbmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BsbmStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            BsbmStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            BsbmStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            BsbmStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn path_arg(p: *const c_char) -> Result<String, Fail> {
    if p.is_null() {
        return Err(Fail::Null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Fail::Arg("path is not valid UTF-8".into()))
}

fn square(k: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(k, k, data)
}

/// Message for the most recent failure on the calling thread; empty if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn bsbm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn bsbm_status_message(status: BsbmStatus) -> *const c_char {
    let s: &CStr = match status {
        BsbmStatus::Ok => c"ok",
        BsbmStatus::NullPointer => c"null pointer argument",
        BsbmStatus::InvalidArgument => c"invalid argument",
        BsbmStatus::Parse => c"parse error",
        BsbmStatus::Io => c"i/o error",
        BsbmStatus::Numerical => c"numerical failure",
        BsbmStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Build a graph on `n` nodes from `m` edges `(u[e], v[e], sign[e])`, signs in {-1, +1}.
///
/// # Safety
/// `u`, `v` and `sign` must point to `m` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bsbm_graph_new(
    n: usize,
    u: *const usize,
    v: *const usize,
    sign: *const i8,
    m: usize,
    out: *mut *mut BsbmGraph,
) -> BsbmStatus {
    guard(|| {
        let out = out.as_mut().ok_or(Fail::Null("out"))?;
        let (u, v, s) = (input(u, m, "u")?, input(v, m, "v")?, input(sign, m, "sign")?);
        let g = SignedGraph::from_edges(n, (0..m).map(|e| (u[e], v[e], s[e])))?;
        *out = Box::into_raw(Box::new(BsbmGraph(g)));
        Ok(())
    })
}

/// Read a `u v sign` edge list (optional `n=<int>` header).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bsbm_graph_read(path: *const c_char, out: *mut *mut BsbmGraph) -> BsbmStatus {
    guard(|| {
        let out = out.as_mut().ok_or(Fail::Null("out"))?;
        let g = read_edge_list_file(path_arg(path)?)?;
        *out = Box::into_raw(Box::new(BsbmGraph(g)));
        Ok(())
    })
}

/// Write the graph as a canonical edge list.
///
/// # Safety
/// `graph` must come from this library; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bsbm_graph_write(graph: *const BsbmGraph, path: *const c_char) -> BsbmStatus {
    guard(|| {
        let g = borrow(graph, "graph")?;
        write_edge_list_file(&g.0, path_arg(path)?)?;
        Ok(())
    })
}

/// Number of nodes; 0 for a null handle.
///
/// # Safety
/// `graph` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn bsbm_graph_node_count(graph: *const BsbmGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.n())
}

/// Number of edges; 0 for a null handle.
///
/// # Safety
/// `graph` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn bsbm_graph_edge_count(graph: *const BsbmGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// # Safety
/// `graph` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bsbm_graph_free(graph: *mut BsbmGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Draw a graph of `n` nodes from the model `(pi, P, eta, nu)` with `K = k`.
/// True labels are written to `out_labels` (length `n`).
///
/// # Safety
/// `pi` and `nu` hold `k` elements, `p` and `eta` hold `k * k`; `out_labels`
/// holds `n`; `out_graph` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bsbm_sample(
    k: usize,
    pi: *const f64,
    p: *const f64,
    eta: *const f64,
    nu: *const i8,
    n: usize,
    seed: u64,
    out_graph: *mut *mut BsbmGraph,
    out_labels: *mut usize,
) -> BsbmStatus {
    guard(|| {
        let out_graph = out_graph.as_mut().ok_or(Fail::Null("out_graph"))?;
        let kk = k.checked_mul(k).ok_or_else(|| Fail::Arg("K too large".into()))?;
        let params = BsbmParams::new(
            input(pi, k, "pi")?.to_vec(),
            square(k, input(p, kk, "p")?),
            square(k, input(eta, kk, "eta")?),
            input(nu, k, "nu")?.to_vec(),
        )?;
        let labels_out = output(out_labels, n, "out_labels")?;
        let (g, z) = sample_bsbm(&params, n, seed)?;
        labels_out.copy_from_slice(z.as_slice());
        *out_graph = Box::into_raw(Box::new(BsbmGraph(g)));
        Ok(())
    })
}

/// Default fit settings for `k` communities.
#[no_mangle]
pub extern "C" fn bsbm_fit_options_default(k: usize) -> BsbmFitOptions {
    let d = FitConfig::new(k);
    BsbmFitOptions {
        k,
        seed: d.seed,
        restarts: d.restarts,
        inner_tol: d.inner_tol,
        inner_max: d.inner_max,
        outer_tol: d.outer_tol,
        outer_max: d.outer_max,
    }
}

/// Fit the model by profile pseudo-likelihood. A run that hits the iteration
/// cap still returns `BSBM_STATUS_OK`; query [`bsbm_fit_converged`].
///
/// # Safety
/// `graph` must come from this library; `options` must be readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bsbm_fit(graph: *const BsbmGraph, options: *const BsbmFitOptions, out: *mut *mut BsbmFit) -> BsbmStatus {
    guard(|| {
        let g = borrow(graph, "graph")?;
        let o = borrow(options, "options")?;
        let out = out.as_mut().ok_or(Fail::Null("out"))?;
        let cfg = FitConfig {
            k: o.k,
            seed: o.seed,
            restarts: o.restarts,
            inner_tol: o.inner_tol,
            inner_max: o.inner_max,
            outer_tol: o.outer_tol,
            outer_max: o.outer_max,
            ..FitConfig::default()
        };
        let res = fit(&g.0, &cfg)?;
        *out = Box::into_raw(Box::new(BsbmFit(res)));
        Ok(())
    })
}

/// Estimated labels; `len` must equal the node count.
///
/// # Safety
/// `fit` must come from this library; `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn bsbm_fit_labels(fit: *const BsbmFit, out: *mut usize, len: usize) -> BsbmStatus {
    guard(|| {
        let f = borrow(fit, "fit")?;
        let z = f.0.labels.as_slice();
        if len != z.len() {
            return Err(Fail::Arg(format!("buffer holds {len} labels, graph has {}", z.len())));
        }
        output(out, len, "out")?.copy_from_slice(z);
        Ok(())
    })
}

/// Estimated parameters: `pi` and `nu` of length K, `p` and `eta` of length K*K (row-major).
///
/// # Safety
/// `fit` must come from this library; each buffer must hold the stated length.
#[no_mangle]
pub unsafe extern "C" fn bsbm_fit_params(fit: *const BsbmFit, pi: *mut f64, p: *mut f64, eta: *mut f64, nu: *mut i8) -> BsbmStatus {
    guard(|| {
        let params = &borrow(fit, "fit")?.0.params;
        let k = params.k();
        output(pi, k, "pi")?.copy_from_slice(params.pi());
        output(nu, k, "nu")?.copy_from_slice(params.nu());
        for (buf, m, name) in [(p, params.p(), "p"), (eta, params.eta(), "eta")] {
            let dst = output(buf, k * k, name)?;
            for a in 0..k {
                for b in 0..k {
                    dst[a * k + b] = m[(a, b)];
                }
            }
        }
        Ok(())
    })
}

/// Number of communities of the fit; 0 for a null handle.
///
/// # Safety
/// `fit` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn bsbm_fit_k(fit: *const BsbmFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.params.k())
}

/// Final log pseudo-likelihood; NaN for a null handle.
///
/// # Safety
/// `fit` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn bsbm_fit_lpl(fit: *const BsbmFit) -> f64 {
    fit.as_ref().map_or(f64::NAN, |f| f.0.final_lpl())
}

/// # Safety
/// `fit` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn bsbm_fit_converged(fit: *const BsbmFit) -> bool {
    fit.as_ref().is_some_and(|f| f.0.converged)
}

/// Length of the pseudo-likelihood trace; 0 for a null handle.
///
/// # Safety
/// `fit` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn bsbm_fit_trace_len(fit: *const BsbmFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.lpl_trace.len())
}

/// Copy the pseudo-likelihood trace; `len` must equal [`bsbm_fit_trace_len`].
///
/// # Safety
/// `fit` must come from this library; `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn bsbm_fit_trace(fit: *const BsbmFit, out: *mut f64, len: usize) -> BsbmStatus {
    guard(|| {
        let trace = &borrow(fit, "fit")?.0.lpl_trace;
        if len != trace.len() {
            return Err(Fail::Arg(format!("buffer holds {len} values, trace has {}", trace.len())));
        }
        output(out, len, "out")?.copy_from_slice(trace);
        Ok(())
    })
}

/// # Safety
/// `fit` must be null or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bsbm_fit_free(fit: *mut BsbmFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Run a comparison method; labels go to `out_labels` (length = node count).
///
/// # Safety
/// `graph` must come from this library; `out_labels` must hold one entry per node.
#[no_mangle]
pub unsafe extern "C" fn bsbm_baseline(
    graph: *const BsbmGraph,
    method: BsbmMethod,
    k: usize,
    seed: u64,
    out_labels: *mut usize,
) -> BsbmStatus {
    guard(|| {
        let g = &borrow(graph, "graph")?.0;
        let out = output(out_labels, g.n(), "out_labels")?;
        let cfg = FitConfig {
            seed,
            ..FitConfig::new(k)
        };
        let z = match method {
            BsbmMethod::Mc => fit_mc(g, k, DEFAULT_MC_ITERS, seed)?,
            BsbmMethod::Scp => scp_init(g, k, DEFAULT_TAU_REG, seed)?,
            BsbmMethod::Ppl => fit_ppl_binary(g, k, &cfg, false)?,
            BsbmMethod::PplMerge => fit_ppl_binary(g, k, &cfg, true)?,
        };
        out.copy_from_slice(z.as_slice());
        Ok(())
    })
}

/// Normalized mutual information between two labelings of length `n`.
///
/// # Safety
/// `a` and `b` must hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bsbm_nmi(a: *const usize, b: *const usize, n: usize, out: *mut f64) -> BsbmStatus {
    guard(|| {
        let out = out.as_mut().ok_or(Fail::Null("out"))?;
        *out = nmi(input(a, n, "a")?, input(b, n, "b")?)?;
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bsbm_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
