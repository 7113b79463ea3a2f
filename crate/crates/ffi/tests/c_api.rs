use std::ffi::{CStr, CString};
use std::ptr;

use bsbm_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(bsbm_last_error()) }.to_string_lossy().into_owned()
}

/// Three-community planted model with strong signal.
fn sample(n: usize, seed: u64) -> (*mut BsbmGraph, Vec<usize>) {
    let k = 3;
    let pi = [1.0 / 3.0; 3];
    let p: Vec<f64> = (0..9).map(|c| if c / 3 == c % 3 { 0.2 } else { 0.05 }).collect();
    let eta = [0.7; 9];
    let nu = [1i8, -1, 1];
    let mut g = ptr::null_mut();
    let mut z = vec![0usize; n];
    let st = unsafe { bsbm_sample(k, pi.as_ptr(), p.as_ptr(), eta.as_ptr(), nu.as_ptr(), n, seed, &mut g, z.as_mut_ptr()) };
    assert_eq!(st, BsbmStatus::Ok, "{}", last_error());
    (g, z)
}

#[test]
fn graph_from_edges_and_counts() {
    let (u, v, s) = ([0usize, 1, 2], [1usize, 2, 3], [1i8, -1, 1]);
    let mut g = ptr::null_mut();
    let st = unsafe { bsbm_graph_new(5, u.as_ptr(), v.as_ptr(), s.as_ptr(), 3, &mut g) };
    assert_eq!(st, BsbmStatus::Ok);
    unsafe {
        assert_eq!(bsbm_graph_node_count(g), 5);
        assert_eq!(bsbm_graph_edge_count(g), 3);
        bsbm_graph_free(g);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let (u, v, s) = ([0usize], [0usize], [1i8]);
    let mut g = ptr::null_mut();
    let st = unsafe { bsbm_graph_new(2, u.as_ptr(), v.as_ptr(), s.as_ptr(), 1, &mut g) };
    assert_eq!(st, BsbmStatus::Parse);
    assert!(last_error().contains("self-loop"));
    assert!(g.is_null());

    let bad_sign = [2i8];
    let (u, v) = ([0usize], [1usize]);
    let st = unsafe { bsbm_graph_new(2, u.as_ptr(), v.as_ptr(), bad_sign.as_ptr(), 1, &mut g) };
    assert_ne!(st, BsbmStatus::Ok);
    assert!(!last_error().is_empty());

    let st = unsafe { bsbm_graph_new(2, ptr::null(), v.as_ptr(), s.as_ptr(), 1, &mut g) };
    assert_eq!(st, BsbmStatus::NullPointer);
    assert!(last_error().contains('u'));

    let mut out = 0.0;
    let st = unsafe { bsbm_nmi(ptr::null(), ptr::null(), 3, &mut out) };
    assert_eq!(st, BsbmStatus::NullPointer);
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        assert_eq!(bsbm_graph_node_count(ptr::null()), 0);
        assert!(bsbm_fit_lpl(ptr::null()).is_nan());
        assert!(!bsbm_fit_converged(ptr::null()));
        bsbm_graph_free(ptr::null_mut());
        bsbm_fit_free(ptr::null_mut());
        let opts = bsbm_fit_options_default(2);
        let mut f = ptr::null_mut();
        assert_eq!(bsbm_fit(ptr::null(), &opts, &mut f), BsbmStatus::NullPointer);
    }
}

#[test]
fn sample_fit_and_score() {
    let n = 300;
    let (g, truth) = sample(n, 11);
    let mut opts = bsbm_fit_options_default(3);
    opts.seed = 5;
    let mut f = ptr::null_mut();
    unsafe {
        assert_eq!(bsbm_fit(g, &opts, &mut f), BsbmStatus::Ok, "{}", last_error());
        assert_eq!(bsbm_fit_k(f), 3);
        assert!(bsbm_fit_converged(f));

        let mut z = vec![0usize; n];
        assert_eq!(bsbm_fit_labels(f, z.as_mut_ptr(), n), BsbmStatus::Ok);
        assert_eq!(bsbm_fit_labels(f, z.as_mut_ptr(), n - 1), BsbmStatus::InvalidArgument);
        let mut score = 0.0;
        assert_eq!(bsbm_nmi(z.as_ptr(), truth.as_ptr(), n, &mut score), BsbmStatus::Ok);
        assert!(score > 0.9, "nmi {score}");

        let len = bsbm_fit_trace_len(f);
        let mut trace = vec![0.0; len];
        assert_eq!(bsbm_fit_trace(f, trace.as_mut_ptr(), len), BsbmStatus::Ok);
        assert_eq!(*trace.last().unwrap(), bsbm_fit_lpl(f));
        assert!(trace.windows(2).all(|w| w[1] >= w[0] - 1e-8 * w[0].abs()));

        let (mut pi, mut p, mut eta, mut nu) = ([0.0; 3], [0.0; 9], [0.0; 9], [0i8; 3]);
        let st = bsbm_fit_params(f, pi.as_mut_ptr(), p.as_mut_ptr(), eta.as_mut_ptr(), nu.as_mut_ptr());
        assert_eq!(st, BsbmStatus::Ok);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(nu.iter().all(|&s| s == 1 || s == -1));
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(p[a * 3 + b], p[b * 3 + a]);
            }
        }
        bsbm_fit_free(f);
        bsbm_graph_free(g);
    }
}

#[test]
fn baselines_fill_labels() {
    let n = 240;
    let (g, truth) = sample(n, 3);
    for method in [BsbmMethod::Mc, BsbmMethod::Scp, BsbmMethod::Ppl, BsbmMethod::PplMerge] {
        let mut z = vec![usize::MAX; n];
        let st = unsafe { bsbm_baseline(g, method, 3, 1, z.as_mut_ptr()) };
        assert_eq!(st, BsbmStatus::Ok, "{method:?}: {}", last_error());
        assert!(z.iter().all(|&l| l < 3));
        let mut score = 0.0;
        unsafe { bsbm_nmi(z.as_ptr(), truth.as_ptr(), n, &mut score) };
        assert!((0.0..=1.0).contains(&score));
    }
    let mut z = vec![0usize; n];
    assert_eq!(unsafe { bsbm_baseline(g, BsbmMethod::Scp, 0, 1, z.as_mut_ptr()) }, BsbmStatus::InvalidArgument);
    unsafe { bsbm_graph_free(g) };
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("g.txt").to_str().unwrap()).unwrap();
    let (g, _) = sample(50, 2);
    let mut back = ptr::null_mut();
    unsafe {
        assert_eq!(bsbm_graph_write(g, path.as_ptr()), BsbmStatus::Ok);
        assert_eq!(bsbm_graph_read(path.as_ptr(), &mut back), BsbmStatus::Ok);
        assert_eq!(bsbm_graph_node_count(back), 50);
        assert_eq!(bsbm_graph_edge_count(back), bsbm_graph_edge_count(g));
        let missing = CString::new(dir.path().join("none.txt").to_str().unwrap()).unwrap();
        let mut h = ptr::null_mut();
        assert_eq!(bsbm_graph_read(missing.as_ptr(), &mut h), BsbmStatus::Io);
        bsbm_graph_free(back);
        bsbm_graph_free(g);
    }
}

#[test]
fn status_messages_and_version() {
    let msg = unsafe { CStr::from_ptr(bsbm_status_message(BsbmStatus::Parse)) };
    assert_eq!(msg.to_str().unwrap(), "parse error");
    let v = unsafe { CStr::from_ptr(bsbm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let root = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{root}/include/bsbm.h")).unwrap();
    let source = std::fs::read_to_string(format!("{root}/src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.trim().split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 20);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in ["BsbmStatus", "BsbmMethod", "BsbmFitOptions", "BsbmGraph", "BsbmFit"] {
        assert!(header.contains(ty), "{ty} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let root = env!("CARGO_MANIFEST_DIR");
    let out = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", &format!("{root}/include/bsbm.h")])
        .output();
    match out {
        Ok(o) => assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr)),
        Err(_) => eprintln!("no C compiler on PATH; header syntax check skipped"),
    }
}
