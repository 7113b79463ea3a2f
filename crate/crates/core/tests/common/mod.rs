#![allow(dead_code)]

use bsbm::nalgebra::DMatrix;
use bsbm::signed_graph::sample_bsbm;
use bsbm::{seeded_rng, BsbmParams, Labels, SignedGraph};
use rand::Rng;

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn alternating(k: usize) -> Vec<i8> {
    (0..k).map(|l| if l % 2 == 0 { 1 } else { -1 }).collect()
}

/// Planted model with equal class sizes, alternating meta-groups and `eta ~ U[lo, hi]`
/// drawn symmetrically from `seed`.
pub fn planted(k: usize, p_in: f64, p_bt: f64, eta: (f64, f64), seed: u64) -> BsbmParams {
    let mut rng = seeded_rng(seed ^ 0x9e37_79b9);
    let mut m = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let v = rng.random_range(eta.0..=eta.1);
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    BsbmParams::planted(vec![1.0 / k as f64; k], p_in, p_bt, m, alternating(k)).unwrap()
}

/// The default simulation point: n = 1000, K = 3, P_in = 0.13, P_bt = 0.07, eta ~ U[0, 1].
pub fn default_instance(seed: u64) -> (SignedGraph, Labels) {
    sample_bsbm(&planted(3, 0.13, 0.07, (0.0, 1.0), seed), 1000, seed).unwrap()
}
