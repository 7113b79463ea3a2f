mod common;

use bsbm::signed_graph::sample_bsbm;
use common::planted;

#[test]
fn edge_and_sign_counts_match_expectation() {
    let n = 600;
    let params = planted(3, 0.12, 0.04, (0.2, 0.8), 3);
    let (g, z) = sample_bsbm(&params, n, 3).unwrap();
    let counts = z.counts();
    let (mut mean, mut var, mut pos) = (0.0, 0.0, 0.0);
    for a in 0..3 {
        for b in a..3 {
            let pairs = if a == b {
                (counts[a] * (counts[a] - 1) / 2) as f64
            } else {
                (counts[a] * counts[b]) as f64
            };
            let p = params.p()[(a, b)];
            mean += pairs * p;
            var += pairs * p * (1.0 - p);
            pos += pairs * p * params.q_entry(a, b);
        }
    }
    let m = g.edge_count() as f64;
    assert!((m - mean).abs() < 4.0 * var.sqrt(), "{m} vs {mean}");
    assert!((g.positive_count() as f64 - pos).abs() < 4.0 * pos.sqrt(), "{} vs {pos}", g.positive_count());
}

#[test]
fn same_seed_same_graph() {
    let params = planted(2, 0.3, 0.1, (0.5, 1.0), 0);
    let (a, za) = sample_bsbm(&params, 80, 17).unwrap();
    let (b, zb) = sample_bsbm(&params, 80, 17).unwrap();
    assert_eq!(za, zb);
    assert!(a.edges().eq(b.edges()));
    let (c, _) = sample_bsbm(&params, 80, 18).unwrap();
    assert!(!a.edges().eq(c.edges()));
}
