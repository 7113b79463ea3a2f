use crate::error::{Error, Result};
use crate::Labels;

/// Largest K for which [`align_labels`] searches all permutations.
pub const EXACT_ALIGN_MAX_K: usize = 10;

fn contingency(a: &[usize], b: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut joint = vec![vec![0.0; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        joint[x][y] += 1.0;
    }
    let ra = joint.iter().map(|r| r.iter().sum()).collect();
    let rb = (0..kb).map(|c| joint.iter().map(|r| r[c]).sum()).collect();
    (joint, ra, rb)
}

fn entropy(counts: &[f64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| -(c / n) * (c / n).ln())
        .sum()
}

/// Normalized mutual information `I(A; B) / sqrt(H(A) H(B))` with natural logs.
///
/// If either labeling has zero entropy the result is 1 when the two describe the
/// same partition and 0 otherwise.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("labelings are empty".into()));
    }
    let n = a.len() as f64;
    let (joint, ra, rb) = contingency(a, b);
    let (ha, hb) = (entropy(&ra, n), entropy(&rb, n));
    if ha == 0.0 || hb == 0.0 {
        return Ok(if ha == 0.0 && hb == 0.0 { 1.0 } else { 0.0 });
    }
    let mut mi = 0.0;
    for (x, row) in joint.iter().enumerate() {
        for (y, &c) in row.iter().enumerate() {
            if c > 0.0 {
                mi += (c / n) * (c * n / (ra[x] * rb[y])).ln();
            }
        }
    }
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

/// Number of positions where the two labelings agree.
pub fn agreement(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x == y).count()
}

fn best_permutation(conf: &[Vec<usize>]) -> Vec<usize> {
    let k = conf.len();
    let mut best = (0usize, (0..k).collect::<Vec<_>>());
    let mut cur = Vec::with_capacity(k);
    let mut used = vec![false; k];
    // depth-first over permutations in lexicographic order; the first maximum wins
    fn go(
        conf: &[Vec<usize>],
        cur: &mut Vec<usize>,
        used: &mut [bool],
        score: usize,
        best: &mut (usize, Vec<usize>),
        found: &mut bool,
    ) {
        let k = conf.len();
        if cur.len() == k {
            if !*found || score > best.0 {
                *best = (score, cur.clone());
                *found = true;
            }
            return;
        }
        let row = cur.len();
        for t in 0..k {
            if !used[t] {
                used[t] = true;
                cur.push(t);
                go(conf, cur, used, score + conf[row][t], best, found);
                cur.pop();
                used[t] = false;
            }
        }
    }
    let mut found = false;
    go(conf, &mut cur, &mut used, 0, &mut best, &mut found);
    best.1
}

fn greedy_permutation(conf: &[Vec<usize>]) -> Vec<usize> {
    let k = conf.len();
    let mut perm = vec![usize::MAX; k];
    let mut taken = vec![false; k];
    for _ in 0..k {
        let mut pick = None;
        for (r, row) in conf.iter().enumerate() {
            if perm[r] != usize::MAX {
                continue;
            }
            for (c, &v) in row.iter().enumerate() {
                if !taken[c] && pick.is_none_or(|(_, _, b)| v > b) {
                    pick = Some((r, c, v));
                }
            }
        }
        let (r, c, _) = pick.expect("an unassigned pair remains");
        perm[r] = c;
        taken[c] = true;
    }
    perm
}

/// Relabel `est` to maximize agreement with `truth`: exhaustive permutation
/// search up to [`EXACT_ALIGN_MAX_K`] labels, greedy matching on the confusion
/// matrix beyond that.
pub fn align_labels(est: &Labels, truth: &Labels) -> Result<Labels> {
    if est.len() != truth.len() {
        return Err(Error::LengthMismatch(est.len(), truth.len()));
    }
    let k = est.k().max(truth.k());
    let mut conf = vec![vec![0usize; k]; k];
    for (&x, &y) in est.as_slice().iter().zip(truth.as_slice()) {
        conf[x][y] += 1;
    }
    let perm = if k <= EXACT_ALIGN_MAX_K {
        best_permutation(&conf)
    } else {
        greedy_permutation(&conf)
    };
    Labels::new(est.as_slice().iter().map(|&l| perm[l]).collect(), k)
}
