use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Labels, SignedGraph};
use crate::error::{Error, Result};

/// Parse a whitespace-separated `u v s` edge list.
///
/// Lines starting with `#` and blank lines are skipped. An optional `n=<int>`
/// header (before the first edge) fixes the node count; otherwise it is one
/// more than the largest id seen.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<SignedGraph> {
    let mut declared_n: Option<usize> = None;
    let mut edges: Vec<(usize, usize, i8, usize)> = Vec::new();
    let mut max_id: Option<usize> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if let Some(rest) = t.strip_prefix("n=") {
            if declared_n.is_some() || !edges.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "node-count header must precede all edges and appear once".into(),
                });
            }
            let n = rest.trim().parse::<usize>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad node count: {e}"),
            })?;
            declared_n = Some(n);
            continue;
        }
        let mut it = t.split_whitespace();
        let (Some(a), Some(b), Some(c), None) = (it.next(), it.next(), it.next(), it.next()) else {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected `u v s`, got {t:?}"),
            });
        };
        let parse_id = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad node id {s:?}: {e}"),
            })
        };
        let u = parse_id(a)?;
        let v = parse_id(b)?;
        let s: i8 = match c {
            "1" | "+1" => 1,
            "-1" => -1,
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("sign must be -1 or 1, got {other:?}"),
                })
            }
        };
        if u == v {
            return Err(Error::SelfLoop { line: line_no, node: u });
        }
        if let Some(n) = declared_n {
            if u >= n || v >= n {
                return Err(Error::NodeOutOfRange { node: u.max(v), n });
            }
        }
        max_id = Some(max_id.map_or(u.max(v), |m: usize| m.max(u).max(v)));
        edges.push((u.min(v), u.max(v), s, line_no));
    }

    let n = declared_n.unwrap_or_else(|| max_id.map_or(0, |m| m + 1));
    SignedGraph::from_canonical(n, edges)
}

/// Write the canonical form: `n=<n>` then `i j s` with `i < j`, sorted.
pub fn save_edge_list<W: Write>(graph: &SignedGraph, mut w: W) -> Result<()> {
    writeln!(w, "n={}", graph.n())?;
    for (i, j, s) in graph.edges() {
        writeln!(w, "{i} {j} {s}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_edge_list_file(path: impl AsRef<Path>) -> Result<SignedGraph> {
    load_edge_list(BufReader::new(File::open(path)?))
}

pub fn write_edge_list_file(graph: &SignedGraph, path: impl AsRef<Path>) -> Result<()> {
    save_edge_list(graph, BufWriter::new(File::create(path)?))
}

/// One 0-based label per line; blank and `#` lines skipped.
pub fn read_labels<R: BufRead>(reader: R, k: Option<usize>) -> Result<Labels> {
    let mut z = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        z.push(t.parse::<usize>().map_err(|e| Error::Parse {
            line: idx + 1,
            msg: format!("bad label {t:?}: {e}"),
        })?);
    }
    match k {
        Some(k) => Labels::new(z, k),
        None => Ok(Labels::from_vec(z)),
    }
}

pub fn write_labels<W: Write>(labels: &Labels, mut w: W) -> Result<()> {
    for &l in labels.as_slice() {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels_file(path: impl AsRef<Path>, k: Option<usize>) -> Result<Labels> {
    read_labels(BufReader::new(File::open(path)?), k)
}

pub fn write_labels_file(labels: &Labels, path: impl AsRef<Path>) -> Result<()> {
    write_labels(labels, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn load(s: &str) -> Result<SignedGraph> {
        load_edge_list(s.as_bytes())
    }

    #[test]
    fn reads_basic_list() {
        let g = load("0 1 1\n1 2 -1").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.sign(0, 1), 1);
        assert_eq!(g.sign(2, 1), -1);
    }

    #[test]
    fn header_only_gives_isolated_nodes() {
        let g = load("n=5\n").unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(load("").unwrap().n(), 0);
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let g = load("# a comment\n\nn=4\n# another\n3 0 -1\n").unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.sign(0, 3), -1);
    }

    #[test]
    fn conflicting_duplicate_rejected() {
        let err = load("0 1 1\n1 0 -1").unwrap_err();
        assert!(matches!(err, Error::ConflictingDuplicate { line: 2, .. }), "{err}");
        assert_eq!(load("0 1 1\n1 0 1").unwrap().edge_count(), 1);
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(matches!(load("0 1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(load("0 1 2"), Err(Error::Parse { .. })));
        assert!(matches!(load("0 1 1 7"), Err(Error::Parse { .. })));
        assert!(matches!(load("a 1 1"), Err(Error::Parse { .. })));
        assert!(matches!(load("2 2 1"), Err(Error::SelfLoop { .. })));
        assert!(matches!(load("n=2\n0 3 1"), Err(Error::NodeOutOfRange { .. })));
        assert!(matches!(load("0 1 1\nn=3"), Err(Error::Parse { .. })));
    }

    #[test]
    fn writer_emits_sorted_canonical_form() {
        let g = load("3 1 -1\n0 2 1\n2 1 1").unwrap();
        let mut out = Vec::new();
        save_edge_list(&g, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "n=4\n0 2 1\n1 2 1\n1 3 -1\n");
    }

    #[test]
    fn labels_round_trip() {
        let l = read_labels("0\n2\n1\n".as_bytes(), None).unwrap();
        assert_eq!(l.k(), 3);
        let mut out = Vec::new();
        write_labels(&l, &mut out).unwrap();
        assert_eq!(out, b"0\n2\n1\n");
        assert!(read_labels("0\n3\n".as_bytes(), Some(3)).is_err());
    }

    proptest! {
        #[test]
        fn save_load_save_is_byte_identical(
            n in 1usize..20,
            raw in proptest::collection::vec((0usize..20, 0usize..20, any::<bool>()), 0..60),
        ) {
            let mut seen = std::collections::HashSet::new();
            let edges: Vec<(usize, usize, i8)> = raw
                .into_iter()
                .filter(|&(u, v, _)| u < n && v < n && u != v)
                .filter(|&(u, v, _)| seen.insert((u.min(v), u.max(v))))
                .map(|(u, v, p)| (u, v, if p { 1 } else { -1 }))
                .collect();
            let g = SignedGraph::from_edges(n, edges).unwrap();
            let mut first = Vec::new();
            save_edge_list(&g, &mut first).unwrap();
            let g2 = load_edge_list(first.as_slice()).unwrap();
            prop_assert_eq!(&g, &g2);
            let mut second = Vec::new();
            save_edge_list(&g2, &mut second).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
