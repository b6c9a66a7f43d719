//! Edge-list and label file formats.
//!
//! Edge lists hold one edge per line as two whitespace-separated integer
//! ids. Lines starting with `#` are comments and an optional `n=<count>`
//! header fixes the node count. Without a header, ids that are not already
//! dense are remapped to `0..n` in ascending order and the original ids are
//! returned alongside the graph.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `original_ids[i]` is the file id of dense node `i`, when remapped.
    pub original_ids: Option<Vec<u64>>,
}

pub fn parse_edge_list(text: &str) -> Result<LoadedGraph> {
    let mut header_n = None;
    let mut raw: Vec<(u64, u64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("n=") {
            let n = rest.trim().parse::<usize>().map_err(|e| Error::Parse {
                line: i + 1,
                msg: format!("bad node count: {e}"),
            })?;
            header_n = Some(n);
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut next = || -> Result<u64> {
            let tok = parts.next().ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "expected two node ids".into(),
            })?;
            tok.parse::<u64>().map_err(|e| Error::Parse {
                line: i + 1,
                msg: format!("bad node id {tok:?}: {e}"),
            })
        };
        let u = next()?;
        let v = next()?;
        raw.push((u, v));
    }

    if let Some(n) = header_n {
        let edges: Vec<(usize, usize)> = raw.iter().map(|&(u, v)| (u as usize, v as usize)).collect();
        return Ok(LoadedGraph {
            graph: Graph::from_edge_list(&edges, Some(n))?,
            original_ids: None,
        });
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let dense = ids.last().is_some_and(|&m| m as usize + 1 == ids.len());
    if dense {
        let edges: Vec<(usize, usize)> = raw.iter().map(|&(u, v)| (u as usize, v as usize)).collect();
        return Ok(LoadedGraph {
            graph: Graph::from_edge_list(&edges, None)?,
            original_ids: None,
        });
    }
    let local = |x: u64| ids.binary_search(&x).expect("collected above");
    let edges: Vec<(usize, usize)> = raw.iter().map(|&(u, v)| (local(u), local(v))).collect();
    Ok(LoadedGraph {
        graph: Graph::from_edge_list(&edges, Some(ids.len()))?,
        original_ids: Some(ids),
    })
}

pub fn read_edge_list(path: &Path) -> Result<LoadedGraph> {
    parse_edge_list(&fs::read_to_string(path)?)
}

pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("n={}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn format_id_mapping(original_ids: &[u64]) -> String {
    let mut out = String::from("# dense_id original_id\n");
    for (i, id) in original_ids.iter().enumerate() {
        let _ = writeln!(out, "{i} {id}");
    }
    out
}

/// Parses `<node_id> <label>` lines. When `original_ids` is given, ids in the
/// file are translated to dense ids. Returns one label per node; nodes missing
/// from the file get `None`.
pub fn parse_labels(text: &str, n: usize, original_ids: Option<&[u64]>) -> Result<Vec<Option<usize>>> {
    let mut labels = vec![None; n];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 {
            return Err(Error::Parse {
                line: i + 1,
                msg: "expected '<node_id> <label>'".into(),
            });
        }
        let parse = |t: &str| {
            t.parse::<u64>().map_err(|e| Error::Parse {
                line: i + 1,
                msg: format!("bad integer {t:?}: {e}"),
            })
        };
        let id = parse(toks[0])?;
        let label = parse(toks[1])? as usize;
        let node = match original_ids {
            Some(ids) => match ids.binary_search(&id) {
                Ok(k) => k,
                // Label for a node that never appears in an edge.
                Err(_) => continue,
            },
            None => id as usize,
        };
        if node >= n {
            return Err(Error::NodeOutOfRange { node, n });
        }
        labels[node] = Some(label);
    }
    Ok(labels)
}

/// Parses `key=value` lines; `#` starts a comment line. Later keys win.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: "expected key=value".into(),
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_comments() {
        let g = parse_edge_list("# c6 minus an edge\nn=6\n0 1\n1 2\n").unwrap();
        assert_eq!(g.graph.n(), 6);
        assert_eq!(g.graph.num_edges(), 2);
        assert!(g.original_ids.is_none());
    }

    #[test]
    fn sparse_ids_are_remapped() {
        let g = parse_edge_list("10 20\n20 35\n").unwrap();
        assert_eq!(g.graph.n(), 3);
        assert_eq!(g.original_ids.as_deref(), Some(&[10, 20, 35][..]));
        assert!(g.graph.has_edge(1, 2));
        let labels = parse_labels("35 2\n10 0\n", 3, g.original_ids.as_deref()).unwrap();
        assert_eq!(labels, vec![Some(0), None, Some(2)]);
    }

    #[test]
    fn round_trip_text() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2), (2, 0), (3, 4)], Some(6)).unwrap();
        let back = parse_edge_list(&format_edge_list(&g)).unwrap();
        assert_eq!(back.graph, g);
    }

    #[test]
    fn key_values() {
        let kv = parse_key_values("# grid\nlayers = 2\nhidden=50\nlayers=3\n").unwrap();
        assert_eq!(kv["layers"], "3");
        assert_eq!(kv["hidden"], "50");
        assert!(parse_key_values("layers 2\n").is_err());
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(parse_edge_list("0 1\n2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_edge_list("0 x\n").is_err());
        assert!(parse_labels("0\n", 2, None).is_err());
    }
}
