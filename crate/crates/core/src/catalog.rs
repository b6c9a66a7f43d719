//! Exhaustive catalogue of graphs up to isomorphism on few nodes.
//!
//! Every graph on `n` nodes arises from one on `n - 1` nodes by adding a
//! vertex joined to some subset of the others, so extending each
//! representative by every subset and keeping one graph per isomorphism
//! class yields the full list. Candidates are bucketed by their 1-WL
//! configuration and only compared by backtracking within a bucket.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{find_isomorphism, Graph};
use crate::wl::{wl1_refine, ColorConfig};

pub const CATALOG_CAP: usize = 7;

/// Representatives of all isomorphism classes on `n` nodes, for `n ≤ 7`.
pub fn nonisomorphic_graphs(n: usize) -> Result<Vec<Graph>> {
    Ok(catalog_up_to(n)?.pop().unwrap_or_default())
}

/// `out[k]` lists the classes on `k` nodes, for `k = 0..=n`.
pub fn catalog_up_to(n: usize) -> Result<Vec<Vec<Graph>>> {
    if n > CATALOG_CAP {
        return Err(Error::BruteForceCap { n, cap: CATALOG_CAP });
    }
    let mut levels = vec![vec![Graph::empty(0)]];
    for k in 1..=n {
        let prev = &levels[k - 1];
        let mut buckets: HashMap<(Vec<usize>, ColorConfig), Vec<usize>> = HashMap::new();
        let mut reps: Vec<Graph> = Vec::new();
        for base in prev {
            let old: Vec<(usize, usize)> = base.edges().collect();
            for mask in 0u32..(1 << (k - 1)) {
                let mut edges = old.clone();
                edges.extend((0..k - 1).filter(|&j| mask >> j & 1 == 1).map(|j| (j, k - 1)));
                let g = Graph::from_edge_list(&edges, Some(k))?;
                let mut degs = g.degrees();
                degs.sort_unstable();
                let key = (degs, wl1_refine(&g, None)?.config());
                let bucket = buckets.entry(key).or_default();
                if bucket
                    .iter()
                    .any(|&i| find_isomorphism(&reps[i], &g, None, None).is_some())
                {
                    continue;
                }
                bucket.push(reps.len());
                reps.push(g);
            }
        }
        levels.push(reps);
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_known_sequence() {
        let levels = catalog_up_to(6).unwrap();
        let counts: Vec<usize> = levels.iter().map(Vec::len).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 11, 34, 156]);
        assert!(catalog_up_to(8).is_err());
    }
}
