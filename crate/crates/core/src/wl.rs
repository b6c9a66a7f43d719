//! Weisfeiler-Lehman color refinement.
//!
//! Colors are content-addressed: the color of an entity after a round is a
//! 128-bit hash of its previous color and the sorted multiset of the colors
//! it aggregates. Identical local structure therefore yields identical colors
//! in different graphs without any shared state. Within a round, every new
//! hash is checked against the signature that produced it; a hash shared by
//! two distinct signatures is reported as [`Error::HashCollision`].
//!
//! Graph-level configurations record the stabilization round `r` and the
//! color multiset after round `r + 1`. Two graphs are equivalent under the
//! test iff both parts match: if one graph stabilizes earlier, the other
//! still splits a class in the next round and the multisets differ there.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, TargetTuple};

pub type ColorHash = u128;

fn hash128<T: Hash + ?Sized>(x: &T) -> ColorHash {
    let mut a = DefaultHasher::new();
    0xa5u8.hash(&mut a);
    x.hash(&mut a);
    let mut b = DefaultHasher::new();
    0x5au8.hash(&mut b);
    x.hash(&mut b);
    ((a.finish() as u128) << 64) | b.finish() as u128
}

/// Stable coloring of a set of entities (nodes, or ordered node pairs).
#[derive(Debug, Clone)]
pub struct Coloring {
    /// Dense color ids, ordered by the underlying hash.
    pub colors: Vec<usize>,
    /// First round after which the partition stopped changing.
    pub round: usize,
    hashes: Vec<ColorHash>,
}

impl Coloring {
    fn from_hashes(hashes: Vec<ColorHash>, round: usize) -> Self {
        let mut palette = hashes.clone();
        palette.sort_unstable();
        palette.dedup();
        let colors = hashes
            .iter()
            .map(|h| palette.binary_search(h).expect("present"))
            .collect();
        Self {
            colors,
            round,
            hashes,
        }
    }

    pub fn num_colors(&self) -> usize {
        self.colors.iter().max().map_or(0, |&m| m + 1)
    }

    pub fn hashes(&self) -> &[ColorHash] {
        &self.hashes
    }

    /// Graph-level configuration: stabilization round plus color multiset.
    pub fn config(&self) -> ColorConfig {
        ColorConfig::from_iter(self.round, self.hashes.iter().copied())
    }
}

/// Multiset of content-addressed colors, tagged with the round it was taken at.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColorConfig {
    pub round: usize,
    counts: Vec<(ColorHash, usize)>,
}

impl ColorConfig {
    fn from_iter(round: usize, hashes: impl Iterator<Item = ColorHash>) -> Self {
        let mut all: Vec<ColorHash> = hashes.collect();
        all.sort_unstable();
        let mut counts: Vec<(ColorHash, usize)> = Vec::new();
        for h in all {
            match counts.last_mut() {
                Some((last, c)) if *last == h => *c += 1,
                _ => counts.push((h, 1)),
            }
        }
        Self { round, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|&(_, c)| c).sum()
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }
}

/// Checks that each new hash comes from exactly one signature.
struct CollisionGuard {
    seen: HashMap<ColorHash, Vec<ColorHash>>,
}

impl CollisionGuard {
    fn new() -> Self {
        Self {
            seen: HashMap::new(),
        }
    }

    fn check(&mut self, round: usize, hash: ColorHash, signature: &[ColorHash]) -> Result<()> {
        match self.seen.get(&hash) {
            Some(sig) if sig.as_slice() != signature => Err(Error::HashCollision(round)),
            Some(_) => Ok(()),
            None => {
                self.seen.insert(hash, signature.to_vec());
                Ok(())
            }
        }
    }
}

fn distinct(hashes: &[ColorHash]) -> usize {
    let mut v = hashes.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Signature `[own, sorted neighbor colors…]` and its hash.
fn wl1_signature(g: &Graph, v: usize, prev: &[ColorHash]) -> Vec<ColorHash> {
    let mut sig = Vec::with_capacity(g.degree(v) + 1);
    sig.push(prev[v]);
    sig.extend(g.neighbors(v).iter().map(|&u| prev[u]));
    sig[1..].sort_unstable();
    sig
}

fn wl1_round(g: &Graph, prev: &[ColorHash], round: usize) -> Result<Vec<ColorHash>> {
    let mut guard = CollisionGuard::new();
    let mut next = Vec::with_capacity(g.n());
    for v in 0..g.n() {
        let sig = wl1_signature(g, v, prev);
        let h = hash128(&sig[..]);
        guard.check(round, h, &sig)?;
        next.push(h);
    }
    Ok(next)
}

fn wl1_initial(g: &Graph, init: Option<&[u64]>) -> Result<Vec<ColorHash>> {
    match init {
        Some(labels) => {
            if labels.len() != g.n() {
                return Err(Error::Shape(format!(
                    "{} initial labels for {} nodes",
                    labels.len(),
                    g.n()
                )));
            }
            Ok(labels.iter().map(|&l| hash128(&("label", l))).collect())
        }
        None => Ok((0..g.n())
            .map(|v| hash128(&("degree", g.degree(v) as u64)))
            .collect()),
    }
}

/// 1-WL refinement until the node partition is stable. Initial colors are
/// degrees unless `init` labels are given.
pub fn wl1_refine(g: &Graph, init: Option<&[u64]>) -> Result<Coloring> {
    let mut hashes = wl1_initial(g, init)?;
    let mut classes = distinct(&hashes);
    let mut round = 0;
    loop {
        let next = wl1_round(g, &hashes, round + 1)?;
        let next_classes = distinct(&next);
        hashes = next;
        if next_classes == classes {
            return Ok(Coloring::from_hashes(hashes, round));
        }
        classes = next_classes;
        round += 1;
    }
}

/// Node colors after exactly `rounds` rounds.
pub fn wl1_hashes_at(g: &Graph, init: Option<&[u64]>, rounds: usize) -> Result<Vec<ColorHash>> {
    let mut hashes = wl1_initial(g, init)?;
    for r in 0..rounds {
        hashes = wl1_round(g, &hashes, r + 1)?;
    }
    Ok(hashes)
}

/// Multiset of 1-WL colors of the nodes in `s`, taken after `2n` rounds,
/// which is past stabilization of the disjoint union of any two `n`-node
/// graphs. Configurations are therefore comparable between graphs with the
/// same node count; use [`wl1_tuple_config_rounds`] otherwise.
pub fn wl1_tuple_config(g: &Graph, s: &TargetTuple) -> Result<ColorConfig> {
    wl1_tuple_config_rounds(g, s, 2 * g.n())
}

pub fn wl1_tuple_config_rounds(g: &Graph, s: &TargetTuple, rounds: usize) -> Result<ColorConfig> {
    let hashes = wl1_hashes_at(g, None, rounds)?;
    Ok(ColorConfig::from_iter(
        rounds,
        s.nodes().iter().map(|&v| hashes[v]),
    ))
}

pub const FWL2_CAP: usize = 64;

fn fwl2_initial(g: &Graph) -> Vec<ColorHash> {
    let n = g.n();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            out.push(hash128(&("fwl2", a == b, g.has_edge(a, b))));
        }
    }
    out
}

fn fwl2_round(n: usize, prev: &[ColorHash], round: usize) -> Result<Vec<ColorHash>> {
    let sigs: Vec<(ColorHash, Vec<ColorHash>)> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (idx / n, idx % n);
            let mut pairs: Vec<(ColorHash, ColorHash)> =
                (0..n).map(|w| (prev[w * n + b], prev[a * n + w])).collect();
            pairs.sort_unstable();
            let mut sig = Vec::with_capacity(2 * n + 1);
            sig.push(prev[idx]);
            for (x, y) in pairs {
                sig.push(x);
                sig.push(y);
            }
            (hash128(&sig[..]), sig)
        })
        .collect();
    let mut guard = CollisionGuard::new();
    let mut next = Vec::with_capacity(n * n);
    for (h, sig) in sigs {
        guard.check(round, h, &sig)?;
        next.push(h);
    }
    Ok(next)
}

/// Folklore 2-WL over ordered node pairs; entity `a * n + b` is the pair
/// `(a, b)`. Pairs start colored by equality and adjacency and are refined
/// with the witness multiset `{(C(w, b), C(a, w)) : w ∈ V}`.
pub fn fwl2_refine(g: &Graph) -> Result<Coloring> {
    let n = g.n();
    if n > FWL2_CAP {
        return Err(Error::FwlCap { n, cap: FWL2_CAP });
    }
    let mut hashes = fwl2_initial(g);
    let mut classes = distinct(&hashes);
    let mut round = 0;
    loop {
        let next = fwl2_round(n, &hashes, round + 1)?;
        let next_classes = distinct(&next);
        hashes = next;
        if next_classes == classes {
            return Ok(Coloring::from_hashes(hashes, round));
        }
        classes = next_classes;
        round += 1;
    }
}

/// Whether the test of the given order (1 or 2) tells the graphs apart.
pub fn distinguishes(g1: &Graph, g2: &Graph, order: u8) -> Result<bool> {
    let (c1, c2) = match order {
        1 => (wl1_refine(g1, None)?, wl1_refine(g2, None)?),
        2 => (fwl2_refine(g1)?, fwl2_refine(g2)?),
        _ => return Err(Error::InvalidParameter(format!("unsupported WL order {order}"))),
    };
    Ok(c1.config() != c2.config())
}

/// Whether the test tells `(g1, s1)` and `(g2, s2)` apart, by refining the
/// disjoint union and comparing the colors of the two tuples. With order 2
/// tuples of size 1 use the diagonal pair `(v, v)` and tuples of size 2 the
/// two ordered pairs.
pub fn distinguishes_tuples(
    g1: &Graph,
    s1: &TargetTuple,
    g2: &Graph,
    s2: &TargetTuple,
    order: u8,
) -> Result<bool> {
    if s1.len() != s2.len() {
        return Ok(true);
    }
    let union = g1.disjoint_union(g2);
    let shift = g1.n();
    let nodes2: Vec<usize> = s2.nodes().iter().map(|&v| v + shift).collect();
    match order {
        1 => {
            let c = wl1_refine(&union, None)?;
            let a = ColorConfig::from_iter(0, s1.nodes().iter().map(|&v| c.hashes[v]));
            let b = ColorConfig::from_iter(0, nodes2.iter().map(|&v| c.hashes[v]));
            Ok(a != b)
        }
        2 => {
            if s1.len() > 2 {
                return Err(Error::InvalidParameter(
                    "order-2 tuple comparison supports tuples of size 1 or 2".into(),
                ));
            }
            let n = union.n();
            let c = fwl2_refine(&union)?;
            let pairs = |nodes: &[usize]| -> ColorConfig {
                let hs: Vec<ColorHash> = if nodes.len() == 1 {
                    vec![c.hashes[nodes[0] * n + nodes[0]]]
                } else {
                    vec![
                        c.hashes[nodes[0] * n + nodes[1]],
                        c.hashes[nodes[1] * n + nodes[0]],
                    ]
                };
                ColorConfig::from_iter(0, hs.into_iter())
            };
            Ok(pairs(s1.nodes()) != pairs(&nodes2))
        }
        _ => Err(Error::InvalidParameter(format!("unsupported WL order {order}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{apply_permutation, brute_force_isomorphic, Permutation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(edges: &[(usize, usize)]) -> Graph {
        Graph::from_edge_list(edges, None).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        g(&e)
    }

    fn two_k3() -> Graph {
        g(&[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    }

    #[test]
    fn wl1_examples() {
        let c = wl1_refine(&cycle(6), None).unwrap();
        assert_eq!(c.num_colors(), 1);
        assert_eq!(c.round, 0);

        let star = g(&[(0, 1), (0, 2), (0, 3)]);
        let c = wl1_refine(&star, None).unwrap();
        assert_eq!(c.num_colors(), 2);
        assert_ne!(c.colors[0], c.colors[1]);

        let path = g(&[(0, 1), (1, 2), (2, 3)]);
        let c = wl1_refine(&path, None).unwrap();
        assert_eq!(c.num_colors(), 2);
        assert_eq!(c.colors[0], c.colors[3]);
        assert_eq!(c.colors[1], c.colors[2]);
    }

    #[test]
    fn initial_labels_refine_further() {
        let c6 = cycle(6);
        let labels = [1, 0, 0, 0, 0, 0];
        let c = wl1_refine(&c6, Some(&labels)).unwrap();
        // Distance from the marked node: 0, 1, 2, 3.
        assert_eq!(c.num_colors(), 4);
        assert!(wl1_refine(&c6, Some(&[1, 2])).is_err());
    }

    #[test]
    fn tuple_configs() {
        let c6 = cycle(6);
        let tk = two_k3();
        let a = wl1_tuple_config(&c6, &TargetTuple::single(&c6, 0).unwrap()).unwrap();
        let b = wl1_tuple_config(&tk, &TargetTuple::single(&tk, 4).unwrap()).unwrap();
        assert_eq!(a, b);

        let star = g(&[(0, 1), (0, 2), (0, 3)]);
        let center = wl1_tuple_config(&star, &TargetTuple::single(&star, 0).unwrap()).unwrap();
        let leaf = wl1_tuple_config(&star, &TargetTuple::single(&star, 2).unwrap()).unwrap();
        assert_ne!(center, leaf);
    }

    #[test]
    fn fwl2_examples() {
        assert!(!distinguishes(&cycle(6), &two_k3(), 1).unwrap());
        assert!(distinguishes(&cycle(6), &two_k3(), 2).unwrap());
        let k3 = cycle(3);
        assert!(!distinguishes(&k3, &k3, 2).unwrap());
        let big = cycle(65);
        assert!(matches!(fwl2_refine(&big), Err(Error::FwlCap { .. })));
    }

    #[test]
    fn union_tuple_comparison() {
        let c6 = cycle(6);
        let tk = two_k3();
        let s = TargetTuple::single(&c6, 0).unwrap();
        let t = TargetTuple::single(&tk, 0).unwrap();
        assert!(!distinguishes_tuples(&c6, &s, &tk, &t, 1).unwrap());
        assert!(distinguishes_tuples(&c6, &s, &tk, &t, 2).unwrap());
        // A C6 node and a node on a C6 component next to a path: same 1-WL color.
        let mixed = c6.disjoint_union(&g(&[(0, 1), (1, 2)]));
        let m = TargetTuple::single(&mixed, 3).unwrap();
        assert!(!distinguishes_tuples(&c6, &s, &mixed, &m, 1).unwrap());
    }

    #[test]
    fn refinement_is_monotone_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.gen_range(3..12);
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.3) {
                        edges.push((a, b));
                    }
                }
            }
            let h = Graph::from_edge_list(&edges, Some(n)).unwrap();
            let mut prev = 0;
            let mut hashes = wl1_initial(&h, None).unwrap();
            for r in 0..n {
                let k = distinct(&hashes);
                assert!(k >= prev);
                prev = k;
                hashes = wl1_round(&h, &hashes, r + 1).unwrap();
            }
            let c = wl1_refine(&h, None).unwrap();
            assert!(c.round < n);
        }
    }

    #[test]
    fn sound_against_brute_force_and_fwl2_dominates() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..60 {
            let n = rng.gen_range(3..=7);
            let make = |rng: &mut ChaCha8Rng| {
                let mut edges = Vec::new();
                for a in 0..n {
                    for b in a + 1..n {
                        if rng.gen_bool(0.45) {
                            edges.push((a, b));
                        }
                    }
                }
                Graph::from_edge_list(&edges, Some(n)).unwrap()
            };
            let g1 = make(&mut rng);
            let g2 = if rng.gen_bool(0.5) {
                apply_permutation(&g1, &Permutation::random(n, &mut rng)).unwrap()
            } else {
                make(&mut rng)
            };
            let iso = brute_force_isomorphic(&g1, &g2, None, None).unwrap();
            let d1 = distinguishes(&g1, &g2, 1).unwrap();
            let d2 = distinguishes(&g1, &g2, 2).unwrap();
            if iso {
                assert!(!d1 && !d2);
            }
            if d1 {
                assert!(d2);
            }
        }
    }

    #[test]
    fn tuple_configs_are_label_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = g(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2), (5, 4)]);
        for _ in 0..10 {
            let pi = Permutation::random(h.n(), &mut rng);
            let hp = apply_permutation(&h, &pi).unwrap();
            let s = TargetTuple::new(&h, &[1, 5]).unwrap();
            assert_eq!(
                wl1_tuple_config(&h, &s).unwrap(),
                wl1_tuple_config(&hp, &s.permuted(&pi)).unwrap()
            );
        }
    }
}
