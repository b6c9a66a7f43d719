//! Immutable sparse undirected graphs, target tuples and permutations.
//!
//! Node ids are dense `0..n`. Adjacency is stored in compressed form
//! (offsets + sorted neighbor indices). Node attributes live in a dense
//! `n × k` table and edge attributes in a map keyed by the unordered edge;
//! together they play the role of the `n × n × k` feature tensor, with node
//! attributes on the diagonal and edge attributes off it.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Dense per-node attribute table (`n` rows of `width` reals).
#[derive(Debug, Clone, PartialEq)]
pub struct AttrTable {
    width: usize,
    values: Vec<f64>,
}

impl AttrTable {
    pub fn new(width: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || values.len() % width != 0 {
            return Err(Error::Shape(format!(
                "attribute table of {} values is not a multiple of width {}",
                values.len(),
                width
            )));
        }
        Ok(Self { width, values })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.width
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.values[v * self.width..(v + 1) * self.width]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    node_attrs: Option<AttrTable>,
    edge_attrs: BTreeMap<(usize, usize), Vec<f64>>,
}

fn edge_key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Graph {
    /// Builds a simple graph from an edge list: duplicates and reversed
    /// duplicates collapse, self-loops are dropped. When `n` is absent the
    /// node count is `max id + 1`.
    pub fn from_edge_list(edges: &[(usize, usize)], n: Option<usize>) -> Result<Self> {
        let n = match n {
            Some(n) => n,
            None => match edges.iter().map(|&(u, v)| u.max(v)).max() {
                Some(m) => m + 1,
                None => return Err(Error::EmptyGraph),
            },
        };
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::NodeOutOfRange { node: u.max(v), n });
            }
            if u == v {
                continue;
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        Ok(Self {
            offsets,
            neighbors,
            node_attrs: None,
            edge_attrs: BTreeMap::new(),
        })
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            offsets: vec![0; n + 1],
            neighbors: Vec::new(),
            node_attrs: None,
            edge_attrs: BTreeMap::new(),
        }
    }

    pub fn with_node_attrs(mut self, attrs: AttrTable) -> Result<Self> {
        if attrs.rows() != self.n() {
            return Err(Error::Shape(format!(
                "{} attribute rows for {} nodes",
                attrs.rows(),
                self.n()
            )));
        }
        self.node_attrs = Some(attrs);
        Ok(self)
    }

    pub fn with_edge_attr(mut self, u: usize, v: usize, value: Vec<f64>) -> Result<Self> {
        if !self.has_edge(u, v) {
            return Err(Error::InvalidParameter(format!("no edge {u}-{v}")));
        }
        self.edge_attrs.insert(edge_key(u, v), value);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n()).map(|v| self.degree(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && v < self.n() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn node_attrs(&self) -> Option<&AttrTable> {
        self.node_attrs.as_ref()
    }

    pub fn edge_attr(&self, u: usize, v: usize) -> Option<&[f64]> {
        self.edge_attrs.get(&edge_key(u, v)).map(Vec::as_slice)
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { node: v, n: self.n() })
        }
    }

    /// Copy of the graph with the given edges removed (absent edges are ignored).
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> Graph {
        if removed.is_empty() {
            return self.clone();
        }
        let mut drop: Vec<(usize, usize)> = removed.iter().map(|&(u, v)| edge_key(u, v)).collect();
        drop.sort_unstable();
        let keep: Vec<(usize, usize)> = self
            .edges()
            .filter(|e| drop.binary_search(e).is_err())
            .collect();
        let mut g = Graph::from_edge_list(&keep, Some(self.n())).expect("ids already valid");
        g.node_attrs = self.node_attrs.clone();
        g.edge_attrs = self
            .edge_attrs
            .iter()
            .filter(|(k, _)| drop.binary_search(k).is_err())
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        g
    }

    /// Subgraph induced by `nodes`; local id `i` is `nodes[i]`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in nodes.iter().enumerate() {
            local[v] = i;
        }
        let mut edges = Vec::new();
        for (i, &v) in nodes.iter().enumerate() {
            for &u in self.neighbors(v) {
                let j = local[u];
                if j != usize::MAX && i < j {
                    edges.push((i, j));
                }
            }
        }
        let mut g = Graph::from_edge_list(&edges, Some(nodes.len())).expect("ids already valid");
        if let Some(attrs) = &self.node_attrs {
            let values = nodes.iter().flat_map(|&v| attrs.row(v).to_vec()).collect();
            g.node_attrs = Some(AttrTable::new(attrs.width(), values).expect("same width"));
        }
        for (&(u, v), val) in &self.edge_attrs {
            let (a, b) = (local[u], local[v]);
            if a != usize::MAX && b != usize::MAX {
                g.edge_attrs.insert(edge_key(a, b), val.clone());
            }
        }
        g
    }

    /// Disjoint union; nodes of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n();
        let edges: Vec<(usize, usize)> = self
            .edges()
            .chain(other.edges().map(|(u, v)| (u + shift, v + shift)))
            .collect();
        Graph::from_edge_list(&edges, Some(self.n() + other.n())).expect("ids already valid")
    }

    pub fn is_regular(&self) -> Option<usize> {
        let d = self.degree(0);
        (0..self.n()).all(|v| self.degree(v) == d).then_some(d)
    }

    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return true;
        }
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n()
    }

    /// All triangles `(a, b, c)` with `a < b < c`.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for (a, b) in self.edges() {
            let (na, nb) = (self.neighbors(a), self.neighbors(b));
            let (mut i, mut j) = (0, 0);
            while i < na.len() && j < nb.len() {
                match na[i].cmp(&nb[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        if na[i] > b {
                            out.push([a, b, na[i]]);
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
        out
    }

    /// Size of the largest clique (exhaustive; intended for small graphs).
    pub fn clique_number(&self) -> usize {
        fn grow(g: &Graph, clique: &mut Vec<usize>, candidates: &[usize], best: &mut usize) {
            *best = (*best).max(clique.len());
            for (i, &v) in candidates.iter().enumerate() {
                let next: Vec<usize> = candidates[i + 1..]
                    .iter()
                    .copied()
                    .filter(|&u| g.has_edge(u, v))
                    .collect();
                clique.push(v);
                grow(g, clique, &next, best);
                clique.pop();
            }
        }
        let all: Vec<usize> = (0..self.n()).collect();
        let mut best = 0;
        grow(self, &mut Vec::new(), &all, &mut best);
        best
    }
}

/// Node set `S` of size `p` embedded in a graph. The order of `nodes` is
/// kept, but every consumer treats the tuple as a set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TargetTuple {
    nodes: Vec<usize>,
}

impl TargetTuple {
    pub fn new(g: &Graph, nodes: &[usize]) -> Result<Self> {
        if nodes.is_empty() || nodes.len() > g.n() {
            return Err(Error::InvalidTuple(format!(
                "size {} not in 1..={}",
                nodes.len(),
                g.n()
            )));
        }
        for (i, &v) in nodes.iter().enumerate() {
            g.check_node(v)?;
            if nodes[..i].contains(&v) {
                return Err(Error::InvalidTuple(format!("duplicate node {v}")));
            }
        }
        Ok(Self {
            nodes: nodes.to_vec(),
        })
    }

    pub fn single(g: &Graph, v: usize) -> Result<Self> {
        Self::new(g, &[v])
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.nodes.contains(&v)
    }

    /// Edges of `g` with both endpoints in the tuple.
    pub fn internal_edges(&self, g: &Graph) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, &a) in self.nodes.iter().enumerate() {
            for &b in &self.nodes[i + 1..] {
                if g.has_edge(a, b) {
                    out.push(edge_key(a, b));
                }
            }
        }
        out
    }

    pub fn permuted(&self, pi: &Permutation) -> TargetTuple {
        TargetTuple {
            nodes: self.nodes.iter().map(|&v| pi.apply(v)).collect(),
        }
    }
}

/// Bijection on `0..n`; node `v` is sent to `map[v]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &m in &map {
            if m >= map.len() || seen[m] {
                return Err(Error::InvalidPermutation(format!(
                    "{m} repeated or out of range"
                )));
            }
            seen[m] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Self { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, v: usize) -> usize {
        self.map[v]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (v, &m) in self.map.iter().enumerate() {
            inv[m] = v;
        }
        Permutation { map: inv }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }
}

/// Relabels `g` so node `v` becomes `pi(v)`; attributes travel with their nodes.
pub fn apply_permutation(g: &Graph, pi: &Permutation) -> Result<Graph> {
    if pi.len() != g.n() {
        return Err(Error::InvalidPermutation(format!(
            "length {} for graph with {} nodes",
            pi.len(),
            g.n()
        )));
    }
    let edges: Vec<(usize, usize)> = g.edges().map(|(u, v)| (pi.apply(u), pi.apply(v))).collect();
    let mut out = Graph::from_edge_list(&edges, Some(g.n()))?;
    if let Some(attrs) = &g.node_attrs {
        let inv = pi.inverse();
        let values = (0..g.n()).flat_map(|v| attrs.row(inv.apply(v)).to_vec()).collect();
        out.node_attrs = Some(AttrTable::new(attrs.width(), values)?);
    }
    out.edge_attrs = g
        .edge_attrs
        .iter()
        .map(|(&(u, v), val)| (edge_key(pi.apply(u), pi.apply(v)), val.clone()))
        .collect();
    Ok(out)
}

pub const BRUTE_FORCE_CAP: usize = 9;

/// Exhaustive isomorphism check (structure only), optionally requiring the
/// tuple `s1` to be mapped onto `s2` as a set. Limited to
/// [`BRUTE_FORCE_CAP`] nodes.
pub fn brute_force_isomorphic(
    g1: &Graph,
    g2: &Graph,
    s1: Option<&TargetTuple>,
    s2: Option<&TargetTuple>,
) -> Result<bool> {
    let n = g1.n().max(g2.n());
    if n > BRUTE_FORCE_CAP {
        return Err(Error::BruteForceCap {
            n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    if s1.map(TargetTuple::len) != s2.map(TargetTuple::len) {
        return Err(Error::InvalidTuple("tuples must both be given with equal size".into()));
    }
    Ok(find_isomorphism(g1, g2, s1.map(TargetTuple::nodes), s2.map(TargetTuple::nodes)).is_some())
}

/// Backtracking search for a node map `g1 -> g2` preserving adjacency (and
/// the marked sets). No size cap; callers keep graphs small.
pub(crate) fn find_isomorphism(
    g1: &Graph,
    g2: &Graph,
    s1: Option<&[usize]>,
    s2: Option<&[usize]>,
) -> Option<Vec<usize>> {
    let n = g1.n();
    if n != g2.n() || g1.num_edges() != g2.num_edges() {
        return None;
    }
    let mark1: Vec<bool> = (0..n).map(|v| s1.is_some_and(|s| s.contains(&v))).collect();
    let mark2: Vec<bool> = (0..n).map(|v| s2.is_some_and(|s| s.contains(&v))).collect();
    let d1 = g1.degrees();
    let d2 = g2.degrees();
    let (mut k1, mut k2) = (d1.clone(), d2.clone());
    k1.sort_unstable();
    k2.sort_unstable();
    if k1 != k2 {
        return None;
    }
    // Visit high-degree nodes first to prune early.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g1.degree(v)));
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn search(
        depth: usize,
        order: &[usize],
        g1: &Graph,
        g2: &Graph,
        deg: (&[usize], &[usize]),
        marks: (&[bool], &[bool]),
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let v = order[depth];
        for w in 0..g2.n() {
            if used[w] || deg.0[v] != deg.1[w] || marks.0[v] != marks.1[w] {
                continue;
            }
            let consistent = order[..depth]
                .iter()
                .all(|&x| g1.has_edge(v, x) == g2.has_edge(w, map[x]));
            if !consistent {
                continue;
            }
            map[v] = w;
            used[w] = true;
            if search(depth + 1, order, g1, g2, deg, marks, map, used) {
                return true;
            }
            used[w] = false;
            map[v] = usize::MAX;
        }
        false
    }

    let found = search(
        0,
        &order,
        g1,
        g2,
        (&d1, &d2),
        (&mark1, &mark2),
        &mut map,
        &mut used,
    );
    found.then_some(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k3() -> Graph {
        Graph::from_edge_list(&[(0, 1), (1, 2), (2, 0)], None).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edge_list(&edges, None).unwrap()
    }

    #[test]
    fn triangle_from_edges() {
        let g = k3();
        assert_eq!(g.n(), 3);
        assert_eq!(g.degrees(), vec![2, 2, 2]);
    }

    #[test]
    fn dedup_and_self_loops() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 0), (1, 1)], None).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn empty_without_count_is_error() {
        assert!(matches!(
            Graph::from_edge_list(&[], None),
            Err(Error::EmptyGraph)
        ));
        assert_eq!(Graph::from_edge_list(&[], Some(3)).unwrap().n(), 3);
    }

    #[test]
    fn rooks_edge_list_counts() {
        let mut edges = Vec::new();
        for a in 0..16 {
            for b in a + 1..16 {
                if a / 4 == b / 4 || a % 4 == b % 4 {
                    edges.push((a, b));
                }
            }
        }
        let g = Graph::from_edge_list(&edges, None).unwrap();
        assert_eq!((g.n(), g.num_edges()), (16, 48));
        assert_eq!(g.is_regular(), Some(6));
    }

    #[test]
    fn from_edge_list_idempotent() {
        let g = Graph::from_edge_list(&[(3, 1), (1, 0), (0, 3), (2, 2)], None).unwrap();
        let edges: Vec<_> = g.edges().collect();
        let h = Graph::from_edge_list(&edges, Some(g.n())).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn permutation_cases() {
        let g = k3();
        assert_eq!(apply_permutation(&g, &Permutation::identity(3)).unwrap(), g);
        let pi = Permutation::new(vec![2, 0, 1]).unwrap();
        assert_eq!(apply_permutation(&g, &pi).unwrap(), g);
        let path = Graph::from_edge_list(&[(0, 1), (1, 2)], None).unwrap();
        let swap = Permutation::new(vec![2, 1, 0]).unwrap();
        assert_eq!(apply_permutation(&path, &swap).unwrap(), path);
        assert!(apply_permutation(&path, &Permutation::identity(4)).is_err());
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
    }

    #[test]
    fn permutation_moves_attributes() {
        let g = Graph::from_edge_list(&[(0, 1), (1, 2)], None)
            .unwrap()
            .with_node_attrs(AttrTable::new(1, vec![10.0, 11.0, 12.0]).unwrap())
            .unwrap()
            .with_edge_attr(0, 1, vec![7.0])
            .unwrap();
        let pi = Permutation::new(vec![1, 2, 0]).unwrap();
        let h = apply_permutation(&g, &pi).unwrap();
        let attrs = h.node_attrs().unwrap();
        assert_eq!(attrs.row(1), &[10.0]);
        assert_eq!(attrs.row(0), &[12.0]);
        assert_eq!(h.edge_attr(1, 2), Some(&[7.0][..]));
    }

    #[test]
    fn brute_force_examples() {
        assert!(brute_force_isomorphic(&k3(), &k3(), None, None).unwrap());
        let two_k3 = k3().disjoint_union(&k3());
        assert!(!brute_force_isomorphic(&cycle(6), &two_k3, None, None).unwrap());
        let c4 = cycle(4);
        let s0 = TargetTuple::single(&c4, 0).unwrap();
        let s2 = TargetTuple::single(&c4, 2).unwrap();
        assert!(brute_force_isomorphic(&c4, &c4, Some(&s0), Some(&s2)).unwrap());
        let big = cycle(10);
        assert!(matches!(
            brute_force_isomorphic(&big, &big, None, None),
            Err(Error::BruteForceCap { .. })
        ));
    }

    #[test]
    fn tuple_marks_matter() {
        // Center vs leaf of a star.
        let star = Graph::from_edge_list(&[(0, 1), (0, 2), (0, 3)], None).unwrap();
        let c = TargetTuple::single(&star, 0).unwrap();
        let l = TargetTuple::single(&star, 1).unwrap();
        assert!(!brute_force_isomorphic(&star, &star, Some(&c), Some(&l)).unwrap());
    }

    #[test]
    fn tuple_validation() {
        let g = k3();
        assert!(TargetTuple::new(&g, &[0, 0]).is_err());
        assert!(TargetTuple::new(&g, &[5]).is_err());
        assert!(TargetTuple::new(&g, &[]).is_err());
        assert_eq!(TargetTuple::new(&g, &[0, 1]).unwrap().internal_edges(&g), vec![(0, 1)]);
    }

    #[test]
    fn triangles_and_cliques() {
        assert_eq!(k3().triangles(), vec![[0, 1, 2]]);
        assert!(cycle(6).triangles().is_empty());
        assert_eq!(k3().clique_number(), 3);
        assert_eq!(cycle(5).clique_number(), 2);
    }

    #[test]
    fn random_permutations_preserve_isomorphism_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.gen_range(2..=8);
            let mut edges = Vec::new();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(0.4) {
                        edges.push((a, b));
                    }
                }
            }
            let g = Graph::from_edge_list(&edges, Some(n)).unwrap();
            let pi = Permutation::random(n, &mut rng);
            let h = apply_permutation(&g, &pi).unwrap();
            assert!(brute_force_isomorphic(&g, &h, None, None).unwrap());
            let mut d1 = g.degrees();
            let mut d2 = h.degrees();
            d1.sort_unstable();
            d2.sort_unstable();
            assert_eq!(d1, d2);
        }
    }
}
