//! Distance encodings.
//!
//! Every encoding here measures how far a node `u` sits from a source `v`:
//! shortest-path distance, landing probabilities of random walks started at
//! `v`, and (generalized / personalized) PageRank scores built from the same
//! walks. The random-walk matrix is `W = A D^{-1}`, column-stochastic, so
//! `(W^k)[u][v]` is the probability that a `k`-step walk from `v` ends at `u`.
//! Set-level encodings average the per-source encodings over the target set.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{Graph, TargetTuple};
use crate::numeric::canonical_sum;

/// Marker for an unreachable node in an [`SpdTable`].
pub const UNREACHABLE: u32 = u32::MAX;

/// Shortest-path distances from one source node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpdTable {
    pub source: usize,
    dist: Vec<u32>,
}

impl SpdTable {
    pub fn get(&self, u: usize) -> Option<u32> {
        match self.dist[u] {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    pub fn raw(&self) -> &[u32] {
        &self.dist
    }

    /// Nodes at exactly distance `k`, ascending.
    pub fn ring(&self, k: u32) -> Vec<usize> {
        (0..self.dist.len()).filter(|&u| self.dist[u] == k).collect()
    }

    pub fn eccentricity(&self) -> Option<u32> {
        let mut ecc = 0;
        for &d in &self.dist {
            if d == UNREACHABLE {
                return None;
            }
            ecc = ecc.max(d);
        }
        Some(ecc)
    }
}

/// Breadth-first distances from `v`; unreachable nodes get [`UNREACHABLE`].
pub fn spd_from(g: &Graph, v: usize) -> Result<SpdTable> {
    g.check_node(v)?;
    Ok(bfs_bounded(g, &[v], u32::MAX))
}

/// Multi-source BFS that stops expanding at `max_depth`.
pub(crate) fn bfs_bounded(g: &Graph, sources: &[usize], max_depth: u32) -> SpdTable {
    let mut dist = vec![UNREACHABLE; g.n()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s] != 0 {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(x) = queue.pop_front() {
        let d = dist[x];
        if d >= max_depth {
            continue;
        }
        for &y in g.neighbors(x) {
            if dist[y] == UNREACHABLE {
                dist[y] = d + 1;
                queue.push_back(y);
            }
        }
    }
    SpdTable {
        source: sources.first().copied().unwrap_or(0),
        dist,
    }
}

/// All-pairs distances by repeated BFS, `n × n`.
pub fn spd_matrix(g: &Graph) -> Vec<Vec<u32>> {
    (0..g.n()).map(|v| bfs_bounded(g, &[v], u32::MAX).dist).collect()
}

/// Per-node encoding vectors of a common width, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DeTable {
    dim: usize,
    values: Vec<f64>,
}

impl DeTable {
    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            dim,
            values: vec![0.0; n * dim],
        }
    }

    pub fn from_rows(dim: usize, values: Vec<f64>) -> Self {
        debug_assert!(dim == 0 || values.len() % dim == 0);
        Self { dim, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.values.len() / self.dim
        }
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.values[u * self.dim..(u + 1) * self.dim]
    }

    fn row_mut(&mut self, u: usize) -> &mut [f64] {
        &mut self.values[u * self.dim..(u + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// One random-walk step `x <- W x`.
fn walk_step(g: &Graph, x: &[f64], out: &mut [f64], terms: &mut Vec<f64>) {
    for (u, o) in out.iter_mut().enumerate() {
        terms.clear();
        terms.extend(g.neighbors(u).iter().map(|&w| x[w] / g.degree(w) as f64));
        *o = canonical_sum(terms);
    }
}

/// Landing probabilities `((W)_{uv}, …, (W^{d_rw})_{uv})` for every node `u`.
/// Row `u` of the result has `d_rw` entries.
pub fn landing_probabilities(g: &Graph, v: usize, d_rw: usize) -> Result<DeTable> {
    g.check_node(v)?;
    if d_rw == 0 {
        return Err(Error::InvalidParameter("d_rw must be at least 1".into()));
    }
    if g.degree(v) == 0 {
        return Err(Error::IsolatedSource(v));
    }
    let n = g.n();
    let mut table = DeTable::zeros(n, d_rw);
    let mut x = vec![0.0; n];
    x[v] = 1.0;
    let mut next = vec![0.0; n];
    let mut terms = Vec::new();
    for k in 0..d_rw {
        walk_step(g, &x, &mut next, &mut terms);
        std::mem::swap(&mut x, &mut next);
        for u in 0..n {
            table.values[u * d_rw + k] = x[u];
        }
    }
    Ok(table)
}

/// `Σ_k gammas[k-1] · (W^k)_{uv}` for every node `u`.
pub fn generalized_pagerank(g: &Graph, v: usize, gammas: &[f64]) -> Result<Vec<f64>> {
    if gammas.is_empty() {
        return Err(Error::InvalidParameter("gammas must be non-empty".into()));
    }
    if gammas.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("gammas must be finite".into()));
    }
    let lp = landing_probabilities(g, v, gammas.len())?;
    let mut terms = Vec::with_capacity(gammas.len());
    Ok((0..g.n())
        .map(|u| {
            terms.clear();
            terms.extend(lp.row(u).iter().zip(gammas).map(|(p, c)| p * c));
            canonical_sum(&mut terms)
        })
        .collect())
}

/// Iteration cap for [`personalized_pagerank`].
pub fn ppr_iteration_cap(damping: f64, tol: f64) -> usize {
    ((tol.ln() / damping.ln()).ceil().max(0.0) as usize) + 16
}

/// Column `v` of `(I - damping·W)^{-1}`, i.e. `Σ_k (damping·W)^k e_v`, by
/// fixed-point iteration until successive iterates differ by less than `tol`
/// in max-norm. An isolated source keeps all its mass.
pub fn personalized_pagerank(g: &Graph, v: usize, damping: f64, tol: f64) -> Result<Vec<f64>> {
    g.check_node(v)?;
    if !(damping > 0.0 && damping < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "damping must lie in (0, 1), got {damping}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let n = g.n();
    let cap = ppr_iteration_cap(damping, tol);
    let mut x = vec![0.0; n];
    x[v] = 1.0;
    let mut walked = vec![0.0; n];
    let mut terms = Vec::new();
    for _ in 0..cap {
        walk_step(g, &x, &mut walked, &mut terms);
        let mut delta: f64 = 0.0;
        for u in 0..n {
            let indicator = if u == v { 1.0 } else { 0.0 };
            let next = indicator + damping * walked[u];
            delta = delta.max((next - x[u]).abs());
            x[u] = next;
        }
        if delta < tol {
            return Ok(x);
        }
    }
    Err(Error::NotConverged(cap))
}

/// One-hot of `min(spd, d_max)` in a vector of length `d_max + 1`;
/// unreachable maps to the last slot.
pub fn one_hot_spd(spd: Option<u32>, d_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; d_max + 1];
    let idx = spd.map_or(d_max, |d| (d as usize).min(d_max));
    out[idx] = 1.0;
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeVariant {
    /// Truncated one-hot shortest-path distance, width `d_max + 1`.
    SpdOneHot { d_max: usize },
    /// `[1{u = v}, (W)_{uv}, …, (W^{d_rw})_{uv}]`, width `d_rw + 1`. With
    /// `lenient`, an isolated source contributes only its indicator instead
    /// of failing.
    LandingProb { d_rw: usize, lenient: bool },
    /// Scalar personalized PageRank score, width 1.
    Ppr { damping: f64, tol: f64 },
}

impl DeVariant {
    pub fn dim(&self) -> usize {
        match *self {
            DeVariant::SpdOneHot { d_max } => d_max + 1,
            DeVariant::LandingProb { d_rw, .. } => d_rw + 1,
            DeVariant::Ppr { .. } => 1,
        }
    }

    fn per_source(&self, g: &Graph, v: usize) -> Result<DeTable> {
        let n = g.n();
        match *self {
            DeVariant::SpdOneHot { d_max } => {
                let spd = spd_from(g, v)?;
                let values = (0..n).flat_map(|u| one_hot_spd(spd.get(u), d_max)).collect();
                Ok(DeTable::from_rows(d_max + 1, values))
            }
            DeVariant::LandingProb { d_rw, lenient } => {
                let mut t = DeTable::zeros(n, d_rw + 1);
                t.row_mut(v)[0] = 1.0;
                match landing_probabilities(g, v, d_rw) {
                    Ok(lp) => {
                        for u in 0..n {
                            t.row_mut(u)[1..].copy_from_slice(lp.row(u));
                        }
                    }
                    Err(Error::IsolatedSource(_)) if lenient => {}
                    Err(e) => return Err(e),
                }
                Ok(t)
            }
            DeVariant::Ppr { damping, tol } => {
                Ok(DeTable::from_rows(1, personalized_pagerank(g, v, damping, tol)?))
            }
        }
    }
}

/// Set encoding `ζ(u|S) = (1/|S|) Σ_{v∈S} ζ(u|v)` for every node `u`.
pub fn de_for_set(g: &Graph, s: &TargetTuple, variant: &DeVariant) -> Result<DeTable> {
    let per: Vec<DeTable> = s
        .nodes()
        .iter()
        .map(|&v| variant.per_source(g, v))
        .collect::<Result<_>>()?;
    if per.len() == 1 {
        return Ok(per.into_iter().next().expect("one table"));
    }
    let dim = variant.dim();
    let scale = per.len() as f64;
    let mut out = DeTable::zeros(g.n(), dim);
    let mut terms = Vec::with_capacity(per.len());
    for u in 0..g.n() {
        for c in 0..dim {
            terms.clear();
            terms.extend(per.iter().map(|t| t.row(u)[c]));
            out.values[u * dim + c] = canonical_sum(&mut terms) / scale;
        }
    }
    Ok(out)
}

/// SEAL's node label for distances `d1`, `d2` to the two target nodes:
/// `1 + min(d1, d2) + (d/2)·((d/2) + (d%2) − 1)` with `d = d1 + d2`.
/// Unreachable nodes get the reserved label 0.
pub fn seal_label(d1: Option<u32>, d2: Option<u32>) -> u64 {
    let (Some(a), Some(b)) = (d1, d2) else {
        return 0;
    };
    let (a, b) = (a as i64, b as i64);
    let d = a + b;
    let half = d / 2;
    (1 + a.min(b) + half * (half + d % 2 - 1)) as u64
}

/// Number of walks of exactly `length` steps from `v` to every node.
pub fn walk_counts(g: &Graph, v: usize, length: usize) -> Result<Vec<u128>> {
    g.check_node(v)?;
    let n = g.n();
    let mut x = vec![0u128; n];
    x[v] = 1;
    let mut next = vec![0u128; n];
    for step in 1..=length {
        for (u, slot) in next.iter_mut().enumerate() {
            let mut acc: u128 = 0;
            for &w in g.neighbors(u) {
                acc = acc.checked_add(x[w]).ok_or(Error::Overflow(step))?;
            }
            *slot = acc;
        }
        std::mem::swap(&mut x, &mut next);
    }
    Ok(x)
}
