use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::generate::{sample_simple_regular, stream_rng};
use crate::graph::{Graph, TargetTuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    Node,
    Link,
    Triangle,
}

impl TaskKind {
    pub fn tuple_size(self) -> usize {
        match self {
            TaskKind::Node => 1,
            TaskKind::Link => 2,
            TaskKind::Triangle => 3,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Node => "node",
            TaskKind::Link => "link",
            TaskKind::Triangle => "triangle",
        })
    }
}

impl FromStr for TaskKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "node" => Ok(TaskKind::Node),
            "link" => Ok(TaskKind::Link),
            "triangle" => Ok(TaskKind::Triangle),
            _ => Err(Error::Config(format!("unknown task {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskInstance {
    pub tuple: TargetTuple,
    pub label: usize,
    pub split: Split,
}

#[derive(Debug, Clone)]
pub struct TaskDataset {
    pub kind: TaskKind,
    pub classes: usize,
    /// The graph every forward pass sees: validation and test positives of
    /// link and triangle tasks have their internal edges removed.
    pub graph: Graph,
    pub instances: Vec<TaskInstance>,
}

impl TaskDataset {
    pub fn split(&self, which: Split) -> impl Iterator<Item = &TaskInstance> {
        self.instances.iter().filter(move |i| i.split == which)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self { train: 0.8, val: 0.1 }
    }
}

/// Assigns splits per class so each split keeps the class balance.
fn assign_splits(groups: Vec<Vec<TargetTuple>>, fractions: SplitFractions, seed: u64) -> Result<Vec<TaskInstance>> {
    if !(fractions.train > 0.0 && fractions.val >= 0.0 && fractions.train + fractions.val <= 1.0) {
        return Err(Error::InvalidParameter(format!("bad split fractions {fractions:?}")));
    }
    let mut rng = stream_rng(seed, 1);
    let mut out = Vec::new();
    for (label, mut tuples) in groups.into_iter().enumerate() {
        tuples.shuffle(&mut rng);
        let n = tuples.len();
        let n_train = (fractions.train * n as f64).round() as usize;
        let n_val = ((fractions.val * n as f64).round() as usize).min(n - n_train);
        for (i, tuple) in tuples.into_iter().enumerate() {
            let split = if i < n_train {
                Split::Train
            } else if i < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
            out.push(TaskInstance { tuple, label, split });
        }
    }
    Ok(out)
}

fn sorted_key(nodes: &[usize]) -> Vec<usize> {
    let mut k = nodes.to_vec();
    k.sort_unstable();
    k
}

/// `count` distinct uniformly random `size`-subsets accepted by `keep`.
fn sample_negatives(
    g: &Graph,
    size: usize,
    count: usize,
    seed: u64,
    keep: impl Fn(&[usize]) -> bool,
) -> Result<Vec<TargetTuple>> {
    let n = g.n();
    if n < size {
        return Err(Error::NegativeSampling { wanted: count, found: 0 });
    }
    let mut rng = stream_rng(seed, 2);
    let cap = 100 * count + 10_000;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    for _ in 0..cap {
        if out.len() == count {
            break;
        }
        let nodes = rand::seq::index::sample(&mut rng, n, size).into_vec();
        let key = sorted_key(&nodes);
        if !keep(&key) || !seen.insert(key.clone()) {
            continue;
        }
        out.push(TargetTuple::new(g, &key)?);
    }
    if out.len() < count {
        return Err(Error::NegativeSampling {
            wanted: count,
            found: out.len(),
        });
    }
    Ok(out)
}

fn hide_heldout_positives(g: &Graph, instances: &[TaskInstance]) -> Graph {
    let hidden: Vec<(usize, usize)> = instances
        .iter()
        .filter(|i| i.label == 1 && i.split != Split::Train)
        .flat_map(|i| i.tuple.internal_edges(g))
        .collect();
    g.without_edges(&hidden)
}

/// Labeled tuples for the node, link or triangle task with a seeded,
/// class-stratified split.
///
/// Link positives are the edges and triangle positives the triangles of
/// `g`; the same number of negatives is drawn uniformly from non-edges or
/// from 3-sets that are not triangles. Node labels come from `labels`;
/// unlabeled nodes are skipped.
pub fn build_task_dataset(
    g: &Graph,
    kind: TaskKind,
    labels: Option<&[Option<usize>]>,
    fractions: SplitFractions,
    seed: u64,
) -> Result<TaskDataset> {
    match kind {
        TaskKind::Node => {
            let labels = labels.ok_or_else(|| Error::Config("node task needs a label file".into()))?;
            if labels.len() != g.n() {
                return Err(Error::Shape(format!("{} labels for {} nodes", labels.len(), g.n())));
            }
            let classes = labels.iter().flatten().max().map_or(0, |&m| m + 1);
            if classes < 2 {
                return Err(Error::Config("node task needs at least two classes".into()));
            }
            let mut groups = vec![Vec::new(); classes];
            for (v, l) in labels.iter().enumerate() {
                if let Some(l) = l {
                    groups[*l].push(TargetTuple::single(g, v)?);
                }
            }
            Ok(TaskDataset {
                kind,
                classes,
                graph: g.clone(),
                instances: assign_splits(groups, fractions, seed)?,
            })
        }
        TaskKind::Link => {
            let pos: Vec<TargetTuple> = g
                .edges()
                .map(|(u, v)| TargetTuple::new(g, &[u, v]))
                .collect::<Result<_>>()?;
            let neg = sample_negatives(g, 2, pos.len(), seed, |k| !g.has_edge(k[0], k[1]))?;
            let instances = assign_splits(vec![neg, pos], fractions, seed)?;
            Ok(TaskDataset {
                kind,
                classes: 2,
                graph: hide_heldout_positives(g, &instances),
                instances,
            })
        }
        TaskKind::Triangle => {
            let tris = g.triangles();
            let pos: Vec<TargetTuple> = tris.iter().map(|t| TargetTuple::new(g, t)).collect::<Result<_>>()?;
            let is_tri = |k: &[usize]| g.has_edge(k[0], k[1]) && g.has_edge(k[0], k[2]) && g.has_edge(k[1], k[2]);
            let neg = sample_negatives(g, 3, pos.len(), seed, |k| !is_tri(k))?;
            let instances = assign_splits(vec![neg, pos], fractions, seed)?;
            Ok(TaskDataset {
                kind,
                classes: 2,
                graph: hide_heldout_positives(g, &instances),
                instances,
            })
        }
    }
}

/// Synthetic triangle task on a random 3-regular graph.
///
/// Triangles are planted on the neighborhoods `N(c)` of greedily chosen
/// centers whose neighborhoods are disjoint and independent. All planted
/// edges are hidden, so the observed graph is the 3-regular graph itself:
/// every node has the same degree and the same 1-WL color, and only the
/// distances inside a candidate triple reveal a planted triangle.
/// Negatives are uniform 3-sets that are neither planted nor triangles.
pub fn planted_triangle_dataset(n: usize, fractions: SplitFractions, seed: u64) -> Result<TaskDataset> {
    let g = sample_simple_regular(n, 3, seed, 100_000)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream_rng(seed, 3));
    let mut used = vec![false; n];
    let mut pos = Vec::new();
    for c in order {
        let nb = g.neighbors(c);
        let independent = nb.iter().all(|&a| nb.iter().all(|&b| !g.has_edge(a, b)));
        if independent && nb.iter().all(|&a| !used[a]) {
            nb.iter().for_each(|&a| used[a] = true);
            pos.push(TargetTuple::new(&g, nb)?);
        }
    }
    let planted: HashSet<Vec<usize>> = pos.iter().map(|t| sorted_key(t.nodes())).collect();
    let is_tri = |k: &[usize]| g.has_edge(k[0], k[1]) && g.has_edge(k[0], k[2]) && g.has_edge(k[1], k[2]);
    let neg = sample_negatives(&g, 3, pos.len(), seed, |k| !is_tri(k) && !planted.contains(k))?;
    Ok(TaskDataset {
        kind: TaskKind::Triangle,
        classes: 2,
        instances: assign_splits(vec![neg, pos], fractions, seed)?,
        graph: g,
    })
}

/// One uniform random label in `0..classes` per node.
pub fn random_labels(n: usize, classes: usize, seed: u64) -> Vec<Option<usize>> {
    let mut rng = stream_rng(seed, 4);
    (0..n).map(|_| Some(rng.gen_range(0..classes))).collect()
}
