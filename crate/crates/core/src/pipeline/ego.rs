use crate::encoding::bfs_bounded;
use crate::error::{Error, Result};
use crate::graph::{AttrTable, Graph, TargetTuple};
use crate::nn::{Instance, ModelConfig};

/// Induced subgraph around a target tuple.
#[derive(Debug, Clone)]
pub struct EgoNetwork {
    pub graph: Graph,
    /// `nodes[i]` is the global id of local node `i`, ascending.
    pub nodes: Vec<usize>,
    /// The tuple in local ids.
    pub targets: TargetTuple,
    /// Global edges between tuple members that were dropped.
    pub removed: Vec<(usize, usize)>,
}

impl EgoNetwork {
    pub fn local_of(&self, global: usize) -> Option<usize> {
        self.nodes.binary_search(&global).ok()
    }
}

/// Nodes within `radius` hops of any member of `s`, with the edges among
/// members of `s` removed when `|s| ≥ 2`.
pub fn extract_ego(g: &Graph, s: &TargetTuple, radius: usize) -> Result<EgoNetwork> {
    if radius == 0 {
        return Err(Error::InvalidParameter("ego radius must be at least 1".into()));
    }
    let dist = bfs_bounded(g, s.nodes(), radius as u32);
    let nodes: Vec<usize> = (0..g.n()).filter(|&v| dist.get(v).is_some()).collect();
    let removed = if s.len() >= 2 { s.internal_edges(g) } else { Vec::new() };
    let local = |v: usize| nodes.binary_search(&v).expect("targets are in the ball");
    let local_removed: Vec<(usize, usize)> = removed.iter().map(|&(a, b)| (local(a), local(b))).collect();
    let graph = g.induced_subgraph(&nodes).without_edges(&local_removed);
    let targets = TargetTuple::new(&graph, &s.nodes().iter().map(|&v| local(v)).collect::<Vec<_>>())?;
    Ok(EgoNetwork {
        graph,
        nodes,
        targets,
        removed,
    })
}

/// `g` with the internal edges of `s` removed and, unless `g` carries node
/// attributes, a degree attribute scaled by `1/degree_scale`. Degrees are
/// taken after the removal.
pub fn masked_with_degrees(g: &Graph, s: &TargetTuple, degree_scale: f64) -> Result<Graph> {
    let masked = if s.len() >= 2 { g.without_edges(&s.internal_edges(g)) } else { g.clone() };
    if masked.node_attrs().is_some() {
        return Ok(masked);
    }
    let scale = degree_scale.max(1.0);
    let values = (0..masked.n()).map(|v| masked.degree(v) as f64 / scale).collect();
    masked.with_node_attrs(AttrTable::new(1, values)?)
}

/// Model input for `s` computed on its ego-network of the radius the model
/// needs. For every model except the PageRank-controlled one this equals
/// [`full_graph_instance`] exactly.
pub fn ego_instance(g: &Graph, s: &TargetTuple, config: &ModelConfig, degree_scale: f64) -> Result<Instance> {
    let with_deg = masked_with_degrees(g, s, degree_scale)?;
    let ego = extract_ego(&with_deg, s, config.receptive_radius())?;
    Instance::new(&ego.graph, &ego.targets, config, None)
}

/// Model input for `s` computed on the whole graph (internal edges removed).
pub fn full_graph_instance(g: &Graph, s: &TargetTuple, config: &ModelConfig, degree_scale: f64) -> Result<Instance> {
    let with_deg = masked_with_degrees(g, s, degree_scale)?;
    Instance::new(&with_deg, s, config, None)
}
