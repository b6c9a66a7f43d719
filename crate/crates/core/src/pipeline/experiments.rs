use std::fmt;

use rayon::prelude::*;

use super::dataset::TaskDataset;
use super::metrics::Metrics;
use super::results::{config_hash, ResultRow};
use super::train::{evaluate, prepare, train, TrainConfig};
use crate::encoding::spd_from;
use crate::error::{Error, Result};
use crate::generate::{intersection_array, rooks_4x4, sample_simple_regular, shrikhande, DrgCheck};
use crate::graph::{Graph, TargetTuple};
use crate::nn::{forward, Aggregation, Instance, ModelConfig, ModelKind, ModelParams, Task, DEFAULT_TRIALS, DIGITAL_TOLERANCE};
use crate::wl::{fwl2_refine, wl1_refine};

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2aConfig {
    pub ns: Vec<usize>,
    pub r: usize,
    /// Total nodes per `n`; `⌈budget / n⌉` graphs are sampled.
    pub node_budget: usize,
    /// Deepest layer compared; defaults to two past the boundary.
    pub max_layers: Option<usize>,
    pub hidden: usize,
    pub trials: usize,
    pub epsilon: f64,
    /// Compare at most this many uniformly drawn node pairs per graph.
    pub max_pairs_per_graph: Option<usize>,
    pub seed: u64,
}

impl Default for Fig2aConfig {
    fn default() -> Self {
        Self {
            ns: vec![16, 32, 64, 128],
            r: 3,
            node_budget: 2000,
            max_layers: None,
            hidden: 50,
            trials: DEFAULT_TRIALS,
            epsilon: 0.05,
            max_pairs_per_graph: None,
            seed: 0,
        }
    }
}

impl Fig2aConfig {
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        let ns: Vec<String> = self.ns.iter().map(|n| n.to_string()).collect();
        vec![
            ("ns", ns.join(";")),
            ("r", self.r.to_string()),
            ("node_budget", self.node_budget.to_string()),
            ("max_layers", self.max_layers.map_or("auto".into(), |l| l.to_string())),
            ("hidden", self.hidden.to_string()),
            ("trials", self.trials.to_string()),
            ("epsilon", format!("{:e}", self.epsilon)),
            (
                "max_pairs_per_graph",
                self.max_pairs_per_graph.map_or("all".into(), |p| p.to_string()),
            ),
            ("seed", self.seed.to_string()),
        ]
    }
}

/// `⌈(1/2 + ε) ln n / ln(r − 1)⌉`, the depth past which random `r`-regular
/// graphs on `n` nodes have all nodes told apart.
pub fn layer_boundary(n: usize, r: usize, epsilon: f64) -> usize {
    ((0.5 + epsilon) * (n as f64).ln() / ((r - 1) as f64).ln()).ceil() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2aRow {
    pub n: usize,
    pub layers: usize,
    pub graphs: usize,
    pub pairs: usize,
    pub indistinguishable: usize,
    /// Pairs swapped by an automorphism; no structural model separates them.
    pub automorphic: usize,
    pub boundary: usize,
}

impl Fig2aRow {
    pub fn fraction(&self) -> f64 {
        self.indistinguishable as f64 / self.pairs as f64
    }

    pub fn automorphic_fraction(&self) -> f64 {
        self.automorphic as f64 / self.pairs as f64
    }
}

/// Whether some automorphism of `g` maps `u` to `v`. Nodes are matched in
/// BFS order from `u`, each one among the unused neighbors of its parent's
/// image, so the search branches at most `degree` ways per node.
pub fn automorphism_maps(g: &Graph, u: usize, v: usize) -> bool {
    if g.degree(u) != g.degree(v) {
        return false;
    }
    if !g.is_connected() {
        return crate::graph::find_isomorphism(g, g, Some(&[u]), Some(&[v])).is_some();
    }
    let n = g.n();
    let mut order = vec![u];
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    seen[u] = true;
    let mut i = 0;
    while i < order.len() {
        let x = order[i];
        for &y in g.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                order.push(y);
            }
        }
        i += 1;
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    map[u] = v;
    used[v] = true;

    fn search(i: usize, g: &Graph, order: &[usize], parent: &[usize], map: &mut [usize], used: &mut [bool]) -> bool {
        if i == order.len() {
            return true;
        }
        let x = order[i];
        let mapped: Vec<usize> = g.neighbors(x).iter().copied().filter(|&y| map[y] != usize::MAX).collect();
        for &c in g.neighbors(map[parent[x]]) {
            if used[c] || g.degree(c) != g.degree(x) {
                continue;
            }
            let fits = mapped.iter().all(|&y| g.has_edge(c, map[y]))
                && g.neighbors(c).iter().filter(|&&z| used[z]).count() == mapped.len();
            if fits {
                map[x] = c;
                used[c] = true;
                if search(i + 1, g, order, parent, map, used) {
                    return true;
                }
                map[x] = usize::MAX;
                used[c] = false;
            }
        }
        false
    }
    search(1, g, &order, &parent, &mut map, &mut used)
}

fn graph_seed(seed: u64, n: usize, idx: usize) -> u64 {
    let mut x = seed ^ ((n as u64) << 32) ^ idx as u64;
    // splitmix64 finalizer
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Counts node pairs of random regular graphs that an untrained single-node
/// model with shortest-path encodings cannot tell apart, for every depth
/// `0..=max_layers`. One parameter draw per trial is shared by all graphs.
pub fn fig2a_experiment(cfg: &Fig2aConfig) -> Result<Vec<Fig2aRow>> {
    if cfg.r < 3 {
        return Err(Error::InvalidParameter("fig2a needs r ≥ 3".into()));
    }
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        let boundary = layer_boundary(n, cfg.r, cfg.epsilon);
        let depth = cfg.max_layers.unwrap_or(boundary + 2);
        let mut model = ModelConfig::new(ModelKind::DegnnSpd);
        model.layers = depth;
        model.hidden = cfg.hidden;
        model.d_max = depth.max(1);
        let params: Vec<ModelParams> = (0..cfg.trials)
            .map(|t| {
                let mut c = model.clone();
                c.seed = cfg.seed.wrapping_add(t as u64);
                ModelParams::init(&c, Task::Binary, 1 + model.de_dim(), 1)
            })
            .collect::<Result<_>>()?;
        let graphs = cfg.node_budget.div_ceil(n);
        let per_graph = (0..graphs)
            .into_par_iter()
            .map(|idx| -> Result<(usize, Vec<usize>, usize)> {
                let seed = graph_seed(cfg.seed, n, idx);
                let g = sample_simple_regular(n, cfg.r, seed, 1_000_000)?;
                // reps[t][v] = per-layer outputs of node v under draw t
                let mut reps = Vec::with_capacity(params.len());
                for p in &params {
                    let mut per_node = Vec::with_capacity(n);
                    for v in 0..n {
                        let inst = Instance::new(&g, &TargetTuple::single(&g, v)?, &model, None)?;
                        let pass = forward(p, &inst, None)?;
                        per_node.push(pass.acts.iter().map(|a| a.row(v).to_vec()).collect::<Vec<_>>());
                    }
                    reps.push(per_node);
                }
                let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
                for u in 0..n {
                    for v in u + 1..n {
                        pairs.push((u, v));
                    }
                }
                if let Some(cap) = cfg.max_pairs_per_graph {
                    if pairs.len() > cap {
                        let mut rng = crate::generate::stream_rng(seed, 7);
                        let keep = rand::seq::index::sample(&mut rng, pairs.len(), cap).into_vec();
                        pairs = keep.into_iter().map(|i| pairs[i]).collect();
                    }
                }
                let mut same = vec![0usize; depth + 1];
                let mut automorphic = 0;
                for &(u, v) in &pairs {
                    for (l, count) in same.iter_mut().enumerate() {
                        let split = reps.iter().any(|r| {
                            r[u][l]
                                .iter()
                                .zip(&r[v][l])
                                .any(|(a, b)| (a - b).abs() > DIGITAL_TOLERANCE)
                        });
                        if !split {
                            *count += 1;
                            if l == depth && automorphism_maps(&g, u, v) {
                                automorphic += 1;
                            }
                        }
                    }
                }
                Ok((pairs.len(), same, automorphic))
            })
            .collect::<Result<Vec<_>>>()?;
        let total_pairs: usize = per_graph.iter().map(|p| p.0).sum();
        for l in 0..=depth {
            rows.push(Fig2aRow {
                n,
                layers: l,
                graphs,
                pairs: total_pairs,
                indistinguishable: per_graph.iter().map(|p| p.1[l]).sum(),
                automorphic: per_graph.iter().map(|p| p.2).sum(),
                boundary,
            });
        }
    }
    Ok(rows)
}

pub fn fig2a_results(cfg: &Fig2aConfig, rows: &[Fig2aRow]) -> Vec<ResultRow> {
    let hash = config_hash(cfg.to_key_values());
    let mut out = Vec::new();
    let mut last_n = None;
    for r in rows {
        if last_n != Some(r.n) {
            out.push(ResultRow {
                experiment: "fig2a".into(),
                config_hash: hash.clone(),
                metric: format!("boundary;n={}", r.n),
                value: r.boundary as f64,
                ci95: None,
            });
            out.push(ResultRow {
                experiment: "fig2a".into(),
                config_hash: hash.clone(),
                metric: format!("automorphic_fraction;n={}", r.n),
                value: r.automorphic_fraction(),
                ci95: None,
            });
            last_n = Some(r.n);
        }
        out.push(ResultRow {
            experiment: "fig2a".into(),
            config_hash: hash.clone(),
            metric: format!("indistinguishable_fraction;n={};L={}", r.n, r.layers),
            value: r.fraction(),
            ci95: None,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrgReport {
    pub clauses: Vec<Clause>,
}

impl DrgReport {
    pub fn all_pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }
}

impl fmt::Display for DrgReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Readouts of every tuple under one parameter draw.
fn readouts(g: &Graph, tuples: &[TargetTuple], config: &ModelConfig, params: &ModelParams) -> Result<Vec<Vec<f64>>> {
    tuples
        .iter()
        .map(|t| {
            let inst = Instance::new(g, t, config, Some(g.max_degree() as f64))?;
            Ok(forward(params, &inst, None)?.z)
        })
        .collect()
}

fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest and smallest cross-graph readout distance over `draws` draws; the
/// smallest is taken per pair as its largest distance over the draws.
fn cross_distances(
    g1: &Graph,
    t1: &[TargetTuple],
    g2: &Graph,
    t2: &[TargetTuple],
    config: &ModelConfig,
    draws: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let per_draw = (0..draws)
        .into_par_iter()
        .map(|d| -> Result<Vec<f64>> {
            let mut c = config.clone();
            c.seed = seed.wrapping_add(d as u64);
            let in_dim = 1 + c.de_dim();
            let p = ModelParams::init(&c, Task::Binary, in_dim, t1[0].len())?;
            let a = readouts(g1, t1, &c, &p)?;
            let b = readouts(g2, t2, &c, &p)?;
            Ok(a.iter().flat_map(|x| b.iter().map(move |y| max_norm(x, y))).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = t1.len() * t2.len();
    let mut per_pair = vec![0.0f64; pairs];
    for d in &per_draw {
        for (acc, x) in per_pair.iter_mut().zip(d) {
            *acc = acc.max(*x);
        }
    }
    let largest = per_pair.iter().copied().fold(0.0, f64::max);
    let smallest = per_pair.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((largest, smallest))
}

/// For an edge `(u, v)`: for each common neighbor `w`, the sorted multiset of
/// distance pairs `(spd(x, u), spd(x, v))` over the neighbors `x` of `w`.
pub fn common_neighbor_de2_signature(g: &Graph, u: usize, v: usize) -> Result<Vec<Vec<(u32, u32)>>> {
    let du = spd_from(g, u)?;
    let dv = spd_from(g, v)?;
    let mut out: Vec<Vec<(u32, u32)>> = (0..g.n())
        .filter(|&w| du.get(w) == Some(1) && dv.get(w) == Some(1))
        .map(|w| {
            let mut m: Vec<(u32, u32)> = g.neighbors(w).iter().map(|&x| (du.raw()[x], dv.raw()[x])).collect();
            m.sort_unstable();
            m
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Shrikhande vs 4×4 Rook's: equal intersection arrays, equal 1-WL and
/// 2-FWL configurations, identical node outputs of single-node models with
/// SPD encodings, and edge outputs told apart by the pair model.
pub fn drg_experiment(draws: usize, seed: u64) -> Result<DrgReport> {
    let s = shrikhande();
    let r = rooks_4x4();
    let mut clauses = Vec::new();

    let (a1, a2) = (intersection_array(&s)?, intersection_array(&r)?);
    let show = |c: &DrgCheck| match c {
        DrgCheck::Drg(a) => a.to_string(),
        DrgCheck::NotDrg(w) => w.to_string(),
    };
    clauses.push(Clause {
        name: "intersection arrays".into(),
        pass: matches!(&a1, DrgCheck::Drg(_)) && a1 == a2,
        detail: format!("shrikhande {} rook {}", show(&a1), show(&a2)),
    });

    let (w1, w2) = (wl1_refine(&s, None)?, wl1_refine(&r, None)?);
    clauses.push(Clause {
        name: "1-WL configurations".into(),
        pass: w1.config() == w2.config(),
        detail: format!("{} and {} classes", w1.num_colors(), w2.num_colors()),
    });
    let (f1, f2) = (fwl2_refine(&s)?, fwl2_refine(&r)?);
    clauses.push(Clause {
        name: "2-FWL configurations".into(),
        pass: f1.config() == f2.config(),
        detail: format!("{} and {} pair classes", f1.num_colors(), f2.num_colors()),
    });

    let nodes = |g: &Graph| -> Result<Vec<TargetTuple>> { (0..g.n()).map(|v| TargetTuple::single(g, v)).collect() };
    let (ns, nr) = (nodes(&s)?, nodes(&r)?);
    for (label, kind) in [
        ("DEGNN-1 node outputs", ModelKind::DegnnSpd),
        ("DEAGNN-1-SPD node outputs", ModelKind::DeagnnSpd),
        ("DEAGNN-1-PR node outputs", ModelKind::DeagnnPr),
    ] {
        let mut detail = Vec::new();
        let mut pass = true;
        for agg in [Aggregation::Gcn, Aggregation::Gin] {
            let mut c = ModelConfig::new(kind);
            c.hidden = 20;
            c.layers = if kind == ModelKind::DegnnSpd { 3 } else { 2 };
            c.agg = agg;
            let (largest, _) = cross_distances(&s, &ns, &r, &nr, &c, draws, seed)?;
            pass &= largest < 1e-12;
            detail.push(format!("{agg} {largest:.3e}"));
        }
        clauses.push(Clause {
            name: label.into(),
            pass,
            detail: format!("max |diff| over 256 pairs x {draws} draws: {}", detail.join("; ")),
        });
    }

    let edges = |g: &Graph| -> Result<Vec<TargetTuple>> {
        g.edges().map(|(u, v)| TargetTuple::new(g, &[u, v])).collect()
    };
    let (es, er) = (edges(&s)?, edges(&r)?);
    // Mean aggregation of linear messages is fixed by the intersection array
    // in the first layer, so two mean layers cannot see the DE-2 pairs
    // around the common neighbors; injective messages can.
    let edge_gap = |agg: Aggregation, layers: usize| -> Result<f64> {
        let mut c = ModelConfig::new(ModelKind::DegnnSpd);
        c.hidden = 20;
        c.layers = layers;
        c.agg = agg;
        Ok(cross_distances(&s, &es, &r, &er, &c, DEFAULT_TRIALS, seed)?.1)
    };
    let injective = edge_gap(Aggregation::Gin, 2)?;
    let mean2 = edge_gap(Aggregation::Gcn, 2)?;
    let mean3 = edge_gap(Aggregation::Gcn, 3)?;
    clauses.push(Clause {
        name: "DEGNN-2 edge outputs".into(),
        pass: injective > DIGITAL_TOLERANCE,
        detail: format!(
            "min over 48x48 edge pairs of max |diff|, {DEFAULT_TRIALS} draws: \
             gin L=2 {injective:.3e}; gcn L=2 {mean2:.3e}; gcn L=3 {mean3:.3e}"
        ),
    });

    let (u1, v1) = s.edges().next().expect("has edges");
    let (u2, v2) = r.edges().next().expect("has edges");
    let sig_s = common_neighbor_de2_signature(&s, u1, v1)?;
    let sig_r = common_neighbor_de2_signature(&r, u2, v2)?;
    clauses.push(Clause {
        name: "DE-2 around common neighbors".into(),
        pass: sig_s != sig_r,
        detail: format!("shrikhande {sig_s:?} rook {sig_r:?}"),
    });
    Ok(DrgReport { clauses })
}

pub fn drg_results(report: &DrgReport, draws: usize, seed: u64) -> Vec<ResultRow> {
    let hash = config_hash([("draws", draws.to_string()), ("seed", seed.to_string())]);
    report
        .clauses
        .iter()
        .map(|c| ResultRow {
            experiment: "drg".into(),
            config_hash: hash.clone(),
            metric: c.name.replace(',', ";"),
            value: if c.pass { 1.0 } else { 0.0 },
            ci95: None,
        })
        .collect()
}

/// Test metrics of `seeds` training runs on one fixed split. Run `i` uses
/// model and training seeds offset by `i`.
pub fn train_over_seeds(
    dataset: &TaskDataset,
    model: &ModelConfig,
    tc: &TrainConfig,
    seeds: usize,
) -> Result<Vec<Metrics>> {
    let data = prepare(dataset, model)?;
    (0..seeds as u64)
        .map(|i| {
            let mut m = model.clone();
            m.seed = model.seed.wrapping_add(i);
            let mut t = tc.clone();
            t.seed = tc.seed.wrapping_add(i);
            let out = train(&m, &data, &t)?;
            evaluate(&out.params, &data.test)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_examples() {
        assert_eq!(layer_boundary(16, 3, 0.05), 3);
        assert_eq!(layer_boundary(128, 3, 0.05), 4);
    }

    #[test]
    fn signatures_differ_between_corpus_graphs() {
        let s = shrikhande();
        let r = rooks_4x4();
        let a = common_neighbor_de2_signature(&s, 0, s.neighbors(0)[0]).unwrap();
        let b = common_neighbor_de2_signature(&r, 0, r.neighbors(0)[0]).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(b.len(), 2);
        assert_ne!(a, b);
    }

    #[test]
    fn small_fig2a_run() {
        let cfg = Fig2aConfig {
            ns: vec![16],
            node_budget: 32,
            hidden: 8,
            trials: 1,
            ..Default::default()
        };
        let rows = fig2a_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].fraction(), 1.0);
        assert_eq!(rows[0].pairs, 240);
        let csv = fig2a_results(&cfg, &rows);
        assert_eq!(csv.len(), 8);
    }
}
