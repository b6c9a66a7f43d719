//! Forward and backward passes.
//!
//! Every layer is a sum over aggregation groups. A group is a sparse operator
//! `P` (one weighted neighbor list per node) and a layer computes
//! `Σ_g ReLU(P_g H Θ_g)`, or `Σ_g ReLU(ReLU(P_g H Θ_g) Θ'_g)` with the
//! two-layer perceptron. The plain, ring-controlled and PageRank-controlled
//! models differ only in their operators:
//!
//! * closed neighborhood, weights `1/(deg(v)+1)`;
//! * for each `k ≤ K`, `{v} ∪ {u : spd(u, v) = k}`, weights `1/(|ring|+1)`;
//! * all `u`, weights `ζ_ppr(u|v)`.
//!
//! The perceptron variant uses unit weights in the first two. Neighbor sums
//! go through [`weighted_row_sum`], so outputs depend only on the multiset of
//! neighbor rows.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{Aggregation, ModelConfig, ModelKind, Readout};
use super::matrix::Matrix;
use crate::encoding::{bfs_bounded, de_for_set, personalized_pagerank};
use crate::error::{Error, Result};
use crate::graph::{Graph, TargetTuple};
use crate::numeric::{weighted_row_sum, SumScratch};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Binary,
    Multiclass(usize),
}

impl Task {
    pub fn outputs(self) -> usize {
        match self {
            Task::Binary => 1,
            Task::Multiclass(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub task: Task,
    pub in_dim: usize,
    pub tuple_size: usize,
    /// Layer weights in `(layer, group, sub)` order, then the head weight
    /// (`z_dim × outputs`) and head bias (`1 × outputs`).
    pub tensors: Vec<Matrix>,
}

impl ModelParams {
    pub fn init(config: &ModelConfig, task: Task, in_dim: usize, tuple_size: usize) -> Result<Self> {
        config.validate()?;
        if tuple_size == 0 {
            return Err(Error::InvalidTuple("empty target tuple".into()));
        }
        if let Task::Multiclass(c) = task {
            if c < 2 {
                return Err(Error::Config(format!("{c} classes")));
            }
        }
        let mut p = Self {
            config: config.clone(),
            task,
            in_dim,
            tuple_size,
            tensors: Vec::new(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for l in 0..config.layers {
            let fan_in = p.layer_in(l);
            for _ in 0..config.groups() {
                p.tensors.push(Matrix::uniform_init(fan_in, config.hidden, &mut rng));
                if config.agg == Aggregation::Gin {
                    p.tensors
                        .push(Matrix::uniform_init(config.hidden, config.hidden, &mut rng));
                }
            }
        }
        p.tensors
            .push(Matrix::uniform_init(p.z_dim(), task.outputs(), &mut rng));
        p.tensors.push(Matrix::zeros(1, task.outputs()));
        Ok(p)
    }

    fn subs(&self) -> usize {
        match self.config.agg {
            Aggregation::Gcn => 1,
            Aggregation::Gin => 2,
        }
    }

    pub fn layer_in(&self, l: usize) -> usize {
        if l == 0 {
            self.in_dim
        } else {
            self.config.hidden
        }
    }

    pub fn out_width(&self) -> usize {
        if self.config.layers == 0 {
            self.in_dim
        } else {
            self.config.hidden
        }
    }

    pub fn z_dim(&self) -> usize {
        let both = self.tuple_size >= 2 && self.config.readout == Readout::SumDifference;
        self.out_width() * if both { 2 } else { 1 }
    }

    fn layer_slice(&self, l: usize) -> &[Matrix] {
        let per = self.config.groups() * self.subs();
        &self.tensors[l * per..(l + 1) * per]
    }

    fn head_index(&self) -> usize {
        self.config.layers * self.config.groups() * self.subs()
    }

    pub fn head_weight(&self) -> &Matrix {
        &self.tensors[self.head_index()]
    }

    pub fn head_bias(&self) -> &Matrix {
        &self.tensors[self.head_index() + 1]
    }

    pub fn zeros_like(&self) -> Vec<Matrix> {
        self.tensors
            .iter()
            .map(|t| Matrix::zeros(t.rows(), t.cols()))
            .collect()
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors.iter().map(|t| t.as_slice().len()).sum()
    }

    pub fn check_shapes(&self) -> Result<()> {
        let fresh = Self::init(&self.config, self.task, self.in_dim, self.tuple_size)?;
        if fresh.tensors.len() != self.tensors.len() {
            return Err(Error::Shape(format!(
                "{} tensors, expected {}",
                self.tensors.len(),
                fresh.tensors.len()
            )));
        }
        for (i, (a, b)) in self.tensors.iter().zip(&fresh.tensors).enumerate() {
            if a.shape() != b.shape() {
                return Err(Error::Shape(format!(
                    "tensor {i} is {:?}, expected {:?}",
                    a.shape(),
                    b.shape()
                )));
            }
            if !a.is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(())
    }
}

/// Sparse aggregation operator: one weighted neighbor list per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    offsets: Vec<usize>,
    idx: Vec<usize>,
    coef: Vec<f64>,
}

impl Operator {
    fn from_rows(rows: impl Iterator<Item = Vec<(usize, f64)>>) -> Self {
        let mut offsets = vec![0];
        let mut idx = Vec::new();
        let mut coef = Vec::new();
        for row in rows {
            for (u, c) in row {
                idx.push(u);
                coef.push(c);
            }
            offsets.push(idx.len());
        }
        Self { offsets, idx, coef }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn row(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.idx[r.clone()].iter().copied().zip(self.coef[r].iter().copied())
    }

    fn apply(&self, h: &Matrix, scratch: &mut SumScratch) -> Matrix {
        let mut out = Matrix::zeros(self.n(), h.cols());
        for v in 0..self.n() {
            weighted_row_sum(self.row(v), h.as_slice(), out.row_mut(v), scratch);
        }
        out
    }

    /// `dH += Pᵀ dA`
    fn apply_transpose_acc(&self, da: &Matrix, dh: &mut Matrix) {
        for v in 0..self.n() {
            let src = da.row(v);
            for (u, c) in self.row(v) {
                for (o, x) in dh.row_mut(u).iter_mut().zip(src) {
                    *o += c * x;
                }
            }
        }
    }
}

/// Exclusive SPD rings `ring[v][k-1] = {u : spd(u, v) = k}` up to `depth`.
#[derive(Debug, Clone)]
pub struct Rings {
    depth: usize,
    rings: Vec<Vec<Vec<usize>>>,
}

impl Rings {
    pub fn new(g: &Graph, depth: usize) -> Self {
        let rings = (0..g.n())
            .map(|v| {
                let t = bfs_bounded(g, &[v], depth as u32);
                (1..=depth as u32).map(|k| t.ring(k)).collect()
            })
            .collect();
        Self { depth, rings }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn ring(&self, v: usize, k: usize) -> &[usize] {
        &self.rings[v][k - 1]
    }

    fn operators(&self, k_max: usize, unit: bool) -> Result<Vec<Operator>> {
        if k_max > self.depth {
            return Err(Error::RingDepth {
                requested: k_max,
                available: self.depth,
            });
        }
        Ok((1..=k_max)
            .map(|k| {
                Operator::from_rows(self.rings.iter().enumerate().map(|(v, r)| {
                    let ring = &r[k - 1];
                    let c = if unit { 1.0 } else { 1.0 / (ring.len() + 1) as f64 };
                    std::iter::once(v).chain(ring.iter().copied()).map(|u| (u, c)).collect()
                }))
            })
            .collect())
    }
}

fn closed_neighborhood(g: &Graph, unit: bool) -> Operator {
    Operator::from_rows((0..g.n()).map(|v| {
        let c = if unit { 1.0 } else { 1.0 / (g.degree(v) + 1) as f64 };
        std::iter::once(v)
            .chain(g.neighbors(v).iter().copied())
            .map(|u| (u, c))
            .collect()
    }))
}

fn ppr_operator(g: &Graph, damping: f64, tol: f64) -> Result<Operator> {
    let cols = (0..g.n())
        .map(|v| personalized_pagerank(g, v, damping, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(Operator::from_rows(cols.into_iter().map(|col| {
        col.into_iter()
            .enumerate()
            .filter(|&(_, x)| x != 0.0)
            .collect()
    })))
}

/// The aggregation operators of every layer for `config` on `g`.
pub fn propagation(g: &Graph, config: &ModelConfig) -> Result<Vec<Operator>> {
    let unit = config.agg == Aggregation::Gin;
    match config.kind {
        ModelKind::Wlgnn | ModelKind::DegnnSpd | ModelKind::DegnnLp => {
            Ok(vec![closed_neighborhood(g, unit)])
        }
        ModelKind::DeagnnSpd => Rings::new(g, config.prop_depth).operators(config.prop_depth, unit),
        ModelKind::DeagnnPr => Ok(vec![ppr_operator(g, config.damping, config.ppr_tol)?]),
    }
}

/// Degree scalar (or node attributes) concatenated with the distance
/// encoding of every node relative to `s`. `degree_scale` defaults to the
/// maximum degree of `g`.
pub fn input_features(
    g: &Graph,
    s: &TargetTuple,
    config: &ModelConfig,
    degree_scale: Option<f64>,
) -> Result<Matrix> {
    let n = g.n();
    let de = config.de_variant().map(|v| de_for_set(g, s, &v)).transpose()?;
    let de_dim = config.de_dim();
    let base_dim = g.node_attrs().map_or(1, |a| a.width());
    let scale = degree_scale.unwrap_or(g.max_degree() as f64).max(1.0);
    let mut out = Matrix::zeros(n, base_dim + de_dim);
    for v in 0..n {
        let row = out.row_mut(v);
        match g.node_attrs() {
            Some(a) => row[..base_dim].copy_from_slice(a.row(v)),
            None => row[0] = g.degree(v) as f64 / scale,
        }
        if let Some(t) = &de {
            row[base_dim..].copy_from_slice(t.row(v));
        }
    }
    Ok(out)
}

/// Features, operators and target rows of one target tuple.
#[derive(Debug, Clone)]
pub struct Instance {
    pub feats: Matrix,
    pub ops: Vec<Operator>,
    pub targets: Vec<usize>,
}

impl Instance {
    pub fn new(g: &Graph, s: &TargetTuple, config: &ModelConfig, degree_scale: Option<f64>) -> Result<Self> {
        Ok(Self {
            feats: input_features(g, s, config, degree_scale)?,
            ops: propagation(g, config)?,
            targets: s.nodes().to_vec(),
        })
    }
}

/// GCN: `z1 = (P h) Θ`. Injective: `z1 = h Θ1`, messages `ReLU(z1)`,
/// `agg = P ReLU(z1)` and `z2 = agg Θ2`.
struct GroupCache {
    agg: Matrix,
    z1: Matrix,
    z2: Option<Matrix>,
}

struct LayerCache {
    groups: Vec<GroupCache>,
    mask: Option<Vec<f64>>,
}

pub struct ForwardPass {
    /// `acts[l]` holds every node's representation after `l` layers.
    pub acts: Vec<Matrix>,
    pub z: Vec<f64>,
    caches: Vec<LayerCache>,
}

fn relu_inplace(m: &mut Matrix) {
    m.as_mut_slice().iter_mut().for_each(|x| *x = x.max(0.0));
}

fn layer_forward(
    ops: &[Operator],
    h: &Matrix,
    weights: &[Matrix],
    agg: Aggregation,
    hidden: usize,
    scratch: &mut SumScratch,
) -> Result<(Matrix, Vec<GroupCache>)> {
    let subs = weights.len() / ops.len();
    let mut out = Matrix::zeros(h.rows(), hidden);
    let mut caches = Vec::with_capacity(ops.len());
    for (g, op) in ops.iter().enumerate() {
        let cache = if agg == Aggregation::Gin {
            let z1 = h.matmul(&weights[g * subs])?;
            let mut msg = z1.clone();
            relu_inplace(&mut msg);
            let a = op.apply(&msg, scratch);
            let z2 = a.matmul(&weights[g * subs + 1])?;
            GroupCache { agg: a, z1, z2: Some(z2) }
        } else {
            let a = op.apply(h, scratch);
            let z1 = a.matmul(&weights[g * subs])?;
            GroupCache { agg: a, z1, z2: None }
        };
        let mut act = cache.z2.as_ref().unwrap_or(&cache.z1).clone();
        relu_inplace(&mut act);
        out.add_assign(&act);
        caches.push(cache);
    }
    Ok((out, caches))
}

/// All pairwise absolute differences of the target rows, summed.
pub fn difference_pool(h: &Matrix, targets: &[usize]) -> Vec<f64> {
    let w = h.cols();
    let mut rows = Vec::new();
    for i in 0..targets.len() {
        for j in i + 1..targets.len() {
            rows.extend(
                h.row(targets[i])
                    .iter()
                    .zip(h.row(targets[j]))
                    .map(|(a, b)| (a - b).abs()),
            );
        }
    }
    let mut out = vec![0.0; w];
    let count = if w == 0 { 0 } else { rows.len() / w };
    weighted_row_sum((0..count).map(|i| (i, 1.0)), &rows, &mut out, &mut SumScratch::default());
    out
}

fn readout(h: &Matrix, targets: &[usize], mode: Readout) -> Vec<f64> {
    if targets.len() == 1 {
        return h.row(targets[0]).to_vec();
    }
    let diff = difference_pool(h, targets);
    match mode {
        Readout::Difference => diff,
        Readout::SumDifference => {
            let mut sum = vec![0.0; h.cols()];
            weighted_row_sum(
                targets.iter().map(|&t| (t, 1.0)),
                h.as_slice(),
                &mut sum,
                &mut SumScratch::default(),
            );
            sum.extend(diff);
            sum
        }
    }
}

/// Runs every layer and the readout. Dropout is applied only when `rng` is
/// given.
pub fn forward(params: &ModelParams, inst: &Instance, mut rng: Option<&mut ChaCha8Rng>) -> Result<ForwardPass> {
    let cfg = &params.config;
    if inst.feats.cols() != params.in_dim {
        return Err(Error::Shape(format!(
            "features have width {}, model expects {}",
            inst.feats.cols(),
            params.in_dim
        )));
    }
    if inst.targets.len() != params.tuple_size {
        return Err(Error::Shape(format!(
            "tuple of size {}, model expects {}",
            inst.targets.len(),
            params.tuple_size
        )));
    }
    if inst.ops.len() != cfg.groups() {
        return Err(Error::Shape(format!(
            "{} aggregation operators, model expects {}",
            inst.ops.len(),
            cfg.groups()
        )));
    }
    let mut scratch = SumScratch::default();
    let mut acts = vec![inst.feats.clone()];
    let mut caches = Vec::with_capacity(cfg.layers);
    for l in 0..cfg.layers {
        let (mut out, groups) = layer_forward(
            &inst.ops,
            &acts[l],
            params.layer_slice(l),
            cfg.agg,
            cfg.hidden,
            &mut scratch,
        )?;
        let mask = match rng.as_deref_mut() {
            Some(r) if cfg.dropout > 0.0 => {
                let keep = 1.0 - cfg.dropout;
                let m: Vec<f64> = (0..out.as_slice().len())
                    .map(|_| if r.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                    .collect();
                for (x, k) in out.as_mut_slice().iter_mut().zip(&m) {
                    *x *= k;
                }
                Some(m)
            }
            _ => None,
        };
        // ReLU maps NaN to zero, so the pre-activations are checked too.
        let pre_finite = groups
            .iter()
            .all(|g| g.z1.is_finite() && g.z2.as_ref().is_none_or(Matrix::is_finite));
        if !pre_finite || !out.is_finite() {
            return Err(Error::NonFinite(l + 1));
        }
        acts.push(out);
        caches.push(LayerCache { groups, mask });
    }
    let z = readout(&acts[cfg.layers], &inst.targets, cfg.readout);
    Ok(ForwardPass { acts, z, caches })
}

/// Head output: probabilities and, with a label, the loss and gradients.
#[derive(Debug, Clone)]
pub struct HeadOutput {
    /// Positive-class probability for binary tasks, class probabilities
    /// otherwise.
    pub scores: Vec<f64>,
    pub loss: f64,
    pub dz: Vec<f64>,
    pub d_weight: Matrix,
    pub d_bias: Matrix,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Logits `z W + b`, then sigmoid with binary cross-entropy or softmax with
/// cross-entropy.
pub fn predict_and_loss(z: &[f64], params: &ModelParams, label: usize) -> Result<HeadOutput> {
    let w = params.head_weight();
    let b = params.head_bias();
    if z.len() != w.rows() {
        return Err(Error::Shape(format!("readout width {} vs head {}", z.len(), w.rows())));
    }
    let k = w.cols();
    let mut logits = vec![0.0; k];
    w.vec_mul(z, &mut logits);
    for (l, bb) in logits.iter_mut().zip(b.as_slice()) {
        *l += bb;
    }
    if logits.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(params.config.layers + 1));
    }
    let (scores, loss, dlogits) = match params.task {
        Task::Binary => {
            if label > 1 {
                return Err(Error::InvalidParameter(format!("binary label {label}")));
            }
            let x = logits[0];
            let y = label as f64;
            let p = sigmoid(x);
            let loss = x.max(0.0) - x * y + (-x.abs()).exp().ln_1p();
            (vec![p], loss, vec![p - y])
        }
        Task::Multiclass(c) => {
            if label >= c {
                return Err(Error::InvalidParameter(format!("label {label} with {c} classes")));
            }
            let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|x| (x - m).exp()).collect();
            let total: f64 = exps.iter().sum();
            let probs: Vec<f64> = exps.iter().map(|e| e / total).collect();
            let loss = total.ln() + m - logits[label];
            let mut d = probs.clone();
            d[label] -= 1.0;
            (probs, loss, d)
        }
    };
    let mut d_weight = Matrix::zeros(w.rows(), k);
    for (i, &zi) in z.iter().enumerate() {
        for (o, &d) in d_weight.row_mut(i).iter_mut().zip(&dlogits) {
            *o = zi * d;
        }
    }
    let mut dz = vec![0.0; z.len()];
    for (i, dzi) in dz.iter_mut().enumerate() {
        *dzi = w.row(i).iter().zip(&dlogits).map(|(a, b)| a * b).sum();
    }
    Ok(HeadOutput {
        scores,
        loss,
        dz,
        d_weight,
        d_bias: Matrix::from_vec(1, k, dlogits)?,
    })
}

fn readout_backward(h: &Matrix, targets: &[usize], mode: Readout, dz: &[f64]) -> Matrix {
    let w = h.cols();
    let mut dh = Matrix::zeros(h.rows(), w);
    if targets.len() == 1 {
        dh.row_mut(targets[0]).copy_from_slice(dz);
        return dh;
    }
    let ddiff = match mode {
        Readout::Difference => dz,
        Readout::SumDifference => {
            for &t in targets {
                for (o, d) in dh.row_mut(t).iter_mut().zip(&dz[..w]) {
                    *o += d;
                }
            }
            &dz[w..]
        }
    };
    for i in 0..targets.len() {
        for j in i + 1..targets.len() {
            let (a, b) = (targets[i], targets[j]);
            for c in 0..w {
                let diff = h.get(a, c) - h.get(b, c);
                let s = if diff > 0.0 {
                    1.0
                } else if diff < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                let g = s * ddiff[c];
                dh.row_mut(a)[c] += g;
                dh.row_mut(b)[c] -= g;
            }
        }
    }
    dh
}

fn relu_mask(d: &mut Matrix, pre: &Matrix) {
    for (x, z) in d.as_mut_slice().iter_mut().zip(pre.as_slice()) {
        if *z <= 0.0 {
            *x = 0.0;
        }
    }
}

/// Gradients of every layer tensor given `dz`, the gradient at the readout.
/// The head gradients are not included (they are zero in the returned list).
pub fn backward(params: &ModelParams, inst: &Instance, pass: &ForwardPass, dz: &[f64]) -> Vec<Matrix> {
    let cfg = &params.config;
    let mut grads = params.zeros_like();
    let mut dh = readout_backward(&pass.acts[cfg.layers], &inst.targets, cfg.readout, dz);
    let groups = cfg.groups();
    let subs = if cfg.agg == Aggregation::Gin { 2 } else { 1 };
    for l in (0..cfg.layers).rev() {
        let cache = &pass.caches[l];
        if let Some(mask) = &cache.mask {
            for (x, m) in dh.as_mut_slice().iter_mut().zip(mask) {
                *x *= m;
            }
        }
        let weights = params.layer_slice(l);
        let need_input_grad = l > 0;
        let mut dprev = Matrix::zeros(pass.acts[l].rows(), pass.acts[l].cols());
        for g in 0..groups {
            let gc = &cache.groups[g];
            let base = (l * groups + g) * subs;
            match &gc.z2 {
                Some(z2) => {
                    let mut dz2 = dh.clone();
                    relu_mask(&mut dz2, z2);
                    gc.agg.t_matmul_acc(&dz2, &mut grads[base + 1]);
                    let da = dz2.matmul_t(&weights[g * subs + 1]);
                    let mut dz1 = Matrix::zeros(gc.z1.rows(), gc.z1.cols());
                    inst.ops[g].apply_transpose_acc(&da, &mut dz1);
                    relu_mask(&mut dz1, &gc.z1);
                    pass.acts[l].t_matmul_acc(&dz1, &mut grads[base]);
                    if need_input_grad {
                        dprev.add_assign(&dz1.matmul_t(&weights[g * subs]));
                    }
                }
                None => {
                    let mut dz1 = dh.clone();
                    relu_mask(&mut dz1, &gc.z1);
                    gc.agg.t_matmul_acc(&dz1, &mut grads[base]);
                    if need_input_grad {
                        let da = dz1.matmul_t(&weights[g * subs]);
                        inst.ops[g].apply_transpose_acc(&da, &mut dprev);
                    }
                }
            }
        }
        dh = dprev;
    }
    grads
}

/// Loss, scores and the gradient of every tensor for one labeled instance.
pub fn loss_and_gradients(
    params: &ModelParams,
    inst: &Instance,
    label: usize,
    rng: Option<&mut ChaCha8Rng>,
) -> Result<(f64, Vec<f64>, Vec<Matrix>)> {
    let pass = forward(params, inst, rng)?;
    let head = predict_and_loss(&pass.z, params, label)?;
    let mut grads = backward(params, inst, &pass, &head.dz);
    let h = params.head_index();
    grads[h] = head.d_weight;
    grads[h + 1] = head.d_bias;
    Ok((head.loss, head.scores, grads))
}

/// Class scores of one instance in evaluation mode.
pub fn predict(params: &ModelParams, inst: &Instance) -> Result<Vec<f64>> {
    let pass = forward(params, inst, None)?;
    Ok(predict_and_loss(&pass.z, params, 0)?.scores)
}

/// Representations after every layer of the plain model on `feats`.
pub fn wlgnn_forward(g: &Graph, feats: &Matrix, params: &ModelParams) -> Result<Vec<Matrix>> {
    if params.config.groups() != 1 {
        return Err(Error::Config("plain forward needs a single aggregation group".into()));
    }
    if feats.rows() != g.n() || feats.cols() != params.in_dim {
        return Err(Error::Shape(format!(
            "features {:?} for {} nodes and width {}",
            feats.shape(),
            g.n(),
            params.in_dim
        )));
    }
    let ops = vec![closed_neighborhood(g, params.config.agg == Aggregation::Gin)];
    let mut scratch = SumScratch::default();
    let mut acts = vec![feats.clone()];
    for l in 0..params.config.layers {
        let (out, _) = layer_forward(
            &ops,
            &acts[l],
            params.layer_slice(l),
            params.config.agg,
            params.config.hidden,
            &mut scratch,
        )?;
        acts.push(out);
    }
    Ok(acts)
}

/// Evaluation-mode representations after every layer for target `s`,
/// according to the model kind in `params`.
pub fn degnn_forward(g: &Graph, s: &TargetTuple, params: &ModelParams, degree_scale: Option<f64>) -> Result<ForwardPass> {
    let inst = Instance::new(g, s, &params.config, degree_scale)?;
    forward(params, &inst, None)
}

/// One ring-controlled layer: `Σ_{k≤K} ReLU(mean({v} ∪ ring_k(v)) Θ_k)`.
pub fn deagnn_spd_layer(rings: &Rings, h: &Matrix, weights: &[Matrix]) -> Result<Matrix> {
    let k = weights.len();
    let ops = rings.operators(k, false)?;
    let hidden = weights.first().map_or(0, |w| w.cols());
    Ok(layer_forward(&ops, h, weights, Aggregation::Gcn, hidden, &mut SumScratch::default())?.0)
}

/// One PageRank-controlled layer: `ReLU(Σ_u ζ_ppr(u|v) h_u Θ)`.
pub fn deagnn_pr_layer(g: &Graph, h: &Matrix, weight: &Matrix, damping: f64, tol: f64) -> Result<Matrix> {
    let ops = vec![ppr_operator(g, damping, tol)?];
    Ok(layer_forward(&ops, h, std::slice::from_ref(weight), Aggregation::Gcn, weight.cols(), &mut SumScratch::default())?.0)
}

/// Largest readout difference between two tuples over `trials` random
/// parameter draws (seeds `config.seed + t`). Degree features of both graphs
/// share one scale.
pub fn untrained_max_diff(
    g1: &Graph,
    t1: &TargetTuple,
    g2: &Graph,
    t2: &TargetTuple,
    config: &ModelConfig,
    trials: usize,
) -> Result<f64> {
    if t1.len() != t2.len() {
        return Err(Error::InvalidTuple("tuples of different sizes".into()));
    }
    let scale = Some(g1.max_degree().max(g2.max_degree()) as f64);
    let mut c = config.clone();
    let first = Instance::new(g1, t1, &c, scale)?;
    let second = Instance::new(g2, t2, &c, scale)?;
    if first.feats.cols() != second.feats.cols() {
        return Err(Error::Shape("graphs yield different feature widths".into()));
    }
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        c.seed = config.seed.wrapping_add(t as u64);
        let p = ModelParams::init(&c, Task::Binary, first.feats.cols(), t1.len())?;
        let a = forward(&p, &first, None)?.z;
        let b = forward(&p, &second, None)?.z;
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Output differences above this count as distinguished.
pub const DIGITAL_TOLERANCE: f64 = 1e-9;

pub fn untrained_distinguish(
    g1: &Graph,
    t1: &TargetTuple,
    g2: &Graph,
    t2: &TargetTuple,
    config: &ModelConfig,
    trials: usize,
) -> Result<bool> {
    Ok(untrained_max_diff(g1, t1, g2, t2, config, trials)? > DIGITAL_TOLERANCE)
}
