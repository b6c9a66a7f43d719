use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dataset::{Split, TaskDataset, TaskKind};
use super::ego::ego_instance;
use super::metrics::{argmax_accuracy, auc, binary_accuracy, Metrics};
use crate::error::{Error, Result};
use crate::generate::stream_rng;
use crate::nn::{forward, loss_and_gradients, predict_and_loss, Instance, Matrix, ModelConfig, ModelParams, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimizer {
    Sgd,
    Adam,
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimizer::Sgd => "sgd",
            Optimizer::Adam => "adam",
        })
    }
}

impl FromStr for Optimizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(Optimizer::Sgd),
            "adam" => Ok(Optimizer::Adam),
            _ => Err(Error::Config(format!("unknown optimizer {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub lr: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Stop once the best training loss of the last `patience` epochs
    /// improves on the loss `patience` epochs ago by less than this fraction.
    pub min_rel_improvement: f64,
    pub patience: usize,
    /// Return the epoch with the best validation score instead of the last.
    pub select_on_validation: bool,
    /// Seeds shuffling and dropout; model initialization uses the model seed.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: Optimizer::Sgd,
            lr: 1e-4,
            batch_size: 64,
            max_epochs: 500,
            min_rel_improvement: 1e-4,
            patience: 10,
            select_on_validation: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("optimizer", self.optimizer.to_string()),
            ("lr", format!("{:e}", self.lr)),
            ("batch_size", self.batch_size.to_string()),
            ("max_epochs", self.max_epochs.to_string()),
            ("min_rel_improvement", format!("{:e}", self.min_rel_improvement)),
            ("patience", self.patience.to_string()),
            ("select_on_validation", self.select_on_validation.to_string()),
            ("train_seed", self.seed.to_string()),
        ]
    }

    pub fn apply_key_values(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
        }
        for (k, v) in map {
            match k.as_str() {
                "optimizer" => self.optimizer = v.parse()?,
                "lr" => self.lr = parse(k, v)?,
                "batch_size" => self.batch_size = parse(k, v)?,
                "max_epochs" => self.max_epochs = parse(k, v)?,
                "min_rel_improvement" => self.min_rel_improvement = parse(k, v)?,
                "patience" => self.patience = parse(k, v)?,
                "select_on_validation" => self.select_on_validation = parse(k, v)?,
                "train_seed" => self.seed = parse(k, v)?,
                _ => {}
            }
        }
        self.validate()
    }

    pub const KEYS: [&'static str; 8] = [
        "optimizer",
        "lr",
        "batch_size",
        "max_epochs",
        "min_rel_improvement",
        "patience",
        "select_on_validation",
        "train_seed",
    ];

    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("lr={} must be finite and non-negative", self.lr)));
        }
        if self.batch_size == 0 || self.patience == 0 {
            return Err(Error::Config("batch_size and patience must be positive".into()));
        }
        Ok(())
    }
}

/// Model inputs of one split, prepared once.
#[derive(Debug, Clone, Default)]
pub struct PreparedSplit {
    pub instances: Vec<Instance>,
    pub labels: Vec<usize>,
}

impl PreparedSplit {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub task: Task,
    pub in_dim: usize,
    pub tuple_size: usize,
    pub train: PreparedSplit,
    pub val: PreparedSplit,
    pub test: PreparedSplit,
}

/// Ego-network inputs for every instance, with degrees scaled by the
/// maximum degree of the observed graph.
pub fn prepare(dataset: &TaskDataset, config: &ModelConfig) -> Result<Prepared> {
    config.validate()?;
    let scale = dataset.graph.max_degree() as f64;
    let build = |which: Split| -> Result<PreparedSplit> {
        let items: Vec<_> = dataset.split(which).collect();
        let instances = items
            .par_iter()
            .map(|i| ego_instance(&dataset.graph, &i.tuple, config, scale))
            .collect::<Result<Vec<_>>>()?;
        Ok(PreparedSplit {
            instances,
            labels: items.iter().map(|i| i.label).collect(),
        })
    };
    let train = build(Split::Train)?;
    let val = build(Split::Val)?;
    let test = build(Split::Test)?;
    let in_dim = train
        .instances
        .first()
        .map(|i| i.feats.cols())
        .ok_or_else(|| Error::EmptySplit("train".into()))?;
    let task = match dataset.kind {
        TaskKind::Node => Task::Multiclass(dataset.classes),
        _ => Task::Binary,
    };
    Ok(Prepared {
        task,
        in_dim,
        tuple_size: dataset.kind.tuple_size(),
        train,
        val,
        test,
    })
}

/// Loss, accuracy and (binary) AUC of `params` on a split.
pub fn evaluate(params: &ModelParams, split: &PreparedSplit) -> Result<Metrics> {
    if split.is_empty() {
        return Err(Error::EmptySplit("evaluation".into()));
    }
    let outs = split
        .instances
        .par_iter()
        .zip(&split.labels)
        .map(|(inst, &label)| {
            let pass = forward(params, inst, None)?;
            let head = predict_and_loss(&pass.z, params, label)?;
            Ok((head.loss, head.scores))
        })
        .collect::<Result<Vec<_>>>()?;
    let loss = outs.iter().map(|o| o.0).sum::<f64>() / outs.len() as f64;
    match params.task {
        Task::Binary => {
            let scores: Vec<f64> = outs.iter().map(|o| o.1[0]).collect();
            let labels: Vec<bool> = split.labels.iter().map(|&l| l == 1).collect();
            Ok(Metrics {
                loss,
                accuracy: binary_accuracy(&scores, &labels),
                auc: Some(auc(&scores, &labels)?),
            })
        }
        Task::Multiclass(_) => {
            let probs: Vec<Vec<f64>> = outs.into_iter().map(|o| o.1).collect();
            Ok(Metrics {
                loss,
                accuracy: argmax_accuracy(&probs, &split.labels),
                auc: None,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val: Option<Metrics>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

struct AdamState {
    m: Vec<Matrix>,
    v: Vec<Matrix>,
    t: i32,
}

fn apply_update(params: &mut ModelParams, grads: &[Matrix], tc: &TrainConfig, adam: &mut AdamState) {
    match tc.optimizer {
        Optimizer::Sgd => {
            for (p, g) in params.tensors.iter_mut().zip(grads) {
                for (x, d) in p.as_mut_slice().iter_mut().zip(g.as_slice()) {
                    *x -= tc.lr * d;
                }
            }
        }
        Optimizer::Adam => {
            const B1: f64 = 0.9;
            const B2: f64 = 0.999;
            const EPS: f64 = 1e-8;
            adam.t += 1;
            let c1 = 1.0 - B1.powi(adam.t);
            let c2 = 1.0 - B2.powi(adam.t);
            for ((p, g), (m, v)) in params
                .tensors
                .iter_mut()
                .zip(grads)
                .zip(adam.m.iter_mut().zip(adam.v.iter_mut()))
            {
                let it = p
                    .as_mut_slice()
                    .iter_mut()
                    .zip(g.as_slice())
                    .zip(m.as_mut_slice().iter_mut().zip(v.as_mut_slice()));
                for ((x, &d), (mi, vi)) in it {
                    *mi = B1 * *mi + (1.0 - B1) * d;
                    *vi = B2 * *vi + (1.0 - B2) * d * d;
                    *x -= tc.lr * (*mi / c1) / ((*vi / c2).sqrt() + EPS);
                }
            }
        }
    }
}

fn score_of(m: &Metrics) -> f64 {
    m.auc.unwrap_or(m.accuracy)
}

fn config_echo(config: &ModelConfig, tc: &TrainConfig) -> String {
    config
        .to_key_values()
        .into_iter()
        .chain(tc.to_key_values())
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Minibatch training. Per-instance gradients run in parallel and are
/// reduced in batch order, so results do not depend on the thread count.
pub fn train(config: &ModelConfig, data: &Prepared, tc: &TrainConfig) -> Result<TrainOutcome> {
    tc.validate()?;
    if data.train.is_empty() {
        return Err(Error::EmptySplit("train".into()));
    }
    let mut params = ModelParams::init(config, data.task, data.in_dim, data.tuple_size)?;
    let mut adam = AdamState {
        m: params.zeros_like(),
        v: params.zeros_like(),
        t: 0,
    };
    let use_val = tc.select_on_validation && !data.val.is_empty();
    let mut best = (params.clone(), 0usize, f64::NEG_INFINITY, f64::INFINITY);
    if use_val {
        let m = evaluate(&params, &data.val)?;
        best.2 = score_of(&m);
        best.3 = m.loss;
    }
    let mut history = Vec::new();
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut shuffle_rng = stream_rng(tc.seed, 10);
    for epoch in 1..=tc.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(tc.batch_size) {
            let results = batch
                .par_iter()
                .map(|&i| {
                    let mut rng: ChaCha8Rng = stream_rng(tc.seed ^ ((epoch as u64) << 32), 1000 + i as u64);
                    loss_and_gradients(&params, &data.train.instances[i], data.train.labels[i], Some(&mut rng))
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| match e {
                    Error::NonFinite(_) => Error::Diverged {
                        epoch,
                        config: config_echo(config, tc),
                    },
                    other => other,
                })?;
            let mut grads = params.zeros_like();
            for (loss, _, g) in &results {
                loss_sum += loss;
                for (acc, x) in grads.iter_mut().zip(g) {
                    acc.add_assign(x);
                }
            }
            let inv = 1.0 / batch.len() as f64;
            grads.iter_mut().for_each(|g| g.scale(inv));
            apply_update(&mut params, &grads, tc, &mut adam);
        }
        let train_loss = loss_sum / data.train.len() as f64;
        if !train_loss.is_finite() || params.tensors.iter().any(|t| !t.is_finite()) {
            return Err(Error::Diverged {
                epoch,
                config: config_echo(config, tc),
            });
        }
        let val = if use_val { Some(evaluate(&params, &data.val)?) } else { None };
        match &val {
            Some(m) => {
                let s = score_of(m);
                if s > best.2 || (s == best.2 && m.loss < best.3) {
                    best = (params.clone(), epoch, s, m.loss);
                }
            }
            None => best = (params.clone(), epoch, f64::NAN, train_loss),
        }
        history.push(EpochRecord { epoch, train_loss, val });
        if history.len() > tc.patience {
            let past = history[history.len() - 1 - tc.patience].train_loss;
            let recent = history[history.len() - tc.patience..]
                .iter()
                .map(|r| r.train_loss)
                .fold(f64::INFINITY, f64::min);
            if (past - recent) < tc.min_rel_improvement * past.abs() {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        params: best.0,
        best_epoch: best.1,
        history,
    })
}
