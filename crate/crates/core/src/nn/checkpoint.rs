//! Text checkpoints. Weights are written as the hex of their IEEE-754 bits,
//! so a save/load cycle reproduces every value exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::config::ModelConfig;
use super::matrix::Matrix;
use super::model::{ModelParams, Task};
use crate::error::{Error, Result};

const MAGIC: &str = "destruct-checkpoint 1";

pub fn encode_checkpoint(p: &ModelParams) -> String {
    let mut out = format!("{MAGIC}\n");
    for (k, v) in p.config.to_key_values() {
        let _ = writeln!(out, "{k}={v}");
    }
    let task = match p.task {
        Task::Binary => "binary".to_string(),
        Task::Multiclass(c) => format!("multiclass:{c}"),
    };
    let _ = writeln!(out, "task={task}");
    let _ = writeln!(out, "in_dim={}", p.in_dim);
    let _ = writeln!(out, "tuple_size={}", p.tuple_size);
    let _ = writeln!(out, "tensors={}", p.tensors.len());
    for t in &p.tensors {
        let _ = writeln!(out, "tensor {} {}", t.rows(), t.cols());
        for r in 0..t.rows() {
            let row: Vec<String> = t.row(r).iter().map(|x| format!("{:016x}", x.to_bits())).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

pub fn decode_checkpoint(text: &str) -> Result<ModelParams> {
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(bad("missing header"));
    }
    let mut header = BTreeMap::new();
    let count: usize = loop {
        let line = lines.next().ok_or_else(|| bad("truncated header"))?;
        let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("bad line {line:?}")))?;
        if k == "tensors" {
            break v.parse().map_err(|_| bad("bad tensor count"))?;
        }
        header.insert(k.to_string(), v.to_string());
    };
    let mut config = ModelConfig::default();
    config.apply_key_values(&header)?;
    let field = |k: &str| header.get(k).ok_or_else(|| bad(format!("missing {k}")));
    let task = match field("task")?.as_str() {
        "binary" => Task::Binary,
        other => Task::Multiclass(
            other
                .strip_prefix("multiclass:")
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| bad(format!("bad task {other:?}")))?,
        ),
    };
    let in_dim = field("in_dim")?.parse().map_err(|_| bad("bad in_dim"))?;
    let tuple_size = field("tuple_size")?.parse().map_err(|_| bad("bad tuple_size"))?;
    let mut tensors = Vec::with_capacity(count);
    for _ in 0..count {
        let line = lines.next().ok_or_else(|| bad("truncated tensors"))?;
        let dims: Vec<usize> = line
            .strip_prefix("tensor ")
            .ok_or_else(|| bad(format!("expected tensor line, got {line:?}")))?
            .split_whitespace()
            .map(|d| d.parse().map_err(|_| bad("bad tensor shape")))
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(bad("bad tensor shape"));
        };
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let line = lines.next().ok_or_else(|| bad("truncated tensor"))?;
            for tok in line.split_whitespace() {
                let bits = u64::from_str_radix(tok, 16).map_err(|_| bad(format!("bad value {tok:?}")))?;
                data.push(f64::from_bits(bits));
            }
        }
        tensors.push(Matrix::from_vec(rows, cols, data)?);
    }
    let p = ModelParams {
        config,
        task,
        in_dim,
        tuple_size,
        tensors,
    };
    p.check_shapes()?;
    Ok(p)
}

pub fn save_checkpoint(p: &ModelParams, path: &Path) -> Result<()> {
    fs::write(path, encode_checkpoint(p))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams> {
    decode_checkpoint(&fs::read_to_string(path)?)
}
