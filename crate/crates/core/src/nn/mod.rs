//! Dense neural machinery and the model families.

pub mod checkpoint;
pub mod config;
pub mod matrix;
pub mod model;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint};
pub use config::{Aggregation, ModelConfig, ModelKind, Readout};
pub use matrix::Matrix;
pub use model::{
    backward, deagnn_pr_layer, deagnn_spd_layer, degnn_forward, difference_pool, forward,
    input_features, loss_and_gradients, predict, predict_and_loss, propagation,
    untrained_distinguish, untrained_max_diff, wlgnn_forward, ForwardPass, HeadOutput, Instance,
    ModelParams, Operator, Rings, Task, DIGITAL_TOLERANCE,
};

/// Parameter draws used when comparing untrained models.
pub const DEFAULT_TRIALS: usize = 3;
