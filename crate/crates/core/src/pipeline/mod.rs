//! Experiment orchestration: ego-networks, datasets, training, metrics and
//! the expressiveness experiments.

pub mod dataset;
pub mod ego;
pub mod experiments;
pub mod metrics;
pub mod results;
pub mod train;

pub use dataset::{
    build_task_dataset, planted_triangle_dataset, Split, SplitFractions, TaskDataset, TaskInstance, TaskKind,
};
pub use ego::{ego_instance, extract_ego, full_graph_instance, masked_with_degrees, EgoNetwork};
pub use experiments::{
    automorphism_maps, drg_experiment, fig2a_experiment, layer_boundary, train_over_seeds, DrgReport, Fig2aConfig,
    Fig2aRow,
};
pub use metrics::{auc, mean_ci95, Metrics};
pub use results::{config_hash, fmt_num, format_results, ResultRow};
pub use train::{evaluate, prepare, train, Optimizer, Prepared, TrainConfig, TrainOutcome};
