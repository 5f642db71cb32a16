//! Experiment harness: augmentation, stratified folds, training and reports.

mod augment;
mod config;
mod folds;
mod report;
mod train;

pub use augment::{augment_dataset, augmented_image, profile_depth};
pub use config::{ExperimentConfig, Precision};
pub use folds::{stratified_folds, Fold};
pub use report::{CvReport, FoldReport, Summary, SCHEMA_VERSION};
pub use train::{
    load_graphs, load_prepared, prepare, prepare_graphs, run_cv, run_cv_observed, run_cv_prepared, save_prepared, sidecar_path,
    PrepareInfo, PreparedData, Progress,
};
