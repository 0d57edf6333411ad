//! Dataset manifests, architecture files, dataset builders and evaluation
//! shared by the command-line tools.

mod arch;
mod data;
mod eval;
mod manifest;

pub use arch::ArchConfig;
pub use data::{
    default_loss, load_split, rul_dataset, rul_units, rul_windows, run_features, scaleogram_health_tensors,
    scaleogram_image, scaleogram_sample, sensor_standardization, signal_images, standardize_layer, LoadedSplit,
    SeriesTransform, TransformOrder, IMAGE_SIDE, SCALEOGRAM_SIDE,
};
pub use eval::{
    classify, evaluate_classifier, evaluate_regression, predict_rul, ClassificationReport, RegressionReport, RulTrace,
};
pub use manifest::{DatasetManifest, RulSettings, SampleEntry, Split, SplitFractions, TaskKind};
