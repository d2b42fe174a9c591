//! Multi-branch surrogate for the quadratic bending coefficient.

pub mod dataset;
pub mod network;
pub mod normalizer;
pub mod train;

pub use dataset::{
    build_dataset, load_dataset_csv, read_dataset_csv, save_dataset_csv, split_holdout, write_dataset_csv, BendSample,
    DatasetReport, SampleSettings, DATASET_HEADER, N_INPUTS,
};
pub use network::{Activation, Architecture, Dense, SurrogateModel, MODEL_FORMAT_VERSION};
pub use normalizer::Normalizer;
pub use train::{evaluate, CoefficientUnits, Predictor, TrainOptions, TrainReport};
