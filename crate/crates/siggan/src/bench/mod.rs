//! Prediction benchmark: feature extraction, roughness predictors, and the
//! augmentation sweep that measures how generated data shifts test error.

pub mod features;
pub mod predictor;
pub mod sweep;

pub use features::{extract_features, FeatureVector, FEATURE_DIM};
pub use predictor::{
    evaluate_mape, mape, predict, train_predictor, NeuralNet, Predictor, PredictorConfig,
    PredictorKind, RidgeModel,
};
pub use sweep::{augment_dataset, run_sweep, SweepConfig, SweepReport, SweepRow};
