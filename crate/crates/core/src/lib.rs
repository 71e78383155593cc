//! Multi-label classification toolkit: the eleven standard performance
//! measures, label-wise/instance-wise margins with their effectiveness
//! predicates, a max-margin stochastic subgradient trainer for linear
//! models (LIMO), threshold calibration, and a replicated experiment
//! harness with deterministic seeding throughout.

pub mod data;
pub mod error;
pub mod experiment;
pub mod io;
pub mod margins;
pub mod measures;
pub mod rng;
pub mod thresholds;
pub mod trainer;

pub use data::{quadrant_labels, split, synth_quadrant, Dataset, FeatureMatrix, LabelMatrix, SplitSpec};
pub use error::{Error, Result};
pub use measures::{Direction, Measure, MeasureReport, PredictionMatrix, ScoreMatrix};
pub use trainer::{LinearModel, SavedModel, TrainConfig};
