//! Camera-model attribution from MP4 container structure and H.264 parameter sets.
pub mod bmff;
pub mod classifier;
pub mod features;
pub mod h264;
pub mod metaclass;
pub mod pipeline;
pub mod synth;
pub mod tree;
mod scalar;

pub use scalar::Scalar;

pub type FeatureVector = features::FeatureVector<f64>;
pub type DecisionTree = classifier::DecisionTree<f64>;
pub type Predictor = classifier::Predictor<f64>;
pub type FlatModel = classifier::FlatModel<f64>;
pub type HierarchicalModel = classifier::HierarchicalModel<f64>;
pub type Model = classifier::Model<f64>;
pub type ModelFile = classifier::ModelFile<f64>;
