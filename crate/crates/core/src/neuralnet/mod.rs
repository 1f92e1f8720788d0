//! Fully connected feedforward classifier with batch normalization,
//! trained by backpropagation and Adam.
//!
//! Layer order for the default architecture:
//!
//! ```text
//! BN(12) -> Dense(12,256) -> ReLU -> BN(256) -> Dense(256,128) -> ReLU -> BN(128) -> Dense(128,3) -> softmax
//! ```

mod adam;
mod arch;
mod layers;
mod loss;
mod network;
mod persist;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use arch::{ModelArchitecture, ParamCounts, ACTIVATION, OUTPUT_ACTIVATION};
pub use layers::{BatchNorm, Dense, Layer};
pub use loss::{cross_entropy, PROB_FLOOR};
pub use network::{Gradients, LayerGradient, Mode, Network, Prediction};
pub use persist::{load_model, model_from_json, model_to_json, save_model, LoadError, FORMAT_VERSION};
pub use train::{train, EpochRecord, TrainConfig, TrainHistory};
