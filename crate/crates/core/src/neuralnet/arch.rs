use serde::{Deserialize, Serialize};

use crate::dsp::FEATURE_DIM;
use crate::error::{param, Result};

pub const ACTIVATION: &str = "relu";
pub const OUTPUT_ACTIVATION: &str = "softmax";

/// Layer sizes and batch-normalization placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArchitecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    /// Normalise the raw input.
    pub batchnorm_input: bool,
    /// Normalise after each hidden activation.
    pub batchnorm_hidden: bool,
    pub bn_epsilon: f64,
    pub bn_momentum: f64,
}

impl Default for ModelArchitecture {
    fn default() -> Self {
        Self {
            input_dim: FEATURE_DIM,
            hidden: vec![256, 128],
            output_dim: 3,
            batchnorm_input: true,
            batchnorm_hidden: true,
            bn_epsilon: 1e-3,
            bn_momentum: 0.99,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ParamCounts {
    pub total: usize,
    pub trainable: usize,
    pub non_trainable: usize,
}

impl ModelArchitecture {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.contains(&0) {
            return Err(param("layer widths must be positive"));
        }
        if !(self.bn_epsilon > 0.0) || !(0.0..1.0).contains(&self.bn_momentum) {
            return Err(param("batch-norm epsilon must be positive and momentum in [0, 1)"));
        }
        Ok(())
    }

    /// (inputs, outputs) of each dense layer.
    pub fn dense_shapes(&self) -> Vec<(usize, usize)> {
        let mut widths = vec![self.input_dim];
        widths.extend(&self.hidden);
        widths.push(self.output_dim);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn batchnorm_widths(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if self.batchnorm_input {
            out.push(self.input_dim);
        }
        if self.batchnorm_hidden {
            out.extend(&self.hidden);
        }
        out
    }

    /// Closed-form parameter accounting. Each batch-norm layer holds two
    /// trainable (gamma, beta) and two non-trainable (moving mean, moving
    /// variance) values per feature.
    pub fn param_counts(&self) -> ParamCounts {
        let dense: usize = self.dense_shapes().iter().map(|(i, o)| i * o + o).sum();
        let bn: usize = self.batchnorm_widths().iter().sum();
        ParamCounts { total: dense + 4 * bn, trainable: dense + 2 * bn, non_trainable: 2 * bn }
    }

    /// Names of the batch-norm positions, as recorded in model files.
    pub fn batchnorm_positions(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.batchnorm_input {
            out.push("input".to_string());
        }
        if self.batchnorm_hidden {
            out.push("hidden".to_string());
        }
        out
    }
}
