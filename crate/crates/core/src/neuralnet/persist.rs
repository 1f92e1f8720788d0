//! Versioned JSON model files.
//!
//! Floats are written in shortest round-trip form and parsed with exact
//! rounding, so a saved model reloads bit-for-bit.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::arch::{ModelArchitecture, ACTIVATION, OUTPUT_ACTIVATION};
use super::layers::{BatchNorm, Dense, Layer};
use super::network::Network;
use crate::error::Result;
use crate::Scalar;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("unsupported model format version {found} (expected {FORMAT_VERSION})")]
    Version { found: u64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parameter count {declared} does not match the architecture ({expected})")]
    ParamCount { declared: usize, expected: usize },
    #[error("malformed model file: {0}")]
    Malformed(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct ArchitectureHeader {
    input_dim: usize,
    hidden: Vec<usize>,
    output_dim: usize,
    activation: String,
    output_activation: String,
    batchnorm_positions: Vec<String>,
    epsilon: f64,
    momentum: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LayerDocument<T> {
    BatchNorm { width: usize, gamma: Vec<T>, beta: Vec<T>, moving_mean: Vec<T>, moving_var: Vec<T> },
    Dense { inputs: usize, outputs: usize, weights: Vec<T>, bias: Vec<T> },
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument<T> {
    format_version: u32,
    architecture: ArchitectureHeader,
    layers: Vec<LayerDocument<T>>,
    parameter_count: usize,
}

fn to_document<T: Scalar>(model: &Network<T>) -> ModelDocument<T> {
    let arch = model.architecture();
    let layers = model
        .layers()
        .iter()
        .filter_map(|layer| match layer {
            Layer::Dense(d) => Some(LayerDocument::Dense {
                inputs: d.inputs(),
                outputs: d.outputs(),
                weights: d.weights.iter().copied().collect(),
                bias: d.bias.to_vec(),
            }),
            Layer::BatchNorm(b) => Some(LayerDocument::BatchNorm {
                width: b.width(),
                gamma: b.gamma.to_vec(),
                beta: b.beta.to_vec(),
                moving_mean: b.moving_mean.to_vec(),
                moving_var: b.moving_var.to_vec(),
            }),
            Layer::Relu => None,
        })
        .collect();
    ModelDocument {
        format_version: FORMAT_VERSION,
        architecture: ArchitectureHeader {
            input_dim: arch.input_dim,
            hidden: arch.hidden.clone(),
            output_dim: arch.output_dim,
            activation: ACTIVATION.into(),
            output_activation: OUTPUT_ACTIVATION.into(),
            batchnorm_positions: arch.batchnorm_positions(),
            epsilon: arch.bn_epsilon,
            momentum: arch.bn_momentum,
        },
        layers,
        parameter_count: model.param_counts().total,
    }
}

pub fn model_to_json<T: Scalar>(model: &Network<T>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_document(model))?)
}

fn dim_err(msg: String) -> LoadError {
    LoadError::Dimension(msg)
}

fn vector<T: Scalar>(
    values: Vec<T>,
    len: usize,
    what: &str,
    layer: usize,
) -> std::result::Result<Array1<T>, LoadError> {
    if values.len() != len {
        return Err(dim_err(format!("layer {layer} {what}: expected {len} values, found {}", values.len())));
    }
    Ok(Array1::from(values))
}

fn from_document<T: Scalar>(doc: ModelDocument<T>) -> std::result::Result<Network<T>, LoadError> {
    let h = doc.architecture;
    if h.activation != ACTIVATION || h.output_activation != OUTPUT_ACTIVATION {
        return Err(LoadError::Malformed(format!(
            "unsupported activations {:?}/{:?}",
            h.activation, h.output_activation
        )));
    }
    let mut batchnorm_input = false;
    let mut batchnorm_hidden = false;
    for p in &h.batchnorm_positions {
        match p.as_str() {
            "input" => batchnorm_input = true,
            "hidden" => batchnorm_hidden = true,
            other => return Err(LoadError::Malformed(format!("unknown batch-norm position {other:?}"))),
        }
    }
    let arch = ModelArchitecture {
        input_dim: h.input_dim,
        hidden: h.hidden,
        output_dim: h.output_dim,
        batchnorm_input,
        batchnorm_hidden,
        bn_epsilon: h.epsilon,
        bn_momentum: h.momentum,
    };
    arch.validate().map_err(|e| LoadError::Malformed(e.to_string()))?;
    let expected = arch.param_counts().total;
    if doc.parameter_count != expected {
        return Err(LoadError::ParamCount { declared: doc.parameter_count, expected });
    }

    let template = Network::<T>::new(arch.clone(), 0).map_err(|e| LoadError::Malformed(e.to_string()))?;
    let mut docs = doc.layers.into_iter();
    let mut layers = Vec::with_capacity(template.layers().len());
    for (i, want) in template.layers().iter().enumerate() {
        let layer = match want {
            Layer::Relu => Layer::Relu,
            Layer::Dense(t) => match docs.next() {
                Some(LayerDocument::Dense { inputs, outputs, weights, bias }) => {
                    if (inputs, outputs) != (t.inputs(), t.outputs()) {
                        return Err(dim_err(format!(
                            "layer {i}: dense {inputs}->{outputs}, architecture needs {}->{}",
                            t.inputs(),
                            t.outputs()
                        )));
                    }
                    if weights.len() != inputs * outputs {
                        return Err(dim_err(format!(
                            "layer {i} weights: expected {} values, found {}",
                            inputs * outputs,
                            weights.len()
                        )));
                    }
                    let weights =
                        Array2::from_shape_vec((outputs, inputs), weights).map_err(|e| dim_err(e.to_string()))?;
                    Layer::Dense(Dense { weights, bias: vector(bias, outputs, "bias", i)? })
                }
                _ => return Err(dim_err(format!("layer {i}: expected a dense layer"))),
            },
            Layer::BatchNorm(t) => match docs.next() {
                Some(LayerDocument::BatchNorm { width, gamma, beta, moving_mean, moving_var }) => {
                    if width != t.width() {
                        return Err(dim_err(format!(
                            "layer {i}: batch norm width {width}, architecture needs {}",
                            t.width()
                        )));
                    }
                    Layer::BatchNorm(BatchNorm {
                        gamma: vector(gamma, width, "gamma", i)?,
                        beta: vector(beta, width, "beta", i)?,
                        moving_mean: vector(moving_mean, width, "moving_mean", i)?,
                        moving_var: vector(moving_var, width, "moving_var", i)?,
                        epsilon: T::lit(arch.bn_epsilon),
                        momentum: T::lit(arch.bn_momentum),
                    })
                }
                _ => return Err(dim_err(format!("layer {i}: expected a batch-norm layer"))),
            },
        };
        layers.push(layer);
    }
    if docs.next().is_some() {
        return Err(dim_err("more layers than the architecture declares".into()));
    }
    let net = Network::from_layers(arch, layers).map_err(|e| dim_err(e.to_string()))?;
    let finite = net.layers().iter().all(|l| match l {
        Layer::Dense(d) => d.weights.iter().chain(d.bias.iter()).all(|v| v.is_finite()),
        Layer::BatchNorm(b) => {
            let all = b.gamma.iter().chain(&b.beta).chain(&b.moving_mean).chain(&b.moving_var);
            all.clone().all(|v| v.is_finite()) && b.moving_var.iter().all(|&v| v >= T::zero())
        }
        Layer::Relu => true,
    });
    if !finite {
        return Err(LoadError::Malformed("parameters must be finite with non-negative moving variance".into()));
    }
    Ok(net)
}

pub fn model_from_json<T: Scalar>(text: &str) -> std::result::Result<Network<T>, LoadError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| LoadError::Malformed(e.to_string()))?;
    match value.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(found) => return Err(LoadError::Version { found }),
        None => return Err(LoadError::Malformed("missing format_version".into())),
    }
    let doc: ModelDocument<T> = serde_json::from_str(text).map_err(|e| LoadError::Malformed(e.to_string()))?;
    from_document(doc)
}

pub fn save_model<T: Scalar>(model: &Network<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut text = model_to_json(model)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<Network<T>> {
    let text = fs::read_to_string(path)?;
    Ok(model_from_json(&text)?)
}
