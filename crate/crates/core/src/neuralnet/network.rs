use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::adam::AdamState;
use super::arch::{ModelArchitecture, ParamCounts};
use super::layers::{BatchNorm, BatchNormCache, Dense, Layer};
use super::loss::cross_entropy;
use crate::dsp::FeatureVector;
use crate::error::{param, shape, Error, Result};
use crate::signals::StateLabel;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics in batch-norm layers; running averages are updated.
    Train,
    /// Running averages only; nothing is mutated.
    Infer,
}

enum Cache<T> {
    Dense { input: Array2<T> },
    Relu { output: Array2<T> },
    BatchNorm(BatchNormCache<T>),
}

/// Gradient for one layer, mirroring [`Layer`].
#[derive(Debug, Clone, PartialEq)]
pub enum LayerGradient<T> {
    Dense { weights: Array2<T>, bias: Array1<T> },
    BatchNorm { gamma: Array1<T>, beta: Array1<T> },
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<LayerGradient<T>>,
}

impl<T: Scalar> Gradients<T> {
    /// Flat views in the same order as [`Network::trainable_params_mut`].
    pub fn groups(&self) -> Vec<&[T]> {
        let mut out = Vec::new();
        for g in &self.layers {
            match g {
                LayerGradient::Dense { weights, bias } => {
                    out.push(weights.as_slice().expect("standard layout"));
                    out.push(bias.as_slice().expect("standard layout"));
                }
                LayerGradient::BatchNorm { gamma, beta } => {
                    out.push(gamma.as_slice().expect("standard layout"));
                    out.push(beta.as_slice().expect("standard layout"));
                }
                LayerGradient::None => {}
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    pub label: StateLabel,
    pub probs: [T; 3],
}

/// Layered classifier; the softmax output is implicit after the last layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    arch: ModelArchitecture,
    layers: Vec<Layer<T>>,
}

fn softmax_rows<T: Scalar>(mut logits: Array2<T>) -> Array2<T> {
    for mut row in logits.rows_mut() {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum: T = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    logits
}

fn argmax<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

impl<T: Scalar> Network<T> {
    /// Builds the layer stack with Glorot-uniform weights, zero biases and
    /// identity batch normalisation.
    pub fn new(arch: ModelArchitecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps = T::lit(arch.bn_epsilon);
        let momentum = T::lit(arch.bn_momentum);
        let mut layers = Vec::new();
        if arch.batchnorm_input {
            layers.push(Layer::BatchNorm(BatchNorm::new(arch.input_dim, eps, momentum)));
        }
        let shapes = arch.dense_shapes();
        let last = shapes.len() - 1;
        for (i, &(inputs, outputs)) in shapes.iter().enumerate() {
            let limit = (6.0 / (inputs + outputs) as f64).sqrt();
            let mut dense = Dense::zeros(inputs, outputs);
            dense.weights.mapv_inplace(|_| T::lit(rng.random_range(-limit..limit)));
            layers.push(Layer::Dense(dense));
            if i < last {
                layers.push(Layer::Relu);
                if arch.batchnorm_hidden {
                    layers.push(Layer::BatchNorm(BatchNorm::new(outputs, eps, momentum)));
                }
            }
        }
        Ok(Self { arch, layers })
    }

    /// Assembles a network from explicit layers, checking them against the
    /// architecture.
    pub fn from_layers(arch: ModelArchitecture, layers: Vec<Layer<T>>) -> Result<Self> {
        arch.validate()?;
        let template = Self::new(arch.clone(), 0)?;
        if template.layers.len() != layers.len() {
            return Err(shape(format!("expected {} layers, got {}", template.layers.len(), layers.len())));
        }
        for (i, (want, got)) in template.layers.iter().zip(&layers).enumerate() {
            let ok = match (want, got) {
                (Layer::Relu, Layer::Relu) => true,
                (Layer::Dense(a), Layer::Dense(b)) => {
                    a.weights.dim() == b.weights.dim() && a.bias.len() == b.bias.len()
                }
                (Layer::BatchNorm(a), Layer::BatchNorm(b)) => {
                    let w = a.width();
                    [b.gamma.len(), b.beta.len(), b.moving_mean.len(), b.moving_var.len()].iter().all(|&n| n == w)
                }
                _ => false,
            };
            if !ok {
                return Err(shape(format!("layer {i} does not match the architecture")));
            }
        }
        Ok(Self { arch, layers })
    }

    pub fn architecture(&self) -> &ModelArchitecture {
        &self.arch
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    /// Counts the parameters actually held by the layers.
    pub fn param_counts(&self) -> ParamCounts {
        let (mut trainable, mut fixed) = (0, 0);
        for layer in &self.layers {
            match layer {
                Layer::Dense(d) => trainable += d.weights.len() + d.bias.len(),
                Layer::BatchNorm(b) => {
                    trainable += b.gamma.len() + b.beta.len();
                    fixed += b.moving_mean.len() + b.moving_var.len();
                }
                Layer::Relu => {}
            }
        }
        ParamCounts { total: trainable + fixed, trainable, non_trainable: fixed }
    }

    fn check_batch(&self, x: &ArrayView2<T>, mode: Mode) -> Result<()> {
        if x.ncols() != self.arch.input_dim {
            return Err(shape(format!(
                "batch width {} does not match input dimension {}",
                x.ncols(),
                self.arch.input_dim
            )));
        }
        if x.nrows() == 0 {
            return Err(shape("empty batch"));
        }
        if mode == Mode::Train && x.nrows() < 2 {
            return Err(param("training-mode batches need at least two rows"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite input".into()));
        }
        Ok(())
    }

    fn run(&self, x: ArrayView2<T>, mode: Mode) -> Result<(Array2<T>, Vec<Cache<T>>)> {
        self.check_batch(&x, mode)?;
        let keep = mode == Mode::Train;
        let mut caches = Vec::with_capacity(if keep { self.layers.len() } else { 0 });
        let mut h = x.to_owned();
        for layer in &self.layers {
            h = match layer {
                Layer::Dense(d) => {
                    let out = d.forward(h.view());
                    if keep {
                        caches.push(Cache::Dense { input: h });
                    }
                    out
                }
                Layer::Relu => {
                    h.mapv_inplace(|v| v.max(T::zero()));
                    if keep {
                        caches.push(Cache::Relu { output: h.clone() });
                    }
                    h
                }
                Layer::BatchNorm(bn) => match mode {
                    Mode::Train => {
                        let (out, cache) = bn.forward_train(h.view());
                        caches.push(Cache::BatchNorm(cache));
                        out
                    }
                    Mode::Infer => bn.forward_infer(h.view()),
                },
            };
        }
        Ok((softmax_rows(h), caches))
    }

    /// Class probabilities for a batch. Train mode also advances the
    /// batch-norm running statistics.
    pub fn forward(&mut self, batch: ArrayView2<T>, mode: Mode) -> Result<Array2<T>> {
        let (probs, caches) = self.run(batch, mode)?;
        if mode == Mode::Train {
            self.apply_batch_stats(&caches);
        }
        Ok(probs)
    }

    /// Inference-mode forward pass; never mutates the model.
    pub fn infer(&self, batch: ArrayView2<T>) -> Result<Array2<T>> {
        Ok(self.run(batch, Mode::Infer)?.0)
    }

    fn apply_batch_stats(&mut self, caches: &[Cache<T>]) {
        for (layer, cache) in self.layers.iter_mut().zip(caches) {
            if let (Layer::BatchNorm(bn), Cache::BatchNorm(c)) = (layer, cache) {
                bn.update_moving(&c.mean, &c.var);
            }
        }
    }

    fn backprop(&self, caches: &[Cache<T>], probs: &Array2<T>, targets: ArrayView2<T>) -> Gradients<T> {
        let b = T::from_count(probs.nrows());
        // softmax + cross-entropy: dL/dlogits = (q - p) / B
        let mut delta = (probs - &targets) / b;
        let mut grads: Vec<LayerGradient<T>> = Vec::with_capacity(self.layers.len());
        for (i, (layer, cache)) in self.layers.iter().zip(caches).enumerate().rev() {
            let need_input_grad = i > 0;
            match (layer, cache) {
                (Layer::Dense(d), Cache::Dense { input }) => {
                    let weights = delta.t().dot(input);
                    let bias = delta.sum_axis(Axis(0));
                    if need_input_grad {
                        delta = delta.dot(&d.weights);
                    }
                    grads.push(LayerGradient::Dense { weights, bias });
                }
                (Layer::Relu, Cache::Relu { output }) => {
                    delta.zip_mut_with(output, |g, &o| {
                        if o <= T::zero() {
                            *g = T::zero();
                        }
                    });
                    grads.push(LayerGradient::None);
                }
                (Layer::BatchNorm(bn), Cache::BatchNorm(c)) => {
                    let (gamma, beta, dx) = bn.backward(c, &delta);
                    delta = dx;
                    grads.push(LayerGradient::BatchNorm { gamma, beta });
                }
                _ => unreachable!("cache kinds follow layer kinds"),
            }
        }
        grads.reverse();
        Gradients { layers: grads }
    }

    fn check_targets(&self, batch: &ArrayView2<T>, targets: &ArrayView2<T>) -> Result<()> {
        if targets.dim() != (batch.nrows(), self.arch.output_dim) {
            return Err(shape(format!(
                "targets {:?} do not match batch of {} rows x {} classes",
                targets.dim(),
                batch.nrows(),
                self.arch.output_dim
            )));
        }
        Ok(())
    }

    /// Mean cross-entropy and its gradient for every trainable parameter,
    /// evaluated in train mode without touching the running statistics.
    pub fn backward(&self, batch: ArrayView2<T>, targets: ArrayView2<T>) -> Result<(T, Gradients<T>)> {
        self.check_targets(&batch, &targets)?;
        let (probs, caches) = self.run(batch, Mode::Train)?;
        let loss = cross_entropy(probs.view(), targets)?;
        Ok((loss, self.backprop(&caches, &probs, targets)))
    }

    /// Train-mode loss without side effects, for gradient checking.
    pub fn train_loss(&self, batch: ArrayView2<T>, targets: ArrayView2<T>) -> Result<T> {
        self.check_targets(&batch, &targets)?;
        let (probs, _) = self.run(batch, Mode::Train)?;
        cross_entropy(probs.view(), targets)
    }

    /// One optimisation step: forward (train), backward, running-statistics
    /// update and an Adam step. Returns the batch loss.
    pub fn train_step(&mut self, batch: ArrayView2<T>, targets: ArrayView2<T>, adam: &mut AdamState<T>) -> Result<T> {
        self.check_targets(&batch, &targets)?;
        let (probs, caches) = self.run(batch, Mode::Train)?;
        let loss = cross_entropy(probs.view(), targets)?;
        let grads = self.backprop(&caches, &probs, targets);
        self.apply_batch_stats(&caches);
        let grad_groups = grads.groups();
        let mut params = self.trainable_params_mut();
        adam.step(&mut params, &grad_groups)?;
        Ok(loss)
    }

    /// Mutable flat views of the trainable parameters: per layer, dense
    /// weights then bias, or batch-norm gamma then beta.
    pub fn trainable_params_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Dense(d) => {
                    out.push(d.weights.as_slice_mut().expect("standard layout"));
                    out.push(d.bias.as_slice_mut().expect("standard layout"));
                }
                Layer::BatchNorm(b) => {
                    out.push(b.gamma.as_slice_mut().expect("standard layout"));
                    out.push(b.beta.as_slice_mut().expect("standard layout"));
                }
                Layer::Relu => {}
            }
        }
        out
    }

    /// Names matching [`Self::trainable_params_mut`], e.g. `dense1.weights`.
    pub fn trainable_group_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            match layer {
                Layer::Dense(_) => {
                    out.push(format!("dense{i}.weights"));
                    out.push(format!("dense{i}.bias"));
                }
                Layer::BatchNorm(_) => {
                    out.push(format!("batchnorm{i}.gamma"));
                    out.push(format!("batchnorm{i}.beta"));
                }
                Layer::Relu => {}
            }
        }
        out
    }

    /// Class probabilities for one input vector.
    pub fn predict_probs(&self, features: &[T]) -> Result<Vec<T>> {
        let x = ArrayView2::from_shape((1, features.len()), features).map_err(|e| shape(e.to_string()))?;
        Ok(self.infer(x)?.row(0).to_vec())
    }

    /// Most probable state; ties go to the lowest class index.
    pub fn predict(&self, features: &FeatureVector<T>) -> Result<Prediction<T>> {
        if self.arch.output_dim != StateLabel::COUNT {
            return Err(shape(format!("model has {} outputs, expected {}", self.arch.output_dim, StateLabel::COUNT)));
        }
        let p = self.predict_probs(features.components())?;
        let label = StateLabel::from_index(argmax(&p)).expect("three classes");
        Ok(Prediction { label, probs: [p[0], p[1], p[2]] })
    }

    /// Predicted class index for each row of a batch, inference mode.
    pub fn classify_batch(&self, batch: ArrayView2<T>) -> Result<Vec<usize>> {
        let probs = self.infer(batch)?;
        Ok(probs.rows().into_iter().map(|r| argmax(r.as_slice().expect("standard layout"))).collect())
    }
}
