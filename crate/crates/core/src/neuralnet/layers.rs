use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::Scalar;

/// Affine layer `y = x W^T + b`; weights are stored `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub weights: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { weights: Array2::zeros((outputs, inputs)), bias: Array1::zeros(outputs) }
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    pub(crate) fn forward(&self, x: ArrayView2<T>) -> Array2<T> {
        x.dot(&self.weights.t()) + &self.bias
    }
}

/// Per-feature normalisation with trainable scale and shift and running
/// statistics for inference.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm<T> {
    pub gamma: Array1<T>,
    pub beta: Array1<T>,
    pub moving_mean: Array1<T>,
    pub moving_var: Array1<T>,
    pub epsilon: T,
    pub momentum: T,
}

pub(crate) struct BatchNormCache<T> {
    pub x_hat: Array2<T>,
    pub inv_std: Array1<T>,
    pub mean: Array1<T>,
    pub var: Array1<T>,
}

impl<T: Scalar> BatchNorm<T> {
    pub fn new(width: usize, epsilon: T, momentum: T) -> Self {
        Self {
            gamma: Array1::ones(width),
            beta: Array1::zeros(width),
            moving_mean: Array1::zeros(width),
            moving_var: Array1::ones(width),
            epsilon,
            momentum,
        }
    }

    pub fn width(&self) -> usize {
        self.gamma.len()
    }

    /// Normalises with the batch mean and biased batch variance.
    pub(crate) fn forward_train(&self, x: ArrayView2<T>) -> (Array2<T>, BatchNormCache<T>) {
        let b = T::from_count(x.nrows());
        let mean = x.sum_axis(Axis(0)) / b;
        let centred = &x - &mean;
        let var = centred.mapv(|v| v * v).sum_axis(Axis(0)) / b;
        let inv_std = var.mapv(|v| (v + self.epsilon).sqrt().recip());
        let x_hat = centred * &inv_std;
        let y = &x_hat * &self.gamma + &self.beta;
        (y, BatchNormCache { x_hat, inv_std, mean, var })
    }

    pub(crate) fn forward_infer(&self, x: ArrayView2<T>) -> Array2<T> {
        let inv_std = self.moving_var.mapv(|v| (v + self.epsilon).sqrt().recip());
        (&x - &self.moving_mean) * &(inv_std * &self.gamma) + &self.beta
    }

    /// moving <- momentum * moving + (1 - momentum) * batch
    pub(crate) fn update_moving(&mut self, mean: &Array1<T>, var: &Array1<T>) {
        let m = self.momentum;
        let rest = T::one() - m;
        self.moving_mean.zip_mut_with(mean, |mv, &bv| *mv = m * *mv + rest * bv);
        self.moving_var.zip_mut_with(var, |mv, &bv| *mv = m * *mv + rest * bv);
    }

    /// Returns (d gamma, d beta, d input) given the upstream gradient.
    pub(crate) fn backward(&self, cache: &BatchNormCache<T>, dy: &Array2<T>) -> (Array1<T>, Array1<T>, Array2<T>) {
        let b = T::from_count(dy.nrows());
        let dgamma = (dy * &cache.x_hat).sum_axis(Axis(0));
        let dbeta = dy.sum_axis(Axis(0));
        let dx_hat = dy * &self.gamma;
        let sum_dx_hat = dx_hat.sum_axis(Axis(0));
        let sum_dx_hat_xhat = (&dx_hat * &cache.x_hat).sum_axis(Axis(0));
        let dx = (dx_hat * b - &sum_dx_hat - &cache.x_hat * &sum_dx_hat_xhat) * &(&cache.inv_std / b);
        (dgamma, dbeta, dx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer<T> {
    BatchNorm(BatchNorm<T>),
    Dense(Dense<T>),
    Relu,
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn train_mode_normalises_batch() {
        let bn = BatchNorm::<f64>::new(2, 1e-3, 0.99);
        let x = array![[1.0, 10.0], [2.0, 20.0], [3.0, 60.0], [6.0, -4.0]];
        let (_, cache) = bn.forward_train(x.view());
        for j in 0..2 {
            let col = cache.x_hat.column(j);
            let mean = col.sum() / 4.0;
            let var = col.mapv(|v| v * v).sum() / 4.0 - mean * mean;
            assert!(mean.abs() <= 1e-9);
            let expected = cache.var[j] / (cache.var[j] + 1e-3);
            assert!((var - expected).abs() <= 1e-6, "{var} vs {expected}");
        }
    }

    #[test]
    fn moving_update() {
        let mut bn = BatchNorm::<f64>::new(1, 1e-3, 0.99);
        bn.update_moving(&array![2.0], &array![3.0]);
        assert!((bn.moving_mean[0] - 0.02).abs() < 1e-15);
        assert!((bn.moving_var[0] - (0.99 + 0.03)).abs() < 1e-15);
    }
}
