use super::layers::{layer_seed, Layer, LayerSpec};
use super::loss::{loss_and_grad, LossKind};
use super::{Activation, Scalar, Tensor};
use crate::error::{Error, Result};
use crate::rng::Prng;

/// Ordered layer stack with a loss. The last layer is a linear dense layer
/// producing raw scores; the loss's output head turns them into predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    input_shape: Vec<usize>,
    layers: Vec<Layer<T>>,
    loss: LossKind,
}

impl<T: Scalar> Network<T> {
    /// Builds and initializes a network; layer `i` draws its weights from a
    /// stream derived from `seed` and `i`.
    pub fn build(input_shape: &[usize], specs: &[LayerSpec], loss: LossKind, seed: u64) -> Result<Self> {
        let mut layers = Vec::with_capacity(specs.len());
        let mut shape = input_shape.to_vec();
        for (i, spec) in specs.iter().enumerate() {
            let layer = Layer::build(spec, &shape, layer_seed(seed, i))?;
            shape = layer.output_shape(&shape)?;
            layers.push(layer);
        }
        Self::from_layers(input_shape, layers, loss)
    }

    pub fn from_layers(input_shape: &[usize], layers: Vec<Layer<T>>, loss: LossKind) -> Result<Self> {
        if input_shape.is_empty() || input_shape.contains(&0) {
            return Err(Error::ShapeMismatch(format!("invalid input shape {input_shape:?}")));
        }
        match layers.last() {
            Some(Layer::Dense(d)) if d.activation == Activation::Linear => {}
            _ => {
                return Err(Error::Config(
                    "the last layer must be a linear dense layer; the loss supplies the output activation".into(),
                ))
            }
        }
        let net = Self {
            input_shape: input_shape.to_vec(),
            layers,
            loss,
        };
        net.output_shape()?;
        Ok(net)
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn output_shape(&self) -> Result<Vec<usize>> {
        self.layers
            .iter()
            .try_fold(self.input_shape.clone(), |shape, l| l.output_shape(&shape))
    }

    pub fn outputs(&self) -> usize {
        self.output_shape().map(|s| s.iter().product()).unwrap_or(0)
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    pub fn loss(&self) -> LossKind {
        self.loss
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(Layer::spec).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().filter_map(Layer::params).map(|p| p.values.len()).sum()
    }

    pub fn parameters(&self) -> Vec<T> {
        self.layers
            .iter()
            .filter_map(Layer::params)
            .flat_map(|p| p.values.iter().copied())
            .collect()
    }

    pub fn gradients(&self) -> Vec<T> {
        self.layers
            .iter()
            .filter_map(Layer::params)
            .flat_map(|p| p.grads.iter().copied())
            .collect()
    }

    pub fn set_parameters(&mut self, values: &[T]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::LengthMismatch {
                expected: self.param_count(),
                actual: values.len(),
            });
        }
        let mut rest = values;
        for p in self.layers.iter_mut().filter_map(Layer::params_mut) {
            let (head, tail) = rest.split_at(p.values.len());
            p.values.copy_from_slice(head);
            rest = tail;
        }
        Ok(())
    }

    pub(crate) fn param_mut(&mut self, mut index: usize) -> Option<&mut T> {
        for p in self.layers.iter_mut().filter_map(Layer::params_mut) {
            if index < p.values.len() {
                return Some(&mut p.values[index]);
            }
            index -= p.values.len();
        }
        None
    }

    pub fn zero_grads(&mut self) {
        for p in self.layers.iter_mut().filter_map(Layer::params_mut) {
            p.grads.iter_mut().for_each(|g| *g = T::zero());
        }
    }

    /// Overrides dropout rates in layer order; extra rates are ignored.
    pub fn set_dropout_rates(&mut self, rates: &[f64]) -> Result<()> {
        let mut rates = rates.iter();
        for layer in &mut self.layers {
            if let Layer::Dropout(d) = layer {
                if let Some(&r) = rates.next() {
                    *d = super::layers::Dropout::new(r)?;
                }
            }
        }
        Ok(())
    }

    fn check_input(&self, x: &Tensor<T>) -> Result<()> {
        if x.rank() != self.input_shape.len() + 1 || x.shape()[1..] != self.input_shape[..] {
            return Err(Error::ShapeMismatch(format!(
                "network expects [B, {:?}], got {:?}",
                self.input_shape,
                x.shape()
            )));
        }
        Ok(())
    }

    /// Raw scores of the last layer, inference mode.
    pub fn logits(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        self.check_input(x)?;
        let mut a = x.clone();
        for layer in &self.layers {
            a = layer.forward(&a)?;
        }
        Ok(a)
    }

    /// Predictions (after the output head), inference mode.
    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let mut y = self.logits(x)?;
        self.loss.head(&mut y);
        Ok(y)
    }

    /// [`Network::forward`] in chunks of `batch_size` samples.
    pub fn predict(&self, x: &Tensor<T>, batch_size: usize) -> Result<Tensor<T>> {
        self.check_input(x)?;
        let n = x.batch();
        let bs = batch_size.max(1);
        let mut out = Vec::with_capacity(n * self.outputs());
        let mut start = 0;
        while start < n {
            let idx: Vec<usize> = (start..(start + bs).min(n)).collect();
            out.extend(self.forward(&x.gather(&idx))?.into_data());
            start += bs;
        }
        Tensor::from_vec(&[n, self.outputs()], out)
    }

    /// Training-mode forward pass that records what backward needs.
    pub fn forward_train(&mut self, x: &Tensor<T>, rng: &mut Prng) -> Result<Tensor<T>> {
        self.check_input(x)?;
        let mut a = x.clone();
        for layer in &mut self.layers {
            a = layer.forward_train(&a, rng)?;
        }
        Ok(a)
    }

    /// Accumulates parameter gradients from the gradient of the raw scores.
    pub fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let mut g = grad.clone();
        for layer in self.layers.iter_mut().rev() {
            g = layer.backward(&g)?;
        }
        Ok(g)
    }

    /// Clears gradients, then runs forward and backward on one batch.
    /// Returns the batch loss and the head outputs.
    pub fn compute_gradients(&mut self, x: &Tensor<T>, y: &Tensor<T>, rng: &mut Prng) -> Result<(f64, Tensor<T>)> {
        self.zero_grads();
        let scores = self.forward_train(x, rng)?;
        let (value, grad) = loss_and_grad(self.loss, &scores, y)?;
        self.backward(&grad)?;
        let mut probs = scores;
        self.loss.head(&mut probs);
        Ok((value, probs))
    }

    /// The same network in another precision.
    pub fn cast<U: Scalar>(&self) -> Network<U> {
        Network {
            input_shape: self.input_shape.clone(),
            layers: self.layers.iter().map(Layer::cast).collect(),
            loss: self.loss,
        }
    }
}
