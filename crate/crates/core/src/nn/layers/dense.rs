use super::Params;
use crate::error::{Error, Result};
use crate::nn::gemm::{gemm_nn, gemm_nt, gemm_tn};
use crate::nn::init::{fill_uniform, uniform_limit};
use crate::nn::{Activation, Scalar, Tensor};
use crate::rng::Prng;

/// Fully connected layer. Inputs of any rank are flattened per sample.
/// Parameters: `W` (`outputs x inputs`, row-major) followed by `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub inputs: usize,
    pub outputs: usize,
    pub activation: Activation,
    pub params: Params<T>,
    cache: Option<(Tensor<T>, Tensor<T>)>,
}

impl<T: Scalar> Dense<T> {
    pub fn new(inputs: usize, outputs: usize, activation: Activation, rng: &mut Prng) -> Self {
        let mut params = Params::zeros(outputs * inputs + outputs);
        let limit = uniform_limit(activation, inputs, outputs);
        fill_uniform(&mut params.values[..outputs * inputs], limit, rng);
        Self {
            inputs,
            outputs,
            activation,
            params,
            cache: None,
        }
    }

    pub fn from_weights(weights: Vec<T>, bias: Vec<T>, activation: Activation) -> Result<Self> {
        let outputs = bias.len();
        if outputs == 0 || weights.len() % outputs != 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for {outputs} outputs",
                weights.len()
            )));
        }
        let inputs = weights.len() / outputs;
        let mut values = weights;
        values.extend(bias);
        Ok(Self {
            inputs,
            outputs,
            activation,
            params: Params::new(values),
            cache: None,
        })
    }

    pub fn weights(&self) -> &[T] {
        &self.params.values[..self.outputs * self.inputs]
    }

    pub fn bias(&self) -> &[T] {
        &self.params.values[self.outputs * self.inputs..]
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let n: usize = input.iter().product();
        if n != self.inputs {
            return Err(Error::ShapeMismatch(format!(
                "dense layer expects {} inputs, got shape {input:?}",
                self.inputs
            )));
        }
        Ok(vec![self.outputs])
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let b = x.batch();
        if x.sample_len() != self.inputs {
            return Err(Error::ShapeMismatch(format!(
                "dense layer expects {} inputs per sample, got {:?}",
                self.inputs,
                x.shape()
            )));
        }
        let mut out = Vec::with_capacity(b * self.outputs);
        for _ in 0..b {
            out.extend_from_slice(self.bias());
        }
        gemm_nt(b, self.inputs, self.outputs, x.data(), self.weights(), &mut out);
        let act = self.activation;
        out.iter_mut().for_each(|v| *v = act.apply(*v));
        Tensor::from_vec(&[b, self.outputs], out)
    }

    pub fn forward_train(&mut self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let y = self.forward(x)?;
        self.cache = Some((x.clone(), y.clone()));
        Ok(y)
    }

    pub fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let (x, y) = self.cache.as_ref().ok_or_else(no_cache)?;
        let b = x.batch();
        let act = self.activation;
        let dz: Vec<T> = grad
            .data()
            .iter()
            .zip(y.data())
            .map(|(&g, &y)| g * act.derivative_from_output(y))
            .collect();
        let (wlen, n_in, n_out) = (self.outputs * self.inputs, self.inputs, self.outputs);
        let (gw, gb) = self.params.grads.split_at_mut(wlen);
        gemm_tn(n_out, b, n_in, &dz, x.data(), gw);
        for row in dz.chunks_exact(n_out) {
            for (g, &d) in gb.iter_mut().zip(row) {
                *g += d;
            }
        }
        let mut dx = vec![T::zero(); b * n_in];
        gemm_nn(b, n_out, n_in, &dz, &self.params.values[..wlen], &mut dx);
        Tensor::from_vec(x.shape(), dx)
    }
}

pub(crate) fn no_cache() -> Error {
    Error::Config("backward called before a training forward pass".into())
}
