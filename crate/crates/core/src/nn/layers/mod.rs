//! Layer kinds and their dispatch.

mod conv;
mod dense;
mod dropout;
mod lstm;
mod pool;
mod standardize;

pub use conv::Conv2d;
pub use dense::Dense;
pub use dropout::Dropout;
pub use lstm::{Lstm, DEFAULT_MASK_VALUE};
pub use pool::MaxPool2d;
pub use standardize::Standardize;

use super::{Activation, Scalar, Tensor};
use crate::error::Result;
use crate::rng::{derive_seed, prng, Prng};

/// Trainable values with a gradient accumulator of the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct Params<T> {
    pub values: Vec<T>,
    pub grads: Vec<T>,
}

impl<T: Scalar> Params<T> {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![T::zero(); len],
            grads: vec![T::zero(); len],
        }
    }

    pub fn new(values: Vec<T>) -> Self {
        let grads = vec![T::zero(); values.len()];
        Self { values, grads }
    }
}

/// Architecture description of one layer, independent of its weights.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    Dense { units: usize, activation: Activation },
    Conv2d { filters: usize, kernel: usize, activation: Activation },
    MaxPool2d,
    Dropout { rate: f64 },
    Lstm { units: usize, return_sequences: bool, mask_value: f64 },
    Standardize { shift: Vec<f64>, scale: Vec<f64>, mask_value: Option<f64> },
}

impl LayerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Conv2d { .. } => "conv2d",
            LayerSpec::MaxPool2d => "maxpool2d",
            LayerSpec::Dropout { .. } => "dropout",
            LayerSpec::Lstm { .. } => "lstm",
            LayerSpec::Standardize { .. } => "standardize",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer<T> {
    Dense(Dense<T>),
    Conv2d(Conv2d<T>),
    MaxPool2d(MaxPool2d),
    Dropout(Dropout<T>),
    Lstm(Lstm<T>),
    Standardize(Standardize),
}

impl<T: Scalar> Layer<T> {
    /// Instantiates `spec` for per-sample `input` shape with seeded initial weights.
    pub fn build(spec: &LayerSpec, input: &[usize], seed: u64) -> Result<Self> {
        let mut rng = prng(seed);
        let layer = match spec {
            LayerSpec::Dense { units, activation } => {
                Layer::Dense(Dense::new(input.iter().product(), *units, *activation, &mut rng))
            }
            LayerSpec::Conv2d {
                filters,
                kernel,
                activation,
            } => {
                let channels = input.first().copied().unwrap_or(0);
                Layer::Conv2d(Conv2d::new(channels, *filters, *kernel, *activation, &mut rng)?)
            }
            LayerSpec::MaxPool2d => Layer::MaxPool2d(MaxPool2d::new()),
            LayerSpec::Dropout { rate } => Layer::Dropout(Dropout::new(*rate)?),
            LayerSpec::Lstm {
                units,
                return_sequences,
                mask_value,
            } => {
                let features = input.last().copied().unwrap_or(0);
                let mut l = Lstm::new(features, *units, *return_sequences, &mut rng);
                l.mask_value = *mask_value;
                Layer::Lstm(l)
            }
            LayerSpec::Standardize {
                shift,
                scale,
                mask_value,
            } => Layer::Standardize(Standardize::new(shift.clone(), scale.clone(), *mask_value)?),
        };
        layer.output_shape(input)?;
        Ok(layer)
    }

    pub fn spec(&self) -> LayerSpec {
        match self {
            Layer::Dense(l) => LayerSpec::Dense {
                units: l.outputs,
                activation: l.activation,
            },
            Layer::Conv2d(l) => LayerSpec::Conv2d {
                filters: l.filters,
                kernel: l.kernel,
                activation: l.activation,
            },
            Layer::MaxPool2d(_) => LayerSpec::MaxPool2d,
            Layer::Dropout(l) => LayerSpec::Dropout { rate: l.rate },
            Layer::Lstm(l) => LayerSpec::Lstm {
                units: l.hidden,
                return_sequences: l.return_sequences,
                mask_value: l.mask_value,
            },
            Layer::Standardize(l) => LayerSpec::Standardize {
                shift: l.shift.clone(),
                scale: l.scale.clone(),
                mask_value: l.mask_value,
            },
        }
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        match self {
            Layer::Dense(l) => l.output_shape(input),
            Layer::Conv2d(l) => l.output_shape(input),
            Layer::MaxPool2d(l) => l.output_shape(input),
            Layer::Dropout(_) => Ok(input.to_vec()),
            Layer::Lstm(l) => l.output_shape(input),
            Layer::Standardize(l) => l.output_shape(input),
        }
    }

    pub fn params(&self) -> Option<&Params<T>> {
        match self {
            Layer::Dense(l) => Some(&l.params),
            Layer::Conv2d(l) => Some(&l.params),
            Layer::Lstm(l) => Some(&l.params),
            _ => None,
        }
    }

    pub fn params_mut(&mut self) -> Option<&mut Params<T>> {
        match self {
            Layer::Dense(l) => Some(&mut l.params),
            Layer::Conv2d(l) => Some(&mut l.params),
            Layer::Lstm(l) => Some(&mut l.params),
            _ => None,
        }
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        match self {
            Layer::Dense(l) => l.forward(x),
            Layer::Conv2d(l) => l.forward(x),
            Layer::MaxPool2d(l) => l.forward(x),
            Layer::Dropout(_) => Ok(x.clone()),
            Layer::Lstm(l) => l.forward(x),
            Layer::Standardize(l) => l.forward(x),
        }
    }

    pub fn forward_train(&mut self, x: &Tensor<T>, rng: &mut Prng) -> Result<Tensor<T>> {
        match self {
            Layer::Dense(l) => l.forward_train(x),
            Layer::Conv2d(l) => l.forward_train(x),
            Layer::MaxPool2d(l) => l.forward_train(x),
            Layer::Dropout(l) => Ok(l.forward_train(x, rng)),
            Layer::Lstm(l) => l.forward_train(x),
            Layer::Standardize(l) => l.forward_train(x),
        }
    }

    pub fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        match self {
            Layer::Dense(l) => l.backward(grad),
            Layer::Conv2d(l) => l.backward(grad),
            Layer::MaxPool2d(l) => l.backward(grad),
            Layer::Dropout(l) => l.backward(grad),
            Layer::Lstm(l) => l.backward(grad),
            Layer::Standardize(l) => l.backward(grad),
        }
    }

    /// Same layer in another precision; training caches are dropped.
    pub fn cast<U: Scalar>(&self) -> Layer<U> {
        match self {
            Layer::Dense(l) => {
                let (w, b) = l.params.values.split_at(l.outputs * l.inputs);
                Layer::Dense(Dense::from_weights(cast_vec(w), cast_vec(b), l.activation).expect("consistent dense shape"))
            }
            Layer::Conv2d(l) => {
                let (k, b) = l.params.values.split_at(l.filters * l.channels * l.kernel * l.kernel);
                Layer::Conv2d(
                    Conv2d::from_weights(l.channels, l.kernel, cast_vec(k), cast_vec(b), l.activation)
                        .expect("consistent conv shape"),
                )
            }
            Layer::MaxPool2d(_) => Layer::MaxPool2d(MaxPool2d::new()),
            Layer::Dropout(l) => Layer::Dropout(Dropout::new(l.rate).expect("valid rate")),
            Layer::Lstm(l) => {
                let mut out = Lstm::from_params(l.features, l.hidden, l.return_sequences, cast_vec(&l.params.values))
                    .expect("consistent lstm shape");
                out.mask_value = l.mask_value;
                Layer::Lstm(out)
            }
            Layer::Standardize(l) => Layer::Standardize(
                Standardize::new(l.shift.clone(), l.scale.clone(), l.mask_value).expect("valid standardization"),
            ),
        }
    }
}

/// Seed of layer `index` within a network seeded by `seed`.
pub(crate) fn layer_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, index as u64)
}

fn cast_vec<T: Scalar, U: Scalar>(v: &[T]) -> Vec<U> {
    v.iter().map(|x| U::cast(x.as_f64())).collect()
}
