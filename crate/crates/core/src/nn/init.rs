use rand::Rng;

use super::{Activation, Scalar};
use crate::rng::Prng;

/// He-uniform for rectifiers, Glorot-uniform otherwise.
pub fn uniform_limit(activation: Activation, fan_in: usize, fan_out: usize) -> f64 {
    match activation {
        Activation::Relu | Activation::LeakyRelu => (6.0 / fan_in.max(1) as f64).sqrt(),
        _ => (6.0 / (fan_in + fan_out).max(1) as f64).sqrt(),
    }
}

pub fn fill_uniform<T: Scalar>(out: &mut [T], limit: f64, rng: &mut Prng) {
    for v in out {
        *v = T::cast(rng.gen_range(-limit..=limit));
    }
}
