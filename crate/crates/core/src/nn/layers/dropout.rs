use rand::Rng;

use super::dense::no_cache;
use crate::error::{Error, Result};
use crate::nn::{Scalar, Tensor};
use crate::rng::Prng;

/// Inverted dropout: in training each value is zeroed with probability `rate`
/// and survivors are scaled by `1 / (1 - rate)`. Identity at inference.
#[derive(Debug, Clone, PartialEq)]
pub struct Dropout<T> {
    pub rate: f64,
    mask: Option<Vec<T>>,
}

impl<T: Scalar> Dropout<T> {
    pub fn new(rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::Config(format!("dropout rate {rate} outside [0, 1)")));
        }
        Ok(Self { rate, mask: None })
    }

    pub fn forward_train(&mut self, x: &Tensor<T>, rng: &mut Prng) -> Tensor<T> {
        let keep = 1.0 - self.rate;
        let scale = T::cast(1.0 / keep);
        let mask: Vec<T> = (0..x.len())
            .map(|_| {
                if self.rate == 0.0 || rng.gen::<f64>() < keep {
                    scale
                } else {
                    T::zero()
                }
            })
            .collect();
        let mut y = x.clone();
        for (v, &m) in y.data_mut().iter_mut().zip(&mask) {
            *v *= m;
        }
        self.mask = Some(mask);
        y
    }

    pub fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let mask = self.mask.as_ref().ok_or_else(no_cache)?;
        let mut dx = grad.clone();
        for (v, &m) in dx.data_mut().iter_mut().zip(mask) {
            *v *= m;
        }
        Ok(dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::prng;

    #[test]
    fn preserves_expected_activation() {
        let mut d = Dropout::<f64>::new(0.3).unwrap();
        let x = Tensor::filled(&[1, 4], 2.0);
        let mut rng = prng(9);
        let trials = 25_000;
        let mut total = 0.0;
        for _ in 0..trials {
            total += d.forward_train(&x, &mut rng).data().iter().sum::<f64>();
        }
        // 1e5 masked activations in total
        let mean = total / (trials * 4) as f64;
        assert!((mean - 2.0).abs() <= 0.02, "{mean}");
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(Dropout::<f32>::new(1.0).is_err());
        assert!(Dropout::<f32>::new(-0.1).is_err());
    }
}
