use crate::error::{Error, Result};
use crate::nn::{Scalar, Tensor};

/// Fixed affine rescaling `(x - shift) / scale` along the last axis, stored
/// with the model so inference sees the same normalization as training.
/// Rows equal to `mask_value` in every position pass through unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardize {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
    pub mask_value: Option<f64>,
    masked: Option<Vec<bool>>,
}

impl Standardize {
    pub fn new(shift: Vec<f64>, scale: Vec<f64>, mask_value: Option<f64>) -> Result<Self> {
        if shift.is_empty() || shift.len() != scale.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} shifts against {} scales",
                shift.len(),
                scale.len()
            )));
        }
        if scale.iter().any(|s| !s.is_finite() || *s == 0.0) || shift.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("standardization needs finite shifts and nonzero scales".into()));
        }
        Ok(Self {
            shift,
            scale,
            mask_value,
            masked: None,
        })
    }

    pub fn width(&self) -> usize {
        self.shift.len()
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        if input.last() != Some(&self.width()) {
            return Err(Error::ShapeMismatch(format!(
                "standardization over {} values, got shape {input:?}",
                self.width()
            )));
        }
        Ok(input.to_vec())
    }

    fn apply<T: Scalar>(&self, x: &Tensor<T>) -> Result<(Tensor<T>, Vec<bool>)> {
        let w = self.width();
        if x.shape().last() != Some(&w) || x.rank() < 2 {
            return Err(Error::ShapeMismatch(format!(
                "standardization over {w} values, got {:?}",
                x.shape()
            )));
        }
        let mut y = x.clone();
        let mut masked = Vec::with_capacity(x.len() / w);
        for row in y.data_mut().chunks_exact_mut(w) {
            let skip = self
                .mask_value
                .is_some_and(|m| row.iter().all(|v| *v == T::cast(m)));
            masked.push(skip);
            if !skip {
                for ((v, &s), &k) in row.iter_mut().zip(&self.shift).zip(&self.scale) {
                    *v = (*v - T::cast(s)) / T::cast(k);
                }
            }
        }
        Ok((y, masked))
    }

    pub fn forward<T: Scalar>(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        Ok(self.apply(x)?.0)
    }

    pub fn forward_train<T: Scalar>(&mut self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (y, masked) = self.apply(x)?;
        self.masked = Some(masked);
        Ok(y)
    }

    pub fn backward<T: Scalar>(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let masked = self.masked.as_ref().ok_or_else(super::dense::no_cache)?;
        let w = self.width();
        let mut dx = grad.clone();
        for (row, &skip) in dx.data_mut().chunks_exact_mut(w).zip(masked) {
            if !skip {
                for (v, &k) in row.iter_mut().zip(&self.scale) {
                    *v /= T::cast(k);
                }
            }
        }
        Ok(dx)
    }
}
