use super::dense::no_cache;
use crate::error::{Error, Result};
use crate::nn::{Scalar, Tensor};

/// 2x2 max pooling with stride 2 on `[C, H, W]` samples. Odd trailing rows or
/// columns are padded with negative infinity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MaxPool2d {
    cache: Option<(Vec<usize>, Vec<usize>)>,
}

impl MaxPool2d {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        match input {
            [c, h, w] => Ok(vec![*c, h.div_ceil(2), w.div_ceil(2)]),
            _ => Err(Error::ShapeMismatch(format!(
                "max pooling expects [C, H, W], got {input:?}"
            ))),
        }
    }

    fn pool<T: Scalar>(&self, x: &Tensor<T>) -> Result<(Tensor<T>, Vec<usize>)> {
        let [b, c, h, w] = *x.shape() else {
            return Err(Error::ShapeMismatch(format!(
                "max pooling expects [B, C, H, W], got {:?}",
                x.shape()
            )));
        };
        let (oh, ow) = (h.div_ceil(2), w.div_ceil(2));
        let mut out = Vec::with_capacity(b * c * oh * ow);
        let mut argmax = Vec::with_capacity(b * c * oh * ow);
        let data = x.data();
        for plane in 0..b * c {
            let base = plane * h * w;
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best = T::neg_infinity();
                    let mut at = base + 2 * oy * w + 2 * ox;
                    for y in 2 * oy..(2 * oy + 2).min(h) {
                        for xx in 2 * ox..(2 * ox + 2).min(w) {
                            let idx = base + y * w + xx;
                            if data[idx] > best {
                                best = data[idx];
                                at = idx;
                            }
                        }
                    }
                    out.push(best);
                    argmax.push(at);
                }
            }
        }
        Ok((Tensor::from_vec(&[b, c, oh, ow], out)?, argmax))
    }

    pub fn forward<T: Scalar>(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        Ok(self.pool(x)?.0)
    }

    pub fn forward_train<T: Scalar>(&mut self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (y, argmax) = self.pool(x)?;
        self.cache = Some((argmax, x.shape().to_vec()));
        Ok(y)
    }

    /// Routes each output gradient to the first maximal input of its window.
    pub fn backward<T: Scalar>(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let (argmax, shape) = self.cache.as_ref().ok_or_else(no_cache)?;
        let mut dx = Tensor::zeros(shape);
        let d = dx.data_mut();
        for (&idx, &g) in argmax.iter().zip(grad.data()) {
            d[idx] += g;
        }
        Ok(dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_block() {
        let x = Tensor::from_vec(&[1, 1, 2, 2], vec![1.0f64, 2.0, 3.0, 4.0]).unwrap();
        let y = MaxPool2d::new().forward(&x).unwrap();
        assert_eq!(y.shape(), &[1, 1, 1, 1]);
        assert_eq!(y.data(), &[4.0]);
    }

    #[test]
    fn odd_sizes_and_constants() {
        let x = Tensor::filled(&[2, 3, 5, 3], 1.25f32);
        let y = MaxPool2d::new().forward(&x).unwrap();
        assert_eq!(y.shape(), &[2, 3, 3, 2]);
        assert!(y.data().iter().all(|&v| v == 1.25));
    }

    #[test]
    fn ties_route_to_first_element() {
        let mut pool = MaxPool2d::new();
        let x = Tensor::from_vec(&[1, 1, 2, 2], vec![5.0f64, 5.0, 5.0, 5.0]).unwrap();
        pool.forward_train(&x).unwrap();
        let dx = pool.backward(&Tensor::from_vec(&[1, 1, 1, 1], vec![1.0]).unwrap()).unwrap();
        assert_eq!(dx.data(), &[1.0, 0.0, 0.0, 0.0]);
    }
}
