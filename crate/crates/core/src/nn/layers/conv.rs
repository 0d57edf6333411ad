use super::dense::no_cache;
use super::Params;
use crate::error::{Error, Result};
use crate::nn::gemm::{gemm_nn, gemm_nt, gemm_tn};
use crate::nn::init::{fill_uniform, uniform_limit};
use crate::nn::{Activation, Scalar, Tensor};
use crate::rng::Prng;

/// 2-D cross-correlation, stride 1, zero "same" padding, on `[C, H, W]` samples.
/// Parameters: kernels `[filters, channels, k, k]` followed by one bias per filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d<T> {
    pub channels: usize,
    pub filters: usize,
    pub kernel: usize,
    pub activation: Activation,
    pub params: Params<T>,
    cache: Option<(Tensor<T>, Tensor<T>)>,
}

impl<T: Scalar> Conv2d<T> {
    pub fn new(channels: usize, filters: usize, kernel: usize, activation: Activation, rng: &mut Prng) -> Result<Self> {
        check_kernel(kernel)?;
        let klen = filters * channels * kernel * kernel;
        let mut params = Params::zeros(klen + filters);
        let limit = uniform_limit(
            activation,
            channels * kernel * kernel,
            filters * kernel * kernel,
        );
        fill_uniform(&mut params.values[..klen], limit, rng);
        Ok(Self {
            channels,
            filters,
            kernel,
            activation,
            params,
            cache: None,
        })
    }

    pub fn from_weights(
        channels: usize,
        kernel: usize,
        kernels: Vec<T>,
        bias: Vec<T>,
        activation: Activation,
    ) -> Result<Self> {
        check_kernel(kernel)?;
        let filters = bias.len();
        if kernels.len() != filters * channels * kernel * kernel {
            return Err(Error::ShapeMismatch(format!(
                "{} kernel values for {filters}x{channels}x{kernel}x{kernel}",
                kernels.len()
            )));
        }
        let mut values = kernels;
        values.extend(bias);
        Ok(Self {
            channels,
            filters,
            kernel,
            activation,
            params: Params::new(values),
            cache: None,
        })
    }

    fn kernel_len(&self) -> usize {
        self.filters * self.channels * self.kernel * self.kernel
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        match input {
            [c, h, w] if *c == self.channels => Ok(vec![self.filters, *h, *w]),
            _ => Err(Error::ShapeMismatch(format!(
                "conv layer expects [{}, H, W], got {input:?}",
                self.channels
            ))),
        }
    }

    fn dims(&self, x: &Tensor<T>) -> Result<(usize, usize, usize)> {
        match x.shape() {
            [b, c, h, w] if *c == self.channels => Ok((*b, *h, *w)),
            s => Err(Error::ShapeMismatch(format!(
                "conv layer expects [B, {}, H, W], got {s:?}",
                self.channels
            ))),
        }
    }

    pub fn forward(&self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let (b, h, w) = self.dims(x)?;
        let hw = h * w;
        let ckk = self.channels * self.kernel * self.kernel;
        let (kernels, bias) = self.params.values.split_at(self.kernel_len());
        let mut cols = vec![T::zero(); ckk * hw];
        let mut out = vec![T::zero(); b * self.filters * hw];
        for (s, o) in out.chunks_exact_mut(self.filters * hw).enumerate() {
            im2col(x.sample(s), self.channels, h, w, self.kernel, &mut cols);
            for (row, &bf) in o.chunks_exact_mut(hw).zip(bias) {
                row.fill(bf);
            }
            gemm_nn(self.filters, ckk, hw, kernels, &cols, o);
        }
        let act = self.activation;
        out.iter_mut().for_each(|v| *v = act.apply(*v));
        Tensor::from_vec(&[b, self.filters, h, w], out)
    }

    pub fn forward_train(&mut self, x: &Tensor<T>) -> Result<Tensor<T>> {
        let y = self.forward(x)?;
        self.cache = Some((x.clone(), y.clone()));
        Ok(y)
    }

    pub fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let (x, y) = self.cache.as_ref().ok_or_else(no_cache)?;
        let (b, h, w) = self.dims(x)?;
        let hw = h * w;
        let ckk = self.channels * self.kernel * self.kernel;
        let klen = self.kernel_len();
        let act = self.activation;
        let (kernels, _) = self.params.values.split_at(klen);
        let (gk, gb) = self.params.grads.split_at_mut(klen);
        let mut cols = vec![T::zero(); ckk * hw];
        let mut dcols = vec![T::zero(); ckk * hw];
        let mut dx = vec![T::zero(); x.len()];
        let per = self.filters * hw;
        for s in 0..b {
            let dz: Vec<T> = grad.data()[s * per..(s + 1) * per]
                .iter()
                .zip(&y.data()[s * per..(s + 1) * per])
                .map(|(&g, &y)| g * act.derivative_from_output(y))
                .collect();
            for (g, row) in gb.iter_mut().zip(dz.chunks_exact(hw)) {
                *g += row.iter().copied().sum::<T>();
            }
            im2col(x.sample(s), self.channels, h, w, self.kernel, &mut cols);
            gemm_nt(self.filters, hw, ckk, &dz, &cols, gk);
            dcols.fill(T::zero());
            gemm_tn(ckk, self.filters, hw, kernels, &dz, &mut dcols);
            let n = self.channels * hw;
            col2im(&dcols, self.channels, h, w, self.kernel, &mut dx[s * n..(s + 1) * n]);
        }
        Tensor::from_vec(x.shape(), dx)
    }
}

fn check_kernel(kernel: usize) -> Result<()> {
    if kernel == 0 || kernel % 2 == 0 {
        return Err(Error::Config(format!(
            "same padding needs an odd kernel size, got {kernel}"
        )));
    }
    Ok(())
}

/// Row `(c, ky, kx)`, column `(y, x)` holds `input[c, y + ky - r, x + kx - r]` or 0 outside.
fn im2col<T: Scalar>(input: &[T], channels: usize, h: usize, w: usize, k: usize, cols: &mut [T]) {
    let r = (k / 2) as isize;
    let hw = h * w;
    for c in 0..channels {
        let plane = &input[c * hw..(c + 1) * hw];
        for ky in 0..k {
            for kx in 0..k {
                let row = ((c * k + ky) * k + kx) * hw;
                let dst = &mut cols[row..row + hw];
                let dy = ky as isize - r;
                let dx = kx as isize - r;
                for y in 0..h {
                    let sy = y as isize + dy;
                    let line = &mut dst[y * w..(y + 1) * w];
                    if sy < 0 || sy >= h as isize {
                        line.fill(T::zero());
                        continue;
                    }
                    let src = &plane[sy as usize * w..(sy as usize + 1) * w];
                    for (x, v) in line.iter_mut().enumerate() {
                        let sx = x as isize + dx;
                        *v = if sx < 0 || sx >= w as isize {
                            T::zero()
                        } else {
                            src[sx as usize]
                        };
                    }
                }
            }
        }
    }
}

fn col2im<T: Scalar>(cols: &[T], channels: usize, h: usize, w: usize, k: usize, out: &mut [T]) {
    let r = (k / 2) as isize;
    let hw = h * w;
    for c in 0..channels {
        let plane = &mut out[c * hw..(c + 1) * hw];
        for ky in 0..k {
            for kx in 0..k {
                let row = ((c * k + ky) * k + kx) * hw;
                let src = &cols[row..row + hw];
                let dy = ky as isize - r;
                let dx = kx as isize - r;
                for y in 0..h {
                    let sy = y as isize + dy;
                    if sy < 0 || sy >= h as isize {
                        continue;
                    }
                    for x in 0..w {
                        let sx = x as isize + dx;
                        if sx >= 0 && sx < w as isize {
                            plane[sy as usize * w + sx as usize] += src[y * w + x];
                        }
                    }
                }
            }
        }
    }
}
