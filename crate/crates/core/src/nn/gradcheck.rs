use rand::seq::index::sample;

use super::loss::loss_and_grad;
use super::{Network, Tensor};
use crate::error::Result;
use crate::rng::prng;

const MAX_CHECKED: usize = 10_000;
const DROPOUT_SEED: u64 = 0x5EED;
const SUBSAMPLE_SEED: u64 = 0xC4EC;

/// Largest relative error between backpropagated gradients and central
/// differences, `|a - n| / max(|a|, |n|, 1e-6)`. Networks with more than 10k
/// parameters are checked on a seeded random subset. Zero parameters give 0.
pub fn grad_check(net: &Network<f64>, x: &Tensor<f64>, y: &Tensor<f64>, eps: f64) -> Result<f64> {
    grad_check_with(net, x, y, eps, |_| {})
}

/// [`grad_check`] with a hook that may alter the analytic gradient before the
/// comparison, for exercising the checker itself.
pub fn grad_check_with(
    net: &Network<f64>,
    x: &Tensor<f64>,
    y: &Tensor<f64>,
    eps: f64,
    tamper: impl FnOnce(&mut [f64]),
) -> Result<f64> {
    let mut work = net.clone();
    let total = work.param_count();
    if total == 0 {
        return Ok(0.0);
    }
    work.compute_gradients(x, y, &mut prng(DROPOUT_SEED))?;
    let mut analytic = work.gradients();
    tamper(&mut analytic);
    let indices: Vec<usize> = if total > MAX_CHECKED {
        let mut idx = sample(&mut prng(SUBSAMPLE_SEED), total, MAX_CHECKED).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..total).collect()
    };
    let eval = |work: &mut Network<f64>| -> Result<f64> {
        let scores = work.forward_train(x, &mut prng(DROPOUT_SEED))?;
        Ok(loss_and_grad(work.loss(), &scores, y)?.0)
    };
    let mut worst = 0.0f64;
    for i in indices {
        let original = *work.param_mut(i).expect("index within parameter count");
        *work.param_mut(i).expect("index") = original + eps;
        let plus = eval(&mut work)?;
        *work.param_mut(i).expect("index") = original - eps;
        let minus = eval(&mut work)?;
        *work.param_mut(i).expect("index") = original;
        let numeric = (plus - minus) / (2.0 * eps);
        let a = analytic[i];
        let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::layers::{Layer, MaxPool2d};
    use crate::nn::{Activation, LayerSpec, LossKind};
    use crate::rng::gaussian;

    fn random(shape: &[usize], seed: u64) -> Tensor<f64> {
        let mut rng = prng(seed);
        let n = shape.iter().product();
        Tensor::from_vec(shape, (0..n).map(|_| gaussian(&mut rng)).collect()).unwrap()
    }

    fn one_hot(rows: usize, k: usize) -> Tensor<f64> {
        let mut v = vec![0.0; rows * k];
        for r in 0..rows {
            v[r * k + r % k] = 1.0;
        }
        Tensor::from_vec(&[rows, k], v).unwrap()
    }

    #[test]
    fn dense_network_passes() {
        let specs = [
            LayerSpec::Dense { units: 5, activation: Activation::Tanh },
            LayerSpec::Dense { units: 4, activation: Activation::Sigmoid },
            LayerSpec::Dense { units: 3, activation: Activation::Linear },
        ];
        for loss in [LossKind::Mse, LossKind::Bce, LossKind::Cce] {
            let net = Network::<f64>::build(&[4], &specs, loss, 2).unwrap();
            let y = if loss == LossKind::Mse { random(&[3, 3], 8) } else { one_hot(3, 3) };
            let err = grad_check(&net, &random(&[3, 4], 7), &y, 1e-5).unwrap();
            assert!(err <= 1e-4, "{loss:?}: {err}");
        }
    }

    #[test]
    fn corrupted_gradient_is_caught() {
        let specs = [LayerSpec::Dense { units: 2, activation: Activation::Linear }];
        let net = Network::<f64>::build(&[3], &specs, LossKind::Mse, 1).unwrap();
        let err = grad_check_with(&net, &random(&[2, 3], 1), &random(&[2, 2], 2), 1e-5, |g| g[0] += 0.5).unwrap();
        assert!(err > 1e-2);
    }

    #[test]
    fn parameterless_network_reports_zero() {
        let head = crate::nn::layers::Dense::from_weights(vec![0.0], vec![0.0], Activation::Linear).unwrap();
        let mut net = Network::<f64>::from_layers(
            &[1, 2, 2],
            vec![Layer::MaxPool2d(MaxPool2d::new()), Layer::Dense(head)],
            LossKind::Mse,
        )
        .unwrap();
        net.layers_mut()[1] = Layer::MaxPool2d(MaxPool2d::new());
        let x = random(&[1, 1, 2, 2], 3);
        let y = Tensor::zeros(&[1, 1]);
        assert_eq!(grad_check(&net, &x, &y, 1e-5).unwrap(), 0.0);
    }

    #[test]
    fn conv_pool_dropout_network_passes() {
        let specs = [
            LayerSpec::Conv2d { filters: 3, kernel: 3, activation: Activation::Tanh },
            LayerSpec::MaxPool2d,
            LayerSpec::Conv2d { filters: 2, kernel: 1, activation: Activation::LeakyRelu },
            LayerSpec::Dropout { rate: 0.25 },
            LayerSpec::Dense { units: 3, activation: Activation::Linear },
        ];
        let net = Network::<f64>::build(&[2, 5, 4], &specs, LossKind::Cce, 6).unwrap();
        let err = grad_check(&net, &random(&[2, 2, 5, 4], 10), &one_hot(2, 3), 1e-5).unwrap();
        assert!(err <= 1e-4, "{err}");
    }

    #[test]
    fn lstm_network_passes_with_masking() {
        for return_sequences in [true, false] {
            let mut specs = vec![
                LayerSpec::Standardize { shift: vec![0.1, -0.2], scale: vec![1.5, 0.5], mask_value: Some(-10.0) },
                LayerSpec::Lstm { units: 3, return_sequences, mask_value: -10.0 },
            ];
            if return_sequences {
                specs.push(LayerSpec::Lstm { units: 2, return_sequences: false, mask_value: -10.0 });
            }
            specs.push(LayerSpec::Dense { units: 1, activation: Activation::Linear });
            let net = Network::<f64>::build(&[4, 2], &specs, LossKind::Mse, 12).unwrap();
            let mut x = random(&[2, 4, 2], 13);
            // first step of the second sequence is padding
            x.data_mut()[8] = -10.0;
            x.data_mut()[9] = -10.0;
            let err = grad_check(&net, &x, &random(&[2, 1], 14), 1e-5).unwrap();
            assert!(err <= 1e-4, "return_sequences={return_sequences}: {err}");
        }
    }

    #[test]
    fn bce_with_several_outputs_passes() {
        let specs = [
            LayerSpec::Dense { units: 4, activation: Activation::LeakyRelu },
            LayerSpec::Dense { units: 2, activation: Activation::Linear },
        ];
        let net = Network::<f64>::build(&[3], &specs, LossKind::Bce, 21).unwrap();
        let y = Tensor::from_vec(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(grad_check(&net, &random(&[2, 3], 22), &y, 1e-5).unwrap() <= 1e-4);
    }
}
