use rand::seq::SliceRandom;

use super::loss::{loss, LossKind};
use super::optim::{Optimizer, OptimizerState};
use super::{Network, Scalar, Tensor};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, prng};

/// Inputs `[N, ...]` paired with targets `[N, outputs]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub inputs: Tensor<T>,
    pub targets: Tensor<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(inputs: Tensor<T>, targets: Tensor<T>) -> Result<Self> {
        if inputs.batch() != targets.batch() || inputs.rank() < 2 || targets.rank() != 2 {
            return Err(Error::ShapeMismatch(format!(
                "inputs {:?} against targets {:?}",
                inputs.shape(),
                targets.shape()
            )));
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.batch()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            inputs: self.inputs.gather(indices),
            targets: self.targets.gather(indices),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    /// Fraction held out from the end of the dataset, before shuffling.
    pub validation_split: f64,
    pub seed: u64,
    /// Replaces the rates of the network's dropout layers, in order.
    pub dropout: Option<Vec<f64>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 32,
            learning_rate: 1e-3,
            optimizer: Optimizer::Adam,
            validation_split: 0.0,
            seed: 0,
            dropout: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.validation_split) {
            return Err(Error::Config(format!(
                "validation split {} outside [0, 1)",
                self.validation_split
            )));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::Config(format!("invalid learning rate {}", self.learning_rate)));
        }
        Ok(())
    }
}

/// Metric reported next to the loss: accuracy for classification, mean
/// absolute error for regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Accuracy,
    Mae,
}

impl MetricKind {
    pub fn for_loss(loss: LossKind) -> Self {
        match loss {
            LossKind::Mse => MetricKind::Mae,
            LossKind::Bce | LossKind::Cce => MetricKind::Accuracy,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Accuracy => "accuracy",
            MetricKind::Mae => "mae",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub train_metric: f64,
    pub val_metric: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub metric: MetricKind,
    pub epochs: Vec<EpochStats>,
}

impl TrainReport {
    pub fn last(&self) -> Option<&EpochStats> {
        self.epochs.last()
    }
}

/// Sum of per-sample metric values for a batch of head outputs.
fn metric_sum<T: Scalar>(kind: LossKind, outputs: &Tensor<T>, targets: &Tensor<T>) -> f64 {
    let k = outputs.sample_len().max(1);
    let rows = outputs.data().chunks_exact(k).zip(targets.data().chunks_exact(k));
    match kind {
        LossKind::Mse => rows
            .map(|(p, y)| p.iter().zip(y).map(|(p, y)| (p.as_f64() - y.as_f64()).abs()).sum::<f64>() / k as f64)
            .sum(),
        LossKind::Bce => rows
            .map(|(p, y)| {
                let hits = p
                    .iter()
                    .zip(y)
                    .filter(|(p, y)| (p.as_f64() >= 0.5) == (y.as_f64() >= 0.5))
                    .count();
                hits as f64 / k as f64
            })
            .sum(),
        LossKind::Cce => rows.filter(|(p, y)| argmax(p) == argmax(y)).count() as f64,
    }
}

pub(crate) fn argmax<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

/// Loss and metric of `net` on `data` in inference mode.
pub fn evaluate<T: Scalar>(net: &Network<T>, data: &Dataset<T>, batch_size: usize) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let probs = net.predict(&data.inputs, batch_size)?;
    let value = loss(net.loss(), &probs, &data.targets)?;
    Ok((value, metric_sum(net.loss(), &probs, &data.targets) / data.len() as f64))
}

/// Mini-batch gradient descent with a seeded shuffle each epoch. The last
/// `validation_split` fraction of `data` is held out for validation.
pub fn train<T: Scalar>(net: &mut Network<T>, data: &Dataset<T>, config: &TrainConfig) -> Result<TrainReport> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = data.len();
    let n_train = ((n as f64) * (1.0 - config.validation_split)).floor() as usize;
    if n_train == 0 {
        return Err(Error::TooSmall(format!(
            "validation split {} leaves no training samples out of {n}",
            config.validation_split
        )));
    }
    let train_part = data.subset(&(0..n_train).collect::<Vec<_>>());
    let val = (n_train < n).then(|| data.subset(&(n_train..n).collect::<Vec<_>>()));
    fit(net, &train_part, val.as_ref(), config)
}

/// Like [`train`] with an explicit validation set; `config.validation_split`
/// is ignored.
pub fn fit<T: Scalar>(
    net: &mut Network<T>,
    data: &Dataset<T>,
    validation: Option<&Dataset<T>>,
    config: &TrainConfig,
) -> Result<TrainReport> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(rates) = &config.dropout {
        net.set_dropout_rates(rates)?;
    }
    let val = validation.filter(|v| !v.is_empty());
    let n_train = data.len();
    let mut order: Vec<usize> = (0..n_train).collect();
    let mut shuffle_rng = prng(derive_seed(config.seed, 0));
    let mut dropout_rng = prng(derive_seed(config.seed, 1));
    let mut opt = OptimizerState::new(config.optimizer, net);
    let mut epochs = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut metric = 0.0;
        for batch in order.chunks(config.batch_size) {
            let b = data.subset(batch);
            let (value, probs) = net.compute_gradients(&b.inputs, &b.targets, &mut dropout_rng)?;
            if !value.is_finite() {
                return Err(Error::DivergenceDetected { epoch });
            }
            loss_sum += value * batch.len() as f64;
            metric += metric_sum(net.loss(), &probs, &b.targets);
            opt.apply(net, config.learning_rate);
        }
        if net.parameters().iter().any(|p| !p.is_finite()) {
            return Err(Error::DivergenceDetected { epoch });
        }
        let (val_loss, val_metric) = match val {
            Some(v) => {
                let (l, m) = evaluate(net, v, config.batch_size.max(64))?;
                (Some(l), Some(m))
            }
            None => (None, None),
        };
        epochs.push(EpochStats {
            epoch,
            train_loss: loss_sum / n_train as f64,
            val_loss,
            train_metric: metric / n_train as f64,
            val_metric,
        });
    }
    Ok(TrainReport {
        metric: MetricKind::for_loss(net.loss()),
        epochs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, LayerSpec};
    use crate::rng::gaussian;

    fn separable(seed: u64, n: usize) -> Dataset<f32> {
        let mut rng = prng(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = i % 2;
            let offset = if label == 1 { 2.0 } else { -2.0 };
            x.push((offset + 0.5 * gaussian(&mut rng)) as f32);
            x.push((0.5 * gaussian(&mut rng)) as f32);
            y.push(label as f32);
        }
        Dataset::new(
            Tensor::from_vec(&[n, 2], x).unwrap(),
            Tensor::from_vec(&[n, 1], y).unwrap(),
        )
        .unwrap()
    }

    fn small_net(seed: u64) -> Network<f32> {
        let specs = [
            LayerSpec::Dense { units: 8, activation: Activation::Tanh },
            LayerSpec::Dense { units: 1, activation: Activation::Linear },
        ];
        Network::build(&[2], &specs, LossKind::Bce, seed).unwrap()
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let data = separable(1, 40);
        for optimizer in [Optimizer::Sgd, Optimizer::Adam] {
            let mut net = small_net(3);
            let before = net.parameters();
            let cfg = TrainConfig {
                epochs: 5,
                batch_size: 8,
                learning_rate: 0.0,
                optimizer,
                ..TrainConfig::default()
            };
            train(&mut net, &data, &cfg).unwrap();
            assert_eq!(before, net.parameters());
        }
    }

    #[test]
    fn separable_toy_set_is_learned() {
        let data = separable(2, 60);
        let mut net = small_net(4);
        let cfg = TrainConfig {
            epochs: 200,
            batch_size: 16,
            learning_rate: 0.01,
            ..TrainConfig::default()
        };
        let report = train(&mut net, &data, &cfg).unwrap();
        assert_eq!(report.metric, MetricKind::Accuracy);
        assert_eq!(evaluate(&net, &data, 64).unwrap().1, 1.0);
    }

    #[test]
    fn single_neuron_reaches_least_squares() {
        // one sample x = [1, 2], target 3: min-norm solution reached from any start
        // has prediction exactly 3; with a bias the residual must vanish.
        let data = Dataset::new(
            Tensor::from_vec(&[1, 2], vec![1.0f32, 2.0]).unwrap(),
            Tensor::from_vec(&[1, 1], vec![3.0f32]).unwrap(),
        )
        .unwrap();
        let specs = [LayerSpec::Dense { units: 1, activation: Activation::Linear }];
        let mut net = Network::<f32>::build(&[2], &specs, LossKind::Mse, 9).unwrap();
        let cfg = TrainConfig {
            epochs: 500,
            batch_size: 1,
            learning_rate: 0.02,
            optimizer: Optimizer::Sgd,
            ..TrainConfig::default()
        };
        train(&mut net, &data, &cfg).unwrap();
        let pred = net.forward(&data.inputs).unwrap().data()[0];
        assert!((pred - 3.0).abs() <= 1e-3, "{pred}");
    }

    #[test]
    fn training_is_reproducible() {
        let data = separable(5, 50);
        let cfg = TrainConfig {
            epochs: 4,
            batch_size: 7,
            validation_split: 0.2,
            seed: 11,
            ..TrainConfig::default()
        };
        let (mut a, mut b) = (small_net(1), small_net(1));
        let ra = train(&mut a, &data, &cfg).unwrap();
        let rb = train(&mut b, &data, &cfg).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(a.parameters(), b.parameters());
        assert!(ra.epochs.iter().all(|e| e.val_loss.is_some()));
    }

    #[test]
    fn divergence_is_reported() {
        let data = Dataset::new(
            Tensor::from_vec(&[2, 1], vec![1e30f32, -1e30]).unwrap(),
            Tensor::from_vec(&[2, 1], vec![1e30f32, 1e30]).unwrap(),
        )
        .unwrap();
        let specs = [LayerSpec::Dense { units: 1, activation: Activation::Linear }];
        let mut net = Network::<f32>::build(&[1], &specs, LossKind::Mse, 0).unwrap();
        let cfg = TrainConfig {
            epochs: 3,
            batch_size: 2,
            learning_rate: 1.0,
            optimizer: Optimizer::Sgd,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&mut net, &data, &cfg), Err(Error::DivergenceDetected { .. })));
    }

    #[test]
    fn config_is_validated() {
        let data = separable(1, 4);
        let mut net = small_net(0);
        let bad = TrainConfig { epochs: 0, ..TrainConfig::default() };
        assert!(matches!(train(&mut net, &data, &bad), Err(Error::Config(_))));
        let bad = TrainConfig { validation_split: 1.0, ..TrainConfig::default() };
        assert!(matches!(train(&mut net, &data, &bad), Err(Error::Config(_))));
    }
}
