use super::activation::{sigmoid, softmax_in_place};
use super::{Scalar, Tensor};
use crate::error::{Error, Result};

const PROB_FLOOR: f64 = 1e-12;

/// Training objective. Each loss fixes the output head applied to the last
/// layer's raw scores: identity for MSE, sigmoid for BCE, softmax for CCE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Mse,
    Bce,
    Cce,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::Bce => "bce",
            LossKind::Cce => "cce",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "mse" => Some(LossKind::Mse),
            "bce" => Some(LossKind::Bce),
            "cce" => Some(LossKind::Cce),
            _ => None,
        }
    }

    pub(crate) fn code(self) -> u32 {
        match self {
            LossKind::Mse => 0,
            LossKind::Bce => 1,
            LossKind::Cce => 2,
        }
    }

    pub(crate) fn from_code(c: u32) -> Option<Self> {
        [LossKind::Mse, LossKind::Bce, LossKind::Cce].get(c as usize).copied()
    }

    /// Applies the output head to raw scores `[batch, outputs]`.
    pub fn head<T: Scalar>(self, scores: &mut Tensor<T>) {
        match self {
            LossKind::Mse => {}
            LossKind::Bce => scores.data_mut().iter_mut().for_each(|v| *v = sigmoid(*v)),
            LossKind::Cce => {
                let k = scores.sample_len().max(1);
                scores.data_mut().chunks_exact_mut(k).for_each(softmax_in_place);
            }
        }
    }
}

fn check_shapes<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "predictions {:?} vs targets {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// Loss of head outputs (probabilities for BCE/CCE) against targets.
///
/// MSE and BCE average over every element; CCE sums over classes and averages
/// over the batch.
pub fn loss<T: Scalar>(kind: LossKind, predictions: &Tensor<T>, targets: &Tensor<T>) -> Result<f64> {
    check_shapes(predictions, targets)?;
    let p = predictions.data().iter().map(|v| v.as_f64());
    let y = targets.data().iter().map(|v| v.as_f64());
    let total = predictions.len() as f64;
    let clamp = |v: f64| v.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    Ok(match kind {
        LossKind::Mse => p.zip(y).map(|(p, y)| (y - p).powi(2)).sum::<f64>() / total,
        LossKind::Bce => {
            -p.zip(y)
                .map(|(p, y)| {
                    let p = clamp(p);
                    y * p.ln() + (1.0 - y) * (1.0 - p).ln()
                })
                .sum::<f64>()
                / total
        }
        LossKind::Cce => {
            -p.zip(y).map(|(p, y)| y * clamp(p).ln()).sum::<f64>() / predictions.batch() as f64
        }
    })
}

/// Loss and its gradient with respect to the raw scores, with the head fused in.
pub fn loss_and_grad<T: Scalar>(
    kind: LossKind,
    scores: &Tensor<T>,
    targets: &Tensor<T>,
) -> Result<(f64, Tensor<T>)> {
    check_shapes(scores, targets)?;
    let mut probs = scores.clone();
    kind.head(&mut probs);
    let value = loss(kind, &probs, targets)?;
    let denom = match kind {
        LossKind::Mse | LossKind::Bce => scores.len() as f64,
        LossKind::Cce => scores.batch() as f64,
    };
    let scale = T::cast(if kind == LossKind::Mse { 2.0 } else { 1.0 } / denom);
    let mut grad = probs;
    for (g, &y) in grad.data_mut().iter_mut().zip(targets.data()) {
        *g = (*g - y) * scale;
    }
    Ok((value, grad))
}
