use crate::error::{Error, Result};
use crate::metrics::{accuracy, confusion, macro_prf1, mae, rmse, roc_auc, ClassScores, ConfusionMatrix, RocCurve};
use crate::nn::{argmax, Network, Tensor};
use crate::prognostics::{rul_smooth, RunToFailureUnit};

use super::data::rul_windows;
use super::manifest::RulSettings;

const BATCH: usize = 256;

/// Predicted classes of a classifier plus the positive-class score for
/// two-class problems.
pub fn classify(net: &Network<f32>, inputs: &Tensor<f32>) -> Result<(Vec<usize>, Option<Vec<f64>>)> {
    let out = net.predict(inputs, BATCH)?;
    let width = out.sample_len();
    let rows = (0..out.batch()).map(|i| out.sample(i));
    match width {
        1 => {
            let scores: Vec<f64> = rows.map(|r| f64::from(r[0])).collect();
            let classes = scores.iter().map(|&s| usize::from(s >= 0.5)).collect();
            Ok((classes, Some(scores)))
        }
        2 => {
            let rows: Vec<&[f32]> = rows.collect();
            let classes = rows.iter().map(|r| argmax(r)).collect();
            Ok((classes, Some(rows.iter().map(|r| f64::from(r[1])).collect())))
        }
        _ => Ok((rows.map(argmax).collect(), None)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub per_class: Vec<ClassScores>,
    pub macro_avg: ClassScores,
    /// ROC of the positive class, present for two-class problems with both classes in the split.
    pub roc: Option<(RocCurve, f64)>,
}

impl ClassificationReport {
    pub fn rows(&self, class_names: &[String]) -> Vec<(String, f64)> {
        let mut rows = vec![
            ("accuracy".to_string(), self.accuracy),
            ("macro_precision".into(), self.macro_avg.precision),
            ("macro_recall".into(), self.macro_avg.recall),
            ("macro_f1".into(), self.macro_avg.f1),
        ];
        for (i, s) in self.per_class.iter().enumerate() {
            let name = class_names.get(i).cloned().unwrap_or_else(|| i.to_string());
            rows.push((format!("precision_{name}"), s.precision));
            rows.push((format!("recall_{name}"), s.recall));
            rows.push((format!("f1_{name}"), s.f1));
        }
        if let Some((_, auc)) = &self.roc {
            rows.push(("auc".into(), *auc));
        }
        rows
    }
}

pub fn evaluate_classifier(
    net: &Network<f32>,
    inputs: &Tensor<f32>,
    labels: &[usize],
    classes: usize,
) -> Result<ClassificationReport> {
    let (predicted, scores) = classify(net, inputs)?;
    let matrix = confusion(labels, &predicted, classes)?;
    let (per_class, macro_avg) = macro_prf1(&matrix);
    let roc = match scores {
        Some(s) if classes == 2 => {
            let positive: Vec<bool> = labels.iter().map(|&l| l == 1).collect();
            match roc_auc(&s, &positive) {
                Ok(r) => Some(r),
                Err(Error::SingleClass) => None,
                Err(e) => return Err(e),
            }
        }
        _ => None,
    };
    Ok(ClassificationReport {
        accuracy: accuracy(&matrix)?,
        confusion: matrix,
        per_class,
        macro_avg,
        roc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionReport {
    pub mae: f64,
    pub rmse: f64,
    pub samples: usize,
}

impl RegressionReport {
    pub fn rows(&self) -> Vec<(String, f64)> {
        vec![
            ("mae".into(), self.mae),
            ("rmse".into(), self.rmse),
            ("samples".into(), self.samples as f64),
        ]
    }
}

pub fn evaluate_regression(net: &Network<f32>, inputs: &Tensor<f32>, targets: &Tensor<f32>) -> Result<RegressionReport> {
    let pred: Vec<f64> = net.predict(inputs, BATCH)?.data().iter().map(|&v| f64::from(v)).collect();
    let actual: Vec<f64> = targets.data().iter().map(|&v| f64::from(v)).collect();
    Ok(RegressionReport {
        mae: mae(&pred, &actual)?,
        rmse: rmse(&pred, &actual)?,
        samples: pred.len(),
    })
}

/// Per-cycle RUL of one unit: raw network output, polynomial smoothing and
/// the piecewise target.
#[derive(Debug, Clone, PartialEq)]
pub struct RulTrace {
    pub cycles: Vec<u32>,
    pub predicted: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub actual: Vec<f64>,
}

pub fn predict_rul(
    net: &Network<f32>,
    unit: &RunToFailureUnit,
    settings: &RulSettings,
    smooth_degree: usize,
) -> Result<RulTrace> {
    let (x, y) = rul_windows(unit, settings)?;
    let n = y.len();
    let inputs = Tensor::from_vec(&[n, settings.window, unit.sensor_count()], x)?;
    let predicted: Vec<f64> = net.predict(&inputs, BATCH)?.data().iter().map(|&v| f64::from(v)).collect();
    let smoothed = rul_smooth(&predicted, smooth_degree.min(n.saturating_sub(1)))?;
    Ok(RulTrace {
        cycles: unit.cycles.iter().map(|c| c.cycle).collect(),
        predicted,
        smoothed,
        actual: y.into_iter().map(f64::from).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, Layer, LossKind};
    use crate::nn::layers::Dense;

    fn fixed(weights: Vec<f32>, outputs: usize, loss: LossKind) -> Network<f32> {
        let inputs = weights.len() / outputs;
        let layer = Dense::from_weights(weights, vec![0.0; outputs], Activation::Linear).unwrap();
        assert_eq!(layer.inputs, inputs);
        Network::from_layers(&[inputs], vec![Layer::Dense(layer)], loss).unwrap()
    }

    #[test]
    fn binary_report_from_fixed_scores() {
        // score = sigmoid(x), so the sign of x decides the class
        let net = fixed(vec![1.0], 1, LossKind::Bce);
        let x = Tensor::from_vec(&[4, 1], vec![-2.0, -1.0, 0.5, 3.0]).unwrap();
        let r = evaluate_classifier(&net, &x, &[0, 1, 0, 1], 2).unwrap();
        assert_eq!(r.confusion.get(0, 0), 1);
        assert_eq!(r.confusion.get(1, 0), 1);
        assert_eq!(r.accuracy, 0.5);
        // positives score ranks 2nd and 4th of 4: 3 of 4 pairs ordered
        assert!((r.roc.as_ref().unwrap().1 - 0.75).abs() < 1e-12);
        let names = vec!["healthy".to_string(), "faulty".to_string()];
        assert!(r.rows(&names).iter().any(|(k, _)| k == "f1_faulty"));
    }

    #[test]
    fn regression_report() {
        let net = fixed(vec![2.0], 1, LossKind::Mse);
        let x = Tensor::from_vec(&[2, 1], vec![1.0, 2.0]).unwrap();
        let y = Tensor::from_vec(&[2, 1], vec![1.0, 1.0]).unwrap();
        let r = evaluate_regression(&net, &x, &y).unwrap();
        assert!((r.mae - 2.0).abs() < 1e-6);
        assert!((r.rmse - 5f64.sqrt()).abs() < 1e-6);
    }
}
