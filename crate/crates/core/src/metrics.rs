//! Classification and regression evaluation.

use crate::error::{Error, Result};

/// K x K counts, rows = actual class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<usize>,
}

impl ConfusionMatrix {
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, actual: usize, predicted: usize) -> usize {
        self.counts[actual * self.classes + predicted]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, actual: usize) -> usize {
        (0..self.classes).map(|p| self.get(actual, p)).sum()
    }

    pub fn col_sum(&self, predicted: usize) -> usize {
        (0..self.classes).map(|a| self.get(a, predicted)).sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.classes).map(|c| self.get(c, c)).sum()
    }

    /// Builds a matrix directly from counts (row-major).
    pub fn from_counts(classes: usize, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != classes * classes {
            return Err(Error::ShapeMismatch(format!(
                "{} counts for {classes} classes",
                counts.len()
            )));
        }
        Ok(Self { classes, counts })
    }
}

pub fn confusion(actual: &[usize], predicted: &[usize], classes: usize) -> Result<ConfusionMatrix> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            actual: predicted.len(),
        });
    }
    let mut counts = vec![0; classes * classes];
    for (&a, &p) in actual.iter().zip(predicted) {
        for label in [a, p] {
            if label >= classes {
                return Err(Error::LabelOutOfRange { label, classes });
            }
        }
        counts[a * classes + p] += 1;
    }
    Ok(ConfusionMatrix { classes, counts })
}

/// Precision, recall and F1 of one class against the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when some denominator vanished and the affected value was defined as 0.
    pub degenerate: bool,
}

fn ratio(num: f64, den: f64, degenerate: &mut bool) -> f64 {
    if den == 0.0 {
        *degenerate = true;
        0.0
    } else {
        num / den
    }
}

pub fn f1_from(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn prf1(matrix: &ConfusionMatrix, positive_class: usize) -> ClassScores {
    let tp = matrix.get(positive_class, positive_class) as f64;
    let predicted = matrix.col_sum(positive_class) as f64;
    let actual = matrix.row_sum(positive_class) as f64;
    let mut degenerate = false;
    let precision = ratio(tp, predicted, &mut degenerate);
    let recall = ratio(tp, actual, &mut degenerate);
    let f1 = ratio(2.0 * precision * recall, precision + recall, &mut degenerate);
    ClassScores {
        precision,
        recall,
        f1,
        degenerate,
    }
}

/// Per-class scores plus their unweighted (macro) mean.
pub fn macro_prf1(matrix: &ConfusionMatrix) -> (Vec<ClassScores>, ClassScores) {
    let per: Vec<ClassScores> = (0..matrix.classes()).map(|c| prf1(matrix, c)).collect();
    let k = per.len().max(1) as f64;
    let avg = ClassScores {
        precision: per.iter().map(|s| s.precision).sum::<f64>() / k,
        recall: per.iter().map(|s| s.recall).sum::<f64>() / k,
        f1: per.iter().map(|s| s.f1).sum::<f64>() / k,
        degenerate: per.iter().any(|s| s.degenerate),
    };
    (per, avg)
}

pub fn accuracy(matrix: &ConfusionMatrix) -> Result<f64> {
    let total = matrix.total();
    if total == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(matrix.trace() as f64 / total as f64)
}

pub fn mae(pred: &[f64], actual: &[f64]) -> Result<f64> {
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    if pred.len() != actual.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            actual: pred.len(),
        });
    }
    Ok(pred.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum::<f64>() / pred.len() as f64)
}

pub fn rmse(pred: &[f64], actual: &[f64]) -> Result<f64> {
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    if pred.len() != actual.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            actual: pred.len(),
        });
    }
    let mse = pred.iter().zip(actual).map(|(p, a)| (p - a).powi(2)).sum::<f64>() / pred.len() as f64;
    Ok(mse.sqrt())
}

/// ROC operating points, one per distinct score threshold (descending).
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(false positive rate, true positive rate)`, from (0, 0) to (1, 1).
    pub points: Vec<(f64, f64)>,
    /// Threshold reached at `points[i + 1]`; samples with score >= threshold are positive.
    pub thresholds: Vec<f64>,
}

/// ROC curve and trapezoidal AUC. Tied scores advance as a single step.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<(RocCurve, f64)> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    // twice the area, accumulated in integer units of (fp step x tp step)
    let mut area2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        area2 += ((fp - fp0) * (tp + tp0)) as u128;
        thresholds.push(threshold);
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }
    let auc = area2 as f64 / (2.0 * positives as f64 * negatives as f64);
    Ok((RocCurve { points, thresholds }, auc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::prng;
    use proptest::prelude::*;
    use rand::Rng;

    // O(n^2) Mann-Whitney pair count with ties worth one half.
    fn pair_count_auc(scores: &[f64], labels: &[bool]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            if !li {
                continue;
            }
            for (j, &lj) in labels.iter().enumerate() {
                if lj {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn confusion_examples() {
        let y = [0, 1, 2, 1, 0];
        let m = confusion(&y, &y, 3).unwrap();
        assert_eq!(m.trace(), 5);
        assert_eq!(accuracy(&m).unwrap(), 1.0);
        let m = confusion(&y, &[0; 5], 3).unwrap();
        assert_eq!(m.col_sum(0), 5);
        assert_eq!(m.col_sum(1) + m.col_sum(2), 0);
        assert!(matches!(
            confusion(&[0, 3], &[0, 0], 3),
            Err(Error::LabelOutOfRange { label: 3, classes: 3 })
        ));
        assert!(matches!(accuracy(&confusion(&[], &[], 2).unwrap()), Err(Error::EmptyInput)));
    }

    #[test]
    fn confusion_row_sums_count_actuals() {
        let mut rng = prng(10);
        let actual: Vec<usize> = (0..1000).map(|_| rng.gen_range(0..10)).collect();
        let predicted: Vec<usize> = (0..1000).map(|_| rng.gen_range(0..10)).collect();
        let m = confusion(&actual, &predicted, 10).unwrap();
        for c in 0..10 {
            assert_eq!(m.row_sum(c), actual.iter().filter(|&&a| a == c).count());
        }
        assert_eq!(m.total(), 1000);
    }

    #[test]
    fn prf1_examples() {
        let m = confusion(&[0, 1, 1, 0], &[0, 1, 1, 0], 2).unwrap();
        let s = prf1(&m, 1);
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        assert!(!s.degenerate);
        let m = confusion(&[1, 0], &[0, 0], 2).unwrap();
        let s = prf1(&m, 1);
        assert_eq!(s.precision, 0.0);
        assert!(s.degenerate);
        assert!((f1_from(0.9896, 0.9694) - 0.9794).abs() <= 5e-4);
    }

    #[test]
    fn macro_f1_of_diagonal_is_one() {
        let m = ConfusionMatrix::from_counts(3, vec![4, 0, 0, 0, 7, 0, 0, 0, 1]).unwrap();
        assert_eq!(macro_prf1(&m).1.f1, 1.0);
    }

    #[test]
    fn roc_examples() {
        let (curve, auc) = roc_auc(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap();
        assert_eq!(auc, 1.0);
        assert_eq!(curve.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(curve.points.last(), Some(&(1.0, 1.0)));
        assert!(matches!(roc_auc(&[0.1, 0.2], &[true, true]), Err(Error::SingleClass)));
    }

    #[test]
    fn random_scores_are_near_chance() {
        let mut rng = prng(77);
        let scores: Vec<f64> = (0..20_000).map(|_| rng.gen::<f64>()).collect();
        let labels: Vec<bool> = (0..20_000).map(|_| rng.gen_bool(0.5)).collect();
        let (_, auc) = roc_auc(&scores, &labels).unwrap();
        assert!((auc - 0.5).abs() < 0.05);
    }

    #[test]
    fn ties_match_pair_count() {
        let mut rng = prng(5);
        for _ in 0..20 {
            let n = rng.gen_range(2..80);
            let scores: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..6u8))).collect();
            let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
            labels[0] = true;
            labels[1] = false;
            let (_, auc) = roc_auc(&scores, &labels).unwrap();
            assert_eq!(auc, pair_count_auc(&scores, &labels));
        }
    }

    #[test]
    fn mae_examples() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(mae(&a, &a).unwrap(), 0.0);
        assert_eq!(mae(&[2.0, 3.0, 4.0], &a).unwrap(), 1.0);
        assert!(matches!(mae(&[], &[]), Err(Error::EmptyInput)));
        let mut rng = prng(6);
        let p: Vec<f64> = (0..1000).map(|_| rng.gen::<f64>()).collect();
        let q: Vec<f64> = (0..1000).map(|_| rng.gen::<f64>()).collect();
        let mut s = 0.0;
        for i in 0..1000 {
            s += (p[i] - q[i]).abs();
        }
        assert!((mae(&p, &q).unwrap() - s / 1000.0).abs() <= 1e-12);
    }

    proptest! {
        #[test]
        fn roc_invariants(data in proptest::collection::vec((0u8..10, any::<bool>()), 2..60)) {
            let scores: Vec<f64> = data.iter().map(|d| f64::from(d.0)).collect();
            let labels: Vec<bool> = data.iter().map(|d| d.1).collect();
            prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
            let (curve, auc) = roc_auc(&scores, &labels).unwrap();
            prop_assert!((0.0..=1.0).contains(&auc));
            prop_assert!(curve.points.windows(2).all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
            let warped: Vec<f64> = scores.iter().map(|s| (s * 0.3).exp() - 7.0).collect();
            prop_assert_eq!(auc, roc_auc(&warped, &labels).unwrap().1);
            prop_assert_eq!(auc, pair_count_auc(&scores, &labels));
        }

        #[test]
        fn self_confusion_is_perfect(y in proptest::collection::vec(0usize..5, 1..50)) {
            prop_assert_eq!(accuracy(&confusion(&y, &y, 5).unwrap()).unwrap(), 1.0);
        }
    }
}
