//! RUL targets, health-state labels, PCA degradation views and prediction smoothing.

mod pca;

pub use pca::PcaModel;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const SETTINGS: usize = 3;
pub const SENSORS: usize = 21;

/// Sensor symbols of the turbofan simulation outputs, in column order.
pub const SENSOR_NAMES: [&str; SENSORS] = [
    "T2", "T24", "T30", "T50", "P2", "P15", "P30", "Nf", "Nc", "epr", "Ps30", "phi", "NRf",
    "NRc", "BPR", "farB", "htBleed", "Nf_dmd", "PCNfR_dmd", "W31", "W32",
];

/// One operating cycle of a run-to-failure unit.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle: u32,
    pub settings: [f64; SETTINGS],
    pub sensors: Vec<f64>,
}

/// One machine observed from first cycle to failure.
#[derive(Debug, Clone, PartialEq)]
pub struct RunToFailureUnit {
    pub unit_id: u32,
    pub cycles: Vec<CycleRecord>,
}

impl RunToFailureUnit {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn sensor_count(&self) -> usize {
        self.cycles.first().map_or(0, |c| c.sensors.len())
    }

    /// Cycles must count up from 1 without gaps and share one sensor width.
    pub fn validate(&self) -> Result<()> {
        let width = self.sensor_count();
        for (i, c) in self.cycles.iter().enumerate() {
            if c.cycle as usize != i + 1 {
                return Err(Error::NonConsecutiveCycles(self.unit_id));
            }
            if c.sensors.len() != width {
                return Err(Error::ShapeMismatch(format!(
                    "unit {} cycle {} has {} sensors, expected {width}",
                    self.unit_id,
                    c.cycle,
                    c.sensors.len()
                )));
            }
        }
        Ok(())
    }

    pub fn sensor_series(&self, sensor: usize) -> Vec<f64> {
        self.cycles.iter().map(|c| c.sensors[sensor]).collect()
    }

    /// Row-per-cycle sensor matrix.
    pub fn sensor_rows(&self) -> Vec<Vec<f64>> {
        self.cycles.iter().map(|c| c.sensors.clone()).collect()
    }
}

/// Shape of the remaining-useful-life target over a unit's life.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RulModel {
    Linear,
    /// Constant at `knee` until the linear decline drops below it.
    Piecewise { knee: u32 },
    /// `L (1 - (t/L)^p)`: slow early decline that accelerates toward failure.
    Polynomial { exponent: f64 },
}

impl RulModel {
    pub const DEFAULT_KNEE: u32 = 125;
    pub const DEFAULT_EXPONENT: f64 = 3.0;
}

/// Target RUL at `t = 0..L-1`, with `t = 0` the first observed cycle.
pub fn rul_target(life_length: usize, model: RulModel) -> Result<Vec<f64>> {
    if life_length < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: life_length,
        });
    }
    let l = life_length as f64;
    let target = (0..life_length).map(|t| {
        let remaining = l - t as f64;
        match model {
            RulModel::Linear => remaining,
            RulModel::Piecewise { knee } => remaining.min(f64::from(knee)),
            RulModel::Polynomial { exponent } => l * (1.0 - (t as f64 / l).powf(exponent)),
        }
    });
    match model {
        RulModel::Piecewise { knee: 0 } => Err(Error::Config("knee must be at least 1".into())),
        RulModel::Polynomial { exponent } if !(exponent > 1.0) => {
            Err(Error::Config(format!("exponent {exponent} must exceed 1")))
        }
        _ => Ok(target.collect()),
    }
}

pub fn rul_from_failure_time(t_f: f64, t_c: f64) -> Result<f64> {
    if t_f < t_c {
        return Err(Error::NegativeRul { t_f, t_c });
    }
    Ok(t_f - t_c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HealthLabel {
    Healthy,
    Faulty,
    Unlabeled,
}

/// First `k` snapshots healthy, last `k` faulty, the rest unlabeled.
pub fn health_labels(snapshot_count: usize, k: usize) -> Result<Vec<HealthLabel>> {
    if k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    if snapshot_count < 2 * k {
        return Err(Error::LifeTooShort {
            count: snapshot_count,
            k,
        });
    }
    Ok((0..snapshot_count)
        .map(|i| {
            if i < k {
                HealthLabel::Healthy
            } else if i >= snapshot_count - k {
                HealthLabel::Faulty
            } else {
                HealthLabel::Unlabeled
            }
        })
        .collect())
}

/// Least-squares polynomial of `degree` through `(i, predictions[i])`, evaluated at each index.
pub fn rul_smooth(predictions: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = predictions.len();
    if n <= degree {
        return Err(Error::TooShort {
            needed: degree + 1,
            got: n,
        });
    }
    // abscissa mapped to [-1, 1] keeps the Vandermonde system well conditioned
    let scale = if n > 1 { (n - 1) as f64 / 2.0 } else { 1.0 };
    let u = |i: usize| (i as f64 - scale) / scale;
    let vander = DMatrix::from_fn(n, degree + 1, |r, c| u(r).powi(c as i32));
    let y = DVector::from_column_slice(predictions);
    let coef = vander
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::DegenerateData(e.to_string()))?;
    Ok((vander * coef).iter().copied().collect())
}

/// Sum of absolute steps between consecutive values.
pub fn total_variation(series: &[f64]) -> f64 {
    series.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian, prng};
    use proptest::prelude::*;

    #[test]
    fn rul_target_examples() {
        let lin = rul_target(10, RulModel::Linear).unwrap();
        assert_eq!(lin, (1..=10).rev().map(f64::from).collect::<Vec<_>>());
        let pw = rul_target(200, RulModel::Piecewise { knee: 125 }).unwrap();
        assert!(pw[..75].iter().all(|&v| v == 125.0));
        assert_eq!(pw[75..], (1..=125).rev().map(f64::from).collect::<Vec<_>>()[..]);
        let poly = rul_target(100, RulModel::Polynomial { exponent: 3.0 }).unwrap();
        assert!((poly[50] - 87.5).abs() < 1e-12);
        assert!(rul_target(1, RulModel::Linear).is_err());
        assert!(rul_target(5, RulModel::Polynomial { exponent: 1.0 }).is_err());
    }

    #[test]
    fn failure_time_examples() {
        assert_eq!(rul_from_failure_time(362.0, 0.0).unwrap(), 362.0);
        assert_eq!(rul_from_failure_time(7.0, 7.0).unwrap(), 0.0);
        assert_eq!(rul_from_failure_time(100.5, 40.25).unwrap(), 60.25);
        assert!(matches!(rul_from_failure_time(1.0, 2.0), Err(Error::NegativeRul { .. })));
    }

    #[test]
    fn health_label_examples() {
        let count = |v: &[HealthLabel], l| v.iter().filter(|&&x| x == l).count();
        let l = health_labels(200, 80).unwrap();
        assert_eq!(count(&l, HealthLabel::Healthy), 80);
        assert_eq!(count(&l, HealthLabel::Unlabeled), 40);
        assert_eq!(count(&l, HealthLabel::Faulty), 80);
        assert_eq!(l[79], HealthLabel::Healthy);
        assert_eq!(l[120], HealthLabel::Faulty);
        let l = health_labels(160, 80).unwrap();
        assert_eq!(count(&l, HealthLabel::Unlabeled), 0);
        assert!(matches!(health_labels(100, 80), Err(Error::LifeTooShort { count: 100, k: 80 })));
        assert_eq!(count(&health_labels(60, 25).unwrap(), HealthLabel::Faulty), 25);
    }

    #[test]
    fn smoothing_examples() {
        let cubic: Vec<f64> = (0..50)
            .map(|i| {
                let t = i as f64;
                0.001 * t * t * t - 0.05 * t * t + t + 200.0
            })
            .collect();
        let s = rul_smooth(&cubic, 3).unwrap();
        assert!(cubic.iter().zip(&s).all(|(a, b)| (a - b).abs() <= 1e-8));
        assert!(rul_smooth(&[9.0; 12], 5).unwrap().iter().all(|v| (v - 9.0).abs() < 1e-10));
        assert!(matches!(rul_smooth(&[1.0, 2.0], 3), Err(Error::TooShort { .. })));

        let mut rng = prng(21);
        let y: Vec<f64> = (0..200).map(|i| 150.0 - 0.7 * i as f64 + 3.0 * gaussian(&mut rng)).collect();
        let fit = rul_smooth(&y, 1).unwrap();
        let slope = (fit[199] - fit[0]) / 199.0;
        // closed-form regression slope
        let n = 200.0;
        let mx = 99.5;
        let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = y.iter().enumerate().map(|(i, v)| (i as f64 - mx) * (v - my)).sum();
        let sxx: f64 = (0..200).map(|i| (i as f64 - mx).powi(2)).sum();
        assert!((slope - sxy / sxx).abs() < 1e-9);
        assert!((slope + 0.7).abs() <= 0.05 * 0.7);
    }

    #[test]
    fn total_variation_counts_steps() {
        assert_eq!(total_variation(&[1.0, 3.0, 2.0, 2.0]), 3.0);
        assert_eq!(total_variation(&[5.0]), 0.0);
    }

    proptest! {
        #[test]
        fn targets_nonincreasing(l in 2usize..400, knee in 1u32..200, p in 1.01f64..6.0) {
            for model in [RulModel::Linear, RulModel::Piecewise { knee }, RulModel::Polynomial { exponent: p }] {
                let t = rul_target(l, model).unwrap();
                prop_assert_eq!(t.len(), l);
                prop_assert!(t.windows(2).all(|w| w[1] <= w[0]));
                let polynomial = matches!(model, RulModel::Polynomial { .. });
                prop_assert!(*t.last().unwrap() <= 1.0 + 1e-12 || polynomial);
                prop_assert!(*t.last().unwrap() > 0.0);
            }
            let lin = rul_target(l, RulModel::Linear).unwrap();
            let poly = rul_target(l, RulModel::Polynomial { exponent: p }).unwrap();
            prop_assert!(poly.iter().zip(&lin).all(|(a, b)| a >= &(b - 1e-9)));
        }

        #[test]
        fn labels_are_exclusive(n in 2usize..300, k in 1usize..100) {
            prop_assume!(n >= 2 * k);
            let l = health_labels(n, k).unwrap();
            prop_assert_eq!(l.len(), n);
            prop_assert_eq!(l.iter().filter(|&&x| x == HealthLabel::Healthy).count(), k);
            prop_assert_eq!(l.iter().filter(|&&x| x == HealthLabel::Faulty).count(), k);
        }
    }
}
