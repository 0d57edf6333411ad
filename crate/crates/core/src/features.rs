//! Classic and trigonometric health features of vibration snapshots, and
//! cumulative descriptors of feature series.

use crate::error::{Error, Result};
use crate::spectral::wavelet::{dwt_decompose, Wavelet};

/// Every per-snapshot scalar the toolkit extracts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub entropy: f64,
    pub energy: f64,
    pub rms: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub upper_bound: f64,
    pub std_asinh: f64,
    pub std_atan: f64,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 8] = [
        "entropy",
        "energy",
        "rms",
        "skewness",
        "kurtosis",
        "upper_bound",
        "std_asinh",
        "std_atan",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.entropy,
            self.energy,
            self.rms,
            self.skewness,
            self.kurtosis,
            self.upper_bound,
            self.std_asinh,
            self.std_atan,
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Self::NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values()[i])
    }
}

/// A named feature tracked over a unit's life, one value per snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSeries {
    pub feature_name: String,
    pub values: Vec<f64>,
}

impl FeatureSeries {
    pub fn new(feature_name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            feature_name: feature_name.into(),
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Which wavelet band the trigonometric features are computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientBand {
    #[default]
    Approximation,
    /// Detail band of the deepest level.
    Detail,
}

pub fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (energy(x) / x.len() as f64).sqrt()
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample (n - 1) standard deviation.
pub fn sample_std(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: x.len(),
        });
    }
    let m = mean(x);
    let ss: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    Ok((ss / (x.len() - 1) as f64).sqrt())
}

fn standardized_moment(x: &[f64], power: i32) -> Result<f64> {
    let sigma = sample_std(x)?;
    if sigma == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let m = mean(x);
    let sum: f64 = x.iter().map(|v| (v - m).powi(power)).sum();
    Ok(sum / ((x.len() - 1) as f64 * sigma.powi(power)))
}

/// `sum (x - mean)^3 / ((n - 1) sigma^3)` with sigma the sample deviation.
pub fn skewness(x: &[f64]) -> Result<f64> {
    standardized_moment(x, 3)
}

/// `sum (x - mean)^4 / ((n - 1) sigma^4)`.
pub fn kurtosis(x: &[f64]) -> Result<f64> {
    standardized_moment(x, 4)
}

/// `max + (max - min) / (2 (n - 1))`.
pub fn upper_bound(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: x.len(),
        });
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    Ok(hi + 0.5 * (hi - lo) / (x.len() - 1) as f64)
}

/// Shannon entropy of the normalized energy distribution `p_j = x_j^2 / sum x^2`.
pub fn entropy(x: &[f64]) -> Result<f64> {
    let e = energy(x);
    if e <= 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(x.iter()
        .map(|v| v * v / e)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum())
}

pub fn std_asinh(x: &[f64]) -> Result<f64> {
    let t: Vec<f64> = x.iter().map(|v| v.asinh()).collect();
    sample_std(&t)
}

pub fn std_atan(x: &[f64]) -> Result<f64> {
    let t: Vec<f64> = x.iter().map(|v| v.atan()).collect();
    sample_std(&t)
}

/// Trigonometric features on the level-4 db4 approximation of a snapshot.
pub fn extract_trig_features(snapshot: &[f64]) -> Result<(f64, f64)> {
    extract_trig_features_on(snapshot, CoefficientBand::Approximation)
}

pub fn extract_trig_features_on(snapshot: &[f64], band: CoefficientBand) -> Result<(f64, f64)> {
    let dec = dwt_decompose(snapshot, Wavelet::Db4, 4)?;
    let coeffs = match band {
        CoefficientBand::Approximation => &dec.approximation,
        CoefficientBand::Detail => &dec.details[0],
    };
    Ok((std_asinh(coeffs)?, std_atan(coeffs)?))
}

/// All eight features of one snapshot.
///
/// Degenerate snapshots (zero energy or zero variance) yield 0 for the
/// entropy, skewness and kurtosis slots instead of failing.
pub fn extract_all(snapshot: &[f64], band: CoefficientBand) -> Result<FeatureVector> {
    let (std_asinh, std_atan) = extract_trig_features_on(snapshot, band)?;
    let or_zero = |r: Result<f64>| match r {
        Ok(v) => Ok(v),
        Err(Error::ZeroEnergy | Error::ZeroVariance) => Ok(0.0),
        Err(e) => Err(e),
    };
    Ok(FeatureVector {
        entropy: or_zero(entropy(snapshot))?,
        energy: energy(snapshot),
        rms: rms(snapshot),
        skewness: or_zero(skewness(snapshot))?,
        kurtosis: or_zero(kurtosis(snapshot))?,
        upper_bound: upper_bound(snapshot)?,
        std_asinh,
        std_atan,
    })
}

/// Cumulative descriptor `S_n / sqrt(|S_n|)` of the running sum `S_n`; 0 where `S_n = 0`.
pub fn cumulative(series: &FeatureSeries) -> FeatureSeries {
    let mut running = 0.0;
    let values = series
        .values
        .iter()
        .map(|&f| {
            running += f;
            if running == 0.0 {
                0.0
            } else {
                running / running.abs().sqrt()
            }
        })
        .collect();
    FeatureSeries {
        feature_name: format!("C-{}", series.feature_name),
        values,
    }
}
