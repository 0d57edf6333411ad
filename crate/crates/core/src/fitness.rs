//! Prognostic feature fitness: monotonicity and trendability.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FitnessScore {
    pub feature_name: String,
    pub monotonicity: f64,
    pub trendability: f64,
}

fn sign_counts(diffs: impl Iterator<Item = f64>) -> (usize, usize) {
    diffs.fold((0, 0), |(pos, neg), d| {
        if d > 0.0 {
            (pos + 1, neg)
        } else if d < 0.0 {
            (pos, neg + 1)
        } else {
            (pos, neg)
        }
    })
}

/// `|#(dx > 0) - #(dx < 0)| / (n - 1)`; flat steps count toward neither side.
pub fn monotonicity(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let (pos, neg) = sign_counts(series.windows(2).map(|w| w[1] - w[0]));
    Ok(pos.abs_diff(neg) as f64 / (n - 1) as f64)
}

/// Per-series trend statistic `#(dx > 0)/(n-1) + #(d2x > 0)/(n-2)`.
pub fn trend_statistic(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let first: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let (rising, _) = sign_counts(first.iter().copied());
    let (convex, _) = sign_counts(first.windows(2).map(|w| w[1] - w[0]));
    Ok(rising as f64 / (n - 1) as f64 + convex as f64 / (n - 2) as f64)
}

/// `1 - std(t_i)` over a population, with the population (divide-by-N) deviation.
pub fn trendability<S: AsRef<[f64]>>(population: &[S]) -> Result<f64> {
    if population.is_empty() {
        return Err(Error::EmptyInput);
    }
    let stats = population
        .iter()
        .map(|s| trend_statistic(s.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let n = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / n;
    let var = stats.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
    Ok(1.0 - var.sqrt())
}

/// Scores every feature: monotonicity averaged over the population members,
/// trendability across the population. Output is sorted by feature name.
pub fn fitness_table(features: &BTreeMap<String, Vec<Vec<f64>>>) -> Result<Vec<FitnessScore>> {
    features
        .iter()
        .map(|(name, population)| {
            if population.is_empty() {
                return Err(Error::EmptyInput);
            }
            let mono = population
                .iter()
                .map(|s| monotonicity(s))
                .collect::<Result<Vec<_>>>()?;
            Ok(FitnessScore {
                feature_name: name.clone(),
                monotonicity: mono.iter().sum::<f64>() / mono.len() as f64,
                trendability: trendability(population)?,
            })
        })
        .collect()
}
