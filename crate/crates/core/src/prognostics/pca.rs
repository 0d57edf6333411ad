use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Principal axes of a (optionally standardized) data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// Per-column divisor; 1 for unstandardized fits and for constant columns.
    pub scale: Vec<f64>,
    /// Orthonormal rows ordered by explained variance, descending.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn fit(rows: &[Vec<f64>], standardize: bool) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::DegenerateData(format!("{n} rows; PCA needs at least 2")));
        }
        let d = rows[0].len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::ShapeMismatch("rows must share a positive width".into()));
        }
        let mean: Vec<f64> = (0..d)
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        let scale: Vec<f64> = (0..d)
            .map(|j| {
                if !standardize {
                    return 1.0;
                }
                let var = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / (n - 1) as f64;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let z = DMatrix::from_fn(n, d, |i, j| (rows[i][j] - mean[j]) / scale[j]);
        let cov = (z.transpose() * &z) / (n - 1) as f64;
        let eig = SymmetricEigen::new(cov);

        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let mut components = Vec::with_capacity(d);
        let mut explained_variance = Vec::with_capacity(d);
        for &k in &order {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let pivot = v
                .iter()
                .copied()
                .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
            if pivot < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            components.push(v);
            explained_variance.push(eig.eigenvalues[k].max(0.0));
        }
        Ok(Self {
            mean,
            scale,
            components,
            explained_variance,
        })
    }

    pub fn dims(&self) -> usize {
        self.mean.len()
    }

    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        let total: f64 = self.explained_variance.iter().sum();
        self.explained_variance
            .iter()
            .map(|v| if total > 0.0 { v / total } else { 0.0 })
            .collect()
    }

    /// Projects rows onto the first `m` components.
    pub fn transform(&self, rows: &[Vec<f64>], m: usize) -> Result<Vec<Vec<f64>>> {
        if m > self.components.len() {
            return Err(Error::Config(format!(
                "{m} components requested, model has {}",
                self.components.len()
            )));
        }
        rows.iter()
            .map(|r| {
                if r.len() != self.dims() {
                    return Err(Error::ShapeMismatch(format!(
                        "row of width {} against a {}-dimensional model",
                        r.len(),
                        self.dims()
                    )));
                }
                let z: Vec<f64> = r
                    .iter()
                    .zip(&self.mean)
                    .zip(&self.scale)
                    .map(|((x, mu), s)| (x - mu) / s)
                    .collect();
                Ok(self.components[..m]
                    .iter()
                    .map(|c| c.iter().zip(&z).map(|(a, b)| a * b).sum())
                    .collect())
            })
            .collect()
    }

    /// Maps projected scores back to the original coordinates.
    pub fn inverse_transform(&self, scores: &[Vec<f64>]) -> Vec<Vec<f64>> {
        scores
            .iter()
            .map(|s| {
                (0..self.dims())
                    .map(|j| {
                        let z: f64 = s.iter().zip(&self.components).map(|(v, c)| v * c[j]).sum();
                        z * self.scale[j] + self.mean[j]
                    })
                    .collect()
            })
            .collect()
    }
}
