use std::path::Path;

use super::manifest::{DatasetManifest, RulSettings, Split, TaskKind};
use crate::error::{Error, Result};
use crate::features::{cumulative, extract_all, CoefficientBand, FeatureSeries, FeatureVector};
use crate::io::{load_cmapss_text, load_tensor};
use crate::nn::{Dataset, LayerSpec, LossKind, Tensor};
use crate::prognostics::{health_labels, rul_target, HealthLabel, RulModel, RunToFailureUnit};
use crate::signals::{savitzky_golay, segment, signal_to_image, Signal};
use crate::spectral::{cwt, dataset_scales, scaleogram_resize, DEFAULT_OMEGA0};

pub const IMAGE_SIDE: usize = 64;
pub const SCALEOGRAM_SIDE: usize = 128;

/// Non-overlapping `side x side` images of a signal as `[N, 1, side, side]`.
pub fn signal_images(samples: &[f64], side: usize) -> Result<Tensor<f32>> {
    let chunks = segment(samples, side * side);
    if chunks.is_empty() {
        return Err(Error::TooShort {
            needed: side * side,
            got: samples.len(),
        });
    }
    let mut data = Vec::with_capacity(chunks.len() * side * side);
    for chunk in &chunks {
        data.extend(signal_to_image(chunk, side)?.pixels.iter().map(|&p| p as f32));
    }
    Tensor::from_vec(&[chunks.len(), 1, side, side], data)
}

/// Scaleogram of one snapshot on the dataset scale grid, resized to `side x side`.
pub fn scaleogram_image(samples: &[f64], side: usize) -> Result<Vec<f64>> {
    let s = cwt(samples, &dataset_scales(samples.len()), DEFAULT_OMEGA0)?;
    Ok(scaleogram_resize(&s, side, side)?.magnitudes)
}

/// Multi-channel scaleogram sample `[C, side, side]`, divided by its largest magnitude.
pub fn scaleogram_sample(channels: &[&[f64]], side: usize) -> Result<Vec<f32>> {
    let mut all = Vec::with_capacity(channels.len() * side * side);
    for ch in channels {
        all.extend(scaleogram_image(ch, side)?);
    }
    let max = all.iter().copied().fold(0.0f64, f64::max);
    let scale = if max > 0.0 { 1.0 / max } else { 1.0 };
    Ok(all.into_iter().map(|v| (v * scale) as f32).collect())
}

/// Healthy (first `k`) and faulty (last `k`) scaleogram samples of one run,
/// each `[k, channels, side, side]`.
pub fn scaleogram_health_tensors(channels: &[&[Signal]], k: usize, side: usize) -> Result<(Tensor<f32>, Tensor<f32>)> {
    let n = channels.first().map_or(0, |c| c.len());
    if channels.is_empty() || channels.iter().any(|c| c.len() != n) {
        return Err(Error::ShapeMismatch("channels must hold the same number of snapshots".into()));
    }
    let labels = health_labels(n, k)?;
    let mut healthy = Vec::new();
    let mut faulty = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        let target = match label {
            HealthLabel::Healthy => &mut healthy,
            HealthLabel::Faulty => &mut faulty,
            HealthLabel::Unlabeled => continue,
        };
        let snaps: Vec<&[f64]> = channels.iter().map(|c| c[i].samples()).collect();
        target.extend(scaleogram_sample(&snaps, side)?);
    }
    let shape = [k, channels.len(), side, side];
    Ok((Tensor::from_vec(&shape, healthy)?, Tensor::from_vec(&shape, faulty)?))
}

/// Sliding windows ending at every cycle of a unit, `[L, window, sensors]`,
/// left-padded with `mask_value` rows, with piecewise RUL targets `[L, 1]`.
pub fn rul_windows(unit: &RunToFailureUnit, settings: &RulSettings) -> Result<(Vec<f32>, Vec<f32>)> {
    let l = unit.len();
    let width = unit.sensor_count();
    let targets = rul_target(l, RulModel::Piecewise { knee: settings.knee })?;
    let w = settings.window;
    let mut inputs = Vec::with_capacity(l * w * width);
    for end in 0..l {
        for pos in (end + 1) as isize - w as isize..=end as isize {
            if pos < 0 {
                inputs.extend(std::iter::repeat(settings.mask_value as f32).take(width));
            } else {
                inputs.extend(unit.cycles[pos as usize].sensors.iter().map(|&v| v as f32));
            }
        }
    }
    Ok((inputs, targets.into_iter().map(|t| t as f32).collect()))
}

pub fn rul_dataset(units: &[RunToFailureUnit], settings: &RulSettings) -> Result<Dataset<f32>> {
    let width = units.first().ok_or(Error::EmptyInput)?.sensor_count();
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for u in units {
        let (x, y) = rul_windows(u, settings)?;
        inputs.extend(x);
        targets.extend(y);
    }
    let n = targets.len();
    Dataset::new(
        Tensor::from_vec(&[n, settings.window, width], inputs)?,
        Tensor::from_vec(&[n, 1], targets)?,
    )
}

/// Per-sensor mean and sample standard deviation over every cycle; constant
/// sensors get scale 1.
pub fn sensor_standardization(units: &[RunToFailureUnit]) -> Result<(Vec<f64>, Vec<f64>)> {
    let width = units.first().ok_or(Error::EmptyInput)?.sensor_count();
    let rows: Vec<&Vec<f64>> = units.iter().flat_map(|u| u.cycles.iter().map(|c| &c.sensors)).collect();
    let n = rows.len() as f64;
    if rows.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: rows.len() });
    }
    let mean: Vec<f64> = (0..width).map(|s| rows.iter().map(|r| r[s]).sum::<f64>() / n).collect();
    let std = (0..width)
        .map(|s| {
            let var = rows.iter().map(|r| (r[s] - mean[s]).powi(2)).sum::<f64>() / (n - 1.0);
            let sd = var.sqrt();
            if sd > 1e-12 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    Ok((mean, std))
}

/// Loss implied by a manifest: two classes use one sigmoid output, more use
/// softmax, RUL uses squared error.
pub fn default_loss(manifest: &DatasetManifest) -> LossKind {
    match manifest.task {
        TaskKind::RulRegression => LossKind::Mse,
        _ if manifest.classes.len() == 2 => LossKind::Bce,
        _ => LossKind::Cce,
    }
}

/// One split of a manifest, loaded into memory.
#[derive(Debug, Clone)]
pub struct LoadedSplit {
    pub dataset: Dataset<f32>,
    /// Class of each row (classification tasks only).
    pub labels: Vec<usize>,
    /// Run-to-failure units (RUL task only).
    pub units: Vec<RunToFailureUnit>,
}

fn encode_labels(labels: &[usize], classes: usize, loss: LossKind) -> Result<Tensor<f32>> {
    let n = labels.len();
    if loss == LossKind::Bce && classes == 2 {
        return Tensor::from_vec(&[n, 1], labels.iter().map(|&l| l as f32).collect());
    }
    let mut data = vec![0.0f32; n * classes];
    for (i, &l) in labels.iter().enumerate() {
        data[i * classes + l] = 1.0;
    }
    Tensor::from_vec(&[n, classes], data)
}

/// Units of a RUL manifest that fall in `split`.
pub fn rul_units(manifest: &DatasetManifest, base: &Path, split: Split) -> Result<Vec<RunToFailureUnit>> {
    let mut out = Vec::new();
    for entry in &manifest.samples {
        for unit in load_cmapss_text(&base.join(&entry.path))? {
            let key = format!("{}#{}", entry.path, unit.unit_id);
            if manifest.split.assign(manifest.seed, &key) == split {
                out.push(unit);
            }
        }
    }
    Ok(out)
}

pub fn load_split(manifest: &DatasetManifest, base: &Path, split: Split, loss: LossKind) -> Result<LoadedSplit> {
    if manifest.task == TaskKind::RulRegression {
        let units = rul_units(manifest, base, split)?;
        if units.is_empty() {
            return Err(Error::TooSmall(format!("no units fall in the {} split", split.name())));
        }
        let dataset = rul_dataset(&units, &manifest.rul_settings())?;
        return Ok(LoadedSplit {
            dataset,
            labels: Vec::new(),
            units,
        });
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut sample_shape: Option<Vec<usize>> = None;
    for entry in &manifest.samples {
        let t = load_tensor(&base.join(&entry.path))?;
        if t.rank() < 2 {
            return Err(Error::ShapeMismatch(format!("{} is not a batch of samples", entry.path)));
        }
        match &sample_shape {
            Some(s) if s[..] != t.shape()[1..] => {
                return Err(Error::ShapeMismatch(format!(
                    "{} holds samples of shape {:?}, expected {s:?}",
                    entry.path,
                    &t.shape()[1..]
                )))
            }
            None => sample_shape = Some(t.shape()[1..].to_vec()),
            _ => {}
        }
        let label = entry.label.expect("validated manifest");
        for r in 0..t.batch() {
            if manifest.split.assign(manifest.seed, &format!("{}#{r}", entry.path)) == split {
                rows.extend_from_slice(t.sample(r));
                labels.push(label);
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::TooSmall(format!("no samples fall in the {} split", split.name())));
    }
    let mut shape = vec![labels.len()];
    shape.extend(sample_shape.expect("at least one sample"));
    let dataset = Dataset::new(
        Tensor::from_vec(&shape, rows)?,
        encode_labels(&labels, manifest.classes.len(), loss)?,
    )?;
    Ok(LoadedSplit {
        dataset,
        labels,
        units: Vec::new(),
    })
}

/// Standardization layer fitted on training units, passing padding rows through.
pub fn standardize_layer(units: &[RunToFailureUnit], settings: &RulSettings) -> Result<LayerSpec> {
    let (shift, scale) = sensor_standardization(units)?;
    Ok(LayerSpec::Standardize {
        shift,
        scale,
        mask_value: Some(settings.mask_value),
    })
}

/// Order of the smoothing and cumulation steps applied to a feature series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransformOrder {
    #[default]
    SmoothThenCumulate,
    CumulateThenSmooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SeriesTransform {
    /// Savitzky-Golay `(window, order)`.
    pub smooth: Option<(usize, usize)>,
    pub cumulative: bool,
    pub order: TransformOrder,
}

impl SeriesTransform {
    pub fn apply(&self, series: &FeatureSeries) -> Result<FeatureSeries> {
        let smooth = |s: FeatureSeries| -> Result<FeatureSeries> {
            match self.smooth {
                Some((w, o)) => Ok(FeatureSeries::new(s.feature_name.clone(), savitzky_golay(&s.values, w, o)?)),
                None => Ok(s),
            }
        };
        let cumulate = |s: FeatureSeries| if self.cumulative { cumulative(&s) } else { s };
        match self.order {
            TransformOrder::SmoothThenCumulate => Ok(cumulate(smooth(series.clone())?)),
            TransformOrder::CumulateThenSmooth => smooth(cumulate(series.clone())),
        }
    }
}

/// Every feature tracked over a run, one series per feature name.
pub fn run_features(snapshots: &[Signal], band: CoefficientBand) -> Result<Vec<FeatureSeries>> {
    let vectors = snapshots
        .iter()
        .map(|s| extract_all(s.samples(), band))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureVector::NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| FeatureSeries::new(*name, vectors.iter().map(|v| v.values()[i]).collect()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synth_turbofan_fleet, FleetSimConfig};

    #[test]
    fn twelve_thousand_samples_make_three_images() {
        let x: Vec<f64> = (0..12_288).map(|i| (i as f64 * 0.01).sin()).collect();
        let t = signal_images(&x, 64).unwrap();
        assert_eq!(t.shape(), &[3, 1, 64, 64]);
        assert!(t.data().iter().all(|&p| (0.0..=1.0).contains(&p)));
        assert!(signal_images(&x[..4000], 64).is_err());
    }

    #[test]
    fn scaleogram_samples_are_max_normalized() {
        let a: Vec<f64> = (0..512).map(|i| (i as f64 * 0.3).sin()).collect();
        let b: Vec<f64> = (0..512).map(|i| 2.0 * (i as f64 * 0.05).sin()).collect();
        let s = scaleogram_sample(&[&a, &b], 32).unwrap();
        assert_eq!(s.len(), 2 * 32 * 32);
        let max = s.iter().copied().fold(0.0f32, f32::max);
        assert!((max - 1.0).abs() < 1e-6);
        assert!(s.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn windows_pad_and_target() {
        let fleet = synth_turbofan_fleet(&FleetSimConfig {
            units: 1,
            seed: 1,
            ..FleetSimConfig::default()
        })
        .unwrap();
        let unit = &fleet[0];
        let settings = RulSettings { window: 5, knee: 125, mask_value: -10.0 };
        let (x, y) = rul_windows(unit, &settings).unwrap();
        let w = unit.sensor_count();
        assert_eq!(y.len(), unit.len());
        assert_eq!(x.len(), unit.len() * 5 * w);
        // first window: four padding rows then cycle 1
        assert!(x[..4 * w].iter().all(|&v| v == -10.0));
        assert_eq!(x[4 * w], unit.cycles[0].sensors[0] as f32);
        assert_eq!(*y.last().unwrap(), 1.0);
        assert_eq!(y[0], 125.0f32.min(unit.len() as f32));
    }

    #[test]
    fn transforms_compose_in_either_order() {
        let s = FeatureSeries::new("rms", (0..30).map(|i| 1.0 + (i as f64 * 0.7).sin().abs()).collect());
        let a = SeriesTransform { smooth: Some((7, 2)), cumulative: true, order: TransformOrder::SmoothThenCumulate };
        let b = SeriesTransform { order: TransformOrder::CumulateThenSmooth, ..a };
        let (ra, rb) = (a.apply(&s).unwrap(), b.apply(&s).unwrap());
        assert_eq!(ra.feature_name, "C-rms");
        assert_eq!(rb.feature_name, "C-rms");
        assert_ne!(ra.values, rb.values);
        assert_eq!(SeriesTransform::default().apply(&s).unwrap(), s);
    }
}
