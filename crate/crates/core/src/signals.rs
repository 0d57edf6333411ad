//! Signal representation, segmentation, signal-to-image conversion and smoothing.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A uniformly sampled real-valued time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidSignal("no samples".into()));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidSignal(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// A square grayscale image with pixels in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

impl SignalImage {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }
}

/// Number of whole images of `image_pixels` samples that fit in a signal.
pub fn image_count(signal_length: usize, image_pixels: usize) -> usize {
    assert!(image_pixels >= 1, "image_pixels must be positive");
    signal_length / image_pixels
}

/// Splits a series into consecutive non-overlapping chunks; the remainder is dropped.
pub fn segment(samples: &[f64], chunk_len: usize) -> Vec<&[f64]> {
    assert!(chunk_len >= 1, "chunk_len must be positive");
    samples.chunks_exact(chunk_len).collect()
}

/// Reshapes a `side * side` chunk row-major and min-max scales it to `[0, 1]`.
///
/// A constant chunk has no range to scale against and maps to an all-0.5 image.
pub fn signal_to_image(chunk: &[f64], side: usize) -> Result<SignalImage> {
    let expected = side * side;
    if side == 0 || chunk.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: chunk.len(),
        });
    }
    let (min, max) = chunk
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let range = max - min;
    let pixels = if range > 0.0 && range.is_finite() {
        chunk
            .iter()
            .map(|&x| ((x - min) / range).clamp(0.0, 1.0))
            .collect()
    } else {
        vec![0.5; expected]
    };
    Ok(SignalImage {
        width: side,
        height: side,
        pixels,
    })
}

/// How the smoother treats the first and last half-window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EdgeMode {
    /// Fit one polynomial to the first (last) full window and evaluate it at the edge samples.
    #[default]
    Interp,
    /// Reflect the series about its end samples (`x[-k] = x[k]`) and filter the padded series.
    Mirror,
}

/// Savitzky-Golay smoothing with polynomial edge handling.
pub fn savitzky_golay(series: &[f64], window: usize, poly_order: usize) -> Result<Vec<f64>> {
    savitzky_golay_with(series, window, poly_order, EdgeMode::Interp)
}

pub fn savitzky_golay_with(
    series: &[f64],
    window: usize,
    poly_order: usize,
    edges: EdgeMode,
) -> Result<Vec<f64>> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::BadWindow(format!("window {window} must be odd")));
    }
    if poly_order >= window {
        return Err(Error::BadWindow(format!(
            "polynomial order {poly_order} must be below window {window}"
        )));
    }
    if series.len() < window {
        return Err(Error::BadWindow(format!(
            "series of length {} is shorter than window {window}",
            series.len()
        )));
    }
    let half = window / 2;
    let n = series.len();
    // Row r of `fit` maps the window samples to the fitted value at window position r.
    let fit = local_fit_matrix(window, poly_order);
    let center = fit.row(half);
    let mut out = vec![0.0; n];

    match edges {
        EdgeMode::Interp => {
            for (i, o) in out.iter_mut().enumerate().take(n - half).skip(half) {
                let w = &series[i - half..=i + half];
                *o = center.iter().zip(w).map(|(c, x)| c * x).sum();
            }
            let head = &series[..window];
            let tail = &series[n - window..];
            for r in 0..half {
                out[r] = fit.row(r).iter().zip(head).map(|(c, x)| c * x).sum();
                let rr = window - half + r;
                out[n - half + r] = fit.row(rr).iter().zip(tail).map(|(c, x)| c * x).sum();
            }
        }
        EdgeMode::Mirror => {
            let at = |k: isize| -> f64 {
                let last = n as isize - 1;
                let idx = if k < 0 {
                    -k
                } else if k > last {
                    2 * last - k
                } else {
                    k
                };
                series[idx.clamp(0, last) as usize]
            };
            for (i, o) in out.iter_mut().enumerate() {
                *o = center
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * at(i as isize + j as isize - half as isize))
                    .sum();
            }
        }
    }
    Ok(out)
}

/// Hat matrix of a least-squares polynomial fit over one window: `V (V^T V)^-1 V^T`.
fn local_fit_matrix(window: usize, order: usize) -> DMatrix<f64> {
    let half = (window / 2).max(1) as f64;
    let vander = DMatrix::from_fn(window, order + 1, |r, k| {
        ((r as f64 - (window / 2) as f64) / half).powi(k as i32)
    });
    let svd = vander.clone().svd(true, true);
    let pinv = svd
        .pseudo_inverse(1e-12)
        .expect("SVD computed with both factors");
    vander * pinv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian, prng};
    use proptest::prelude::*;

    #[test]
    fn image_count_examples() {
        assert_eq!(image_count(4096, 4096), 1);
        assert_eq!(image_count(4095, 4096), 0);
        assert_eq!(image_count(1_208_320, 4096), 295);
        assert_eq!(image_count(0, 4096), 0);
    }

    #[test]
    fn segment_examples() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let chunks = segment(&x, 4);
        assert_eq!(chunks.len(), 2);
        assert_eq!(chunks[0], &x[0..4]);
        assert_eq!(chunks[1], &x[4..8]);
        assert_eq!(segment(&x[..4], 4), vec![&x[..4]]);
        assert!(segment(&x[..3], 4).is_empty());
    }

    #[test]
    fn image_of_ramp() {
        let img = signal_to_image(&[0.0, 1.0, 2.0, 3.0], 2).unwrap();
        let expect = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        for (p, e) in img.pixels.iter().zip(expect) {
            assert!((p - e).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_chunk_is_half_gray() {
        let img = signal_to_image(&[3.0; 4], 2).unwrap();
        assert!(img.pixels.iter().all(|&p| p == 0.5));
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(matches!(
            signal_to_image(&[0.0; 5], 2),
            Err(Error::LengthMismatch {
                expected: 4,
                actual: 5
            })
        ));
    }

    #[test]
    fn image_matches_pixel_loop() {
        let mut rng = prng(11);
        let x: Vec<f64> = (0..4096).map(|_| gaussian(&mut rng)).collect();
        let img = signal_to_image(&x, 64).unwrap();
        let mut min = f64::MAX;
        let mut max = f64::MIN;
        for v in &x {
            min = min.min(*v);
            max = max.max(*v);
        }
        for i in 0..64 {
            for j in 0..64 {
                let want = (x[64 * i + j] - min) / (max - min);
                assert!((img.get(i, j) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn quadratic_is_a_fixed_point() {
        let x: Vec<f64> = (0..40)
            .map(|i| {
                let t = i as f64 * 0.1;
                2.0 * t * t + 1.0
            })
            .collect();
        let y = savitzky_golay(&x, 5, 2).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn constant_series_unchanged() {
        for mode in [EdgeMode::Interp, EdgeMode::Mirror] {
            let y = savitzky_golay_with(&[4.2; 30], 7, 3, mode).unwrap();
            assert!(y.iter().all(|v| (v - 4.2).abs() < 1e-12));
        }
    }

    #[test]
    fn smoothing_reduces_noise() {
        let mut rng = prng(5);
        let n = 1000;
        let clean: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / 250.0).sin())
            .collect();
        let noisy: Vec<f64> = clean.iter().map(|c| c + 0.3 * gaussian(&mut rng)).collect();
        let smooth = savitzky_golay(&noisy, 51, 3).unwrap();
        let rmse = |a: &[f64]| {
            (a.iter()
                .zip(&clean)
                .map(|(x, c)| (x - c).powi(2))
                .sum::<f64>()
                / n as f64)
                .sqrt()
        };
        assert!(rmse(&smooth) < rmse(&noisy));
    }

    #[test]
    fn bad_windows() {
        let x = [0.0; 10];
        assert!(matches!(savitzky_golay(&x, 4, 2), Err(Error::BadWindow(_))));
        assert!(matches!(savitzky_golay(&x, 5, 5), Err(Error::BadWindow(_))));
        assert!(matches!(savitzky_golay(&x, 11, 2), Err(Error::BadWindow(_))));
        assert!(matches!(savitzky_golay(&x, 0, 0), Err(Error::BadWindow(_))));
    }

    #[test]
    fn signal_validation() {
        assert!(Signal::new(vec![], 1.0).is_err());
        assert!(Signal::new(vec![1.0], 0.0).is_err());
        assert!(Signal::new(vec![f64::NAN], 1.0).is_err());
        assert_eq!(Signal::new(vec![1.0, 2.0], 2.0).unwrap().duration_s(), 1.0);
    }

    proptest! {
        #[test]
        fn image_count_is_floor(n in 0usize..50, p in 1usize..500, extra in 0usize..1000) {
            prop_assert_eq!(image_count(n * p, p), n);
            prop_assert!(image_count(n * p + extra, p) >= image_count(n * p, p));
        }

        #[test]
        fn segments_reproduce_prefix(x in proptest::collection::vec(-1e3f64..1e3, 0..200), c in 1usize..20) {
            let chunks = segment(&x, c);
            let joined: Vec<f64> = chunks.concat();
            prop_assert_eq!(chunks.len(), image_count(x.len(), c));
            prop_assert_eq!(&joined[..], &x[..chunks.len() * c]);
        }

        #[test]
        fn pixels_in_unit_interval(x in proptest::collection::vec(-1e6f64..1e6, 16)) {
            let img = signal_to_image(&x, 4).unwrap();
            prop_assert!(img.pixels.iter().all(|p| (0.0..=1.0).contains(p)));
            let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                prop_assert!(img.pixels.iter().any(|&p| p == 0.0));
                prop_assert!(img.pixels.iter().any(|&p| p == 1.0));
            }
        }

        #[test]
        fn smoothing_is_linear(
            x in proptest::collection::vec(-10f64..10.0, 30),
            y in proptest::collection::vec(-10f64..10.0, 30),
            a in -3f64..3.0,
            b in -3f64..3.0,
        ) {
            let combo: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = savitzky_golay(&combo, 9, 3).unwrap();
            let sx = savitzky_golay(&x, 9, 3).unwrap();
            let sy = savitzky_golay(&y, 9, 3).unwrap();
            for i in 0..30 {
                prop_assert!((lhs[i] - (a * sx[i] + b * sy[i])).abs() <= 1e-9);
            }
        }
    }
}
