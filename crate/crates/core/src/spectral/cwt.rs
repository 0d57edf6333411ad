//! Morlet continuous wavelet transform.
//!
//! The transform is discretized as a direct sum over a truncated support of
//! `+-ceil(4 s)` samples around each translation:
//!
//! ```text
//! W(s, tau) = s^-1/2 * sum_t x[t] * conj(psi((t - tau) / s)),
//! psi(u)    = pi^-1/4 * exp(j w0 u) * exp(-u^2 / 2)
//! ```
//!
//! [`cwt_direct`] evaluates that sum literally. [`cwt`] evaluates the same sum
//! as a zero-padded linear correlation through the FFT, which is what the
//! dataset builders use.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::fourier::{fft_complex, ifft_in_place};
use crate::error::{Error, Result};

pub const DEFAULT_OMEGA0: f64 = 6.0;
const SUPPORT_HALF_WIDTH: f64 = 4.0;

/// Magnitude of a wavelet transform over a (scale x time) grid, row = scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaleogram {
    pub scales: Vec<f64>,
    pub times: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl Scaleogram {
    pub fn rows(&self) -> usize {
        self.scales.len()
    }

    pub fn cols(&self) -> usize {
        self.times.len()
    }

    pub fn get(&self, scale_idx: usize, time_idx: usize) -> f64 {
        self.magnitudes[scale_idx * self.cols() + time_idx]
    }

    pub fn row(&self, scale_idx: usize) -> &[f64] {
        let c = self.cols();
        &self.magnitudes[scale_idx * c..(scale_idx + 1) * c]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.magnitudes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Index of the scale with the largest mean magnitude over `time_range`.
    pub fn dominant_scale(&self, time_range: std::ops::Range<usize>) -> usize {
        (0..self.rows())
            .map(|r| {
                let row = &self.row(r)[time_range.clone()];
                (r, row.iter().sum::<f64>() / row.len().max(1) as f64)
            })
            .fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            })
            .0
    }
}

/// `count` geometrically spaced scales from `min` to `max` inclusive.
pub fn log_scales(min: f64, max: f64, count: usize) -> Vec<f64> {
    assert!(min > 0.0 && max >= min && count >= 1);
    if count == 1 {
        return vec![min];
    }
    let ratio = (max / min).ln() / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i == count - 1 {
                max
            } else {
                min * (ratio * i as f64).exp()
            }
        })
        .collect()
}

/// Scale grid used for scaleogram datasets: 128 log-spaced scales over `2..=len/4`.
pub fn dataset_scales(signal_len: usize) -> Vec<f64> {
    log_scales(2.0, (signal_len as f64 / 4.0).max(2.0), 128)
}

/// Scale whose Morlet centre frequency equals `freq_hz`.
pub fn scale_for_frequency(freq_hz: f64, sample_rate_hz: f64, omega0: f64) -> f64 {
    omega0 * sample_rate_hz / (2.0 * PI * freq_hz)
}

fn kernel(scale: f64, omega0: f64) -> (usize, Vec<Complex64>) {
    let half = (SUPPORT_HALF_WIDTH * scale).ceil() as usize;
    let norm = PI.powf(-0.25) / scale.sqrt();
    let taps = (0..=2 * half)
        .map(|i| {
            let u = (i as f64 - half as f64) / scale;
            // conj(psi(u))
            Complex64::from_polar(norm * (-0.5 * u * u).exp(), -omega0 * u)
        })
        .collect();
    (half, taps)
}

fn validate(signal: &[f64], scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::EmptyScales);
    }
    if signal.len() < 8 {
        return Err(Error::TooShort {
            needed: 8,
            got: signal.len(),
        });
    }
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) || scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("scales must be positive and strictly ascending".into()));
    }
    Ok(())
}

/// Literal evaluation of the truncated sum.
pub fn cwt_direct(signal: &[f64], scales: &[f64], omega0: f64) -> Result<Scaleogram> {
    validate(signal, scales)?;
    let n = signal.len() as isize;
    let mut magnitudes = Vec::with_capacity(scales.len() * signal.len());
    for &s in scales {
        let (half, taps) = kernel(s, omega0);
        let half = half as isize;
        for tau in 0..n {
            let lo = (-half).max(-tau);
            let hi = half.min(n - 1 - tau);
            let mut acc = Complex64::new(0.0, 0.0);
            for u in lo..=hi {
                acc += taps[(u + half) as usize] * signal[(tau + u) as usize];
            }
            magnitudes.push(acc.norm());
        }
    }
    Ok(Scaleogram {
        scales: scales.to_vec(),
        times: (0..signal.len()).map(|t| t as f64).collect(),
        magnitudes,
    })
}

/// FFT-accelerated evaluation of the same truncated sum.
pub fn cwt(signal: &[f64], scales: &[f64], omega0: f64) -> Result<Scaleogram> {
    validate(signal, scales)?;
    let n = signal.len();
    let mut spectra: HashMap<usize, Vec<Complex64>> = HashMap::new();
    let mut magnitudes = vec![0.0; scales.len() * n];
    for (row, &s) in magnitudes.chunks_exact_mut(n).zip(scales) {
        let (half, taps) = kernel(s, omega0);
        let size = (n + half).next_power_of_two();
        let x_hat = match spectra.get(&size) {
            Some(v) => v,
            None => {
                let mut buf = vec![Complex64::new(0.0, 0.0); size];
                for (b, &x) in buf.iter_mut().zip(signal) {
                    b.re = x;
                }
                fft_complex(&mut buf)?;
                spectra.entry(size).or_insert(buf)
            }
        };
        // correlation with taps == convolution with the reversed taps, tap u at index -u mod size
        let mut k_hat = vec![Complex64::new(0.0, 0.0); size];
        for (i, t) in taps.iter().enumerate() {
            let u = i as isize - half as isize;
            k_hat[(-u).rem_euclid(size as isize) as usize] = *t;
        }
        fft_complex(&mut k_hat)?;
        for (k, x) in k_hat.iter_mut().zip(x_hat) {
            *k *= x;
        }
        ifft_in_place(&mut k_hat)?;
        for (m, c) in row.iter_mut().zip(&k_hat) {
            *m = c.norm();
        }
    }
    Ok(Scaleogram {
        scales: scales.to_vec(),
        times: (0..n).map(|t| t as f64).collect(),
        magnitudes,
    })
}

fn resample_axis(src: &[f64], out: usize) -> Vec<(usize, usize, f64)> {
    let n = src.len();
    (0..out)
        .map(|i| {
            let pos = if out == 1 {
                (n - 1) as f64 / 2.0
            } else {
                i as f64 * (n - 1) as f64 / (out - 1) as f64
            };
            let i0 = (pos.floor() as usize).min(n - 1);
            let i1 = (i0 + 1).min(n - 1);
            (i0, i1, pos - i0 as f64)
        })
        .collect()
}

/// Bilinear resize with corner-aligned grids.
pub fn scaleogram_resize(s: &Scaleogram, out_h: usize, out_w: usize) -> Result<Scaleogram> {
    if s.rows() < 2 || s.cols() < 2 {
        return Err(Error::TooSmall(format!("{}x{} scaleogram", s.rows(), s.cols())));
    }
    if out_h == 0 || out_w == 0 {
        return Err(Error::Config("output dimensions must be positive".into()));
    }
    if out_h == s.rows() && out_w == s.cols() {
        return Ok(s.clone());
    }
    let rows = resample_axis(&s.scales, out_h);
    let cols = resample_axis(&s.times, out_w);
    let lerp = |a: f64, b: f64, t: f64| if t == 0.0 { a } else { a + (b - a) * t };
    let mut magnitudes = Vec::with_capacity(out_h * out_w);
    for &(r0, r1, fr) in &rows {
        for &(c0, c1, fc) in &cols {
            let top = lerp(s.get(r0, c0), s.get(r0, c1), fc);
            let bottom = lerp(s.get(r1, c0), s.get(r1, c1), fc);
            magnitudes.push(lerp(top, bottom, fr));
        }
    }
    let axis = |src: &[f64], idx: &[(usize, usize, f64)]| {
        idx.iter()
            .map(|&(a, b, t)| lerp(src[a], src[b], t))
            .collect()
    };
    Ok(Scaleogram {
        scales: axis(&s.scales, &rows),
        times: axis(&s.times, &cols),
        magnitudes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian, prng};

    fn sine(freq: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|t| (2.0 * PI * freq * t as f64 / fs).sin())
            .collect()
    }

    #[test]
    fn zero_signal_zero_scaleogram() {
        let s = cwt(&[0.0; 64], &log_scales(1.0, 8.0, 6), DEFAULT_OMEGA0).unwrap();
        assert!(s.magnitudes.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn fft_path_matches_direct_sum() {
        let mut rng = prng(9);
        let x: Vec<f64> = (0..300).map(|_| gaussian(&mut rng)).collect();
        let scales = log_scales(1.5, 60.0, 12);
        let a = cwt(&x, &scales, DEFAULT_OMEGA0).unwrap();
        let b = cwt_direct(&x, &scales, DEFAULT_OMEGA0).unwrap();
        let err = a
            .magnitudes
            .iter()
            .zip(&b.magnitudes)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "max deviation {err}");
    }

    #[test]
    fn linear_and_sign_invariant() {
        let mut rng = prng(4);
        let x: Vec<f64> = (0..128).map(|_| gaussian(&mut rng)).collect();
        let scales = log_scales(2.0, 32.0, 10);
        let base = cwt(&x, &scales, DEFAULT_OMEGA0).unwrap();
        let doubled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let flipped: Vec<f64> = x.iter().map(|v| -v).collect();
        let d = cwt(&doubled, &scales, DEFAULT_OMEGA0).unwrap();
        let f = cwt(&flipped, &scales, DEFAULT_OMEGA0).unwrap();
        for i in 0..base.magnitudes.len() {
            assert!((d.magnitudes[i] - 2.0 * base.magnitudes[i]).abs() < 1e-9);
            assert!((f.magnitudes[i] - base.magnitudes[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn sine_peaks_at_centre_frequency_scale() {
        let fs = 1000.0;
        let f = 40.0;
        let x = sine(f, fs, 1024);
        let scales = dataset_scales(x.len());
        let sg = cwt(&x, &scales, DEFAULT_OMEGA0).unwrap();
        let best = sg.dominant_scale(256..768);
        let target = scale_for_frequency(f, fs, DEFAULT_OMEGA0);
        let nearest = scales
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
            .unwrap()
            .0;
        assert!(best.abs_diff(nearest) <= 1, "best {best}, nearest {nearest}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(cwt(&[0.0; 16], &[], 6.0), Err(Error::EmptyScales)));
        assert!(matches!(cwt(&[0.0; 4], &[1.0], 6.0), Err(Error::TooShort { .. })));
        assert!(cwt(&[0.0; 16], &[2.0, 1.0], 6.0).is_err());
    }

    fn ramp4() -> Scaleogram {
        Scaleogram {
            scales: vec![1.0, 2.0, 3.0, 4.0],
            times: vec![0.0, 1.0, 2.0, 3.0],
            magnitudes: (0..16).map(|v| v as f64).collect(),
        }
    }

    #[test]
    fn resize_identity_is_exact() {
        let s = ramp4();
        assert_eq!(scaleogram_resize(&s, 4, 4).unwrap(), s);
    }

    #[test]
    fn resize_ramp_to_corners() {
        // corner-aligned 4 -> 2 samples source rows/cols {0, 3}
        let r = scaleogram_resize(&ramp4(), 2, 2).unwrap();
        assert_eq!(r.magnitudes, vec![0.0, 3.0, 12.0, 15.0]);
        assert_eq!(r.scales, vec![1.0, 4.0]);
        // 4 -> 3: source positions 0, 1.5, 3 along each axis
        let r = scaleogram_resize(&ramp4(), 3, 3).unwrap();
        assert!((r.get(1, 1) - (1.5 * 4.0 + 1.5)).abs() < 1e-12);
        assert!((r.get(0, 1) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn resize_constant_and_range() {
        let mut s = ramp4();
        s.magnitudes = vec![2.5; 16];
        let r = scaleogram_resize(&s, 7, 9).unwrap();
        assert!(r.magnitudes.iter().all(|&v| v == 2.5));
        let r = scaleogram_resize(&ramp4(), 11, 5).unwrap();
        assert!(r.magnitudes.iter().all(|&v| (0.0..=15.0).contains(&v)));
        let tiny = Scaleogram {
            scales: vec![1.0],
            times: vec![0.0, 1.0],
            magnitudes: vec![0.0, 1.0],
        };
        assert!(matches!(scaleogram_resize(&tiny, 2, 2), Err(Error::TooSmall(_))));
    }
}
