use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex spectrum of a length-`n` transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
    /// Bin spacing in Hz (`sample_rate / n`); 1.0 when the rate is unknown.
    pub resolution_hz: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.bins.iter().map(|c| c.norm()).collect()
    }

    pub fn with_sample_rate(mut self, sample_rate_hz: f64) -> Self {
        self.resolution_hz = sample_rate_hz / self.bins.len() as f64;
        self
    }

    pub fn frequency_of(&self, bin: usize) -> f64 {
        bin as f64 * self.resolution_hz
    }
}

/// Direct O(n^2) discrete Fourier transform.
pub fn dft(signal: &[f64]) -> Result<Spectrum> {
    let n = signal.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let bins = (0..n)
        .map(|k| {
            signal
                .iter()
                .enumerate()
                .fold(Complex64::new(0.0, 0.0), |acc, (t, &x)| {
                    // reduce k*t mod n first so the angle stays small
                    let phase = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                    acc + Complex64::from_polar(x, phase)
                })
        })
        .collect();
    Ok(Spectrum {
        bins,
        resolution_hz: 1.0,
    })
}

/// Radix-2 FFT of a real signal whose length is a power of two.
pub fn fft(signal: &[f64]) -> Result<Spectrum> {
    let n = signal.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut buf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_in_place(&mut buf, false);
    Ok(Spectrum {
        bins: buf,
        resolution_hz: 1.0,
    })
}

/// FFT after zero-padding to the next power of two.
pub fn fft_padded(signal: &[f64]) -> Result<Spectrum> {
    if signal.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut padded = signal.to_vec();
    padded.resize(signal.len().next_power_of_two(), 0.0);
    fft(&padded)
}

/// Inverse transform in place, including the `1/n` scaling.
pub fn ifft_in_place(buf: &mut [Complex64]) -> Result<()> {
    if buf.is_empty() || !buf.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(buf.len()));
    }
    fft_in_place(buf, true);
    Ok(())
}

pub(crate) fn fft_complex(buf: &mut [Complex64]) -> Result<()> {
    if buf.is_empty() || !buf.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(buf.len()));
    }
    fft_in_place(buf, false);
    Ok(())
}

/// Iterative decimation-in-time Cooley-Tukey; `buf.len()` must be a power of two.
fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j ^= bit;
        if i < j {
            buf.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // twiddles computed directly rather than by repeated multiplication to keep error O(eps log n)
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / len as f64))
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let u = buf[start + k];
                let t = twiddles[k] * buf[start + k + half];
                buf[start + k] = u + t;
                buf[start + k + half] = u - t;
            }
        }
        len <<= 1;
    }

    if inverse {
        let scale = 1.0 / n as f64;
        for x in buf.iter_mut() {
            *x *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian, prng};
    use proptest::prelude::*;

    // Oracle: the defining double sum with no index reduction.
    fn naive(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (t, v) in x.iter().enumerate() {
                    let a = -2.0 * PI * (k as f64) * (t as f64) / n as f64;
                    re += v * a.cos();
                    im += v * a.sin();
                }
                Complex64::new(re, im)
            })
            .collect()
    }

    fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn dc_and_impulse() {
        let s = dft(&[1.0; 4]).unwrap();
        assert!(max_err(&s.bins, &[Complex64::new(4.0, 0.0), 0.0.into(), 0.0.into(), 0.0.into()]) < 1e-12);
        let s = dft(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(s.bins.iter().all(|c| (c - Complex64::new(1.0, 0.0)).norm() < 1e-12));
        let f = fft(&[1.0; 4]).unwrap();
        assert!(max_err(&f.bins, &dft(&[1.0; 4]).unwrap().bins) < 1e-12);
    }

    #[test]
    fn dft_matches_double_loop() {
        let mut rng = prng(64);
        let x: Vec<f64> = (0..64).map(|_| gaussian(&mut rng)).collect();
        assert!(max_err(&dft(&x).unwrap().bins, &naive(&x)) <= 1e-9);
    }

    #[test]
    fn fft_matches_dft_1024() {
        let mut rng = prng(1024);
        let x: Vec<f64> = (0..1024).map(|_| gaussian(&mut rng)).collect();
        assert!(max_err(&fft(&x).unwrap().bins, &dft(&x).unwrap().bins) <= 1e-9);
    }

    #[test]
    fn fft_rejects_non_power_of_two() {
        assert!(matches!(fft(&[1.0, 2.0, 3.0]), Err(Error::NotPowerOfTwo(3))));
        assert!(matches!(fft(&[]), Err(Error::NotPowerOfTwo(0))));
        assert!(matches!(dft(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = prng(2);
        let x: Vec<f64> = (0..256).map(|_| gaussian(&mut rng)).collect();
        let mut bins = fft(&x).unwrap().bins;
        ifft_in_place(&mut bins).unwrap();
        for (a, b) in x.iter().zip(&bins) {
            assert!((a - b.re).abs() < 1e-12 && b.im.abs() < 1e-12);
        }
    }

    #[test]
    fn resolution_follows_rate() {
        let s = fft(&[0.0; 8]).unwrap().with_sample_rate(800.0);
        assert_eq!(s.resolution_hz, 100.0);
        assert_eq!(s.frequency_of(3), 300.0);
    }

    proptest! {
        #[test]
        fn parseval_and_symmetry(x in proptest::collection::vec(-100f64..100.0, 1..64)) {
            let s = dft(&x).unwrap();
            let n = x.len();
            let time: f64 = x.iter().map(|v| v * v).sum();
            let freq: f64 = s.bins.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
            prop_assert!((time - freq).abs() <= 1e-6 * time.max(1e-12));
            for k in 1..n {
                prop_assert!((s.bins[k] - s.bins[n - k].conj()).norm() <= 1e-9);
            }
        }

        #[test]
        fn fft_agrees_with_dft(x in (0u32..8).prop_flat_map(|p| proptest::collection::vec(-10f64..10.0, 1usize << p))) {
            let a = fft(&x).unwrap();
            let b = dft(&x).unwrap();
            prop_assert!(max_err(&a.bins, &b.bins) <= 1e-9);
        }
    }
}
