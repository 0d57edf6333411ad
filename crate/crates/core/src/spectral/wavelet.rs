//! Orthogonal discrete wavelet transform as a two-channel filter bank.
//!
//! Boundaries are periodized: each level maps `n` samples onto `ceil(n / 2)`
//! approximation and `ceil(n / 2)` detail coefficients (odd lengths are first
//! extended by repeating the last sample), so for even lengths the transform is
//! an orthonormal change of basis.

use crate::error::{Error, Result};

/// Daubechies wavelet with four vanishing moments (8 taps), scaling filter
/// normalized to unit energy and `sum = sqrt(2)`.
const DB4_LOWPASS: [f64; 8] = [
    0.230_377_813_308_855_23,
    0.714_846_570_552_541_5,
    0.630_880_767_929_590_4,
    -0.027_983_769_416_983_85,
    -0.187_034_811_718_881_14,
    0.030_841_381_835_986_965,
    0.032_883_011_666_982_945,
    -0.010_597_401_784_997_278,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Wavelet {
    #[default]
    Db4,
}

impl Wavelet {
    pub fn name(self) -> &'static str {
        match self {
            Wavelet::Db4 => "db4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "db4" => Some(Wavelet::Db4),
            _ => None,
        }
    }

    pub fn lowpass(self) -> &'static [f64] {
        match self {
            Wavelet::Db4 => &DB4_LOWPASS,
        }
    }

    /// Quadrature mirror of the lowpass: `g[j] = (-1)^j h[L-1-j]`.
    pub fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let l = h.len();
        (0..l)
            .map(|j| if j % 2 == 0 { h[l - 1 - j] } else { -h[l - 1 - j] })
            .collect()
    }
}

/// Multi-level decomposition. `details[0]` belongs to the deepest level.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    pub levels: usize,
    pub approximation: Vec<f64>,
    pub details: Vec<Vec<f64>>,
    pub wavelet: Wavelet,
    /// Input length at each level, outermost first; used to undo odd-length extension.
    pub lengths: Vec<usize>,
}

impl WaveletDecomposition {
    pub fn wavelet_name(&self) -> &'static str {
        self.wavelet.name()
    }

    pub fn energy(&self) -> f64 {
        let a: f64 = self.approximation.iter().map(|v| v * v).sum();
        let d: f64 = self.details.iter().flatten().map(|v| v * v).sum();
        a + d
    }
}

pub fn max_levels(len: usize) -> usize {
    if len == 0 {
        0
    } else {
        len.ilog2() as usize
    }
}

fn analysis_step(x: &[f64], h: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut ext;
    let x = if x.len() % 2 == 1 {
        ext = x.to_vec();
        ext.push(*x.last().expect("non-empty level input"));
        &ext[..]
    } else {
        x
    };
    let n = x.len();
    let half = n / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for k in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for (j, (hj, gj)) in h.iter().zip(g).enumerate() {
            let v = x[(2 * k + j) % n];
            a += hj * v;
            d += gj * v;
        }
        approx[k] = a;
        detail[k] = d;
    }
    (approx, detail)
}

fn synthesis_step(approx: &[f64], detail: &[f64], h: &[f64], g: &[f64]) -> Vec<f64> {
    let n = 2 * approx.len();
    let mut out = vec![0.0; n];
    for (k, (a, d)) in approx.iter().zip(detail).enumerate() {
        for (j, (hj, gj)) in h.iter().zip(g).enumerate() {
            out[(2 * k + j) % n] += hj * a + gj * d;
        }
    }
    out
}

/// Decomposes `signal` over `levels` filter-bank stages.
pub fn dwt_decompose(signal: &[f64], wavelet: Wavelet, levels: usize) -> Result<WaveletDecomposition> {
    if signal.is_empty() {
        return Err(Error::EmptyInput);
    }
    if levels == 0 {
        return Err(Error::Config("decomposition needs at least one level".into()));
    }
    if levels > max_levels(signal.len()) {
        return Err(Error::TooManyLevels {
            levels,
            len: signal.len(),
        });
    }
    let h = wavelet.lowpass();
    let g = wavelet.highpass();
    let mut current = signal.to_vec();
    let mut details = Vec::with_capacity(levels);
    let mut lengths = Vec::with_capacity(levels);
    for _ in 0..levels {
        lengths.push(current.len());
        let (a, d) = analysis_step(&current, h, &g);
        details.push(d);
        current = a;
    }
    details.reverse();
    Ok(WaveletDecomposition {
        levels,
        approximation: current,
        details,
        wavelet,
        lengths,
    })
}

/// Inverts [`dwt_decompose`].
pub fn dwt_reconstruct(dec: &WaveletDecomposition) -> Result<Vec<f64>> {
    if dec.levels == 0 || dec.details.len() != dec.levels || dec.lengths.len() != dec.levels {
        return Err(Error::ShapeMismatch(format!(
            "{} levels with {} detail bands and {} recorded lengths",
            dec.levels,
            dec.details.len(),
            dec.lengths.len()
        )));
    }
    let h = dec.wavelet.lowpass();
    let g = dec.wavelet.highpass();
    let mut current = dec.approximation.clone();
    for (detail, &len) in dec.details.iter().zip(dec.lengths.iter().rev()) {
        if detail.len() != current.len() || len.div_ceil(2) != current.len() {
            return Err(Error::ShapeMismatch(format!(
                "detail band of {} coefficients against approximation of {} (level input {len})",
                detail.len(),
                current.len()
            )));
        }
        current = synthesis_step(&current, detail, h, &g);
        current.truncate(len);
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian, prng};
    use proptest::prelude::*;

    #[test]
    fn filter_is_orthonormal_with_vanishing_moments() {
        let h = Wavelet::Db4.lowpass();
        let g = Wavelet::Db4.highpass();
        let sum: f64 = h.iter().sum();
        assert!((sum - 2f64.sqrt()).abs() < 1e-12);
        // shift-by-2 orthonormality
        for shift in [0usize, 2, 4, 6] {
            let dot: f64 = (0..8 - shift).map(|j| h[j] * h[j + shift]).sum();
            let want = if shift == 0 { 1.0 } else { 0.0 };
            assert!((dot - want).abs() < 1e-12, "shift {shift}: {dot}");
        }
        for m in 0..4 {
            let moment: f64 = g.iter().enumerate().map(|(j, v)| (j as f64).powi(m) * v).sum();
            assert!(moment.abs() < 1e-9, "moment {m} = {moment}");
        }
    }

    #[test]
    fn constant_has_no_detail() {
        let dec = dwt_decompose(&[3.5; 64], Wavelet::Db4, 1).unwrap();
        assert!(dec.details[0].iter().all(|d| d.abs() <= 1e-10));
    }

    #[test]
    fn level_lengths_halve() {
        let x = vec![1.0; 64];
        let dec = dwt_decompose(&x, Wavelet::Db4, 2).unwrap();
        assert_eq!(dec.details[0].len(), 16);
        assert_eq!(dec.details[1].len(), 32);
        assert_eq!(dec.approximation.len(), 16);
        let femto = dwt_decompose(&vec![0.0; 2560], Wavelet::Db4, 4).unwrap();
        assert_eq!(femto.approximation.len(), 160);
    }

    #[test]
    fn cubic_interior_details_vanish() {
        let x: Vec<f64> = (0..128)
            .map(|t| {
                let u = t as f64 / 16.0;
                0.5 * u * u * u - 2.0 * u * u + u - 3.0
            })
            .collect();
        let dec = dwt_decompose(&x, Wavelet::Db4, 1).unwrap();
        // coefficients k with 2k + 7 < 128 never touch the wrap-around seam
        for (k, d) in dec.details[0].iter().enumerate().take(60) {
            assert!(d.abs() <= 1e-6, "detail {k} = {d}");
        }
    }

    #[test]
    fn too_many_levels() {
        assert!(matches!(
            dwt_decompose(&[0.0; 8], Wavelet::Db4, 4),
            Err(Error::TooManyLevels { levels: 4, len: 8 })
        ));
        assert!(dwt_decompose(&[0.0; 8], Wavelet::Db4, 3).is_ok());
    }

    #[test]
    fn round_trips() {
        let mut rng = prng(256);
        let x: Vec<f64> = (0..256).map(|_| gaussian(&mut rng)).collect();
        let dec = dwt_decompose(&x, Wavelet::Db4, 3).unwrap();
        let y = dwt_reconstruct(&dec).unwrap();
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-8));

        let mut delta = vec![0.0; 64];
        delta[17] = 1.0;
        let y = dwt_reconstruct(&dwt_decompose(&delta, Wavelet::Db4, 2).unwrap()).unwrap();
        assert!(delta.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-8));
    }

    #[test]
    fn zero_decomposition_reconstructs_zero() {
        let dec = dwt_decompose(&[0.0; 32], Wavelet::Db4, 3).unwrap();
        assert!(dwt_reconstruct(&dec).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn odd_lengths_round_trip() {
        let x: Vec<f64> = (0..37).map(|i| (i as f64 * 0.3).sin()).collect();
        let dec = dwt_decompose(&x, Wavelet::Db4, 3).unwrap();
        assert_eq!(dec.approximation.len(), 5);
        let y = dwt_reconstruct(&dec).unwrap();
        assert_eq!(y.len(), 37);
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-8));
    }

    #[test]
    fn malformed_decomposition() {
        let mut dec = dwt_decompose(&[1.0; 32], Wavelet::Db4, 2).unwrap();
        dec.details[0].pop();
        assert!(matches!(dwt_reconstruct(&dec), Err(Error::ShapeMismatch(_))));
        dec.details.pop();
        assert!(matches!(dwt_reconstruct(&dec), Err(Error::ShapeMismatch(_))));
    }

    proptest! {
        #[test]
        fn energy_is_conserved(x in proptest::collection::vec(-50f64..50.0, 64), levels in 1usize..=4) {
            let dec = dwt_decompose(&x, Wavelet::Db4, levels).unwrap();
            let e: f64 = x.iter().map(|v| v * v).sum();
            prop_assert!((dec.energy() - e).abs() <= 1e-6 * e.max(1e-12));
        }
    }
}
