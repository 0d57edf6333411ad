//! Frequency-domain and time-frequency transforms.
//!
//! - [`fourier`]: naive DFT and radix-2 FFT.
//! - [`wavelet`]: db4 analysis/synthesis filter bank with periodized boundaries.
//! - [`cwt`]: Morlet continuous wavelet transform, scaleograms and resizing.
//! - [`bearing`]: characteristic defect frequencies of the reference bearing.

pub mod bearing;
pub mod cwt;
pub mod fourier;
pub mod wavelet;

pub use bearing::{fault_frequency, Defect};
pub use cwt::{
    cwt, cwt_direct, dataset_scales, log_scales, scale_for_frequency, scaleogram_resize, Scaleogram, DEFAULT_OMEGA0,
};
pub use fourier::{dft, fft, fft_padded, ifft_in_place, Spectrum};
pub use wavelet::{dwt_decompose, dwt_reconstruct, Wavelet, WaveletDecomposition};
