//! Frequency-domain machinery: FFT, STFT spectral loss, wavelet coherence.

pub mod fft;
pub mod stft;
pub mod wavelet;

pub use fft::{dft_naive, fft, fft_real, ifft, next_pow2};
pub use stft::{spectral_loss, spectral_loss_grad, stft_magnitude, Spectrogram, StftSpec};
pub use wavelet::{morlet_cwt, wavelet_coherence, CoherenceMap, Cwt, CwtSpec, MORLET_OMEGA0};
