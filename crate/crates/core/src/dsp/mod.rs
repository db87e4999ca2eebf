//! Spectral analysis, generic over [`Scalar`](crate::dual::Scalar) so the
//! derivative channel flows from waveform to feature.

pub mod centroid;
pub mod cepstrum;
pub mod fft;
pub mod mel;
pub mod stft;
pub mod window;

pub use centroid::spectral_centroid;
pub use cepstrum::{mfcc, Dct2, LogCompression, MfccConfig};
pub use fft::{dft, dft_naive, FftPlan, RealFftPlan};
pub use mel::{hz_to_mel, mel_spectrogram, mel_to_hz, MelConfig, MelFilterbank};
pub use stft::{raise, stft_magnitude, Framing, Spectrogram, Stft, StftConfig, WindowKind};
pub use window::hann_window;
