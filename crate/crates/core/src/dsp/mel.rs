//! Triangular mel filterbank on the HTK mel scale.

use serde::{Deserialize, Serialize};

use super::stft::{Spectrogram, Stft, StftConfig};
use crate::dual::Scalar;
use crate::error::{Error, Result};

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MelNorm {
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MelConfig {
    pub n_mels: usize,
    pub fmin: f64,
    pub fmax: f64,
    pub normalization: MelNorm,
}

impl MelConfig {
    pub fn new(n_mels: usize, fmin: f64, fmax: f64) -> Self {
        Self { n_mels, fmin, fmax, normalization: MelNorm::None }
    }

    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        if self.n_mels == 0 {
            return Err(Error::Config("n_mels must be positive".into()));
        }
        if !(self.fmin >= 0.0 && self.fmin < self.fmax && self.fmax <= sample_rate_hz / 2.0) {
            return Err(Error::Config(format!(
                "mel range {}..{} Hz invalid at {sample_rate_hz} Hz",
                self.fmin, self.fmax
            )));
        }
        Ok(())
    }
}

/// One filter's nonzero run of weights starting at bin `start`.
#[derive(Debug, Clone, PartialEq)]
struct Band {
    start: usize,
    weights: Vec<f64>,
}

/// `n_mels × bins` filterbank, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    bins: usize,
    bands: Vec<Band>,
}

impl MelFilterbank {
    /// Triangles with corners on `n_mels + 2` mel-spaced points, evaluated
    /// at the bin center frequencies. A filter narrower than the bin spacing
    /// can miss every bin and come out empty.
    pub fn new(cfg: &MelConfig, nfft: usize, sample_rate_hz: f64) -> Result<Self> {
        cfg.validate(sample_rate_hz)?;
        let bins = nfft / 2 + 1;
        let bin_hz = sample_rate_hz / nfft as f64;
        let (mlo, mhi) = (hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax));
        let corners: Vec<f64> = (0..cfg.n_mels + 2)
            .map(|i| mel_to_hz(mlo + (mhi - mlo) * i as f64 / (cfg.n_mels + 1) as f64))
            .collect();
        let bands: Vec<Band> = corners
            .windows(3)
            .map(|c| {
                let (lo, mid, hi) = (c[0], c[1], c[2]);
                let row: Vec<f64> = (0..bins)
                    .map(|k| {
                        let f = k as f64 * bin_hz;
                        let up = (f - lo) / (mid - lo);
                        let down = (hi - f) / (hi - mid);
                        up.min(down).max(0.0)
                    })
                    .collect();
                match row.iter().position(|&w| w > 0.0) {
                    None => Band { start: 0, weights: Vec::new() },
                    Some(first) => {
                        let last = row.iter().rposition(|&w| w > 0.0).unwrap_or(first);
                        Band { start: first, weights: row[first..=last].to_vec() }
                    }
                }
            })
            .collect();
        let fb = Self { bins, bands };
        let empty = fb.empty_filters();
        if empty > 0 {
            log::warn!(
                "mel filterbank: {empty} of {} filters cover no FFT bin (nfft={nfft})",
                cfg.n_mels
            );
        }
        Ok(fb)
    }

    pub fn n_mels(&self) -> usize {
        self.bands.len()
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn empty_filters(&self) -> usize {
        self.bands.iter().filter(|b| b.weights.is_empty()).count()
    }

    /// Dense row `m` of the filterbank.
    pub fn row(&self, m: usize) -> Vec<f64> {
        let mut r = vec![0.0; self.bins];
        let b = &self.bands[m];
        r[b.start..b.start + b.weights.len()].copy_from_slice(&b.weights);
        r
    }

    /// Apply to one magnitude frame.
    pub fn apply_frame<S: Scalar>(&self, frame: &[S], out: &mut Vec<S>) {
        debug_assert_eq!(frame.len(), self.bins);
        out.extend(self.bands.iter().map(|b| {
            b.weights
                .iter()
                .zip(&frame[b.start..])
                .map(|(&w, &v)| v.scale(w))
                .sum::<S>()
        }));
    }

    /// Frame-wise projection of a magnitude spectrogram.
    pub fn apply<S: Scalar>(&self, spec: &Spectrogram<S>) -> Vec<S> {
        let mut out = Vec::with_capacity(spec.frames * self.n_mels());
        for row in spec.rows() {
            self.apply_frame(row, &mut out);
        }
        out
    }
}

/// Mel spectrogram, row-major `frames × n_mels`.
pub fn mel_spectrogram<S: Scalar>(
    x: &[S],
    stft_cfg: &StftConfig,
    mel_cfg: &MelConfig,
    sample_rate_hz: f64,
) -> Result<Vec<S>> {
    let spec = Stft::new(*stft_cfg)?.magnitude(x, sample_rate_hz)?;
    let fb = MelFilterbank::new(mel_cfg, stft_cfg.nfft, sample_rate_hz)?;
    Ok(fb.apply(&spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{synthesize_real, SineParams};

    #[test]
    fn htk_reference_point() {
        assert!((hz_to_mel(700.0) - 2595.0 * 2f64.log10()).abs() < 1e-9);
        assert!((mel_to_hz(hz_to_mel(1234.5)) - 1234.5).abs() < 1e-9);
    }

    #[test]
    fn triangles_are_nonnegative_unimodal_and_in_range() {
        let cfg = MelConfig::new(40, 30.0, 4000.0);
        let fb = MelFilterbank::new(&cfg, 2048, 44100.0).unwrap();
        let bin_hz = 44100.0 / 2048.0;
        for m in 0..fb.n_mels() {
            let r = fb.row(m);
            assert!(r.iter().all(|&w| (0.0..=1.0).contains(&w)));
            let nz: Vec<usize> = (0..r.len()).filter(|&k| r[k] > 0.0).collect();
            assert!(!nz.is_empty());
            assert!(nz[0] as f64 * bin_hz >= 30.0);
            assert!(*nz.last().unwrap() as f64 * bin_hz <= 4000.0);
            // rises then falls
            let peak = nz.iter().copied().max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap();
            assert!(nz.windows(2).all(|w| w[1] > peak || r[w[1]] >= r[w[0]]));
            assert!(nz.windows(2).all(|w| w[0] < peak || r[w[1]] <= r[w[0]]));
        }
    }

    #[test]
    fn peak_is_one_when_center_lands_on_a_bin() {
        // One filter centered on 1000 Hz, bins every 10 Hz.
        let lo = hz_to_mel(500.0);
        let hi = 2.0 * hz_to_mel(1000.0) - lo;
        let cfg = MelConfig::new(1, 500.0, mel_to_hz(hi));
        let fb = MelFilterbank::new(&cfg, 4096, 40960.0).unwrap();
        let r = fb.row(0);
        assert!((r[100] - 1.0).abs() < 1e-9, "{}", r[100]);
        assert!(r.iter().all(|&w| w <= r[100]));
    }

    #[test]
    fn oversized_bank_has_empty_filters() {
        let fb = MelFilterbank::new(&MelConfig::new(1024, 30.0, 4000.0), 1024, 44100.0).unwrap();
        assert_eq!(fb.n_mels(), 1024);
        assert!(fb.empty_filters() > 0);
    }

    #[test]
    fn zero_input_and_linearity() {
        let stft = StftConfig::hann(1024, 0.5);
        let mel = MelConfig::new(128, 30.0, 4000.0);
        let z = mel_spectrogram(&vec![0.0; 8192], &stft, &mel, 44100.0).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));

        let x = synthesize_real(&SineParams::new(-6.0, 523.0, 0.4), 44100.0, 8192);
        let x2: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let a = mel_spectrogram(&x, &stft, &mel, 44100.0).unwrap();
        let b = mel_spectrogram(&x2, &stft, &mel, 44100.0).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((2.0 * u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn low_tone_lands_in_low_channels() {
        let stft = StftConfig::hann(1024, 0.5);
        let mel = MelConfig::new(128, 30.0, 4000.0);
        let x = synthesize_real(&SineParams::new(0.0, 30.0, 0.0), 44100.0, 8192);
        let m = mel_spectrogram(&x, &stft, &mel, 44100.0).unwrap();
        let frame = &m[128..256];
        let total: f64 = frame.iter().sum();
        let low: f64 = frame[..16].iter().sum();
        assert!(low / total > 0.9, "{}", low / total);
    }
}
