use super::stft::Spectrogram;
use crate::dual::Scalar;
use crate::error::{Error, Result};

/// Per-frame `Σ f_k |X_k|^p / Σ |X_k|^p` in Hz.
pub fn spectral_centroid<S: Scalar>(spec: &Spectrogram<S>, power: f64) -> Result<Vec<S>> {
    spec.rows()
        .enumerate()
        .map(|(t, row)| {
            let mut num = S::zero();
            let mut den = S::zero();
            for (k, &m) in row.iter().enumerate() {
                let w = if power == 1.0 { m } else { m.powf(power) };
                num += w.scale(k as f64 * spec.bin_hz);
                den += w;
            }
            if den.value() <= 0.0 {
                return Err(Error::ZeroEnergyFrame { frame: t });
            }
            Ok(num / den)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::fft::dft;
    use crate::dsp::stft::{stft_magnitude, StftConfig};
    use crate::dsp::window::hann_window;
    use crate::signal::{synthesize_real, SineParams};

    const FS: f64 = 44100.0;

    #[test]
    fn bin_centered_tone() {
        let f = 48.0 * FS / 2048.0;
        let x = synthesize_real(&SineParams::new(-3.0, f, 0.2), FS, 16384);
        let s = stft_magnitude(&x, &StftConfig::hann(2048, 0.75), FS).unwrap();
        for c in spectral_centroid(&s, 1.0).unwrap() {
            assert!((c - f).abs() < 0.5 * FS / 2048.0, "{c} vs {f}");
        }
    }

    #[test]
    fn scale_invariant() {
        let x = synthesize_real(&SineParams::new(0.0, 713.0, 1.0), FS, 8192);
        let half: Vec<f64> = x.iter().map(|v| 0.5 * v).collect();
        let cfg = StftConfig::hann(2048, 0.75);
        let a = spectral_centroid(&stft_magnitude(&x, &cfg, FS).unwrap(), 1.0).unwrap();
        let b = spectral_centroid(&stft_magnitude(&half, &cfg, FS).unwrap(), 1.0).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn impulse_frame_matches_direct_sum() {
        let n = 256;
        let mut x = vec![0.0; n];
        x[0] = 1.0;
        x[3] = 0.25;
        let s = stft_magnitude(&x, &StftConfig::hann(n, 0.5), FS).unwrap();
        let got = spectral_centroid(&s, 1.0).unwrap()[0];
        // brute force: window, full DFT, weighted mean over one-sided bins
        let w = hann_window(n).unwrap();
        let framed: Vec<f64> = x.iter().zip(&w).map(|(a, b)| a * b).collect();
        let spec = dft(&framed).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (k, z) in spec.iter().take(n / 2 + 1).enumerate() {
            num += k as f64 * FS / n as f64 * z.magnitude();
            den += z.magnitude();
        }
        assert!((got - num / den).abs() < 1e-9);
    }

    #[test]
    fn silent_frame_is_an_error() {
        let s = stft_magnitude(&vec![0.0; 4096], &StftConfig::hann(2048, 0.75), FS).unwrap();
        assert!(matches!(spectral_centroid(&s, 1.0), Err(Error::ZeroEnergyFrame { frame: 0 })));
    }
}
