//! Unnormalized DCT-II and MFCCs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::mel::{MelConfig, MelFilterbank};
use super::stft::{Stft, StftConfig};
use crate::dual::Scalar;
use crate::error::{Error, Result};

/// Log compression applied to mel energies before the DCT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LogCompression {
    /// `ln(v + floor)`.
    Natural { floor: f64 },
    /// `10 log10(max(v, amin))`, then every value more than `top_db` below
    /// the loudest entry of the whole signal is raised to that threshold.
    Decibel { amin: f64, top_db: Option<f64> },
}

impl LogCompression {
    pub const DB_80: LogCompression = LogCompression::Decibel { amin: 1e-10, top_db: Some(80.0) };

    pub fn describe(&self) -> String {
        match self {
            LogCompression::Natural { floor } => format!("ln(mel + {floor:e})"),
            LogCompression::Decibel { amin, top_db: Some(t) } => {
                format!("dB(mel, amin={amin:e}, top_db={t})")
            }
            LogCompression::Decibel { amin, top_db: None } => format!("dB(mel, amin={amin:e})"),
        }
    }

    /// Compress a whole (row-major) mel spectrogram.
    pub fn apply<S: Scalar>(&self, mel: &[S]) -> Vec<S> {
        match *self {
            LogCompression::Natural { floor } => {
                let floor = S::from_f64(floor);
                mel.iter().map(|&v| (v + floor).ln()).collect()
            }
            LogCompression::Decibel { amin, top_db } => {
                let db: Vec<S> = mel
                    .iter()
                    .map(|&v| {
                        let v = if v.value() < amin { S::from_f64(amin) } else { v };
                        v.log10().scale(10.0)
                    })
                    .collect();
                let Some(top_db) = top_db else { return db };
                let Some(&loudest) = db.iter().max_by(|a, b| a.value().total_cmp(&b.value())) else {
                    return db;
                };
                let threshold = loudest - S::from_f64(top_db);
                db.into_iter()
                    .map(|v| if v.value() < threshold.value() { threshold } else { v })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfccConfig {
    pub n_mfcc: usize,
    /// Exponent applied to STFT magnitudes before the filterbank.
    pub power: f64,
    pub log: LogCompression,
}

/// `X[k] = 2 Σ_n x[n] cos(π k (2n + 1) / 2N)`, first `n_out` coefficients.
#[derive(Debug, Clone)]
pub struct Dct2 {
    n_in: usize,
    n_out: usize,
    basis: Vec<f64>,
}

impl Dct2 {
    pub fn new(n_in: usize, n_out: usize) -> Result<Self> {
        if n_out == 0 || n_out > n_in {
            return Err(Error::Config(format!(
                "cannot keep {n_out} DCT coefficients of a length-{n_in} input"
            )));
        }
        let mut basis = Vec::with_capacity(n_in * n_out);
        for k in 0..n_out {
            for n in 0..n_in {
                basis.push(2.0 * (PI * k as f64 * (2 * n + 1) as f64 / (2 * n_in) as f64).cos());
            }
        }
        Ok(Self { n_in, n_out, basis })
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn apply<S: Scalar>(&self, x: &[S], out: &mut Vec<S>) {
        debug_assert_eq!(x.len(), self.n_in);
        out.extend(self.basis.chunks_exact(self.n_in).map(|row| {
            row.iter().zip(x).map(|(&c, &v)| v.scale(c)).sum::<S>()
        }));
    }
}

/// MFCCs, row-major `frames × n_mfcc`.
pub fn mfcc<S: Scalar>(
    x: &[S],
    stft_cfg: &StftConfig,
    mel_cfg: &MelConfig,
    cfg: &MfccConfig,
    sample_rate_hz: f64,
) -> Result<Vec<S>> {
    let spec = Stft::new(*stft_cfg)?.spectrum(x, sample_rate_hz, cfg.power)?;
    let fb = MelFilterbank::new(mel_cfg, stft_cfg.nfft, sample_rate_hz)?;
    let dct = Dct2::new(mel_cfg.n_mels, cfg.n_mfcc)?;
    let mel = fb.apply(&spec);
    Ok(cepstra(&cfg.log.apply(&mel), mel_cfg.n_mels, &dct))
}

/// DCT of each frame of an already log-compressed mel spectrogram.
pub fn cepstra<S: Scalar>(log_mel: &[S], n_mels: usize, dct: &Dct2) -> Vec<S> {
    let mut out = Vec::with_capacity(log_mel.len() / n_mels * dct.n_out());
    for frame in log_mel.chunks_exact(n_mels) {
        dct.apply(frame, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_input() {
        let dct = Dct2::new(16, 16).unwrap();
        let mut out = Vec::new();
        dct.apply(&[0.75f64; 16], &mut out);
        assert!((out[0] - 2.0 * 16.0 * 0.75).abs() < 1e-12);
        assert!(out[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn coefficient_count_checked() {
        assert!(Dct2::new(8, 9).is_err());
        assert!(Dct2::new(8, 0).is_err());
    }

    #[test]
    fn silence_gives_flat_cepstrum() {
        let floor = 1e-6;
        let cfg = MfccConfig { n_mfcc: 128, power: 1.0, log: LogCompression::Natural { floor } };
        let c = mfcc(
            &vec![0.0f64; 4096],
            &StftConfig::hann(1024, 0.5),
            &MelConfig::new(128, 30.0, 4000.0),
            &cfg,
            44100.0,
        )
        .unwrap();
        let frames = c.len() / 128;
        assert_eq!(frames, 7);
        for f in c.chunks_exact(128) {
            assert!((f[0] - 2.0 * 128.0 * floor.ln()).abs() < 1e-9);
            assert!(f[1..].iter().all(|v| v.abs() < 1e-9));
            assert_eq!(f, &c[..128]);
        }
    }

    #[test]
    fn decibel_compression() {
        let log = LogCompression::Decibel { amin: 1e-10, top_db: Some(80.0) };
        let out = log.apply(&[1.0f64, 1e-3, 1e-9, 0.0, 100.0]);
        let want = [0.0, -30.0, -60.0, -60.0, 20.0];
        for (o, w) in out.iter().zip(want) {
            assert!((o - w).abs() < 1e-9, "{o} vs {w}");
        }
        let plain = LogCompression::Decibel { amin: 1e-10, top_db: None }.apply(&[0.0f64]);
        assert!((plain[0] + 100.0).abs() < 1e-9);
    }

    #[test]
    fn clamped_entries_follow_the_loudest() {
        use crate::dual::Dual;
        let log = LogCompression::DB_80;
        let out = log.apply(&[Dual::new(1.0, 0.5), Dual::new(1e-12, 7.0)]);
        // d/dx 10 log10(x) at x = 1 is 10 / ln 10
        let slope = 0.5 * 10.0 / std::f64::consts::LN_10;
        assert!((out[0].der - slope).abs() < 1e-12);
        assert!((out[1].val + 80.0).abs() < 1e-9);
        assert!((out[1].der - slope).abs() < 1e-12);
    }
}
