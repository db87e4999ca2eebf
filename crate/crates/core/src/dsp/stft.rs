use serde::{Deserialize, Serialize};

use super::fft::RealFftPlan;
use super::window::hann_window;
use crate::dual::{Complex, Scalar};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hann,
}

/// How frames are placed on the signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Framing {
    /// Frames start at `0, hop, 2 hop, ...`; a partial tail frame is dropped.
    #[default]
    Left,
    /// Frame `t` is centered on sample `t·hop`; the signal is extended by
    /// `nfft/2` mirrored samples (edge sample not repeated) on each side.
    Reflect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftConfig {
    pub nfft: usize,
    /// Fraction of a frame shared with the next one; `hop = nfft (1 - overlap)`.
    pub overlap: f64,
    pub window: WindowKind,
    #[serde(default)]
    pub framing: Framing,
}

impl StftConfig {
    pub fn hann(nfft: usize, overlap: f64) -> Self {
        Self { nfft, overlap, window: WindowKind::Hann, framing: Framing::Left }
    }

    pub fn with_framing(mut self, framing: Framing) -> Self {
        self.framing = framing;
        self
    }

    pub fn hop(&self) -> usize {
        ((self.nfft as f64 * (1.0 - self.overlap)).round() as usize).max(1)
    }

    pub fn bins(&self) -> usize {
        self.nfft / 2 + 1
    }

    /// Number of frames produced from a signal of `n_samples`.
    pub fn frames(&self, n_samples: usize) -> usize {
        match self.framing {
            Framing::Left if n_samples < self.nfft => 0,
            Framing::Left => (n_samples - self.nfft) / self.hop() + 1,
            Framing::Reflect if n_samples <= self.nfft / 2 => 0,
            Framing::Reflect => n_samples / self.hop() + 1,
        }
    }

    /// Shortest signal the framing accepts.
    pub fn min_samples(&self) -> usize {
        match self.framing {
            Framing::Left => self.nfft,
            Framing::Reflect => self.nfft / 2 + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nfft < 2 || !self.nfft.is_power_of_two() {
            return Err(Error::Config(format!("nfft {} must be a power of two ≥ 2", self.nfft)));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::Config(format!("overlap {} outside [0, 1)", self.overlap)));
        }
        Ok(())
    }
}

/// Magnitude spectrogram, row-major `frames × bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram<S> {
    pub frames: usize,
    pub bins: usize,
    /// Frequency spacing of adjacent bins, `fs / nfft`.
    pub bin_hz: f64,
    pub data: Vec<S>,
}

impl<S: Scalar> Spectrogram<S> {
    pub fn frame(&self, t: usize) -> &[S] {
        &self.data[t * self.bins..(t + 1) * self.bins]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> {
        self.data.chunks_exact(self.bins)
    }

    pub fn map<T>(&self, f: impl Fn(S) -> T) -> Spectrogram<T> {
        Spectrogram {
            frames: self.frames,
            bins: self.bins,
            bin_hz: self.bin_hz,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Reusable short-time analyzer: window and FFT plan for one config.
#[derive(Debug, Clone)]
pub struct Stft {
    cfg: StftConfig,
    window: Vec<f64>,
    plan: RealFftPlan,
}

impl Stft {
    pub fn new(cfg: StftConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            window: hann_window(cfg.nfft)?,
            plan: RealFftPlan::new(cfg.nfft)?,
            cfg,
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.cfg
    }

    /// Magnitude of every frame, laid out according to the configured
    /// [`Framing`].
    pub fn magnitude<S: Scalar>(&self, x: &[S], sample_rate_hz: f64) -> Result<Spectrogram<S>> {
        self.analyze(x, sample_rate_hz, Complex::magnitude)
    }

    /// `|X|^power` per bin. Squared magnitudes skip the square root.
    pub fn spectrum<S: Scalar>(
        &self,
        x: &[S],
        sample_rate_hz: f64,
        power: f64,
    ) -> Result<Spectrogram<S>> {
        if power == 2.0 {
            self.analyze(x, sample_rate_hz, Complex::norm_sqr)
        } else {
            self.analyze(x, sample_rate_hz, |z| raise(z.magnitude(), power))
        }
    }

    fn analyze<S: Scalar>(
        &self,
        x: &[S],
        sample_rate_hz: f64,
        f: impl Fn(Complex<S>) -> S,
    ) -> Result<Spectrogram<S>> {
        let nfft = self.cfg.nfft;
        if x.len() < self.cfg.min_samples() {
            return Err(Error::SignalTooShort { got: x.len(), need: self.cfg.min_samples() });
        }
        let frames = self.cfg.frames(x.len());
        let padded;
        let x = match self.cfg.framing {
            Framing::Left => x,
            Framing::Reflect => {
                padded = reflect_pad(x, nfft / 2);
                &padded[..]
            }
        };
        let hop = self.cfg.hop();
        let bins = self.cfg.bins();
        let mut data = Vec::with_capacity(frames * bins);
        let mut framed = vec![S::zero(); nfft];
        let mut scratch = vec![Complex::<S>::default(); nfft / 2];
        let mut spectrum = vec![Complex::<S>::default(); bins];
        for t in 0..frames {
            let seg = &x[t * hop..t * hop + nfft];
            for ((dst, &s), &w) in framed.iter_mut().zip(seg).zip(&self.window) {
                *dst = s.scale(w);
            }
            self.plan.process(&framed, &mut scratch, &mut spectrum);
            data.extend(spectrum.iter().map(|&z| f(z)));
        }
        Ok(Spectrogram { frames, bins, bin_hz: sample_rate_hz / nfft as f64, data })
    }
}

/// `m^power`, with the common exponents computed exactly.
#[inline]
pub fn raise<S: Scalar>(m: S, power: f64) -> S {
    if power == 1.0 {
        m
    } else if power == 2.0 {
        m * m
    } else {
        m.powf(power)
    }
}

fn reflect_pad<S: Copy>(x: &[S], pad: usize) -> Vec<S> {
    let n = x.len();
    let mut out = Vec::with_capacity(n + 2 * pad);
    out.extend((1..=pad).rev().map(|i| x[i]));
    out.extend_from_slice(x);
    out.extend((0..pad).map(|i| x[n - 2 - i]));
    out
}

/// One-shot convenience wrapper around [`Stft::magnitude`].
pub fn stft_magnitude<S: Scalar>(
    x: &[S],
    cfg: &StftConfig,
    sample_rate_hz: f64,
) -> Result<Spectrogram<S>> {
    Stft::new(*cfg)?.magnitude(x, sample_rate_hz)
}
