//! Configured audio distances and their evaluate-and-differentiate interface.
//!
//! A [`DistanceSpec`] is plain data (name, analyzer, norm). Compiling it into
//! a [`Distance`] builds FFT plans and filterbanks once; the compiled form is
//! immutable and shared across workers.

use serde::{Deserialize, Serialize};

use crate::dsp::cepstrum::{cepstra, Dct2, LogCompression, MfccConfig};
use crate::dsp::centroid::spectral_centroid;
use crate::dsp::mel::{MelConfig, MelFilterbank};
use crate::dsp::stft::{Framing, Stft, StftConfig};
use crate::dual::{Dual, Scalar};
use crate::error::{Error, Result};
use crate::signal::{self, Axis, BenchConfig, SineParams};

/// Window sizes of the multi-scale spectrogram distances.
pub const MSS_NFFTS: [usize; 6] = [2048, 1024, 512, 256, 128, 64];
/// Offset inside `log(|S| + offset)` for the log-magnitude distances.
pub const LOG_OFFSET: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub fn name(self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Analyzer {
    /// `|STFT|^power`.
    Spectrogram { stft: StftConfig, power: f64 },
    /// `ln(|STFT|^power + offset)`.
    LogSpectrogram { stft: StftConfig, power: f64, offset: f64 },
    Mel { stft: StftConfig, mel: MelConfig, power: f64 },
    Mfcc { stft: StftConfig, mel: MelConfig, mfcc: MfccConfig },
    /// One `|STFT|^power` block per scale.
    Mss { scales: Vec<StftConfig>, power: f64 },
    LogMss { scales: Vec<StftConfig>, power: f64, offset: f64 },
    /// Spectral centroid of `|STFT|^power`, compared in log2.
    LogSpectralCentroid { stft: StftConfig, power: f64 },
    Ideal,
    External { command: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSpec {
    pub name: String,
    pub label: String,
    pub analyzer: Analyzer,
    pub norm: Norm,
}

impl DistanceSpec {
    fn new(name: &str, label: &str, analyzer: Analyzer, norm: Norm) -> Self {
        Self { name: name.into(), label: label.into(), analyzer, norm }
    }

    pub fn external(command: impl Into<String>) -> Self {
        Self::new(
            "external",
            "external",
            Analyzer::External { command: command.into() },
            Norm::L2,
        )
    }

    pub fn is_external(&self) -> bool {
        matches!(self.analyzer, Analyzer::External { .. })
    }

    /// One-line hyperparameter summary.
    pub fn describe(&self) -> String {
        let n = self.norm.name();
        let framing = |s: &StftConfig| match s.framing {
            Framing::Left => "left",
            Framing::Reflect => "centered/reflect",
        };
        let stft = |s: &StftConfig| {
            format!("nfft={}, overlap={}, window=hann, frames={}", s.nfft, s.overlap, framing(s))
        };
        let scales = |v: &[StftConfig]| {
            let nffts: Vec<usize> = v.iter().map(|s| s.nfft).collect();
            match v.first() {
                Some(s) => format!("nffts={nffts:?}, overlap={}, window=hann, frames={}", s.overlap, framing(s)),
                None => "no scales".into(),
            }
        };
        let mag = |p: f64| if p == 1.0 { "|STFT|".to_string() } else { format!("|STFT|^{p}") };
        let body = match &self.analyzer {
            Analyzer::Spectrogram { stft: s, power } => format!("{n}, {}, {}", mag(*power), stft(s)),
            Analyzer::LogSpectrogram { stft: s, power, offset } => {
                format!("{n}, log({} + {offset:e}), {}", mag(*power), stft(s))
            }
            Analyzer::Mel { stft: s, mel: m, power } => format!(
                "{n}, mel of {}, {}, nmels={}, fmin={}, fmax={}, norm=None",
                mag(*power),
                stft(s),
                m.n_mels,
                m.fmin,
                m.fmax
            ),
            Analyzer::Mfcc { stft: s, mel: m, mfcc: c } => format!(
                "{n}, {}, nmels={}, nmfcc={}, norm=None, fmin={}, fmax={}, mel of {}, {}",
                stft(s),
                m.n_mels,
                c.n_mfcc,
                m.fmin,
                m.fmax,
                mag(c.power),
                c.log.describe()
            ),
            Analyzer::Mss { scales: v, power } => {
                format!("{n} per scale, summed, {}, {}", mag(*power), scales(v))
            }
            Analyzer::LogMss { scales: v, power, offset } => format!(
                "{n} per scale, summed, log({} + {offset:e}), {}",
                mag(*power),
                scales(v)
            ),
            Analyzer::LogSpectralCentroid { stft: s, power } => {
                format!("{n}, log2 spectral centroid per frame, {}, power={power}", stft(s))
            }
            Analyzer::Ideal => format!("{n}, |cents| / pitch range + |dB| / level range"),
            Analyzer::External { command } => format!("external worker `{command}`"),
        };
        format!("{}: {body}", self.name)
    }
}

/// Single-resolution builtins use centered frames over a mirrored signal.
fn centered(nfft: usize, overlap: f64) -> StftConfig {
    StftConfig::hann(nfft, overlap).with_framing(Framing::Reflect)
}

/// The multi-scale builtins use left-aligned frames at every scale.
fn mss_scales() -> Vec<StftConfig> {
    MSS_NFFTS.iter().map(|&n| StftConfig::hann(n, 0.75)).collect()
}

/// The seven spectral distances plus the idealized reference.
pub fn builtin_registry() -> Vec<DistanceSpec> {
    let mel_range = |n| MelConfig::new(n, 30.0, 4000.0);
    vec![
        DistanceSpec::new(
            "spectrogram",
            "Spectrogram",
            Analyzer::Spectrogram { stft: centered(2048, 0.75), power: 1.0 },
            Norm::L1,
        ),
        DistanceSpec::new(
            "log_spectrogram",
            "log(Spectrogram)",
            Analyzer::LogSpectrogram { stft: centered(2048, 0.75), power: 2.0, offset: LOG_OFFSET },
            Norm::L2,
        ),
        DistanceSpec::new(
            "mel",
            "Mel",
            Analyzer::Mel { stft: centered(1024, 0.5), mel: mel_range(1024), power: 2.0 },
            Norm::L1,
        ),
        DistanceSpec::new(
            "mfcc",
            "MFCC",
            Analyzer::Mfcc {
                stft: centered(1024, 0.5),
                mel: mel_range(128),
                mfcc: MfccConfig { n_mfcc: 128, power: 2.0, log: LogCompression::DB_80 },
            },
            Norm::L1,
        ),
        DistanceSpec::new("mss", "MSS", Analyzer::Mss { scales: mss_scales(), power: 2.0 }, Norm::L1),
        DistanceSpec::new(
            "log_mss",
            "log MSS",
            Analyzer::LogMss { scales: mss_scales(), power: 2.0, offset: LOG_OFFSET },
            Norm::L2,
        ),
        DistanceSpec::new(
            "log_spectral_centroid",
            "log2(Spectral Centroid)",
            Analyzer::LogSpectralCentroid { stft: centered(2048, 0.75), power: 1.0 },
            Norm::L1,
        ),
        DistanceSpec::new("ideal", "Idealized l1", Analyzer::Ideal, Norm::L1),
    ]
}

/// Look up a builtin spec by its CLI name.
pub fn builtin(name: &str) -> Result<DistanceSpec> {
    builtin_registry()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownSpec(name.to_string()))
}

/// Normalized ℓ1 in (log-pitch, level) coordinates.
pub fn ideal_distance(target: &SineParams, prediction: &SineParams, cfg: &BenchConfig) -> f64 {
    signal::cents_between(target.pitch_hz, prediction.pitch_hz).abs() / cfg.pitch_range_cents()
        + (target.level_db - prediction.level_db).abs() / cfg.level_range_width_db()
}

/// Feature blocks of one waveform; multi-scale analyzers produce one block
/// per scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation<S> {
    pub blocks: Vec<Vec<S>>,
}

/// Distance value and its derivative along the prediction's seeded axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceValue {
    pub value: Dual,
}

/// Target-side state reused across every prediction in a trial.
#[derive(Debug, Clone)]
pub enum Reference {
    Features(Representation<f64>),
    Params(SineParams),
}

#[derive(Debug, Clone)]
enum Compiled {
    Scales { scales: Vec<Stft>, power: f64, log_offset: Option<f64> },
    Mel { stft: Stft, bank: MelFilterbank, power: f64 },
    Mfcc { stft: Stft, bank: MelFilterbank, dct: Dct2, power: f64, log: LogCompression },
    Centroid { stft: Stft, power: f64 },
    Ideal,
    External,
}

/// A compiled, shareable distance.
#[derive(Debug, Clone)]
pub struct Distance {
    spec: DistanceSpec,
    cfg: BenchConfig,
    compiled: Compiled,
}

impl Distance {
    pub fn new(spec: DistanceSpec, cfg: &BenchConfig) -> Result<Self> {
        let fs = cfg.sample_rate_hz;
        let compiled = match &spec.analyzer {
            Analyzer::Spectrogram { stft, power } => Compiled::Scales {
                scales: vec![Stft::new(*stft)?],
                power: *power,
                log_offset: None,
            },
            Analyzer::LogSpectrogram { stft, power, offset } => Compiled::Scales {
                scales: vec![Stft::new(*stft)?],
                power: *power,
                log_offset: Some(*offset),
            },
            Analyzer::Mss { scales, power } => Compiled::Scales {
                scales: stft_scales(scales)?,
                power: *power,
                log_offset: None,
            },
            Analyzer::LogMss { scales, power, offset } => Compiled::Scales {
                scales: stft_scales(scales)?,
                power: *power,
                log_offset: Some(*offset),
            },
            Analyzer::Mel { stft, mel, power } => Compiled::Mel {
                stft: Stft::new(*stft)?,
                bank: MelFilterbank::new(mel, stft.nfft, fs)?,
                power: *power,
            },
            Analyzer::Mfcc { stft, mel, mfcc } => Compiled::Mfcc {
                stft: Stft::new(*stft)?,
                bank: MelFilterbank::new(mel, stft.nfft, fs)?,
                dct: Dct2::new(mel.n_mels, mfcc.n_mfcc)?,
                power: mfcc.power,
                log: mfcc.log,
            },
            Analyzer::LogSpectralCentroid { stft, power } => Compiled::Centroid {
                stft: Stft::new(*stft)?,
                power: *power,
            },
            Analyzer::Ideal => Compiled::Ideal,
            Analyzer::External { .. } => Compiled::External,
        };
        Ok(Self { spec, cfg: *cfg, compiled })
    }

    pub fn spec(&self) -> &DistanceSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn config(&self) -> &BenchConfig {
        &self.cfg
    }

    /// Whether the distance is defined on waveforms (as opposed to params).
    pub fn is_waveform_based(&self) -> bool {
        !matches!(self.compiled, Compiled::Ideal | Compiled::External)
    }

    /// Feature representation of a waveform.
    pub fn represent<S: Scalar>(&self, x: &[S]) -> Result<Representation<S>> {
        let fs = self.cfg.sample_rate_hz;
        let blocks = match &self.compiled {
            Compiled::Scales { scales, power, log_offset } => scales
                .iter()
                .map(|stft| {
                    let raised = stft.spectrum(x, fs, *power)?.data.into_iter();
                    Ok(match log_offset {
                        None => raised.collect(),
                        Some(off) => {
                            let off = S::from_f64(*off);
                            raised.map(|m| (m + off).ln()).collect()
                        }
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            Compiled::Mel { stft, bank, power } => {
                vec![bank.apply(&stft.spectrum(x, fs, *power)?)]
            }
            Compiled::Mfcc { stft, bank, dct, power, log } => {
                let mel = bank.apply(&stft.spectrum(x, fs, *power)?);
                vec![cepstra(&log.apply(&mel), bank.n_mels(), dct)]
            }
            Compiled::Centroid { stft, power } => {
                let c = spectral_centroid(&stft.magnitude(x, fs)?, *power)?;
                vec![c.into_iter().map(Scalar::log2).collect()]
            }
            Compiled::Ideal => {
                return Err(Error::Config(
                    "the ideal distance is defined on sinusoid parameters, not waveforms".into(),
                ))
            }
            Compiled::External => return Err(Error::ExternalSpec(self.spec.name.clone())),
        };
        Ok(Representation { blocks })
    }

    /// Norm of the difference, block by block, summed over blocks.
    pub fn compare<S: Scalar>(&self, target: &Representation<f64>, prediction: &Representation<S>) -> S {
        target
            .blocks
            .iter()
            .zip(&prediction.blocks)
            .map(|(t, p)| {
                debug_assert_eq!(t.len(), p.len());
                block_norm(self.spec.norm, t.iter().zip(p).map(|(&a, &b)| S::from_f64(a) - b))
            })
            .sum()
    }

    /// As [`compare`](Self::compare), with both sides carrying tangents.
    pub fn compare_same<S: Scalar>(&self, target: &Representation<S>, prediction: &Representation<S>) -> S {
        target
            .blocks
            .iter()
            .zip(&prediction.blocks)
            .map(|(t, p)| block_norm(self.spec.norm, t.iter().zip(p).map(|(&a, &b)| a - b)))
            .sum()
    }

    /// Distance between two waveforms; the derivative channel follows
    /// whatever seed the prediction carries.
    pub fn evaluate(&self, target: &[Dual], prediction: &[Dual]) -> Result<DistanceValue> {
        if target.len() != prediction.len() {
            return Err(Error::Config(format!(
                "waveform lengths differ: {} vs {}",
                target.len(),
                prediction.len()
            )));
        }
        let t = self.represent(target)?;
        let p = self.represent(prediction)?;
        let value = self.check(self.compare_same(&t, &p))?;
        Ok(DistanceValue { value })
    }

    /// Real-valued distance between two waveforms.
    pub fn evaluate_real(&self, target: &[f64], prediction: &[f64]) -> Result<f64> {
        let t = self.represent(target)?;
        let p = self.represent(prediction)?;
        self.check(self.compare(&t, &p))
    }

    /// Precompute the target side for repeated comparisons.
    pub fn reference(&self, target: &SineParams) -> Result<Reference> {
        match self.compiled {
            Compiled::Ideal => Ok(Reference::Params(*target)),
            Compiled::External => Err(Error::ExternalSpec(self.spec.name.clone())),
            _ => {
                let x = signal::synthesize_real(target, self.cfg.sample_rate_hz, self.cfg.n_samples);
                Ok(Reference::Features(self.represent(&x)?))
            }
        }
    }

    /// Distance from a prepared target to the sinusoid `prediction`.
    pub fn distance_to(&self, reference: &Reference, prediction: &SineParams) -> Result<f64> {
        let d = match reference {
            Reference::Params(t) => ideal_distance(t, prediction, &self.cfg),
            Reference::Features(t) => {
                let x = signal::synthesize_real(
                    prediction,
                    self.cfg.sample_rate_hz,
                    self.cfg.n_samples,
                );
                self.compare(t, &self.represent(&x)?)
            }
        };
        self.check(d)
    }

    /// Distance and its derivative with respect to the prediction's
    /// log2-pitch ([`Axis::Pitch`]) or level in dB ([`Axis::Level`]).
    pub fn seeded_distance_to(
        &self,
        reference: &Reference,
        prediction: &SineParams,
        axis: Axis,
    ) -> Result<DistanceValue> {
        let value = match reference {
            Reference::Params(t) => ideal_distance_seeded(t, prediction, axis, &self.cfg),
            Reference::Features(t) => {
                let x = signal::synthesize(prediction, &self.cfg, Some(axis));
                self.compare(t, &self.represent(&x)?)
            }
        };
        let value = self.check(value)?;
        if !value.der.is_finite() {
            return Err(Error::NonFinite { spec: self.spec.name.clone(), value: value.der });
        }
        Ok(DistanceValue { value })
    }

    fn check<S: Scalar>(&self, d: S) -> Result<S> {
        if d.value().is_finite() {
            Ok(d)
        } else {
            Err(Error::NonFinite { spec: self.spec.name.clone(), value: d.value() })
        }
    }
}

fn block_norm<S: Scalar>(norm: Norm, diffs: impl Iterator<Item = S>) -> S {
    match norm {
        Norm::L1 => diffs.map(Scalar::abs).sum(),
        Norm::L2 => diffs.map(|d| d * d).sum::<S>().sqrt(),
    }
}

fn stft_scales(scales: &[StftConfig]) -> Result<Vec<Stft>> {
    if scales.is_empty() {
        return Err(Error::Config("multi-scale distance needs at least one scale".into()));
    }
    scales.iter().map(|&c| Stft::new(c)).collect()
}

fn ideal_distance_seeded(
    target: &SineParams,
    prediction: &SineParams,
    axis: Axis,
    cfg: &BenchConfig,
) -> Dual {
    let (pitch_seed, level_seed) = match axis {
        Axis::Pitch => (1.0, 0.0),
        Axis::Level => (0.0, 1.0),
    };
    let octaves = Dual::new(prediction.log2_pitch(), pitch_seed) - Dual::constant(target.log2_pitch());
    let db = Dual::new(prediction.level_db, level_seed) - Dual::constant(target.level_db);
    (octaves.scale(1200.0)).abs().scale(1.0 / cfg.pitch_range_cents())
        + db.abs().scale(1.0 / cfg.level_range_width_db())
}
