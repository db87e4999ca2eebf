//! Sinusoid model, unit conversions and randomized trial sampling.

use std::f64::consts::{LN_10, LN_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::dual::{Dual, Scalar};
use crate::error::{Error, Result};

/// Decibel scale factor of the level convention `L = 25 log10(A)`.
pub const LEVEL_DB_PER_DECADE: f64 = 25.0;

/// Largest analysis window any builtin distance uses.
pub const MAX_WINDOW: usize = 2048;

/// One point of the search space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineParams {
    pub level_db: f64,
    pub pitch_hz: f64,
    pub phase_rad: f64,
}

impl SineParams {
    pub fn new(level_db: f64, pitch_hz: f64, phase_rad: f64) -> Self {
        Self { level_db, pitch_hz, phase_rad }
    }

    pub fn amplitude(&self) -> f64 {
        level_to_amplitude(self.level_db)
    }

    /// Pitch in octaves above 1 Hz.
    pub fn log2_pitch(&self) -> f64 {
        self.pitch_hz.log2()
    }

    pub fn with_phase(self, phase_rad: f64) -> Self {
        Self { phase_rad, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub sample_rate_hz: f64,
    pub n_samples: usize,
    pub pitch_range_hz: (f64, f64),
    pub level_range_db: (f64, f64),
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sample_rate_hz: 44_100.0,
            n_samples: 44_100,
            pitch_range_hz: (30.0, 4000.0),
            level_range_db: (-25.0, 0.0),
            seed: 0,
        }
    }
}

impl BenchConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz > 0.0) {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        if self.n_samples < MAX_WINDOW {
            return Err(Error::Config(format!(
                "n_samples = {} is below the largest analysis window ({MAX_WINDOW})",
                self.n_samples
            )));
        }
        let (plo, phi) = self.pitch_range_hz;
        if !(plo > 0.0 && plo < phi) {
            return Err(Error::Config(format!("bad pitch range {plo}..{phi} Hz")));
        }
        if phi > self.sample_rate_hz / 2.0 {
            return Err(Error::Config("pitch range exceeds Nyquist".into()));
        }
        let (llo, lhi) = self.level_range_db;
        if !(llo < lhi) {
            return Err(Error::Config(format!("bad level range {llo}..{lhi} dB")));
        }
        Ok(())
    }

    /// Width of the pitch range in cents.
    pub fn pitch_range_cents(&self) -> f64 {
        cents_between(self.pitch_range_hz.0, self.pitch_range_hz.1)
    }

    pub fn level_range_width_db(&self) -> f64 {
        self.level_range_db.1 - self.level_range_db.0
    }

    pub fn pitch_in_range(&self, hz: f64) -> bool {
        hz >= self.pitch_range_hz.0 && hz <= self.pitch_range_hz.1
    }

    pub fn level_in_range(&self, db: f64) -> bool {
        db >= self.level_range_db.0 && db <= self.level_range_db.1
    }
}

/// Parameter the derivative channel of a synthesized waveform follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// log2 of the frequency in Hz.
    Pitch,
    /// Level in dB.
    Level,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Pitch => "pitch",
            Axis::Level => "level",
        }
    }
}

pub fn level_to_amplitude(level_db: f64) -> f64 {
    10f64.powf(level_db / LEVEL_DB_PER_DECADE)
}

pub fn amplitude_to_level(amplitude: f64) -> Result<f64> {
    if !(amplitude > 0.0) {
        return Err(Error::Domain(format!("amplitude {amplitude} must be positive")));
    }
    Ok(LEVEL_DB_PER_DECADE * amplitude.log10())
}

pub fn cents_between(f1: f64, f2: f64) -> f64 {
    1200.0 * (f2 / f1).log2()
}

pub fn shift_cents(f: f64, cents: f64) -> f64 {
    f * (cents / 1200.0).exp2()
}

/// Real-valued waveform `A cos(2π f n / fs + φ)`.
pub fn synthesize_real(p: &SineParams, sample_rate_hz: f64, n_samples: usize) -> Vec<f64> {
    let amp = p.amplitude();
    let w = TAU * p.pitch_hz / sample_rate_hz;
    (0..n_samples)
        .map(|n| amp * (w * n as f64 + p.phase_rad).cos())
        .collect()
}

/// Waveform whose tangent channel is seeded by `seed` (or zero for `None`).
///
/// With [`Axis::Pitch`] the tangent is d/d(log2 pitch); with
/// [`Axis::Level`] it is d/d(level dB).
pub fn synthesize(
    p: &SineParams,
    cfg: &BenchConfig,
    seed: Option<Axis>,
) -> Vec<Dual> {
    let amp = p.amplitude();
    let w = TAU * p.pitch_hz / cfg.sample_rate_hz;
    let level_gain = LN_10 / LEVEL_DB_PER_DECADE;
    (0..cfg.n_samples)
        .map(|n| {
            let t = n as f64;
            let (s, c) = (w * t + p.phase_rad).sin_cos();
            let val = amp * c;
            let der = match seed {
                None => 0.0,
                // dθ/d(log2 f) = w·t·ln2
                Some(Axis::Pitch) => -amp * s * w * t * LN_2,
                Some(Axis::Level) => val * level_gain,
            };
            Dual::new(val, der)
        })
        .collect()
}

/// Synthesize into any scalar type; duals receive no seed.
pub fn synthesize_as<S: Scalar>(p: &SineParams, cfg: &BenchConfig) -> Vec<S> {
    synthesize_real(p, cfg.sample_rate_hz, cfg.n_samples)
        .into_iter()
        .map(S::from_f64)
        .collect()
}

/// Deterministic counter-based stream: `(seed, domain, index)` fully
/// determines the output, independent of which worker draws it.
pub fn substream(seed: u64, domain: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(index);
    rng
}

/// Stream domain for trial sampling.
pub const TRIAL_DOMAIN: u64 = 1;
/// Stream domain for landscape phases.
pub const LANDSCAPE_DOMAIN: u64 = 2;

pub fn sample_params<R: Rng>(rng: &mut R, cfg: &BenchConfig) -> SineParams {
    let (plo, phi) = cfg.pitch_range_hz;
    let (llo, lhi) = cfg.level_range_db;
    let u: f64 = rng.gen();
    let pitch_hz = plo * (phi / plo).powf(u);
    let level_db = llo + (lhi - llo) * rng.gen::<f64>();
    let phase_rad = TAU * rng.gen::<f64>();
    SineParams { level_db, pitch_hz, phase_rad }
}

/// Draw an independent `(target, prediction)` pair with distinct pitches
/// and distinct levels.
pub fn sample_trial<R: Rng>(rng: &mut R, cfg: &BenchConfig) -> (SineParams, SineParams) {
    loop {
        let target = sample_params(rng, cfg);
        let prediction = sample_params(rng, cfg);
        if target.pitch_hz != prediction.pitch_hz && target.level_db != prediction.level_db {
            return (target, prediction);
        }
    }
}

/// The pair for trial `index` of a run seeded with `cfg.seed`.
pub fn trial_params(cfg: &BenchConfig, index: u64) -> (SineParams, SineParams) {
    let mut rng = substream(cfg.seed, TRIAL_DOMAIN, index);
    sample_trial(&mut rng, cfg)
}

/// Move `prediction` a further `eps` (cents or dB) away from `target` along
/// `axis`. Phase and the other axis are copied from the prediction.
pub fn perturb(
    prediction: &SineParams,
    target: &SineParams,
    axis: Axis,
    eps: f64,
) -> Result<SineParams> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("perturbation eps {eps} must be positive")));
    }
    let mut out = *prediction;
    match axis {
        Axis::Pitch => {
            let c = cents_between(target.pitch_hz, prediction.pitch_hz);
            if c == 0.0 {
                return Err(Error::Domain("prediction and target share a pitch".into()));
            }
            out.pitch_hz = shift_cents(prediction.pitch_hz, eps * c.signum());
        }
        Axis::Level => {
            let d = prediction.level_db - target.level_db;
            if d == 0.0 {
                return Err(Error::Domain("prediction and target share a level".into()));
            }
            out.level_db = prediction.level_db + eps * d.signum();
        }
    }
    Ok(out)
}

/// Signed offset of `prediction` from `target` on `axis`, in log2-pitch
/// units or dB.
pub fn axis_offset(prediction: &SineParams, target: &SineParams, axis: Axis) -> f64 {
    match axis {
        Axis::Pitch => (prediction.pitch_hz / target.pitch_hz).log2(),
        Axis::Level => prediction.level_db - target.level_db,
    }
}
