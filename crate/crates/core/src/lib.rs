//! Gradient-direction benchmark for audio distances on pure sinusoids.
//!
//! A trial draws a target and a prediction sinusoid, then asks whether a
//! distance ranks a slightly corrected prediction as closer to the target
//! (numeric mode) or whether its derivative points the right way (analytic
//! mode, via forward-mode dual numbers pushed through the whole DSP chain).
//!
//! ```
//! use pitchgrad::bench::{run_trial, Condition};
//! use pitchgrad::distance::{builtin, Distance};
//! use pitchgrad::signal::{Axis, BenchConfig, SineParams};
//!
//! let cfg = BenchConfig::default();
//! let mss = Distance::new(builtin("mss").unwrap(), &cfg).unwrap();
//! let target = SineParams::new(-12.5, 346.0, 0.0);
//! let prediction = SineParams::new(-12.5, 700.0, 1.0);
//! let rec = run_trial(&mss, &Condition::coarse(Axis::Pitch), &target, &prediction).unwrap();
//! assert!(rec.correct);
//! ```

pub mod bench;
pub mod distance;
pub mod dsp;
pub mod dual;
pub mod error;
pub mod extern_protocol;
pub mod landscape;
pub mod signal;

pub use error::{Error, Result};
