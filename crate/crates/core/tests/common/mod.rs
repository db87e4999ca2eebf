//! Oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use pitchgrad::distance::{ideal_distance, Distance, Norm};
use pitchgrad::dual::Complex;
use pitchgrad::signal::{synthesize_real, trial_params, Axis, BenchConfig, SineParams};
use rand::Rng;

pub const WAVEFORM_SPECS: [&str; 7] = [
    "spectrogram",
    "log_spectrogram",
    "mel",
    "mfcc",
    "mss",
    "log_mss",
    "log_spectral_centroid",
];

/// Initial step sizes for the finite-difference oracle: octaves and dB.
pub const PITCH_STEP: f64 = 1e-7;
pub const LEVEL_STEP: f64 = 1e-5;

pub fn shifted(p: &SineParams, axis: Axis, h: f64) -> SineParams {
    let mut q = *p;
    match axis {
        Axis::Pitch => q.pitch_hz *= h.exp2(),
        Axis::Level => q.level_db += h,
    }
    q
}

/// Derivative of a distance along one axis from f64 evaluations only.
#[derive(Debug, Clone, Copy)]
pub struct FdEstimate {
    pub derivative: f64,
    /// Sum of the magnitudes of the per-feature terms at the initial step,
    /// the scale of the rounding error in `derivative`.
    pub magnitude: f64,
}

/// Central differences of every feature, contracted with the norm's
/// gradient at the unshifted prediction, extrapolated to zero step by
/// Ridders' method. Differencing the features instead of the distance keeps
/// |·| kinks out of the stencil; the shrinking tableau copes with points
/// where the features curve too sharply for a fixed step.
pub fn fd_derivative(
    distance: &Distance,
    target: &SineParams,
    prediction: &SineParams,
    axis: Axis,
) -> FdEstimate {
    const SHRINK: f64 = 1.4;
    const ROWS: usize = 10;
    let cfg = distance.config();
    let features = |p: &SineParams| {
        let x = synthesize_real(p, cfg.sample_rate_hz, cfg.n_samples);
        distance.represent(&x).expect("representation").blocks
    };
    let t = features(target);
    let p = features(prediction);
    let weights: Vec<Vec<f64>> = p
        .iter()
        .zip(&t)
        .map(|(pb, tb)| {
            let diff: Vec<f64> = pb.iter().zip(tb).map(|(p, t)| p - t).collect();
            match distance.spec().norm {
                Norm::L1 => diff.iter().map(|&e| if e == 0.0 { 0.0 } else { e.signum() }).collect(),
                Norm::L2 => {
                    let n = diff.iter().map(|e| e * e).sum::<f64>().sqrt();
                    diff.iter().map(|e| if n == 0.0 { 0.0 } else { e / n }).collect()
                }
            }
        })
        .collect();
    // Contracted central difference and the sum of its term magnitudes.
    let central = |h: f64| {
        let up = features(&shifted(prediction, axis, h));
        let down = features(&shifted(prediction, axis, -h));
        let mut sum = 0.0;
        let mut magnitude = 0.0;
        for ((u, d), w) in up.iter().zip(&down).zip(&weights) {
            for ((a, b), w) in u.iter().zip(d).zip(w) {
                let term = w * (a - b) / (2.0 * h);
                sum += term;
                magnitude += term.abs();
            }
        }
        (sum, magnitude)
    };

    let mut h = match axis {
        Axis::Pitch => PITCH_STEP,
        Axis::Level => LEVEL_STEP,
    };
    let (first, magnitude) = central(h);
    let mut prev = vec![first];
    let mut best = first;
    let mut best_err = f64::INFINITY;
    for _ in 1..ROWS {
        h /= SHRINK;
        let mut row = vec![central(h).0];
        let mut fac = SHRINK * SHRINK;
        for j in 1..=prev.len() {
            let v = (row[j - 1] * fac - prev[j - 1]) / (fac - 1.0);
            fac *= SHRINK * SHRINK;
            let err = (v - row[j - 1]).abs().max((v - prev[j - 1]).abs());
            if err <= best_err {
                best_err = err;
                best = v;
            }
            row.push(v);
        }
        let (last, before) = (row[row.len() - 1], prev[prev.len() - 1]);
        if (last - before).abs() >= 2.0 * best_err {
            break;
        }
        prev = row;
    }
    FdEstimate { derivative: best, magnitude }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GradientAgreement {
    pub points: usize,
    pub signed_points: usize,
    pub sign_agree: usize,
    pub value_checked: usize,
    pub value_ok: usize,
    pub worst_relative: f64,
}

impl GradientAgreement {
    pub fn sign_rate(&self) -> f64 {
        if self.signed_points == 0 {
            1.0
        } else {
            self.sign_agree as f64 / self.signed_points as f64
        }
    }

    pub fn merge(&mut self, o: &GradientAgreement) {
        self.points += o.points;
        self.signed_points += o.signed_points;
        self.sign_agree += o.sign_agree;
        self.value_checked += o.value_checked;
        self.value_ok += o.value_ok;
        self.worst_relative = self.worst_relative.max(o.worst_relative);
    }
}

/// Compare AD and the finite-difference oracle over trial points
/// `0..n_points` of `cfg`'s seed, both axes.
pub fn gradient_agreement(distance: &Distance, cfg: &BenchConfig, n_points: u64) -> GradientAgreement {
    let mut out = GradientAgreement::default();
    for i in 0..n_points {
        let (target, prediction) = trial_params(cfg, i);
        let reference = distance.reference(&target).expect("reference");
        for axis in [Axis::Pitch, Axis::Level] {
            let ad = distance
                .seeded_distance_to(&reference, &prediction, axis)
                .expect("seeded distance")
                .value
                .der;
            let fd = fd_derivative(distance, &target, &prediction, axis);
            out.points += 1;
            if ad.abs() > 1e-7 {
                out.signed_points += 1;
                if ad.signum() == fd.derivative.signum() {
                    out.sign_agree += 1;
                }
                out.value_checked += 1;
                let err = (fd.derivative - ad).abs();
                out.worst_relative = out.worst_relative.max(err / ad.abs());
                if err <= 1e-4 * ad.abs() + 1e-9 * fd.magnitude {
                    out.value_ok += 1;
                }
            }
        }
    }
    out
}

/// Naive O(n²) DFT of a real sequence, all `n` bins.
pub fn naive_dft(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter().enumerate().fold((0.0, 0.0), |(re, im), (t, &v)| {
                let a = -std::f64::consts::TAU * ((k * t) % n) as f64 / n as f64;
                (re + v * a.cos(), im + v * a.sin())
            })
        })
        .collect()
}

pub fn max_abs_error(fast: &[Complex<f64>], oracle: &[(f64, f64)]) -> f64 {
    fast.iter()
        .zip(oracle)
        .map(|(z, &(re, im))| (z.re - re).hypot(z.im - im))
        .fold(0.0, f64::max)
}

/// Random ordered triple `(a, b, c)` with `a < b < c` or `a > b > c`.
pub fn monotone_triple<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> (f64, f64, f64) {
    loop {
        let mut v = [rng.gen_range(lo..hi), rng.gen_range(lo..hi), rng.gen_range(lo..hi)];
        v.sort_by(f64::total_cmp);
        if v[0] < v[1] && v[1] < v[2] {
            return if rng.gen() { (v[0], v[1], v[2]) } else { (v[2], v[1], v[0]) };
        }
    }
}

/// Count ordinal violations of the ideal distance over `n` random triples per
/// axis: moving the prediction further from the target along pitch (at
/// fixed levels) or level (at fixed pitches) must increase the distance.
pub fn ideal_ordinal_violations<R: Rng>(rng: &mut R, cfg: &BenchConfig, n: usize) -> usize {
    let (plo, phi) = cfg.pitch_range_hz;
    let (llo, lhi) = cfg.level_range_db;
    let mut violations = 0;
    for _ in 0..n {
        let (w, w1, w2) = monotone_triple(rng, plo.log2(), phi.log2());
        let (a, a1) = (rng.gen_range(llo..lhi), rng.gen_range(llo..lhi));
        let t = SineParams::new(a, w.exp2(), 0.0);
        let near = SineParams::new(a1, w1.exp2(), 0.0);
        let far = SineParams::new(a1, w2.exp2(), 0.0);
        if !(ideal_distance(&t, &near, cfg) < ideal_distance(&t, &far, cfg)) {
            violations += 1;
        }

        let (l, l1, l2) = monotone_triple(rng, llo, lhi);
        let (f, f1) = (rng.gen_range(plo..phi), rng.gen_range(plo..phi));
        let t = SineParams::new(l, f, 0.0);
        let near = SineParams::new(l1, f1, 0.0);
        let far = SineParams::new(l2, f1, 0.0);
        if !(ideal_distance(&t, &near, cfg) < ideal_distance(&t, &far, cfg)) {
            violations += 1;
        }
    }
    violations
}

/// Largest |d(t, p) − d(t, g·p)| over `n` pairs, `g` a random amplitude gain.
pub fn centroid_gain_deviation<R: Rng>(distance: &Distance, rng: &mut R, n: usize) -> f64 {
    let cfg = distance.config();
    let mut worst = 0f64;
    for i in 0..n as u64 {
        let (target, prediction) = trial_params(cfg, i);
        let reference = distance.reference(&target).expect("reference");
        let gained = shifted(&prediction, Axis::Level, rng.gen_range(-20.0..20.0));
        let a = distance.distance_to(&reference, &prediction).expect("distance");
        let b = distance.distance_to(&reference, &gained).expect("distance");
        worst = worst.max((a - b).abs());
    }
    worst
}
