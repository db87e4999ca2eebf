mod common;

use common::{max_abs_error, naive_dft};
use pitchgrad::dsp::{dft, RealFftPlan};
use pitchgrad::dual::{Complex, Dual};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn radix2_matches_naive_dft() {
    for n in [64, 256, 1024] {
        let x = noise(n, n as u64);
        let err = max_abs_error(&dft(&x).unwrap(), &naive_dft(&x));
        assert!(err <= 1e-9, "n={n}: max error {err:e}");
    }
}

#[test]
fn real_plan_matches_naive_dft() {
    for n in [64, 256, 1024] {
        let x = noise(n, 7 + n as u64);
        let plan = RealFftPlan::new(n).unwrap();
        let mut scratch = vec![Complex::default(); n / 2];
        let mut out = vec![Complex::default(); n / 2 + 1];
        plan.process(&x, &mut scratch, &mut out);
        let oracle = naive_dft(&x);
        let err = max_abs_error(&out, &oracle[..=n / 2]);
        assert!(err <= 1e-9, "n={n}: max error {err:e}");
    }
}

#[test]
fn parseval() {
    for n in [64, 256, 1024] {
        let x = noise(n, 99 + n as u64);
        let time: f64 = x.iter().map(|v| v * v).sum();
        let freq: f64 = dft(&x).unwrap().iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        let rel = (time - freq).abs() / time;
        assert!(rel <= 1e-9, "n={n}: relative error {rel:e}");
    }
}

#[test]
fn tangent_channel_is_the_transform_of_the_tangent() {
    let n = 256;
    let x = noise(n, 1);
    let dx = noise(n, 2);
    let duals: Vec<Dual> = x.iter().zip(&dx).map(|(&v, &d)| Dual::new(v, d)).collect();
    let out = dft(&duals).unwrap();
    let tangent = dft(&dx).unwrap();
    for (z, t) in out.iter().zip(&tangent) {
        assert!((z.re.der - t.re).abs() < 1e-10 && (z.im.der - t.im).abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn linearity(a in -3.0f64..3.0, seed in any::<u64>()) {
        let x = noise(128, seed);
        let y = noise(128, seed.wrapping_add(1));
        let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + v).collect();
        let (fx, fy, fm) = (dft(&x).unwrap(), dft(&y).unwrap(), dft(&mix).unwrap());
        for k in 0..128 {
            prop_assert!((fm[k].re - (a * fx[k].re + fy[k].re)).abs() < 1e-9);
            prop_assert!((fm[k].im - (a * fx[k].im + fy[k].im)).abs() < 1e-9);
        }
    }

    #[test]
    fn real_input_spectrum_is_hermitian(seed in any::<u64>()) {
        let x = noise(64, seed);
        let f = dft(&x).unwrap();
        for k in 1..64 {
            prop_assert!((f[k].re - f[64 - k].re).abs() < 1e-10);
            prop_assert!((f[k].im + f[64 - k].im).abs() < 1e-10);
        }
    }
}

#[test]
fn non_power_of_two_is_rejected() {
    assert!(dft(&[0.0; 100]).is_err());
    assert!(RealFftPlan::new(48).is_err());
}
