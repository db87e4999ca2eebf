//! Iterative radix-2 FFT with precomputed twiddles, a real-input variant
//! built on a half-length complex transform, and a direct O(n²) DFT.

use std::f64::consts::TAU;

use crate::dual::{Complex, Scalar};
use crate::error::{Error, Result};

/// Radix-2 decimation-in-time plan for one power-of-two length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    n: usize,
    /// `exp(-2πik/n)` for `k < n/2`.
    twiddles: Vec<(f64, f64)>,
    bitrev: Vec<usize>,
}

impl FftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::Config(format!("FFT length {n} is not a power of two")));
        }
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -TAU * k as f64 / n as f64;
                (a.cos(), a.sin())
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Ok(Self { n, twiddles, bitrev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Forward transform in place. Panics if `buf.len() != self.len()`.
    pub fn process<S: Scalar>(&self, buf: &mut [Complex<S>]) {
        assert_eq!(buf.len(), self.n, "buffer length does not match plan");
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let (c, s) = self.twiddles[k * stride];
                    let u = buf[start + k];
                    let v = buf[start + k + half].mul_const(c, s);
                    buf[start + k] = u + v;
                    buf[start + k + half] = u - v;
                }
            }
            size *= 2;
        }
    }
}

/// Real-input FFT of length `n`, returning the `n/2 + 1` one-sided bins.
#[derive(Debug, Clone)]
pub struct RealFftPlan {
    n: usize,
    half: FftPlan,
    /// `exp(-2πik/n)` for `k <= n/2`.
    post: Vec<(f64, f64)>,
}

impl RealFftPlan {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Config(format!("real FFT length {n} must be a power of two ≥ 2")));
        }
        let post = (0..=n / 2)
            .map(|k| {
                let a = -TAU * k as f64 / n as f64;
                (a.cos(), a.sin())
            })
            .collect();
        Ok(Self { n, half: FftPlan::new(n / 2)?, post })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bins(&self) -> usize {
        self.n / 2 + 1
    }

    /// Transform `input` (length `n`) into `out` (length `n/2 + 1`), using
    /// `scratch` (length `n/2`) as working space.
    pub fn process<S: Scalar>(
        &self,
        input: &[S],
        scratch: &mut [Complex<S>],
        out: &mut [Complex<S>],
    ) {
        let m = self.n / 2;
        assert_eq!(input.len(), self.n);
        assert_eq!(scratch.len(), m);
        assert_eq!(out.len(), m + 1);
        for (z, pair) in scratch.iter_mut().zip(input.chunks_exact(2)) {
            *z = Complex::new(pair[0], pair[1]);
        }
        self.half.process(scratch);
        for k in 0..=m {
            let a = scratch[k % m];
            let b = scratch[(m - k) % m].conj();
            let even = (a + b).scale(0.5);
            // (a - b) / 2i
            let d = a - b;
            let odd = Complex::new(d.im.scale(0.5), -d.re.scale(0.5));
            let (c, s) = self.post[k];
            out[k] = even + odd.mul_const(c, s);
        }
    }
}

/// Full-length DFT of a real-valued signal via the radix-2 path.
pub fn dft<S: Scalar>(x: &[S]) -> Result<Vec<Complex<S>>> {
    let plan = FftPlan::new(x.len())?;
    let mut buf: Vec<Complex<S>> = x.iter().copied().map(Complex::from_real).collect();
    plan.process(&mut buf);
    Ok(buf)
}

/// Direct summation `X[k] = Σ x[t] e^{-2πikt/n}` for any length.
pub fn dft_naive<S: Scalar>(x: &[Complex<S>]) -> Vec<Complex<S>> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let mut acc = Complex::<S>::default();
            for (t, &v) in x.iter().enumerate() {
                let a = -TAU * ((k * t) % n) as f64 / n as f64;
                acc = acc + v.mul_const(a.cos(), a.sin());
            }
            acc
        })
        .collect()
}
