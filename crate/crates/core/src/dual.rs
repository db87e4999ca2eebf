//! Forward-mode automatic differentiation with a single tangent channel.
//!
//! A [`Dual`] carries a value and its derivative with respect to one seeded
//! parameter. The DSP pipeline is written against the [`Scalar`] trait, which
//! is implemented both for plain `f64` (the fast path used for numeric
//! perturbation conditions) and for [`Dual`] (the analytic path).
//!
//! Singular points follow a subgradient convention: `sqrt` and `abs` at zero
//! yield a zero derivative.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Value plus one directional derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub val: f64,
    pub der: f64,
}

impl Dual {
    #[inline]
    pub const fn new(val: f64, der: f64) -> Self {
        Self { val, der }
    }

    /// A constant: zero derivative.
    #[inline]
    pub const fn constant(val: f64) -> Self {
        Self { val, der: 0.0 }
    }

    /// The seeded variable itself: unit derivative.
    #[inline]
    pub const fn variable(val: f64) -> Self {
        Self { val, der: 1.0 }
    }

    /// Division that rejects a zero denominator instead of producing inf/NaN.
    pub fn try_div(self, rhs: Self) -> Result<Self> {
        if rhs.val == 0.0 {
            return Err(Error::Domain("dual division by zero".into()));
        }
        Ok(self / rhs)
    }

    /// Natural log, rejecting non-positive arguments.
    pub fn try_ln(self) -> Result<Self> {
        check_positive(self.val, "ln")?;
        Ok(Scalar::ln(self))
    }

    pub fn try_log2(self) -> Result<Self> {
        check_positive(self.val, "log2")?;
        Ok(Scalar::log2(self))
    }

    pub fn try_log10(self) -> Result<Self> {
        check_positive(self.val, "log10")?;
        Ok(Scalar::log10(self))
    }

    pub fn try_sqrt(self) -> Result<Self> {
        if self.val < 0.0 || self.val.is_nan() {
            return Err(Error::Domain(format!("sqrt of negative value {}", self.val)));
        }
        Ok(Scalar::sqrt(self))
    }
}

fn check_positive(v: f64, op: &str) -> Result<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{op} of non-positive value {v}")))
    }
}

impl Add for Dual {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.val + rhs.val, self.der + rhs.der)
    }
}

impl Sub for Dual {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.val - rhs.val, self.der - rhs.der)
    }
}

impl Mul for Dual {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.val * rhs.val,
            self.val * rhs.der + self.der * rhs.val,
        )
    }
}

impl Div for Dual {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.val;
        let q = self.val * inv;
        Self::new(q, (self.der - q * rhs.der) * inv)
    }
}

impl Neg for Dual {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.val, -self.der)
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.val += rhs.val;
        self.der += rhs.der;
    }
}

impl SubAssign for Dual {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        self.val -= rhs.val;
        self.der -= rhs.der;
    }
}

impl MulAssign for Dual {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl Sum for Dual {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Dual::constant(0.0), |a, b| a + b)
    }
}

/// Real-like scalar the DSP chain is generic over.
pub trait Scalar:
    Copy
    + Debug
    + Default
    + Send
    + Sync
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Sum
    + 'static
{
    fn from_f64(v: f64) -> Self;
    /// Primal value.
    fn value(self) -> f64;
    /// Tangent; zero for plain reals.
    fn tangent(self) -> f64;
    /// Multiply by a real constant.
    fn scale(self, k: f64) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn log2(self) -> Self;
    fn log10(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn powf(self, n: f64) -> Self;

    #[inline]
    fn zero() -> Self {
        Self::from_f64(0.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn tangent(self) -> f64 {
        0.0
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn log2(self) -> Self {
        f64::log2(self)
    }
    #[inline]
    fn log10(self) -> Self {
        f64::log10(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn powf(self, n: f64) -> Self {
        f64::powf(self, n)
    }
}

impl Scalar for Dual {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Dual::constant(v)
    }
    #[inline]
    fn value(self) -> f64 {
        self.val
    }
    #[inline]
    fn tangent(self) -> f64 {
        self.der
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        Dual::new(self.val * k, self.der * k)
    }
    #[inline]
    fn sin(self) -> Self {
        let (s, c) = self.val.sin_cos();
        Dual::new(s, c * self.der)
    }
    #[inline]
    fn cos(self) -> Self {
        let (s, c) = self.val.sin_cos();
        Dual::new(c, -s * self.der)
    }
    #[inline]
    fn exp(self) -> Self {
        let e = self.val.exp();
        Dual::new(e, e * self.der)
    }
    #[inline]
    fn ln(self) -> Self {
        Dual::new(self.val.ln(), self.der / self.val)
    }
    #[inline]
    fn log2(self) -> Self {
        Dual::new(
            self.val.log2(),
            self.der / (self.val * std::f64::consts::LN_2),
        )
    }
    #[inline]
    fn log10(self) -> Self {
        Dual::new(
            self.val.log10(),
            self.der / (self.val * std::f64::consts::LN_10),
        )
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.val.sqrt();
        if s == 0.0 {
            Dual::new(s, 0.0)
        } else {
            Dual::new(s, self.der / (2.0 * s))
        }
    }
    #[inline]
    fn abs(self) -> Self {
        if self.val > 0.0 {
            self
        } else if self.val < 0.0 {
            -self
        } else {
            Dual::new(0.0, 0.0)
        }
    }
    #[inline]
    fn powf(self, n: f64) -> Self {
        if n == 0.0 {
            return Dual::constant(1.0);
        }
        if n == 1.0 {
            return self;
        }
        let p = self.val.powf(n - 1.0);
        Dual::new(p * self.val, n * p * self.der)
    }
}

/// Complex number over any [`Scalar`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex<S> {
    pub re: S,
    pub im: S,
}

/// Complex value whose parts carry derivatives.
pub type ComplexDual = Complex<Dual>;

impl<S: Scalar> Complex<S> {
    #[inline]
    pub fn new(re: S, im: S) -> Self {
        Self { re, im }
    }

    #[inline]
    pub fn from_real(re: S) -> Self {
        Self { re, im: S::zero() }
    }

    /// Multiply by a constant complex number `(c, s)`.
    #[inline]
    pub fn mul_const(self, c: f64, s: f64) -> Self {
        Self {
            re: self.re.scale(c) - self.im.scale(s),
            im: self.re.scale(s) + self.im.scale(c),
        }
    }

    #[inline]
    pub fn scale(self, k: f64) -> Self {
        Self { re: self.re.scale(k), im: self.im.scale(k) }
    }

    #[inline]
    pub fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    #[inline]
    pub fn norm_sqr(self) -> S {
        self.re * self.re + self.im * self.im
    }

    /// Modulus. At the origin the derivative is defined as zero.
    #[inline]
    pub fn magnitude(self) -> S {
        self.norm_sqr().sqrt()
    }
}

impl<S: Scalar> Add for Complex<S> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl<S: Scalar> Sub for Complex<S> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl<S: Scalar> Mul for Complex<S> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

/// Magnitude of a complex dual number, `(0, 0)` at the origin.
pub fn magnitude(z: ComplexDual) -> Dual {
    z.magnitude()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let p = Dual::new(2.0, 1.0) * Dual::new(3.0, 0.0);
        assert_eq!(p, Dual::new(6.0, 3.0));
    }

    #[test]
    fn quotient_rule() {
        let q = Dual::new(1.0, 1.0) / Dual::new(2.0, 0.0);
        assert_eq!(q, Dual::new(0.5, 0.5));
    }

    #[test]
    fn constants_behave_like_reals() {
        let (x, y) = (1.7, -0.3);
        let (a, b) = (Dual::constant(x), Dual::constant(y));
        assert_eq!(a + b, Dual::constant(x + y));
        assert_eq!(a - b, Dual::constant(x - y));
        assert_eq!(a * b, Dual::constant(x * y));
        assert_eq!(a / b, Dual::constant(x / y));
        assert_eq!(-a, Dual::constant(-x));
    }

    #[test]
    fn division_by_zero_is_a_domain_error() {
        let r = Dual::new(1.0, 1.0).try_div(Dual::constant(0.0));
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn elementary_at_known_points() {
        assert_eq!(Scalar::sin(Dual::variable(0.0)), Dual::new(0.0, 1.0));
        assert_eq!(Scalar::ln(Dual::variable(1.0)), Dual::new(0.0, 1.0));
        assert_eq!(Scalar::sqrt(Dual::variable(0.0)), Dual::new(0.0, 0.0));
        assert_eq!(Scalar::abs(Dual::variable(0.0)), Dual::new(0.0, 0.0));
        assert_eq!(Scalar::abs(Dual::variable(-2.0)), Dual::new(2.0, -1.0));
    }

    #[test]
    fn logs_reject_non_positive() {
        assert!(Dual::variable(0.0).try_ln().is_err());
        assert!(Dual::variable(-1.0).try_log10().is_err());
        assert!(Dual::variable(-1.0).try_log2().is_err());
        assert!(Dual::variable(-1.0).try_sqrt().is_err());
        assert!(Dual::variable(4.0).try_sqrt().is_ok());
    }

    #[test]
    fn magnitude_cases() {
        let c = |a: (f64, f64), b: (f64, f64)| {
            magnitude(Complex::new(Dual::new(a.0, a.1), Dual::new(b.0, b.1)))
        };
        assert_eq!(c((3.0, 0.0), (4.0, 0.0)), Dual::new(5.0, 0.0));
        assert_eq!(c((1.0, 1.0), (0.0, 0.0)), Dual::new(1.0, 1.0));
        assert_eq!(c((0.0, 5.0), (0.0, 7.0)), Dual::new(0.0, 0.0));
    }
}
