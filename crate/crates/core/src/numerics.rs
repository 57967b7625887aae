//! Signed log-domain arithmetic and the fourth-order second-derivative stencil.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Relative size below which an opposite-sign sum is treated as exact cancellation.
pub const CANCELLATION_THRESHOLD: f64 = 1e-14;

/// A real number stored as `sign · exp(log_magnitude)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    sign: i8,
    log_magnitude: f64,
}

impl SignedLog {
    pub const ZERO: Self = Self {
        sign: 0,
        log_magnitude: f64::NEG_INFINITY,
    };

    pub const ONE: Self = Self {
        sign: 1,
        log_magnitude: 0.0,
    };

    /// Builds `sign · exp(log_magnitude)`. A log magnitude of `-inf` gives zero.
    pub fn new(sign: i8, log_magnitude: f64) -> Self {
        if sign == 0 || log_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                log_magnitude,
            }
        }
    }

    /// Positive number with the given natural log.
    pub fn from_ln(ln: f64) -> Self {
        Self::new(1, ln)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.sign) * self.log_magnitude.exp()
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn log_magnitude(self) -> f64 {
        self.log_magnitude
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    /// Natural log of the value; `NaN` unless positive.
    pub fn ln(self) -> f64 {
        match self.sign {
            1 => self.log_magnitude,
            0 => f64::NEG_INFINITY,
            _ => f64::NAN,
        }
    }

    pub fn abs(self) -> Self {
        Self::new(self.sign.abs(), self.log_magnitude)
    }

    pub fn recip(self) -> Self {
        Self::new(self.sign, -self.log_magnitude)
    }

    pub fn powf(self, p: f64) -> Self {
        debug_assert!(self.sign >= 0);
        Self::new(self.sign, p * self.log_magnitude)
    }

    /// Sum with a flag that is set when opposite-sign terms cancelled to zero.
    pub fn add_checked(self, other: Self) -> (Self, bool) {
        if self.sign == 0 {
            return (other, false);
        }
        if other.sign == 0 {
            return (self, false);
        }
        let (big, small) = match self.log_magnitude.partial_cmp(&other.log_magnitude) {
            Some(Ordering::Less) => (other, self),
            _ => (self, other),
        };
        let d = small.log_magnitude - big.log_magnitude;
        if big.sign == small.sign {
            return (
                Self::new(big.sign, big.log_magnitude + d.exp().ln_1p()),
                false,
            );
        }
        let rel = -d.exp_m1();
        if rel < CANCELLATION_THRESHOLD {
            (Self::ZERO, true)
        } else {
            (Self::new(big.sign, big.log_magnitude + rel.ln()), false)
        }
    }

    /// Sum of an iterator of terms, reporting whether any step cancelled.
    pub fn sum_checked<I: IntoIterator<Item = Self>>(terms: I) -> (Self, bool) {
        terms
            .into_iter()
            .fold((Self::ZERO, false), |(acc, flag), t| {
                let (s, c) = acc.add_checked(t);
                (s, flag || c)
            })
    }
}

impl Mul for SignedLog {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self::new(self.sign * rhs.sign, self.log_magnitude + rhs.log_magnitude)
    }
}

impl Div for SignedLog {
    type Output = Self;

    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl Neg for SignedLog {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-self.sign, self.log_magnitude)
    }
}

impl Add for SignedLog {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        self.add_checked(rhs).0
    }
}

impl Sub for SignedLog {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self.add_checked(-rhs).0
    }
}

/// `ln(2 cosh x)` without overflow.
pub fn ln_2cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// `ln|2 sinh x|`; `-inf` at zero.
pub fn ln_abs_2sinh(x: f64) -> f64 {
    let a = x.abs();
    a + (-(-2.0 * a).exp_m1()).ln()
}

/// `ln|tanh x|`; `-inf` at zero.
pub fn ln_abs_tanh(x: f64) -> f64 {
    let a = x.abs();
    let e = (-2.0 * a).exp();
    (-(-2.0 * a).exp_m1()).ln() - e.ln_1p()
}

/// `ln(exp a + exp b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Step of the five-point stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilSpec {
    step: f64,
}

impl StencilSpec {
    pub const DEFAULT_FIELD_STEP: f64 = 1e-3;

    pub fn new(step: f64) -> Result<Self> {
        if step.is_finite() && step > 0.0 {
            Ok(Self { step })
        } else {
            Err(Error::Domain(format!(
                "stencil step must be finite and > 0, got {step}"
            )))
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Default step for derivatives in the field.
    pub fn field_default() -> Self {
        Self {
            step: Self::DEFAULT_FIELD_STEP,
        }
    }

    /// Default step for derivatives in β: `max(1e-3, 1e-4 β)`.
    pub fn beta_default(beta: f64) -> Self {
        Self {
            step: (1e-4 * beta).max(1e-3),
        }
    }

    pub fn halved(&self) -> Self {
        Self {
            step: 0.5 * self.step,
        }
    }
}

const STENCIL: [(f64, f64); 5] = [
    (-2.0, -1.0 / 12.0),
    (-1.0, 4.0 / 3.0),
    (0.0, -5.0 / 2.0),
    (1.0, 4.0 / 3.0),
    (2.0, -1.0 / 12.0),
];

/// Fourth-order central estimate of `f''(x)`.
pub fn second_derivative<F>(mut f: F, x: f64, spec: StencilSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_second_derivative(|t| Ok(f(t)), x, spec)
}

/// As [`second_derivative`] for fallible `f`; the first error is returned.
pub fn try_second_derivative<F>(mut f: F, x: f64, spec: StencilSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let h = spec.step;
    let mut acc = 0.0;
    for (offset, weight) in STENCIL {
        let t = x + offset * h;
        let value = f(t)?;
        if !value.is_finite() {
            return Err(Error::Evaluation { x: t, value });
        }
        acc += weight * value;
    }
    Ok(acc / (h * h))
}

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `rel_tol` times its midpoint.
pub fn golden_max<F>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..200 {
        if (hi - lo) <= rel_tol * (0.5 * (hi + lo)).abs() {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn multiplication() {
        let p = SignedLog::from_ln(2f64.ln()) * SignedLog::from_ln(3f64.ln());
        assert_eq!(p.sign(), 1);
        assert!((p.log_magnitude() - 6f64.ln()).abs() < 1e-15);

        let q = SignedLog::new(-1, 5f64.ln()) * SignedLog::new(1, 5f64.ln());
        assert_eq!(q.sign(), -1);
        assert!((q.log_magnitude() - 25f64.ln()).abs() < 1e-15);

        assert!((SignedLog::ZERO * SignedLog::from_ln(700.0)).is_zero());
    }

    #[test]
    fn addition() {
        let s = SignedLog::from_ln(3f64.ln()) + SignedLog::ONE;
        assert!((s.log_magnitude() - 4f64.ln()).abs() < 1e-15);

        let (z, cancelled) =
            SignedLog::from_ln(7f64.ln()).add_checked(SignedLog::new(-1, 7f64.ln()));
        assert!(z.is_zero() && cancelled);

        let big = SignedLog::from_ln(1000.0) + SignedLog::from_ln(0.0);
        assert_eq!(big.log_magnitude(), 1000.0);

        let (d, cancelled) = SignedLog::from_f64(1.0).add_checked(SignedLog::from_f64(-0.25));
        assert!(!cancelled);
        assert!(rel(d.to_f64(), 0.75) < 1e-15);
        assert!(
            rel(
                (SignedLog::from_f64(-3.0) + SignedLog::from_f64(1.0)).to_f64(),
                -2.0
            ) < 1e-15
        );
    }

    #[test]
    fn near_cancellation_is_flagged() {
        let a = SignedLog::from_f64(1.0);
        let b = SignedLog::from_f64(-(1.0 - 1e-16));
        let (s, c) = a.add_checked(b);
        assert!(s.is_zero() && c);
        let (s, c) = a.add_checked(SignedLog::from_f64(-(1.0 - 1e-10)));
        assert!(!c && s.sign() == 1);
    }

    #[test]
    fn round_trip() {
        for x in [1e-300, 0.1, 1.0, 2.5, 1e300, -4.0] {
            let s = SignedLog::from_f64(x);
            assert_eq!(s.log_magnitude(), x.abs().ln());
            // exp amplifies one ulp of the log by |ln x|.
            assert!(rel(s.to_f64(), x) < 4e-16 * x.abs().ln().abs().max(1.0));
        }
        assert_eq!(SignedLog::from_f64(0.0), SignedLog::ZERO);
        assert_eq!(SignedLog::ZERO.ln(), f64::NEG_INFINITY);
        assert!(SignedLog::from_f64(-1.0).ln().is_nan());
    }

    #[test]
    fn hyperbolic_helpers() {
        for x in [-30.0, -2.0, -1e-3, 1e-8, 0.5, 3.0, 40.0] {
            let c: f64 = x;
            assert!(rel(ln_2cosh(x), (2.0 * c.cosh()).ln()) < 1e-14);
            assert!(rel(ln_abs_2sinh(x), (2.0 * c.sinh()).abs().ln()) < 1e-12);
            assert!((ln_abs_tanh(x) - c.tanh().abs().ln()).abs() < 1e-12);
        }
        assert_eq!(ln_abs_2sinh(0.0), f64::NEG_INFINITY);
        assert_eq!(ln_abs_tanh(0.0), f64::NEG_INFINITY);
        assert!((ln_2cosh(1e4) - 1e4).abs() < 1e-12);
        assert!((log_add_exp(1234.0, 1232.0) - 1234.126_928_011_042_9).abs() < 1e-12);
    }

    #[test]
    fn stencil_exact_on_low_polynomials() {
        let spec = StencilSpec::new(0.1).unwrap();
        let d = second_derivative(|x| x * x, 3.7, spec).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
        let d = second_derivative(|x| x.powi(5) - 2.0 * x.powi(3), 0.4, spec).unwrap();
        assert!((d - (20.0 * 0.4f64.powi(3) - 12.0 * 0.4)).abs() < 1e-11);
        let d = second_derivative(f64::sin, 0.0, StencilSpec::new(1e-2).unwrap()).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn stencil_error_is_fourth_order() {
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| {
                let d =
                    second_derivative(|x| x.powi(6), 1.0, StencilSpec::new(h).unwrap()).unwrap();
                (d - 30.0).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!((slope - 4.0).abs() < 0.2, "slope {slope}");
        }
    }

    #[test]
    fn stencil_reports_non_finite() {
        let spec = StencilSpec::new(0.5).unwrap();
        let r = second_derivative(|x| 1.0 / x, 0.5, spec);
        assert!(matches!(r, Err(Error::Evaluation { .. })));
        assert!(StencilSpec::new(0.0).is_err());
        assert!(StencilSpec::new(f64::NAN).is_err());
    }

    #[test]
    fn default_steps() {
        assert_eq!(StencilSpec::field_default().step(), 1e-3);
        assert_eq!(StencilSpec::beta_default(2.0).step(), 1e-3);
        assert!((StencilSpec::beta_default(500.0).step() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, fx) = golden_max(|x| Ok(-(x - 2.0f64).powi(2) + 1.0), 0.0, 5.0, 1e-8).unwrap();
        assert!((x - 2.0).abs() < 1e-7 && (fx - 1.0).abs() < 1e-12);
    }

    fn signed() -> impl Strategy<Value = f64> {
        prop_oneof![(-1e6f64..-1e-6), (1e-6f64..1e6)]
    }

    proptest! {
        #[test]
        fn add_matches_native(a in signed(), b in signed()) {
            let s = SignedLog::from_f64(a) + SignedLog::from_f64(b);
            let exact = a + b;
            // Native rounding of a + b is itself relative to max(|a|, |b|).
            let scale = a.abs().max(b.abs());
            prop_assert!((s.to_f64() - exact).abs() <= 1e-12 * scale);
        }

        #[test]
        fn mul_matches_native(a in signed(), b in signed()) {
            let p = (SignedLog::from_f64(a) * SignedLog::from_f64(b)).to_f64();
            prop_assert!(rel(p, a * b) < 1e-12);
        }

        #[test]
        fn add_commutative_associative(a in signed(), b in signed(), c in signed()) {
            let (x, y, z) = (SignedLog::from_f64(a), SignedLog::from_f64(b), SignedLog::from_f64(c));
            prop_assert_eq!(x + y, y + x);
            let l = ((x + y) + z).to_f64();
            let r = (x + (y + z)).to_f64();
            let scale = a.abs().max(b.abs()).max(c.abs());
            prop_assert!((l - r).abs() <= 1e-12 * scale);
        }
    }
}
