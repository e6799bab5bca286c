//! Scalar backends.
//!
//! Two coefficient fields sit behind [`Scalar`]: Gaussian rationals
//! ([`Exact`], a complex number with arbitrary-precision rational parts) and
//! double-precision complex numbers ([`Approx`]). Everything above this module
//! is written once against the trait.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::roots::{self, Root};
use crate::sphere::Tolerances;

/// Gaussian rational: `re + im·i` with both parts in ℚ.
pub type Exact = Complex<BigRational>;

/// Double-precision complex scalar.
pub type Approx = Complex64;

/// Relative size below which an approximate coefficient produced by
/// cancellation is treated as zero.
pub const CANCELLATION_REL: f64 = 64.0 * f64::EPSILON;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True for the Gaussian-rational backend.
    const EXACT: bool;
    const NAME: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_parts(re: &BigRational, im: &BigRational) -> Self;
    /// Exact conversion of a double-precision value (binary expansion for
    /// the exact backend).
    fn from_complex(c: Complex64) -> Self;
    fn to_complex(&self) -> Complex64;
    fn is_zero(&self) -> bool;

    /// Zero test relative to a magnitude `scale`. Exact for Gaussian
    /// rationals.
    fn is_negligible(&self, scale: f64, rel: f64) -> bool;

    /// Principal cube root (branch cut on the negative real axis), if it is
    /// representable in this backend.
    fn principal_cbrt(&self) -> Option<Self>;

    /// All roots of a nonzero polynomial, with multiplicities.
    fn roots(p: &Polynomial<Self>, tol: &Tolerances) -> Result<Vec<(Root<Self>, usize)>>;

    fn to_json_parts(&self) -> (Value, Value);
    fn from_json_parts(re: &Value, im: &Value) -> Result<Self>;
    fn display(&self) -> String;

    fn abs(&self) -> f64 {
        self.to_complex().norm()
    }
}

impl Scalar for Exact {
    const EXACT: bool = true;
    const NAME: &'static str = "exact";

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }

    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }

    fn from_i64(n: i64) -> Self {
        Complex::new(
            BigRational::from_integer(BigInt::from(n)),
            BigRational::zero(),
        )
    }

    fn from_parts(re: &BigRational, im: &BigRational) -> Self {
        Complex::new(re.clone(), im.clone())
    }

    fn from_complex(c: Complex64) -> Self {
        let conv = |x: f64| BigRational::from_float(x).unwrap_or_else(BigRational::zero);
        Complex::new(conv(c.re), conv(c.im))
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn is_negligible(&self, _scale: f64, _rel: f64) -> bool {
        Scalar::is_zero(self)
    }

    fn principal_cbrt(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            return Some(Scalar::zero());
        }
        let guess = principal_cbrt_f64(self.to_complex());
        let re = snap_rational(guess.re, SNAP_MAX_DENOMINATOR)?;
        let im = snap_rational(guess.im, SNAP_MAX_DENOMINATOR)?;
        let root = Complex::new(re, im);
        (root.clone() * root.clone() * root.clone() == *self).then_some(root)
    }

    fn roots(p: &Polynomial<Self>, tol: &Tolerances) -> Result<Vec<(Root<Self>, usize)>> {
        roots::exact_roots(p, tol)
    }

    fn to_json_parts(&self) -> (Value, Value) {
        (
            Value::String(self.re.to_string()),
            Value::String(self.im.to_string()),
        )
    }

    fn from_json_parts(re: &Value, im: &Value) -> Result<Self> {
        Ok(Complex::new(json_rational(re)?, json_rational(im)?))
    }

    fn display(&self) -> String {
        format_complex(
            &self.re.to_string(),
            &self.im.abs().to_string(),
            self.re.is_zero(),
            self.im.is_zero(),
            self.im.is_negative(),
            self.im.abs().is_one(),
        )
    }
}

impl Scalar for Approx {
    const EXACT: bool = false;
    const NAME: &'static str = "approx";

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn from_parts(re: &BigRational, im: &BigRational) -> Self {
        Complex64::new(
            re.to_f64().unwrap_or(f64::NAN),
            im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn from_complex(c: Complex64) -> Self {
        c
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn is_negligible(&self, scale: f64, rel: f64) -> bool {
        self.norm() <= rel * scale
    }

    fn principal_cbrt(&self) -> Option<Self> {
        Some(principal_cbrt_f64(*self))
    }

    fn roots(p: &Polynomial<Self>, tol: &Tolerances) -> Result<Vec<(Root<Self>, usize)>> {
        roots::approx_roots(p, tol)
    }

    fn to_json_parts(&self) -> (Value, Value) {
        (json_f64(self.re), json_f64(self.im))
    }

    fn from_json_parts(re: &Value, im: &Value) -> Result<Self> {
        let part = |v: &Value| -> Result<f64> {
            match v {
                Value::Number(n) => n
                    .as_f64()
                    .ok_or_else(|| Error::Parse(format!("bad number {n}"))),
                Value::String(_) => json_rational(v)?
                    .to_f64()
                    .ok_or_else(|| Error::Parse(format!("bad number {v}"))),
                other => Err(Error::Parse(format!("expected number, found {other}"))),
            }
        };
        Ok(Complex64::new(part(re)?, part(im)?))
    }

    fn display(&self) -> String {
        format_complex(
            &self.re.to_string(),
            &self.im.abs().to_string(),
            self.re == 0.0,
            self.im == 0.0,
            self.im < 0.0,
            self.im.abs() == 1.0,
        )
    }
}

fn format_complex(
    re: &str,
    im_abs: &str,
    re_zero: bool,
    im_zero: bool,
    im_neg: bool,
    im_unit: bool,
) -> String {
    if im_zero {
        return re.to_string();
    }
    let imag = if im_unit {
        "i".to_string()
    } else {
        format!("{im_abs}*i")
    };
    match (re_zero, im_neg) {
        (true, false) => imag,
        (true, true) => format!("-{imag}"),
        (false, false) => format!("{re}+{imag}"),
        (false, true) => format!("{re}-{imag}"),
    }
}

fn json_f64(x: f64) -> Value {
    // -0.0 and 0.0 serialize identically so reports stay byte-stable.
    let x = if x == 0.0 { 0.0 } else { x };
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn json_rational(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(Error::Parse(format!("expected rational, found {other}"))),
    }
}

/// Parses `p`, `p/q`, or a decimal literal such as `-1.25` or `3e-2` into an
/// exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(&all_digits).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Largest denominator tried when recognising a floating-point value as a
/// small rational.
pub const SNAP_MAX_DENOMINATOR: i64 = 1_000_000;

/// Best rational approximation of `x` with denominator at most `max_den`,
/// accepted only if it agrees with `x` to about nine significant digits.
pub fn snap_rational(x: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let tol = 1e-9 * x.abs().max(1.0);
    // Continued-fraction convergents h/k.
    let (mut h_prev, mut h) = (0i128, 1i128);
    let (mut k_prev, mut k) = (1i128, 0i128);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a_int = a as i128;
        let h_next = a_int * h + h_prev;
        let k_next = a_int * k + k_prev;
        if k_next > max_den as i128 {
            break;
        }
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
        if ((h as f64) / (k as f64) - x).abs() <= tol {
            return Some(BigRational::new(BigInt::from(h), BigInt::from(k)));
        }
        let frac = rest - a;
        if frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    None
}

/// Principal cube root with the cut on the negative real axis approached
/// from above, so that `cbrt(-1) = e^{iπ/3}`.
pub fn principal_cbrt_f64(z: Complex64) -> Complex64 {
    let z = if z.im == 0.0 {
        Complex64::new(z.re, 0.0)
    } else {
        z
    };
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let (r, theta) = z.to_polar();
    Complex64::from_polar(r.cbrt(), theta / 3.0)
}

/// Rounds an approximate value to a Gaussian rational with small
/// denominators, when one is within about nine digits.
pub fn snap_exact(z: Complex64) -> Option<Exact> {
    Some(Complex::new(
        snap_rational(z.re, SNAP_MAX_DENOMINATOR)?,
        snap_rational(z.im, SNAP_MAX_DENOMINATOR)?,
    ))
}
