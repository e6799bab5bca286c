//! Dense univariate polynomials over a [`Scalar`] field.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{Approx, Scalar, CANCELLATION_REL};

/// Coefficients in ascending degree. The zero polynomial has no
/// coefficients and the last stored coefficient is never zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn constant(c: S) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `z`.
    pub fn z() -> Self {
        Self::new(vec![S::zero(), S::one()])
    }

    /// `z − r`.
    pub fn linear_root(r: S) -> Self {
        Self::new(vec![-r, S::one()])
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&S> {
        self.coeffs.last()
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: &S) -> S {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z.clone() + c.clone();
        }
        acc
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c.to_complex();
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| S::from_i64(k as i64) * c.clone())
                .collect(),
        )
    }

    pub fn scale(&self, s: &S) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Drops leading coefficients that are cancellation noise relative to
    /// `scale`. A no-op in the exact backend.
    pub fn trim_relative(mut self, scale: f64) -> Self {
        while self
            .coeffs
            .last()
            .is_some_and(|c| c.is_negligible(scale, CANCELLATION_REL))
        {
            self.coeffs.pop();
        }
        self
    }

    /// Multiplicity of 0 as a root: the number of vanishing low-order
    /// coefficients, with zero judged relative to the largest coefficient.
    pub fn vanishing_order_at_zero(&self, rel: f64) -> usize {
        let scale = self.max_abs();
        self.coeffs
            .iter()
            .take_while(|c| c.is_negligible(scale, rel))
            .count()
    }

    /// `p(z + a)`.
    pub fn taylor_shift(&self, a: &S) -> Self {
        // Horner with polynomial accumulator: p(z+a) = (...(c_n (z+a) + c_{n-1})(z+a) ...)
        let shift = Self::new(vec![a.clone(), S::one()]);
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &shift) + &Self::constant(c.clone());
        }
        acc
    }

    /// `z^d · p(1/z)`, for `d ≥ deg p`.
    pub fn reversed(&self, d: usize) -> Self {
        let mut coeffs = vec![S::zero(); d + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[d - k] = c.clone();
        }
        Self::new(coeffs)
    }

    /// Euclidean division. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let n = self.coeffs.len();
        if n <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![S::zero(); n - dd];
        for k in (0..n - dd).rev() {
            let q = rem[k + dd].clone() / lead.clone();
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].clone() - q.clone() * dc.clone();
            }
            quot[k] = q;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => {
                let inv = S::one() / l.clone();
                self.scale(&inv)
            }
            None => Self::zero(),
        }
    }

    /// Monic greatest common divisor (Euclid). Meaningful in the exact
    /// backend; the approximate backend cancels common roots instead.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's square-free decomposition: monic factors `f_k` paired with
    /// multiplicity `k`, with `self = lead · ∏ f_k^k`. Exact backend only.
    pub fn square_free_decomposition(&self) -> Vec<(Self, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.div_rem(&a0).0;
        let mut c = df.div_rem(&a0).0;
        let mut d = &c - &b.derivative();
        let mut k = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), k));
            }
            b = b.div_rem(&a).0;
            c = d.div_rem(&a).0;
            d = &c - &b.derivative();
            k += 1;
        }
        out
    }

    pub fn to_approx(&self) -> Polynomial<Approx> {
        Polynomial::new(self.coeffs.iter().map(Scalar::to_complex).collect())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.coeffs
                .iter()
                .map(|c| {
                    let (re, im) = c.to_json_parts();
                    Value::Array(vec![re, im])
                })
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let items = v
            .as_array()
            .ok_or_else(|| Error::Parse(format!("expected coefficient array, found {v}")))?;
        let coeffs = items
            .iter()
            .map(|item| match item.as_array().map(Vec::as_slice) {
                Some([re, im]) => S::from_json_parts(re, im),
                _ => Err(Error::Parse(format!(
                    "expected [re, im] pair, found {item}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(coeffs))
    }
}

impl<S: Scalar> Add for &Polynomial<S> {
    type Output = Polynomial<S>;

    fn add(self, rhs: Self) -> Polynomial<S> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let scale = self.max_abs().max(rhs.max_abs());
        let coeffs = (0..n)
            .map(|k| match (self.coeffs.get(k), rhs.coeffs.get(k)) {
                (Some(a), Some(b)) => a.clone() + b.clone(),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Polynomial::new(coeffs).trim_relative(scale)
    }
}

impl<S: Scalar> Neg for &Polynomial<S> {
    type Output = Polynomial<S>;

    fn neg(self) -> Polynomial<S> {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<S: Scalar> Sub for &Polynomial<S> {
    type Output = Polynomial<S>;

    fn sub(self, rhs: Self) -> Polynomial<S> {
        self + &(-rhs)
    }
}

impl<S: Scalar> Mul for &Polynomial<S> {
    type Output = Polynomial<S>;

    fn mul(self, rhs: Self) -> Polynomial<S> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![S::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;

    fn p(c: &[i64]) -> Polynomial<Exact> {
        Polynomial::new(c.iter().map(|&x| Exact::from_i64(x)).collect())
    }

    #[test]
    fn construction_normalizes_leading_zeros() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert!(p(&[0, 0]).is_zero());
        assert_eq!(p(&[]).degree(), None);
    }

    #[test]
    fn arithmetic_and_division() {
        // (z - 1)^3 (z + 3)
        let f = &p(&[-1, 1]).pow(3) * &p(&[3, 1]);
        assert_eq!(f, p(&[-3, 8, -6, 0, 1]));
        let (q, r) = f.div_rem(&p(&[-1, 1]));
        assert!(r.is_zero());
        assert_eq!(q, &p(&[-1, 1]).pow(2) * &p(&[3, 1]));
        assert_eq!(f.eval(&Exact::from_i64(1)), Exact::from_i64(0));
        assert_eq!(f.derivative(), p(&[8, -12, 0, 4]));
    }

    #[test]
    fn shift_and_reverse() {
        let f = p(&[1, 2, 3]);
        // f(z+1) = 3z^2 + 8z + 6
        assert_eq!(f.taylor_shift(&Exact::from_i64(1)), p(&[6, 8, 3]));
        assert_eq!(f.reversed(4), p(&[0, 0, 3, 2, 1]));
    }

    #[test]
    fn yun_recovers_multiplicities() {
        // 2 (z-1)^3 (z+3) (z^2+1)^2
        let f = &(&p(&[-1, 1]).pow(3) * &p(&[3, 1])) * &p(&[1, 0, 1]).pow(2);
        let f = f.scale(&Exact::from_i64(2));
        let parts = f.square_free_decomposition();
        assert_eq!(
            parts,
            vec![(p(&[3, 1]), 1), (p(&[1, 0, 1]), 2), (p(&[-1, 1]), 3)]
        );
    }

    #[test]
    fn gcd_is_monic() {
        let a = &p(&[-1, 1]) * &p(&[2, 1]);
        let b = (&p(&[-1, 1]) * &p(&[5, 1])).scale(&Exact::from_i64(7));
        assert_eq!(a.gcd(&b), p(&[-1, 1]));
    }

    #[test]
    fn approximate_cancellation_is_trimmed() {
        let a = Polynomial::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.1 + 0.2, 0.0),
        ]);
        let b = Polynomial::new(vec![Complex64::new(0.0, 0.0), Complex64::new(0.3, 0.0)]);
        assert_eq!((&a - &b).degree(), Some(0));
    }

    #[test]
    fn json_round_trip() {
        let f = p(&[1, -2]);
        let v = f.to_json();
        assert_eq!(v, serde_json::json!([["1", "0"], ["-2", "0"]]));
        assert_eq!(Polynomial::<Exact>::from_json(&v).unwrap(), f);
    }
}
