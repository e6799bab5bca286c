//! Points of the Riemann sphere, the chordal metric, and Möbius transforms.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::{Approx, Scalar};

/// Numerical thresholds shared by the approximate backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Chordal distance below which two points are the same point.
    pub pt: f64,
    /// Chordal distance below which numerically found roots are merged.
    pub cluster: f64,
    /// Relative residual a numerically found root must reach.
    pub res: f64,
    /// Minimal chordal separation of tracked sheets.
    pub collision: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pt: 1e-9,
            cluster: 1e-6,
            res: 1e-10,
            collision: 1e-8,
        }
    }
}

/// A point of ℂ ∪ {∞}.
#[derive(Debug, Clone, PartialEq)]
pub enum SpherePoint<S> {
    Finite(S),
    Infinity,
}

pub type ExactPoint = SpherePoint<crate::scalar::Exact>;
pub type ApproxPoint = SpherePoint<Approx>;

impl<S: Scalar> SpherePoint<S> {
    /// Finite point; rejects NaN and infinite coordinates.
    pub fn finite(value: S) -> Result<Self> {
        let c = value.to_complex();
        if S::EXACT || (c.re.is_finite() && c.im.is_finite()) {
            Ok(SpherePoint::Finite(value))
        } else {
            Err(Error::InvalidInput(format!(
                "non-finite coordinate {c}; use Infinity for ∞"
            )))
        }
    }

    pub fn from_i64(n: i64) -> Self {
        SpherePoint::Finite(S::from_i64(n))
    }

    pub fn zero() -> Self {
        SpherePoint::Finite(S::zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    pub fn as_finite(&self) -> Option<&S> {
        match self {
            SpherePoint::Finite(s) => Some(s),
            SpherePoint::Infinity => None,
        }
    }

    pub fn to_approx(&self) -> ApproxPoint {
        match self {
            SpherePoint::Finite(s) => SpherePoint::Finite(s.to_complex()),
            SpherePoint::Infinity => SpherePoint::Infinity,
        }
    }

    /// Point equality: exact coordinates in the exact backend, chordal
    /// distance at most `tol` in the approximate one.
    pub fn coincides(&self, other: &Self, tol: f64) -> bool {
        if S::EXACT {
            self == other
        } else {
            chordal_distance(self, other) <= tol
        }
    }

    pub fn display(&self) -> String {
        match self {
            SpherePoint::Finite(s) => s.display(),
            SpherePoint::Infinity => "inf".to_string(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            SpherePoint::Infinity => serde_json::json!({ "inf": true }),
            SpherePoint::Finite(s) => {
                let (re, im) = s.to_json_parts();
                serde_json::json!({ "re": re, "im": im })
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse(format!("expected point object, found {v}")))?;
        if obj.get("inf").and_then(Value::as_bool) == Some(true) {
            return Ok(SpherePoint::Infinity);
        }
        let zero = Value::from(0);
        let re = obj
            .get("re")
            .ok_or_else(|| Error::Parse(format!("point without \"re\": {v}")))?;
        let im = obj.get("im").unwrap_or(&zero);
        SpherePoint::finite(S::from_json_parts(re, im)?)
    }
}

impl ApproxPoint {
    /// Inverse stereographic projection onto the unit sphere in ℝ³.
    pub fn to_unit_vector(&self) -> [f64; 3] {
        match self {
            SpherePoint::Infinity => [0.0, 0.0, 1.0],
            SpherePoint::Finite(z) => {
                let r2 = z.norm_sqr();
                if !r2.is_finite() || r2 > 1e300 {
                    return [0.0, 0.0, 1.0];
                }
                let d = 1.0 + r2;
                [2.0 * z.re / d, 2.0 * z.im / d, (r2 - 1.0) / d]
            }
        }
    }

    /// Stereographic projection from the north pole.
    pub fn from_unit_vector(v: [f64; 3]) -> Self {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let (x, y, z) = (v[0] / norm, v[1] / norm, v[2] / norm);
        let denom = 1.0 - z;
        if denom <= 1e-300 {
            return SpherePoint::Infinity;
        }
        SpherePoint::Finite(Complex64::new(x / denom, y / denom))
    }
}

impl<S: Scalar> Serialize for SpherePoint<S> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        match self {
            SpherePoint::Infinity => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("inf", &true)?;
                map.end()
            }
            SpherePoint::Finite(s) => {
                let (re, im) = s.to_json_parts();
                let mut map = serializer.serialize_map(Some(2))?;
                map.serialize_entry("re", &re)?;
                map.serialize_entry("im", &im)?;
                map.end()
            }
        }
    }
}

impl<'de, S: Scalar> Deserialize<'de> for SpherePoint<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        SpherePoint::from_json(&v).map_err(D::Error::custom)
    }
}

/// Chordal distance on the unit sphere, in `[0, 2]`.
pub fn chordal_distance<S: Scalar>(p: &SpherePoint<S>, q: &SpherePoint<S>) -> f64 {
    chordal_approx(&p.to_approx(), &q.to_approx())
}

pub(crate) fn chordal_approx(p: &ApproxPoint, q: &ApproxPoint) -> f64 {
    match (p, q) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
        (SpherePoint::Finite(z), SpherePoint::Infinity)
        | (SpherePoint::Infinity, SpherePoint::Finite(z)) => {
            // 2 / sqrt(1 + |z|^2), written to survive huge |z|
            let r = z.norm();
            if r <= 1.0 {
                2.0 / (1.0 + r * r).sqrt()
            } else {
                2.0 / r / (1.0 + 1.0 / (r * r)).sqrt()
            }
        }
        (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
            let (rz, rw) = (z.norm(), w.norm());
            if rz > 1.0 && rw > 1.0 {
                // z ↦ 1/z is a rotation of the sphere
                let (iz, iw) = (z.inv(), w.inv());
                return 2.0 * (iz - iw).norm()
                    / ((1.0 + iz.norm_sqr()).sqrt() * (1.0 + iw.norm_sqr()).sqrt());
            }
            let factor = |r: f64| (1.0 + r * r).sqrt();
            if rz > 1.0 || rw > 1.0 {
                // divide through by the larger coordinate
                let (big, small) = if rz > rw { (z, w) } else { (w, z) };
                let rb = big.norm();
                return (2.0 * (Complex64::new(1.0, 0.0) - small / big).norm()
                    / ((1.0 / (rb * rb) + 1.0).sqrt() * factor(small.norm())))
                .min(2.0);
            }
            (2.0 * (z - w).norm() / (factor(rz) * factor(rw))).min(2.0)
        }
    }
}

/// `z ↦ (a z + b) / (c z + d)` with `ad − bc ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mobius<S> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
}

impl<S: Scalar> Mobius<S> {
    pub fn new(a: S, b: S, c: S, d: S) -> Result<Self> {
        let det = a.clone() * d.clone() - b.clone() * c.clone();
        let scale = [&a, &b, &c, &d].iter().map(|s| s.abs()).fold(0.0, f64::max);
        if det.is_negligible(scale * scale, 1e-14) {
            return Err(Error::DegenerateMobius);
        }
        Ok(Mobius { a, b, c, d })
    }

    pub fn identity() -> Self {
        Mobius {
            a: S::one(),
            b: S::zero(),
            c: S::zero(),
            d: S::one(),
        }
    }

    /// `z ↦ 1/z`.
    pub fn inversion() -> Self {
        Mobius {
            a: S::zero(),
            b: S::one(),
            c: S::one(),
            d: S::zero(),
        }
    }

    pub fn apply(&self, p: &SpherePoint<S>) -> SpherePoint<S> {
        match p {
            SpherePoint::Infinity => {
                if self.c.is_zero() {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(self.a.clone() / self.c.clone())
                }
            }
            SpherePoint::Finite(z) => {
                let num = self.a.clone() * z.clone() + self.b.clone();
                let den = self.c.clone() * z.clone() + self.d.clone();
                if den.is_zero() {
                    return SpherePoint::Infinity;
                }
                let value = num / den;
                let c = value.to_complex();
                if !S::EXACT && !(c.re.is_finite() && c.im.is_finite()) {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(value)
                }
            }
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Self) -> Self {
        let m = |x: &S, y: &S, z: &S, w: &S| x.clone() * y.clone() + z.clone() * w.clone();
        Mobius {
            a: m(&self.a, &inner.a, &self.b, &inner.c),
            b: m(&self.a, &inner.b, &self.b, &inner.d),
            c: m(&self.c, &inner.a, &self.d, &inner.c),
            d: m(&self.c, &inner.b, &self.d, &inner.d),
        }
    }

    pub fn inverse(&self) -> Self {
        Mobius {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
    }

    /// Equality as transforms: coefficient quadruples are proportional.
    pub fn equivalent(&self, other: &Self) -> bool {
        let own = [&self.a, &self.b, &self.c, &self.d];
        let theirs = [&other.a, &other.b, &other.c, &other.d];
        let scale = own
            .iter()
            .chain(theirs.iter())
            .map(|s| s.abs())
            .fold(0.0, f64::max);
        for i in 0..4 {
            for j in (i + 1)..4 {
                let cross = own[i].clone() * theirs[j].clone() - own[j].clone() * theirs[i].clone();
                if !cross.is_negligible(scale * scale, 1e-12) {
                    return false;
                }
            }
        }
        true
    }

    /// The transform sending `(z1, z2, z3)` to `(0, 1, ∞)`.
    pub fn to_standard(src: &[SpherePoint<S>; 3]) -> Result<Self> {
        check_distinct(src)?;
        use SpherePoint::{Finite, Infinity};
        let t = match (&src[0], &src[1], &src[2]) {
            (Infinity, Finite(z2), Finite(z3)) => {
                Mobius::new(S::zero(), z2.clone() - z3.clone(), S::one(), -z3.clone())
            }
            (Finite(z1), Infinity, Finite(z3)) => {
                Mobius::new(S::one(), -z1.clone(), S::one(), -z3.clone())
            }
            (Finite(z1), Finite(z2), Infinity) => {
                Mobius::new(S::one(), -z1.clone(), S::zero(), z2.clone() - z1.clone())
            }
            (Finite(z1), Finite(z2), Finite(z3)) => {
                let k = z2.clone() - z3.clone();
                let l = z2.clone() - z1.clone();
                Mobius::new(k.clone(), -(z1.clone() * k), l.clone(), -(z3.clone() * l))
            }
            _ => return Err(Error::DegenerateTriple),
        };
        t.map_err(|_| Error::DegenerateTriple)
    }

    /// The unique transform carrying `src[k]` to `dst[k]` for k = 1, 2, 3.
    pub fn sending_three(src: &[SpherePoint<S>; 3], dst: &[SpherePoint<S>; 3]) -> Result<Self> {
        let to_std = Self::to_standard(src)?;
        let from_std = Self::to_standard(dst)?.inverse();
        Ok(from_std.compose(&to_std))
    }

    pub fn to_approx(&self) -> Mobius<Approx> {
        Mobius {
            a: self.a.to_complex(),
            b: self.b.to_complex(),
            c: self.c.to_complex(),
            d: self.d.to_complex(),
        }
    }
}

fn check_distinct<S: Scalar>(pts: &[SpherePoint<S>; 3]) -> Result<()> {
    let tol = Tolerances::default().pt;
    for i in 0..3 {
        for j in (i + 1)..3 {
            if pts[i].coincides(&pts[j], tol) {
                return Err(Error::DegenerateTriple);
            }
        }
    }
    Ok(())
}
