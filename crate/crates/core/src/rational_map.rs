//! Rational self-maps of the sphere: degree, local degrees, fibers,
//! critical points and passports.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::roots::Root;
use crate::scalar::{Approx, Scalar};
use crate::sphere::{chordal_approx, ApproxPoint, Mobius, SpherePoint, Tolerances};
use crate::MAX_DEGREE;

/// Relative coefficient size treated as zero when reading off a vanishing
/// order in the approximate backend.
const VANISHING_REL: f64 = 1e-9;

/// A nonconstant rational map `num / den` in reduced form.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMap<S> {
    num: Polynomial<S>,
    den: Polynomial<S>,
    tol: Tolerances,
}

/// Where a preimage sits: an honest point of the sphere, or (exact backend,
/// irrational roots) a certified disc.
#[derive(Debug, Clone, PartialEq)]
pub enum Location<S> {
    Point(SpherePoint<S>),
    Enclosure { center: Complex64, radius: f64 },
}

impl<S: Scalar> Location<S> {
    pub fn approx(&self) -> ApproxPoint {
        match self {
            Location::Point(p) => p.to_approx(),
            Location::Enclosure { center, .. } => SpherePoint::Finite(*center),
        }
    }

    pub fn as_point(&self) -> Option<&SpherePoint<S>> {
        match self {
            Location::Point(p) => Some(p),
            Location::Enclosure { .. } => None,
        }
    }

    fn from_root(root: Root<S>) -> Self {
        match root {
            Root::Point(s) => Location::Point(SpherePoint::Finite(s)),
            Root::Enclosure { center, radius } => Location::Enclosure { center, radius },
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Location::Point(p) => p.to_json(),
            Location::Enclosure { center, radius } => serde_json::json!({
                "re": center.re, "im": center.im, "radius": radius,
            }),
        }
    }
}

/// One preimage together with its local degree `1 + β`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberPoint<S> {
    pub location: Location<S>,
    pub local_degree: usize,
}

/// A ramified point with its branch order β ≥ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint<S> {
    pub location: Location<S>,
    pub beta: usize,
}

/// Local degrees over a list of target values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct Passport<S> {
    #[serde(rename = "degree")]
    pub map_degree: usize,
    pub entries: Vec<PassportEntry<S>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct PassportEntry<S> {
    pub value: SpherePoint<S>,
    /// Sorted in decreasing order.
    pub local_degrees: Vec<usize>,
}

impl<S: Scalar> PassportEntry<S> {
    pub fn new(value: SpherePoint<S>, mut local_degrees: Vec<usize>) -> Self {
        local_degrees.sort_unstable_by(|a, b| b.cmp(a));
        PassportEntry {
            value,
            local_degrees,
        }
    }

    /// Branch orders `local_degree − 1` of the points over this value.
    pub fn betas(&self) -> impl Iterator<Item = usize> + '_ {
        self.local_degrees.iter().map(|d| d - 1)
    }
}

impl<S: Scalar> Passport<S> {
    /// Checks that every entry is a partition of the degree into positive
    /// parts.
    pub fn validate(&self) -> Result<()> {
        if self.map_degree == 0 {
            return Err(Error::MalformedPassport("degree must be positive".into()));
        }
        for e in &self.entries {
            if e.local_degrees.contains(&0) {
                return Err(Error::MalformedPassport(format!(
                    "zero local degree over {}",
                    e.value.display()
                )));
            }
            let sum: usize = e.local_degrees.iter().sum();
            if sum != self.map_degree {
                return Err(Error::MalformedPassport(format!(
                    "local degrees over {} sum to {sum}, not {}",
                    e.value.display(),
                    self.map_degree
                )));
            }
        }
        Ok(())
    }

    pub fn entry(&self, value: &SpherePoint<S>, tol: f64) -> Option<&PassportEntry<S>> {
        self.entries.iter().find(|e| e.value.coincides(value, tol))
    }

    /// Total branching `Σ β` over the listed values.
    pub fn total_beta(&self) -> usize {
        self.entries.iter().flat_map(|e| e.betas()).sum()
    }

    /// Number of distinct preimages of the listed values.
    pub fn preimage_count(&self) -> usize {
        self.entries.iter().map(|e| e.local_degrees.len()).sum()
    }

    pub fn to_approx(&self) -> Passport<Approx> {
        Passport {
            map_degree: self.map_degree,
            entries: self
                .entries
                .iter()
                .map(|e| PassportEntry {
                    value: e.value.to_approx(),
                    local_degrees: e.local_degrees.clone(),
                })
                .collect(),
        }
    }
}

impl<S: Scalar> RationalMap<S> {
    /// Builds the reduced map `num / den`; the common factor is cancelled
    /// here, once.
    pub fn new(num: Polynomial<S>, den: Polynomial<S>) -> Result<Self> {
        Self::with_tolerances(num, den, Tolerances::default())
    }

    pub fn with_tolerances(
        num: Polynomial<S>,
        den: Polynomial<S>,
        tol: Tolerances,
    ) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let (num, den) = if S::EXACT {
            reduce_exact(num, den)
        } else {
            reduce_by_roots(num, den, &tol)?
        };
        let degree = num.degree().unwrap_or(0).max(den.degree().unwrap_or(0));
        if degree == 0 {
            return Err(Error::ConstantMap);
        }
        if degree > MAX_DEGREE {
            return Err(Error::DegreeTooLarge(degree));
        }
        Ok(RationalMap { num, den, tol })
    }

    pub fn polynomial(p: Polynomial<S>) -> Result<Self> {
        Self::new(p, Polynomial::one())
    }

    pub fn identity() -> Self {
        Self::polynomial(Polynomial::z()).expect("z is nonconstant")
    }

    pub fn num(&self) -> &Polynomial<S> {
        &self.num
    }

    pub fn den(&self) -> &Polynomial<S> {
        &self.den
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    fn num_degree(&self) -> usize {
        self.num.degree().unwrap_or(0)
    }

    fn den_degree(&self) -> usize {
        self.den.degree().unwrap_or(0)
    }

    /// `max(deg num, deg den)`, the generic fiber cardinality.
    pub fn degree(&self) -> usize {
        self.num_degree().max(self.den_degree())
    }

    pub fn evaluate(&self, p: &SpherePoint<S>) -> SpherePoint<S> {
        match p {
            SpherePoint::Infinity => match self.num_degree().cmp(&self.den_degree()) {
                Ordering::Greater => SpherePoint::Infinity,
                Ordering::Less => SpherePoint::zero(),
                Ordering::Equal => SpherePoint::Finite(
                    self.num.leading().unwrap().clone() / self.den.leading().unwrap().clone(),
                ),
            },
            SpherePoint::Finite(z) => {
                let d = self.den.eval(z);
                if d.is_zero() {
                    return SpherePoint::Infinity;
                }
                let value = self.num.eval(z) / d;
                let c = value.to_complex();
                if !S::EXACT && !(c.re.is_finite() && c.im.is_finite()) {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::Finite(value)
                }
            }
        }
    }

    /// `num' · den − num · den'`, whose roots are the finite critical points
    /// (poles of order m contribute multiplicity m − 1).
    pub fn wronskian(&self) -> Polynomial<S> {
        &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative())
    }

    /// Formal derivative `(num'·den − num·den') / den²`, reduced. Returns
    /// `(numerator, denominator)` since the derivative may be constant.
    pub fn derivative(&self) -> Result<(Polynomial<S>, Polynomial<S>)> {
        let w = self.wronskian();
        let d2 = &self.den * &self.den;
        if S::EXACT {
            Ok(reduce_exact(w, d2))
        } else {
            reduce_by_roots(w, d2, &self.tol)
        }
    }

    /// Multiplicity of `p` as a solution of `f(z) = f(p)`, read off after
    /// moving `p` and `f(p)` to 0 by translations or by `z ↦ 1/z`.
    pub fn local_degree(&self, p: &SpherePoint<S>) -> usize {
        let d = self.degree();
        let (n1, d1) = match p {
            SpherePoint::Finite(a) => (self.num.taylor_shift(a), self.den.taylor_shift(a)),
            SpherePoint::Infinity => (self.num.reversed(d), self.den.reversed(d)),
        };
        let target = match self.evaluate(p) {
            SpherePoint::Finite(b) => &n1 - &d1.scale(&b),
            SpherePoint::Infinity => d1,
        };
        target.vanishing_order_at_zero(VANISHING_REL).max(1)
    }

    /// All solutions of `f(z) = y` with local degrees, sorted with finite
    /// points by real then imaginary part and ∞ last.
    pub fn fiber(&self, y: &SpherePoint<S>) -> Result<Vec<FiberPoint<S>>> {
        let equation = match y {
            SpherePoint::Finite(v) => &self.num - &self.den.scale(v),
            SpherePoint::Infinity => self.den.clone(),
        };
        let finite_degree = equation.degree().unwrap_or(0);
        let mut points: Vec<FiberPoint<S>> = if finite_degree == 0 {
            Vec::new()
        } else {
            S::roots(&equation, &self.tol)?
                .into_iter()
                .map(|(root, m)| FiberPoint {
                    location: Location::from_root(root),
                    local_degree: m,
                })
                .collect()
        };
        let gap = self.degree() - finite_degree;
        if gap > 0 {
            points.push(FiberPoint {
                location: Location::Point(SpherePoint::Infinity),
                local_degree: gap,
            });
        }
        sort_by_location(&mut points, |p| p.location.approx());
        Ok(points)
    }

    /// Ramified points with their branch orders. Finite β come from the
    /// multiplicities of the Wronskian roots; β(∞) from the local degree at
    /// ∞.
    pub fn critical_points(&self) -> Result<Vec<CriticalPoint<S>>> {
        let w = self.wronskian();
        let mut out: Vec<CriticalPoint<S>> = if w.degree().unwrap_or(0) == 0 {
            Vec::new()
        } else {
            S::roots(&w, &self.tol)?
                .into_iter()
                .map(|(root, m)| CriticalPoint {
                    location: Location::from_root(root),
                    beta: m,
                })
                .collect()
        };
        let at_infinity = self.local_degree(&SpherePoint::Infinity) - 1;
        if at_infinity > 0 {
            out.push(CriticalPoint {
                location: Location::Point(SpherePoint::Infinity),
                beta: at_infinity,
            });
        }
        sort_by_location(&mut out, |c| c.location.approx());
        Ok(out)
    }

    /// Critical values `f(c)` without repetition (exact points only are
    /// evaluated exactly; enclosures are evaluated at their centres).
    pub fn branch_values(&self) -> Result<Vec<ApproxPoint>> {
        let approx = self.to_approx();
        let mut values: Vec<ApproxPoint> = Vec::new();
        for c in self.critical_points()? {
            let v = match &c.location {
                Location::Point(p) => self.evaluate(p).to_approx(),
                Location::Enclosure { center, .. } => {
                    approx.evaluate(&SpherePoint::Finite(*center))
                }
            };
            if !values
                .iter()
                .any(|u| chordal_approx(u, &v) <= self.tol.cluster)
            {
                values.push(v);
            }
        }
        Ok(values)
    }

    pub fn passport_over(&self, values: &[SpherePoint<S>]) -> Result<Passport<S>> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty value set".into()));
        }
        for (i, a) in values.iter().enumerate() {
            if values[i + 1..].iter().any(|b| a.coincides(b, self.tol.pt)) {
                return Err(Error::InvalidInput(format!(
                    "value {} listed twice",
                    a.display()
                )));
            }
        }
        let entries = values
            .iter()
            .map(|y| {
                let degrees = self.fiber(y)?.iter().map(|p| p.local_degree).collect();
                Ok(PassportEntry::new(y.clone(), degrees))
            })
            .collect::<Result<Vec<_>>>()?;
        let passport = Passport {
            map_degree: self.degree(),
            entries,
        };
        passport
            .validate()
            .map_err(|e| Error::VerificationFailure(e.to_string()))?;
        Ok(passport)
    }

    /// `m ∘ f`.
    pub fn post_compose(&self, m: &Mobius<S>) -> Result<Self> {
        let num = &self.num.scale(&m.a) + &self.den.scale(&m.b);
        let den = &self.num.scale(&m.c) + &self.den.scale(&m.d);
        Self::with_tolerances(num, den, self.tol)
    }

    pub fn to_approx(&self) -> RationalMap<Approx> {
        RationalMap {
            num: self.num.to_approx(),
            den: self.den.to_approx(),
            tol: self.tol,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({ "num": self.num.to_json(), "den": self.den.to_json() })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let part = |key: &str| {
            v.get(key)
                .ok_or_else(|| Error::Parse(format!("map without {key:?}")))
                .and_then(Polynomial::from_json)
        };
        Self::new(part("num")?, part("den")?)
    }
}

fn sort_by_location<T>(items: &mut [T], key: impl Fn(&T) -> ApproxPoint) {
    items.sort_by(|a, b| match (key(a), key(b)) {
        (SpherePoint::Infinity, SpherePoint::Infinity) => Ordering::Equal,
        (SpherePoint::Infinity, _) => Ordering::Greater,
        (_, SpherePoint::Infinity) => Ordering::Less,
        (SpherePoint::Finite(x), SpherePoint::Finite(y)) => {
            x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
        }
    });
}

fn reduce_exact<S: Scalar>(
    num: Polynomial<S>,
    den: Polynomial<S>,
) -> (Polynomial<S>, Polynomial<S>) {
    let g = num.gcd(&den);
    let (num, den) = if g.degree().unwrap_or(0) > 0 {
        (num.div_rem(&g).0, den.div_rem(&g).0)
    } else {
        (num, den)
    };
    let lead = den.leading().cloned().unwrap_or_else(S::one);
    let inv = S::one() / lead;
    (num.scale(&inv), den.scale(&inv))
}

/// Cancels numerator and denominator roots that agree to within the
/// clustering tolerance.
fn reduce_by_roots<S: Scalar>(
    num: Polynomial<S>,
    den: Polynomial<S>,
    tol: &Tolerances,
) -> Result<(Polynomial<S>, Polynomial<S>)> {
    if num.degree().unwrap_or(0) == 0 || den.degree().unwrap_or(0) == 0 {
        return Ok((num, den));
    }
    let num_roots = S::roots(&num, tol)?;
    let mut den_roots = S::roots(&den, tol)?;
    let mut kept_num = Vec::new();
    let mut cancelled = false;
    for (r, m) in num_roots {
        let rp = SpherePoint::Finite(r.approx());
        let mut remaining = m;
        if let Some(entry) = den_roots.iter_mut().find(|(s, k)| {
            *k > 0 && chordal_approx(&rp, &SpherePoint::Finite(s.approx())) <= tol.cluster
        }) {
            let k = entry.1.min(remaining);
            entry.1 -= k;
            remaining -= k;
            cancelled = true;
        }
        kept_num.push((r, remaining));
    }
    if !cancelled {
        return Ok((num, den));
    }
    let rebuild = |lead: &S, roots: &[(Root<S>, usize)]| -> Result<Polynomial<S>> {
        let mut p = Polynomial::constant(lead.clone());
        for (r, m) in roots {
            let s = r
                .as_point()
                .ok_or_else(|| Error::RootFindingFailure("cannot cancel an enclosure".into()))?;
            for _ in 0..*m {
                p = &p * &Polynomial::linear_root(s.clone());
            }
        }
        Ok(p)
    };
    let num = rebuild(num.leading().unwrap(), &kept_num)?;
    let den = rebuild(den.leading().unwrap(), &den_roots)?;
    Ok((num, den))
}
