//! The degree-4 covering `f(z) = (z − x₁)³ (z − x₂) / z` branched over
//! `{0, w, ∞}` with local degrees `{3, 1}` over each value, and a checker for
//! the converse statement about coverings with surjective `π₁` image.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational_map::{FiberPoint, Passport, RationalMap};
use crate::scalar::{Approx, Exact, Scalar};
use crate::sphere::{ApproxPoint, ExactPoint, Mobius, SpherePoint};

/// A verified configuration for one value of `w`.
///
/// `x₂ = −3x₁`, `y₁ = −x₁`, `y₂ = 3x₁`, `w = 16x₁³`; the map is ramified
/// with β = 2 exactly at `∞`, `x₁`, `y₁` and sends `X = {0, ∞, x₁, x₂, y₁, y₂}`
/// onto `Y = {0, w, ∞}`.
#[derive(Debug, Clone)]
pub struct PicardConfig<S> {
    pub w: S,
    pub x1: S,
    pub x2: S,
    pub y1: S,
    pub y2: S,
    /// `[0, w, ∞]`.
    pub targets: [SpherePoint<S>; 3],
    /// `[0, ∞, x₁, x₂, y₁, y₂]`.
    pub preimages: [SpherePoint<S>; 6],
    pub map: RationalMap<S>,
    pub passport: Passport<S>,
    /// Fibers over `targets`, in the same order.
    pub fibers: Vec<Vec<FiberPoint<S>>>,
}

impl<S: Scalar> PicardConfig<S> {
    /// Builds the configuration for `w`, taking `x₁` on the principal branch
    /// of `(w/16)^{1/3}`, and verifies its passport before returning.
    pub fn construct(w: &SpherePoint<S>) -> Result<Self> {
        let w = match w {
            SpherePoint::Finite(w) if !w.is_zero() => w.clone(),
            _ => return Err(Error::DegenerateW),
        };
        let x1 = (w.clone() / S::from_i64(16))
            .principal_cbrt()
            .ok_or_else(|| Error::NotRepresentable(format!("cube root of ({})/16", w.display())))?;
        let x2 = -(S::from_i64(3) * x1.clone());
        let y1 = -x1.clone();
        let y2 = S::from_i64(3) * x1.clone();
        let num =
            &Polynomial::linear_root(x1.clone()).pow(3) * &Polynomial::linear_root(x2.clone());
        let map = RationalMap::new(num, Polynomial::z())?;
        let targets = [
            SpherePoint::zero(),
            SpherePoint::Finite(w.clone()),
            SpherePoint::Infinity,
        ];
        let preimages = [
            SpherePoint::zero(),
            SpherePoint::Infinity,
            SpherePoint::Finite(x1.clone()),
            SpherePoint::Finite(x2.clone()),
            SpherePoint::Finite(y1.clone()),
            SpherePoint::Finite(y2.clone()),
        ];
        let passport = map.passport_over(&targets)?;
        let fibers = targets
            .iter()
            .map(|y| map.fiber(y))
            .collect::<Result<Vec<_>>>()?;
        let config = PicardConfig {
            w,
            x1,
            x2,
            y1,
            y2,
            targets,
            preimages,
            map,
            passport,
            fibers,
        };
        config.verify()?;
        Ok(config)
    }

    /// Re-checks degree, passport, fiber positions and total branching.
    pub fn verify(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::VerificationFailure(msg));
        let tol = self.map.tolerances().pt;
        if self.map.degree() != 4 {
            return fail(format!("degree {} instead of 4", self.map.degree()));
        }
        for entry in &self.passport.entries {
            if entry.local_degrees != [3, 1] {
                return fail(format!(
                    "local degrees {:?} over {}",
                    entry.local_degrees,
                    entry.value.display()
                ));
            }
        }
        // (ramified, unramified) preimage expected over 0, w, ∞
        let expected = [
            (&self.preimages[2], &self.preimages[3]),
            (&self.preimages[4], &self.preimages[5]),
            (&self.preimages[1], &self.preimages[0]),
        ];
        for (fiber, (ram, unram)) in self.fibers.iter().zip(expected) {
            for (want, degree) in [(ram, 3), (unram, 1)] {
                let found = fiber.iter().any(|p| {
                    p.local_degree == degree
                        && p.location
                            .as_point()
                            .is_some_and(|q| q.coincides(want, tol))
                });
                if !found {
                    return fail(format!(
                        "expected a preimage {} of local degree {degree}",
                        want.display()
                    ));
                }
            }
        }
        for (i, a) in self.preimages.iter().enumerate() {
            if self.preimages[i + 1..].iter().any(|b| a.coincides(b, tol)) {
                return fail(format!("preimage {} repeated", a.display()));
            }
        }
        let crit = self.map.critical_points()?;
        let total: usize = crit.iter().map(|c| c.beta).sum();
        if total != 6 || crit.iter().any(|c| c.beta != 2) {
            return fail(format!(
                "critical data {:?}",
                crit.iter().map(|c| c.beta).collect::<Vec<_>>()
            ));
        }
        Ok(())
    }

    /// Sum of branch orders over the whole sphere.
    pub fn total_beta(&self) -> Result<usize> {
        Ok(self.map.critical_points()?.iter().map(|c| c.beta).sum())
    }

    pub fn to_json(&self) -> Value {
        let pts = |ps: &[SpherePoint<S>]| ps.iter().map(SpherePoint::to_json).collect::<Vec<_>>();
        serde_json::json!({
            "backend": S::NAME,
            "w": SpherePoint::Finite(self.w.clone()).to_json(),
            "x1": SpherePoint::Finite(self.x1.clone()).to_json(),
            "x2": SpherePoint::Finite(self.x2.clone()).to_json(),
            "y1": SpherePoint::Finite(self.y1.clone()).to_json(),
            "y2": SpherePoint::Finite(self.y2.clone()).to_json(),
            "targets": pts(&self.targets),
            "preimages": pts(&self.preimages),
            "map": self.map.to_json(),
            "passport": serde_json::to_value(&self.passport).unwrap_or(Value::Null),
        })
    }
}

/// A configuration in whichever backend could represent it.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum AnyPicard {
    Exact(PicardConfig<Exact>),
    Approx(PicardConfig<Approx>),
}

impl AnyPicard {
    /// Exact when `(w/16)^{1/3}` is a Gaussian rational, approximate
    /// otherwise.
    pub fn construct(w: &ExactPoint) -> Result<Self> {
        match PicardConfig::<Exact>::construct(w) {
            Ok(c) => Ok(AnyPicard::Exact(c)),
            Err(Error::NotRepresentable(_)) => {
                PicardConfig::<Approx>::construct(&w.to_approx()).map(AnyPicard::Approx)
            }
            Err(e) => Err(e),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AnyPicard::Exact(_))
    }

    pub fn map_approx(&self) -> RationalMap<Approx> {
        match self {
            AnyPicard::Exact(c) => c.map.to_approx(),
            AnyPicard::Approx(c) => c.map.clone(),
        }
    }

    pub fn passport_approx(&self) -> Passport<Approx> {
        match self {
            AnyPicard::Exact(c) => c.passport.to_approx(),
            AnyPicard::Approx(c) => c.passport.clone(),
        }
    }

    pub fn preimages_approx(&self) -> Vec<ApproxPoint> {
        match self {
            AnyPicard::Exact(c) => c.preimages.iter().map(SpherePoint::to_approx).collect(),
            AnyPicard::Approx(c) => c.preimages.to_vec(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyPicard::Exact(c) => c.to_json(),
            AnyPicard::Approx(c) => c.to_json(),
        }
    }
}

/// The covering normalised to miss a prescribed triple.
#[derive(Debug, Clone)]
pub struct TargetedPicard<S> {
    /// Sends the targets to `(0, 1, ∞)`.
    pub psi: Mobius<S>,
    /// Configuration for `w = 1`.
    pub config: AnyPicard,
    /// `ψ⁻¹ ∘ f`, branched exactly over the targets.
    pub composite: RationalMap<Approx>,
    pub targets: [SpherePoint<S>; 3],
    pub composite_passport: Passport<Approx>,
}

impl<S: Scalar> TargetedPicard<S> {
    pub fn construct(targets: &[SpherePoint<S>; 3]) -> Result<Self> {
        let standard = [
            SpherePoint::zero(),
            SpherePoint::from_i64(1),
            SpherePoint::Infinity,
        ];
        let psi = Mobius::sending_three(targets, &standard)?;
        let config = AnyPicard::construct(&SpherePoint::from_i64(1))?;
        let composite = config
            .map_approx()
            .post_compose(&psi.inverse().to_approx())?;
        let approx_targets: Vec<ApproxPoint> = targets.iter().map(SpherePoint::to_approx).collect();
        let composite_passport = composite.passport_over(&approx_targets)?;
        let reference = config.passport_approx();
        for (got, want) in composite_passport.entries.iter().zip(&reference.entries) {
            if got.local_degrees != want.local_degrees {
                return Err(Error::VerificationFailure(format!(
                    "composite has local degrees {:?} over {}, expected {:?}",
                    got.local_degrees,
                    got.value.display(),
                    want.local_degrees
                )));
            }
        }
        Ok(TargetedPicard {
            psi,
            config,
            composite,
            targets: targets.clone(),
            composite_passport,
        })
    }

    pub fn to_json(&self) -> Value {
        let m = &self.psi;
        let coeff = |s: &S| SpherePoint::Finite(s.clone()).to_json();
        serde_json::json!({
            "targets": self.targets.iter().map(SpherePoint::to_json).collect::<Vec<_>>(),
            "psi": { "a": coeff(&m.a), "b": coeff(&m.b), "c": coeff(&m.c), "d": coeff(&m.d) },
            "config": self.config.to_json(),
            "composite": self.composite.to_json(),
            "composite_passport": serde_json::to_value(&self.composite_passport).unwrap_or(Value::Null),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

/// Both sides of an integer identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}

impl IdentityCheck {
    pub fn new(lhs: i64, rhs: i64) -> Self {
        IdentityCheck {
            lhs,
            rhs,
            holds: lhs == rhs,
        }
    }
}

/// Conclusions of the converse statement evaluated on a passport.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConverseReport {
    pub m: usize,
    pub degree: usize,
    pub y0_count: usize,
    pub branch_point_count: usize,
    pub branch_beta_total: usize,
    pub preimage_count: usize,
    /// No ramification over `Y₁`.
    pub branching_over_y0_only: bool,
    /// Every value has an unramified preimage.
    pub unramified_preimage_everywhere: bool,
    /// Every value of `Y₀` has exactly one unramified preimage (the count
    /// `♯X₀′ = ♯Y₀` the converse argument relies on).
    pub one_unramified_per_y0_value: bool,
    /// `(♯Y₀ − 2)(deg − 1) = ♯B_h`.
    pub derived_identity: IdentityCheck,
    /// `(♯Y₀ − 2)(deg − 1) = ♯B_h + β(B_h)`; fails on the degree-4 covering
    /// itself (3 against 9).
    pub printed_identity: IdentityCheck,
    pub degree_is_four: bool,
    pub three_branch_points: bool,
    pub all_branch_orders_two: bool,
    pub y0_has_three_values: bool,
    /// `♯X = 6 + 4m`.
    pub preimage_count_matches: bool,
    pub verdict: Verdict,
}

/// Evaluates the converse's conclusions on `passport` with the split
/// `Y = Y₀ ∪ Y₁`. The variant with `+ β(B_h)` is reported but does not
/// enter the verdict.
pub fn check_converse<S: Scalar>(
    passport: &Passport<S>,
    y0: &[SpherePoint<S>],
    y1: &[SpherePoint<S>],
) -> Result<ConverseReport> {
    passport.validate()?;
    let tol = crate::sphere::Tolerances::default().pt;
    let lookup = |y: &SpherePoint<S>| {
        passport
            .entry(y, tol)
            .ok_or_else(|| Error::UnknownValue(y.display()))
    };
    let e0 = y0.iter().map(lookup).collect::<Result<Vec<_>>>()?;
    let e1 = y1.iter().map(lookup).collect::<Result<Vec<_>>>()?;
    let all = || e0.iter().chain(e1.iter());

    let betas: Vec<usize> = all().flat_map(|e| e.betas()).filter(|&b| b > 0).collect();
    let branch_point_count = betas.len();
    let branch_beta_total: usize = betas.iter().sum();
    let preimage_count: usize = all().map(|e| e.local_degrees.len()).sum();
    let degree = passport.map_degree;
    let m = y1.len();

    let lhs = (y0.len() as i64 - 2) * (degree as i64 - 1);
    let derived_identity = IdentityCheck::new(lhs, branch_point_count as i64);
    let printed_identity = IdentityCheck::new(lhs, (branch_point_count + branch_beta_total) as i64);

    let branching_over_y0_only = e1.iter().all(|e| e.local_degrees.iter().all(|&d| d == 1));
    let unramified_preimage_everywhere = all().all(|e| e.local_degrees.contains(&1));
    let one_unramified_per_y0_value = e0
        .iter()
        .all(|e| e.local_degrees.iter().filter(|&&d| d == 1).count() == 1);
    let degree_is_four = degree == 4;
    let three_branch_points = branch_point_count == 3;
    let all_branch_orders_two = betas.iter().all(|&b| b == 2);
    let y0_has_three_values = y0.len() == 3;
    let preimage_count_matches = preimage_count == 6 + 4 * m;

    let consistent = branching_over_y0_only
        && unramified_preimage_everywhere
        && derived_identity.holds
        && degree_is_four
        && three_branch_points
        && all_branch_orders_two
        && y0_has_three_values
        && preimage_count_matches;
    Ok(ConverseReport {
        m,
        degree,
        y0_count: y0.len(),
        branch_point_count,
        branch_beta_total,
        preimage_count,
        branching_over_y0_only,
        unramified_preimage_everywhere,
        one_unramified_per_y0_value,
        derived_identity,
        printed_identity,
        degree_is_four,
        three_branch_points,
        all_branch_orders_two,
        y0_has_three_values,
        preimage_count_matches,
        verdict: if consistent {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn ex(n: i64) -> ExactPoint {
        SpherePoint::from_i64(n)
    }

    #[test]
    fn w16_is_exact_and_matches_relations() {
        let c = PicardConfig::<Exact>::construct(&ex(16)).unwrap();
        assert_eq!(c.x1, Exact::from_i64(1));
        assert_eq!(c.x2, Exact::from_i64(-3));
        assert_eq!(c.y1, Exact::from_i64(-1));
        assert_eq!(c.y2, Exact::from_i64(3));
        assert_eq!(c.map.degree(), 4);
        assert_eq!(c.total_beta().unwrap(), 6);
        assert_eq!(c.passport.preimage_count(), 6);
    }

    #[test]
    fn degenerate_w_rejected() {
        assert!(matches!(
            PicardConfig::<Exact>::construct(&ex(0)),
            Err(Error::DegenerateW)
        ));
        assert!(matches!(
            PicardConfig::<Exact>::construct(&SpherePoint::Infinity),
            Err(Error::DegenerateW)
        ));
    }

    #[test]
    fn negative_w_uses_principal_branch() {
        let c = AnyPicard::construct(&ex(-16)).unwrap();
        let AnyPicard::Approx(c) = c else {
            panic!("e^{{iπ/3}} is not a Gaussian rational")
        };
        let expected = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        assert!((c.x1 - expected).norm() < 1e-15);
        assert!((c.x1 * c.x1 * c.x1 + 1.0).norm() < 1e-14);
        c.verify().unwrap();
    }

    #[test]
    fn targeted_identity_for_standard_triple() {
        let t = TargetedPicard::construct(&[ex(0), ex(1), SpherePoint::Infinity]).unwrap();
        assert!(t.psi.equivalent(&Mobius::identity()));
        assert_eq!(t.composite_passport.total_beta(), 6);
    }

    #[test]
    fn converse_on_quartic_passport() {
        let c = PicardConfig::<Exact>::construct(&ex(16)).unwrap();
        let r = check_converse(&c.passport, &c.targets, &[]).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert_eq!((r.m, r.preimage_count), (0, 6));
        assert_eq!(r.derived_identity, IdentityCheck::new(3, 3));
        assert_eq!(r.printed_identity, IdentityCheck::new(3, 9));
    }

    #[test]
    fn converse_with_one_extra_regular_value() {
        let c = PicardConfig::<Exact>::construct(&ex(16)).unwrap();
        let mut values = c.targets.to_vec();
        values.push(ex(5));
        let passport = c.map.passport_over(&values).unwrap();
        let r = check_converse(&passport, &c.targets, &[ex(5)]).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert_eq!((r.m, r.preimage_count), (1, 10));
    }

    #[test]
    fn converse_rejects_squaring() {
        let sq = RationalMap::<Exact>::polynomial(Polynomial::z().pow(2)).unwrap();
        let ys = [ex(0), SpherePoint::Infinity];
        let passport = sq.passport_over(&ys).unwrap();
        let r = check_converse(&passport, &ys, &[]).unwrap();
        assert_eq!(r.verdict, Verdict::Inconsistent);
        assert_eq!(r.derived_identity, IdentityCheck::new(0, 2));
    }

    #[test]
    fn converse_errors() {
        let bad: Passport<Exact> = Passport {
            map_degree: 4,
            entries: vec![crate::rational_map::PassportEntry::new(ex(0), vec![3, 2])],
        };
        assert!(matches!(
            check_converse(&bad, &[ex(0)], &[]),
            Err(Error::MalformedPassport(_))
        ));
        let c = PicardConfig::<Exact>::construct(&ex(16)).unwrap();
        assert!(matches!(
            check_converse(&c.passport, &[ex(7)], &[]),
            Err(Error::UnknownValue(_))
        ));
    }
}
