use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

use ramify::{
    chordal_distance, Approx, ApproxPoint, Exact, Location, Polynomial, RationalMap, Scalar,
    SpherePoint,
};

const TAU_PT: f64 = 1e-9;

/// Gaussian-integer coefficients, constant term first.
type Coeffs = Vec<(i64, i64)>;
/// Integer roots with multiplicities.
type Factors = Vec<(i64, u32)>;

fn gauss<S: Scalar>(re: i64, im: i64) -> S {
    S::from_complex(Complex64::new(re as f64, im as f64))
}

fn poly<S: Scalar>(coeffs: &[(i64, i64)]) -> Polynomial<S> {
    Polynomial::new(coeffs.iter().map(|&(re, im)| gauss::<S>(re, im)).collect())
}

/// Gaussian-integer coefficient lists with total degree at most 8.
fn coeff_pair() -> impl Strategy<Value = (Coeffs, Coeffs)> {
    (0usize..=8)
        .prop_flat_map(|dn| (Just(dn), 0usize..=(8 - dn)))
        .prop_flat_map(|(dn, dd)| {
            (
                proptest::collection::vec((-5i64..=5, -5i64..=5), dn + 1),
                proptest::collection::vec((-5i64..=5, -5i64..=5), dd + 1),
            )
        })
}

fn random_map<S: Scalar>(num: &[(i64, i64)], den: &[(i64, i64)]) -> Option<RationalMap<S>> {
    RationalMap::new(poly(num), poly(den)).ok()
}

/// Maps with prescribed integer roots and multiplicities, so that critical
/// points land on the integer grid.
fn factored() -> impl Strategy<Value = (Factors, Factors)> {
    (
        proptest::collection::vec((-4i64..=4, 1u32..=3), 1..=3),
        proptest::collection::vec((-4i64..=4, 1u32..=2), 0..=2),
    )
}

fn from_factors(num: &[(i64, u32)], den: &[(i64, u32)]) -> Option<RationalMap<Exact>> {
    let build = |fs: &[(i64, u32)]| {
        fs.iter().fold(Polynomial::<Exact>::one(), |acc, &(r, m)| {
            &acc * &Polynomial::linear_root(Exact::from_i64(r)).pow(m)
        })
    };
    RationalMap::new(build(num), build(den)).ok()
}

fn rh_holds<S: Scalar>(f: &RationalMap<S>) {
    let total: usize = f.critical_points().unwrap().iter().map(|c| c.beta).sum();
    assert_eq!(total, 2 * f.degree() - 2, "map {f:?}");
}

fn regular_value(re: i64, im: i64) -> SpherePoint<Exact> {
    // offset by 1/7 + i/11 to stay off the integer grid
    let offset = Exact::new(
        BigRational::new(1.into(), 7.into()),
        BigRational::new(1.into(), 11.into()),
    );
    SpherePoint::finite(gauss::<Exact>(re, im) + offset).unwrap()
}

fn is_regular(branch: &[ApproxPoint], y: &ApproxPoint) -> bool {
    !branch.iter().any(|b| chordal_distance(b, y) < 1e-4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn riemann_hurwitz_exact((num, den) in coeff_pair()) {
        if let Some(f) = random_map::<Exact>(&num, &den) {
            rh_holds(&f);
        }
    }

    #[test]
    fn riemann_hurwitz_approx((num, den) in coeff_pair()) {
        if let Some(f) = random_map::<Approx>(&num, &den) {
            rh_holds(&f);
        }
    }

    #[test]
    fn riemann_hurwitz_with_multiple_roots((num, den) in factored()) {
        if let Some(f) = from_factors(&num, &den) {
            rh_holds(&f);
            rh_holds(&f.to_approx());
        }
    }

    #[test]
    fn regular_fibers_have_full_count(
        (num, den) in coeff_pair(),
        ys in proptest::collection::vec((-6i64..=6, -6i64..=6), 100),
    ) {
        let Some(f) = random_map::<Exact>(&num, &den) else { return Ok(()) };
        let fa = f.to_approx();
        let branch = fa.branch_values().unwrap();
        for (i, &(re, im)) in ys.iter().enumerate() {
            let y = regular_value(re, im);
            if !is_regular(&branch, &y.to_approx()) {
                continue;
            }
            let fiber_a = fa.fiber(&y.to_approx()).unwrap();
            prop_assert_eq!(fiber_a.len(), f.degree());
            prop_assert!(fiber_a.iter().all(|p| p.local_degree == 1));
            // exact fibers of generic maps are costly; sample a few
            if i < 2 {
                let fiber = f.fiber(&y).unwrap();
                prop_assert_eq!(fiber.len(), f.degree());
                prop_assert!(fiber.iter().all(|p| p.local_degree == 1));
            }
        }
    }

    #[test]
    fn fiber_points_evaluate_back(
        (num, den) in factored(),
        ys in proptest::collection::vec((-6i64..=6, -6i64..=6), 3),
    ) {
        let Some(f) = from_factors(&num, &den) else { return Ok(()) };
        let fa = f.to_approx();
        let mut targets: Vec<SpherePoint<Exact>> = ys.iter().map(|&(a, b)| regular_value(a, b)).collect();
        targets.push(SpherePoint::zero());
        targets.push(SpherePoint::Infinity);
        for y in &targets {
            let fiber = f.fiber(y).unwrap();
            prop_assert_eq!(fiber.iter().map(|p| p.local_degree).sum::<usize>(), f.degree());
            for p in &fiber {
                match &p.location {
                    Location::Point(x) => prop_assert_eq!(&f.evaluate(x), y),
                    Location::Enclosure { center, .. } => {
                        let image = fa.evaluate(&SpherePoint::Finite(*center));
                        prop_assert!(chordal_distance(&image, &y.to_approx()) < TAU_PT);
                    }
                }
            }
            for p in fa.fiber(&y.to_approx()).unwrap() {
                let image = fa.evaluate(&p.location.approx());
                prop_assert!(chordal_distance(&image, &y.to_approx()) < TAU_PT);
            }
        }
    }

    #[test]
    fn ramification_iff_derivative_vanishes((num, den) in factored()) {
        let Some(f) = from_factors(&num, &den) else { return Ok(()) };
        let w = f.wronskian();
        for re in -5i64..=5 {
            for im in -1i64..=1 {
                let z = gauss::<Exact>(re, im);
                if f.den().eval(&z).is_zero() {
                    continue;
                }
                let p = SpherePoint::finite(z.clone()).unwrap();
                prop_assert_eq!(f.local_degree(&p) >= 2, w.eval(&z).is_zero(), "at {}", p.display());
            }
        }
    }
}

#[test]
fn passport_of_square_and_identity() {
    let sq = RationalMap::<Exact>::polynomial(Polynomial::z().pow(2)).unwrap();
    let p = sq.passport_over(&[SpherePoint::zero()]).unwrap();
    assert_eq!(p.entries[0].local_degrees, vec![2]);

    let id = RationalMap::<Approx>::identity();
    let y = SpherePoint::Finite(Complex64::new(0.3, -2.0));
    assert_eq!(
        id.passport_over(std::slice::from_ref(&y)).unwrap().entries[0].local_degrees,
        vec![1]
    );
}
