use proptest::prelude::*;

use ramify::lifting::{
    c0_extension_divisibility, local_lift, passport_lift_feasibility, EndOverValue, Feasibility,
    SheetPolicy,
};
use ramify::{Exact, PicardConfig, SpherePoint};

#[test]
fn local_lift_matches_divisibility_exhaustively() {
    for bf in 0..=50u64 {
        for big in 0..=50u64 {
            let divides = (big + 1) % (bf + 1) == 0;
            match local_lift(bf, big) {
                Some(l) => {
                    assert!(divides, "({bf}, {big})");
                    assert_eq!(l.k * (1 + bf), 1 + big);
                    assert_eq!(l.beta_lift, l.k - 1);
                }
                None => assert!(!divides, "({bf}, {big})"),
            }
        }
    }
}

#[test]
fn unramified_sheets_always_lift() {
    for big in 0..=200u64 {
        assert_eq!(local_lift(0, big).map(|l| l.k), Some(1 + big));
    }
}

fn quartic() -> PicardConfig<Exact> {
    PicardConfig::construct(&SpherePoint::from_i64(16)).unwrap()
}

proptest! {
    /// Forcing ends through the ramified preimage of a `{3, 1}` passport is
    /// exactly divisibility by 3.
    #[test]
    fn forced_feasibility_is_divisibility_by_three(
        ends in proptest::collection::vec((0usize..3, 0u64..20), 0..6),
    ) {
        let cfg = quartic();
        let ends: Vec<EndOverValue<Exact>> = ends
            .iter()
            .map(|&(v, beta)| EndOverValue { value: cfg.targets[v].clone(), beta })
            .collect();
        let orders: Vec<u64> = ends.iter().map(|e| e.beta).collect();
        let report = passport_lift_feasibility(&cfg.passport, &ends, SheetPolicy::ForceRamified).unwrap();
        prop_assert_eq!(
            report.verdict == Feasibility::Feasible,
            c0_extension_divisibility(&orders, 3).unwrap()
        );

        // with the unramified sheet available every end lifts
        let any = passport_lift_feasibility(&cfg.passport, &ends, SheetPolicy::Any).unwrap();
        prop_assert_eq!(any.verdict, Feasibility::Feasible);
    }
}
