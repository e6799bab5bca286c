use std::sync::OnceLock;

use proptest::prelude::*;

use ramify::fgt::{
    base_verdicts, bend, classify_covering, ell_bound_consequences, enumerate_admissible, Bounds,
    Classification, DEFAULT_NODE_BUDGET,
};
use ramify::{EndClass, FgtRecord};

const BOUNDS: Bounds = Bounds {
    g_max: 3,
    n_max: 6,
    m_max: 8,
    b_max: 6,
};

fn suite() -> &'static [FgtRecord] {
    static SUITE: OnceLock<Vec<FgtRecord>> = OnceLock::new();
    SUITE.get_or_init(|| enumerate_admissible(&BOUNDS, DEFAULT_NODE_BUDGET).unwrap())
}

/// The three base identities, written out independently of the ledger.
fn identities_hold(r: &FgtRecord) -> bool {
    let n = r.degree as i64;
    let chi = 2 - 2 * r.genus as i64;
    let ends = r.ends.len() as i64;
    let index: i64 = r.ends.iter().map(|e| e.index as i64).sum();
    let beta: i64 = r.ends.iter().map(|e| e.beta as i64).sum();
    let rh = 2 * n == chi + r.interior_beta as i64 + beta;
    let tc = 2 * n == -chi + ends + index;
    let fiber = |y: &str| {
        r.ends
            .iter()
            .filter(|e| e.class == EndClass::Missed(y.to_string()))
            .map(|e| 1 + e.beta as i64)
            .sum::<i64>()
    };
    rh && tc && r.missed.iter().all(|y| fiber(y) == n)
}

#[test]
fn enumerator_is_sound() {
    assert!(!suite().is_empty());
    for r in suite() {
        r.validate().unwrap();
        assert!(identities_hold(r), "{r:?}");
        assert_eq!(base_verdicts(r), [true; 3]);
        assert!(
            r.genus <= BOUNDS.g_max
                && r.degree <= BOUNDS.n_max
                && r.ends.len() as u64 <= BOUNDS.m_max
        );
        assert!(r.ends.iter().all(|e| e.beta <= BOUNDS.b_max));
    }
}

#[test]
fn enumerator_is_deterministic() {
    let again = enumerate_admissible(&BOUNDS, DEFAULT_NODE_BUDGET).unwrap();
    assert_eq!(again, suite());
}

#[test]
fn smallest_bounds_contain_the_catenoid() {
    let tiny = Bounds {
        g_max: 0,
        n_max: 1,
        m_max: 2,
        b_max: 0,
    };
    let records = enumerate_admissible(&tiny, DEFAULT_NODE_BUDGET).unwrap();
    assert!(records.contains(&FgtRecord::catenoid()));
}

#[test]
fn node_budget_is_enforced() {
    assert!(enumerate_admissible(&BOUNDS, 1_000).is_err());
}

#[test]
fn at_most_three_omitted_values() {
    assert!(suite().iter().all(|r| r.ell() <= 3));
}

#[test]
fn complement_identity_is_positive() {
    for r in suite() {
        let n = r.degree as i64;
        let regular: Vec<_> = r.ends.iter().filter(|e| !e.class.is_missed()).collect();
        let rhs = regular.len() as i64
            + r.interior_beta as i64
            + regular.iter().map(|e| e.beta as i64).sum::<i64>()
            + r.index_total();
        assert_eq!(4 * n - r.ell() as i64 * n, rhs, "{r:?}");
        assert!(rhs > 0);
        assert!(ell_bound_consequences(r).unwrap().all_hold());
    }
}

#[test]
fn three_omitted_values_force_rigidity() {
    let three: Vec<_> = suite().iter().filter(|r| r.ell() == 3).collect();
    assert!(!three.is_empty());
    for r in three {
        assert!(r.euler() <= 0);
        if r.genus == 1 {
            assert!(r.ends.iter().all(|e| e.class.is_missed()));
            assert_eq!(r.interior_beta, 0);
            assert_eq!(r.end_beta_total(), 2 * r.n());
            assert_eq!(r.ends.len() as i64, r.n());
            assert_eq!(r.index_total(), r.n());
            assert!(r.ends.iter().all(|e| e.index == 1));
        }
    }
}

#[test]
fn covering_classification_agrees_with_enumeration() {
    for r in suite() {
        let covering = r.interior_beta == 0 && r.ends.iter().all(|e| e.class.is_missed());
        if !covering {
            continue;
        }
        let class = classify_covering(r).unwrap();
        match r.ell() {
            1 => {
                assert_eq!((r.genus, r.ends.len(), r.degree), (0, 1, 1));
                assert_eq!(class, Classification::SphereMinusPoint);
            }
            2 => {
                assert_eq!((r.genus, r.ends.len()), (0, 2));
                assert_eq!(
                    class,
                    Classification::CoveringOfTwicePuncturedSphere { degree: r.degree }
                );
            }
            3 => assert_eq!(class, Classification::NoExample),
            _ => {}
        }
    }
}

fn classes(r: &FgtRecord) -> Vec<EndClass> {
    let mut cs: Vec<EndClass> = r.ends.iter().map(|e| e.class.clone()).collect();
    cs.dedup();
    cs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bending_preserves_invariants(pick in any::<prop::sample::Index>(), class in any::<prop::sample::Index>()) {
        let r = pick.get(suite());
        let from = class.get(&classes(r)).clone();
        let to = if from.is_missed() { "fresh" } else { "regular:fresh" };
        let bent = bend(r, &from, to).unwrap();
        prop_assert_eq!(bent.ell(), r.ell());
        prop_assert_eq!(bent.ends.len(), r.ends.len());
        for (a, b) in bent.ends.iter().zip(&r.ends) {
            prop_assert_eq!((a.index, a.beta), (b.index, b.beta));
        }
        prop_assert_eq!(base_verdicts(&bent), base_verdicts(r));
        prop_assert!(identities_hold(&bent));
        if !from.is_missed() {
            prop_assert_eq!(&bent.missed, &r.missed);
        }
    }
}

#[test]
fn bending_there_and_back_is_a_relabelling() {
    let cat = FgtRecord::catenoid();
    let from = cat.ends[0].class.clone();
    let EndClass::Missed(original) = &from else {
        unreachable!()
    };
    let there = bend(&cat, &from, "y").unwrap();
    let back = bend(&there, &EndClass::Missed("y".into()), original).unwrap();
    assert_eq!(back, cat);
}
