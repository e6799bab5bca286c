//! Local lifting of branched coverings through a branched covering, and the
//! divisibility conditions that decide it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational_map::Passport;
use crate::scalar::Scalar;
use crate::sphere::{SpherePoint, Tolerances};

/// A lift of a disk covering of local degree `1 + β_F` through one of
/// local degree `1 + β_f`: the lift has local degree `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftResult {
    pub k: u64,
    pub beta_lift: u64,
}

/// `Some` iff `(1 + β_f) | (1 + β_F)`.
pub fn local_lift(beta_f: u64, beta_big_f: u64) -> Option<LiftResult> {
    let (a, b) = (1 + beta_f, 1 + beta_big_f);
    (b % a == 0).then(|| LiftResult {
        k: b / a,
        beta_lift: b / a - 1,
    })
}

/// True iff `divisor | 1 + β` for every listed order.
pub fn c0_extension_divisibility(branch_orders: &[u64], divisor: u64) -> Result<bool> {
    if divisor < 2 {
        return Err(Error::InvalidInput(format!(
            "divisor {divisor} must be at least 2"
        )));
    }
    Ok(branch_orders.iter().all(|b| (1 + b) % divisor == 0))
}

/// Which preimages an end may lift through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SheetPolicy {
    /// Any preimage.
    #[default]
    Any,
    /// Only ramified preimages: the unramified sheets are taken.
    ForceRamified,
}

/// One end over `value` with branch order `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct EndOverValue<S> {
    pub value: SpherePoint<S>,
    pub beta: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SheetOption {
    /// Position in the passport entry (local degrees descending).
    pub preimage: usize,
    pub local_degree: u64,
    pub lift: Option<LiftResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct EndFeasibility<S> {
    pub value: SpherePoint<S>,
    pub beta: u64,
    pub sheets: Vec<SheetOption>,
    pub liftable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Scalar"))]
pub struct FeasibilityReport<S> {
    pub policy: SheetPolicy,
    pub ends: Vec<EndFeasibility<S>>,
    pub verdict: Feasibility,
}

/// Per (end, preimage) local lift conditions. The verdict is `Feasible` iff
/// every end has at least one admissible preimage; sheet assignment is not
/// decided.
pub fn passport_lift_feasibility<S: Scalar>(
    passport: &Passport<S>,
    ends: &[EndOverValue<S>],
    policy: SheetPolicy,
) -> Result<FeasibilityReport<S>> {
    passport.validate()?;
    let tol = Tolerances::default().pt;
    let reports = ends
        .iter()
        .map(|end| {
            let entry = passport
                .entry(&end.value, tol)
                .ok_or_else(|| Error::UnknownValue(end.value.display()))?;
            let sheets: Vec<SheetOption> = entry
                .local_degrees
                .iter()
                .enumerate()
                .filter(|(_, &d)| policy == SheetPolicy::Any || d > 1)
                .map(|(i, &d)| SheetOption {
                    preimage: i,
                    local_degree: d as u64,
                    lift: local_lift(d as u64 - 1, end.beta),
                })
                .collect();
            let liftable = sheets.iter().any(|s| s.lift.is_some());
            Ok(EndFeasibility {
                value: end.value.clone(),
                beta: end.beta,
                sheets,
                liftable,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = if reports.iter().all(|r| r.liftable) {
        Feasibility::Feasible
    } else {
        Feasibility::Infeasible
    };
    Ok(FeasibilityReport {
        policy,
        ends: reports,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::picard::PicardConfig;
    use crate::rational_map::PassportEntry;
    use crate::scalar::Exact;

    #[test]
    fn local_examples() {
        assert_eq!(local_lift(2, 5), Some(LiftResult { k: 2, beta_lift: 1 }));
        assert_eq!(local_lift(2, 2), Some(LiftResult { k: 1, beta_lift: 0 }));
        assert_eq!(local_lift(2, 3), None);
    }

    #[test]
    fn divisibility_examples() {
        assert!(c0_extension_divisibility(&[2, 2, 5], 3).unwrap());
        assert!(!c0_extension_divisibility(&[2, 3], 3).unwrap());
        assert!(c0_extension_divisibility(&[], 3).unwrap());
        assert!(c0_extension_divisibility(&[], 1).is_err());
    }

    fn end(n: i64, beta: u64) -> EndOverValue<Exact> {
        EndOverValue {
            value: SpherePoint::from_i64(n),
            beta,
        }
    }

    #[test]
    fn passport_examples() {
        let c = PicardConfig::<Exact>::construct(&SpherePoint::from_i64(16)).unwrap();
        let r = passport_lift_feasibility(&c.passport, &[end(0, 2)], SheetPolicy::Any).unwrap();
        assert_eq!(r.verdict, Feasibility::Feasible);
        assert!(r.ends[0].sheets.iter().all(|s| s.lift.is_some()));

        let r = passport_lift_feasibility(&c.passport, &[end(0, 1)], SheetPolicy::Any).unwrap();
        assert_eq!(r.verdict, Feasibility::Feasible);
        let ok: Vec<u64> = r.ends[0]
            .sheets
            .iter()
            .filter(|s| s.lift.is_some())
            .map(|s| s.local_degree)
            .collect();
        assert_eq!(ok, vec![1]);

        let single = Passport {
            map_degree: 3,
            entries: vec![PassportEntry::new(SpherePoint::from_i64(0), vec![3])],
        };
        let r = passport_lift_feasibility(&single, &[end(0, 1)], SheetPolicy::Any).unwrap();
        assert_eq!(r.verdict, Feasibility::Infeasible);

        assert!(matches!(
            passport_lift_feasibility(&c.passport, &[end(5, 0)], SheetPolicy::Any),
            Err(Error::UnknownValue(_))
        ));
    }
}
