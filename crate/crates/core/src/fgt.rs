//! Integer bookkeeping for surfaces of finite geometric type.
//!
//! A record stores the genus of the compactification `M̄`, the Gauss degree
//! `n = |deg G|`, the ends with their geometric index and branch order, the
//! total branching on the open surface, and the set of omitted values. All
//! omitted values are opaque ids; coordinates carry no invariant content.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::{passport_lift_feasibility, EndOverValue, Feasibility, SheetPolicy};
use crate::picard::TargetedPicard;
use crate::rational_map::Passport;
use crate::scalar::{Approx, Exact};
use crate::sphere::SpherePoint;

/// The value an end is sent to: an omitted value, or some attained value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EndClass {
    Missed(String),
    /// Optionally labelled so that ends over the same attained value can be
    /// grouped.
    Regular(Option<String>),
}

impl EndClass {
    pub fn is_missed(&self) -> bool {
        matches!(self, EndClass::Missed(_))
    }

    pub fn missed_id(&self) -> Option<&str> {
        match self {
            EndClass::Missed(id) => Some(id),
            EndClass::Regular(_) => None,
        }
    }
}

impl fmt::Display for EndClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EndClass::Missed(id) => write!(f, "missed:{id}"),
            EndClass::Regular(None) => write!(f, "regular"),
            EndClass::Regular(Some(id)) => write!(f, "regular:{id}"),
        }
    }
}

impl FromStr for EndClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidRecord(format!(
                "end class {s:?} is not missed:<id>, regular or regular:<id>"
            ))
        };
        match s.split_once(':') {
            None if s == "regular" => Ok(EndClass::Regular(None)),
            Some(("missed", id)) if !id.is_empty() => Ok(EndClass::Missed(id.to_string())),
            Some(("regular", id)) if !id.is_empty() => Ok(EndClass::Regular(Some(id.to_string()))),
            _ => Err(bad()),
        }
    }
}

impl Serialize for EndClass {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EndClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EndRecord {
    /// Geometric index, at least 1; 1 means the end is embedded.
    pub index: u64,
    pub beta: u64,
    pub class: EndClass,
}

impl EndRecord {
    pub fn new(index: u64, beta: u64, class: EndClass) -> Self {
        EndRecord { index, beta, class }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FgtRecord {
    pub genus: u64,
    /// `n = |deg G|`, stored positive.
    pub degree: u64,
    pub ends: Vec<EndRecord>,
    /// Total branching over points that are not ends.
    pub interior_beta: u64,
    pub missed: BTreeSet<String>,
}

impl FgtRecord {
    /// Genus 0, degree 1, two embedded unbranched ends over two omitted
    /// values.
    pub fn catenoid() -> Self {
        FgtRecord {
            genus: 0,
            degree: 1,
            ends: vec![
                EndRecord::new(1, 0, EndClass::Missed("1".into())),
                EndRecord::new(1, 0, EndClass::Missed("2".into())),
            ],
            interior_beta: 0,
            missed: ["1".to_string(), "2".to_string()].into(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let r: FgtRecord =
            serde_json::from_str(s).map_err(|e| Error::InvalidRecord(e.to_string()))?;
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidRecord(m));
        if self.degree == 0 {
            return fail("degree must be at least 1".into());
        }
        if self.ends.is_empty() {
            return fail("a record needs at least one end".into());
        }
        if let Some(e) = self.ends.iter().find(|e| e.index == 0) {
            return fail(format!("end of class {} has index 0", e.class));
        }
        for id in &self.missed {
            if !self.ends.iter().any(|e| e.class.missed_id() == Some(id)) {
                return fail(format!("omitted value {id} has no end over it"));
            }
        }
        if let Some(e) = self.ends.iter().find(|e| {
            e.class
                .missed_id()
                .is_some_and(|id| !self.missed.contains(id))
        }) {
            return fail(format!(
                "end class {} names a value outside the omitted set",
                e.class
            ));
        }
        Ok(())
    }

    /// `χ(M̄) = 2 − 2g`.
    pub fn euler(&self) -> i64 {
        2 - 2 * self.genus as i64
    }

    /// `ℓ`, the number of omitted values.
    pub fn ell(&self) -> usize {
        self.missed.len()
    }

    pub fn n(&self) -> i64 {
        self.degree as i64
    }

    pub fn ends_over_missed(&self) -> impl Iterator<Item = &EndRecord> {
        self.ends.iter().filter(|e| e.class.is_missed())
    }

    pub fn ends_regular(&self) -> impl Iterator<Item = &EndRecord> {
        self.ends.iter().filter(|e| !e.class.is_missed())
    }

    pub fn index_total(&self) -> i64 {
        self.ends.iter().map(|e| e.index as i64).sum()
    }

    pub fn end_beta_total(&self) -> i64 {
        self.ends.iter().map(|e| e.beta as i64).sum()
    }
}

/// Both sides of one integer identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Identity {
    pub name: String,
    pub lhs: i64,
    pub rhs: i64,
    pub holds: bool,
}

impl Identity {
    fn new(name: impl Into<String>, lhs: i64, rhs: i64) -> Self {
        Identity {
            name: name.into(),
            lhs,
            rhs,
            holds: lhs == rhs,
        }
    }
}

/// Identities with an overall verdict equal to their conjunction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub identities: Vec<Identity>,
    pub verdict: bool,
}

impl CheckReport {
    fn new(identities: Vec<Identity>) -> Self {
        let verdict = identities.iter().all(|i| i.holds);
        CheckReport {
            identities,
            verdict,
        }
    }

    pub fn get(&self, name: &str) -> Option<&Identity> {
        self.identities.iter().find(|i| i.name == name)
    }
}

/// Riemann–Hurwitz: `2n = χ + β(M) + β(E)`.
pub fn check_rh(r: &FgtRecord) -> CheckReport {
    CheckReport::new(vec![Identity::new(
        "rh",
        2 * r.n(),
        r.euler() + r.interior_beta as i64 + r.end_beta_total(),
    )])
}

/// Total curvature: `2n = −χ + ♯E + I(E)`.
pub fn check_tc(r: &FgtRecord) -> CheckReport {
    CheckReport::new(vec![Identity::new(
        "tc",
        2 * r.n(),
        -r.euler() + r.ends.len() as i64 + r.index_total(),
    )])
}

/// `ℓn = ♯E^∞ + β(E^∞)`, and `n = ♯(ends over y) + β(ends over y)` for
/// each omitted `y`.
pub fn check_missed_fiber(r: &FgtRecord) -> CheckReport {
    let fiber =
        |es: &mut dyn Iterator<Item = &EndRecord>| es.map(|e| 1 + e.beta as i64).sum::<i64>();
    let mut ids = vec![Identity::new(
        "missed_fiber",
        r.ell() as i64 * r.n(),
        fiber(&mut r.ends_over_missed()),
    )];
    for y in &r.missed {
        ids.push(Identity::new(
            format!("fiber:{y}"),
            r.n(),
            fiber(&mut r.ends.iter().filter(|e| e.class.missed_id() == Some(y))),
        ));
    }
    CheckReport::new(ids)
}

/// The three base identities.
pub fn base_verdicts(r: &FgtRecord) -> [bool; 3] {
    [
        check_rh(r).verdict,
        check_tc(r).verdict,
        check_missed_fiber(r).verdict,
    ]
}

/// Structure forced when three values are omitted and `χ(M̄) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rigidity {
    pub regular_ends_absent: bool,
    pub interior_unbranched: bool,
    pub end_beta_is_2n: bool,
    pub n_equals_ends_equals_index_total: bool,
    pub all_indices_one: bool,
}

impl Rigidity {
    pub fn all(&self) -> bool {
        self.regular_ends_absent
            && self.interior_unbranched
            && self.end_beta_is_2n
            && self.n_equals_ends_equals_index_total
            && self.all_indices_one
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsequenceReport {
    /// `4n = ♯E + β(M̄) + I(E)`.
    pub four_n: Identity,
    /// `(4 − ℓ)n = ♯E₀ + β(M ∪ E₀) + I(E)`.
    pub complement: Identity,
    pub complement_positive: bool,
    pub ell_at_most_three: bool,
    /// `χ(M̄) ≤ 0`, evaluated when `ℓ = 3`.
    pub euler_nonpositive: Option<bool>,
    /// Evaluated when `ℓ = 3` and `χ(M̄) = 0`.
    pub rigidity: Option<Rigidity>,
}

impl ConsequenceReport {
    pub fn all_hold(&self) -> bool {
        self.four_n.holds
            && self.complement.holds
            && self.complement_positive
            && self.ell_at_most_three
            && self.euler_nonpositive.unwrap_or(true)
            && self.rigidity.as_ref().is_none_or(Rigidity::all)
    }
}

/// Consequences of the base identities for the number of omitted values.
pub fn ell_bound_consequences(r: &FgtRecord) -> Result<ConsequenceReport> {
    let [rh, tc, mf] = base_verdicts(r);
    if !(rh && tc && mf) {
        return Err(Error::PreconditionViolated(format!(
            "base identities do not hold (rh {rh}, tc {tc}, missed fiber {mf})"
        )));
    }
    let n = r.n();
    let ell = r.ell() as i64;
    let e_total = r.ends.len() as i64;
    let e0: Vec<&EndRecord> = r.ends_regular().collect();
    let beta_e0: i64 = e0.iter().map(|e| e.beta as i64).sum();
    let index = r.index_total();
    let interior = r.interior_beta as i64;
    let four_n = Identity::new(
        "four_n",
        4 * n,
        e_total + interior + r.end_beta_total() + index,
    );
    let complement = Identity::new(
        "complement",
        (4 - ell) * n,
        e0.len() as i64 + interior + beta_e0 + index,
    );
    let euler_nonpositive = (ell == 3).then(|| r.euler() <= 0);
    let rigidity = (ell == 3 && r.euler() == 0).then(|| Rigidity {
        regular_ends_absent: e0.is_empty(),
        interior_unbranched: interior == 0,
        end_beta_is_2n: r.end_beta_total() == 2 * n,
        n_equals_ends_equals_index_total: n == e_total && e_total == index,
        all_indices_one: r.ends.iter().all(|e| e.index == 1),
    });
    Ok(ConsequenceReport {
        complement_positive: complement.rhs > 0,
        four_n,
        complement,
        ell_at_most_three: ell <= 3,
        euler_nonpositive,
        rigidity,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneralReport {
    pub identities: CheckReport,
    /// `(4 − ♯Y)d = ♯E₀ + β(M̄ ∖ E^∞) + I(E)`.
    pub bound: Identity,
    /// The right side of `bound` is positive.
    pub bound_positive: bool,
    /// `bound` holds with a positive right side.
    pub bound_holds: bool,
    /// `♯Y ≤ 3`, the consequence of `bound`.
    pub omitted_at_most_three: bool,
}

/// Reads the record as an arbitrary branched covering `F: M̄ → S²` of degree
/// `d = degree` omitting `Y = missed` on `M`.
pub fn check_general_covering(r: &FgtRecord) -> GeneralReport {
    let d = r.n();
    let y = r.ell() as i64;
    let e0 = r.ends_regular().count() as i64;
    let beta_e0: i64 = r.ends_regular().map(|e| e.beta as i64).sum();
    let beta_einf: i64 = r.ends_over_missed().map(|e| e.beta as i64).sum();
    let einf = r.ends_over_missed().count() as i64;
    let index = r.index_total();
    let interior = r.interior_beta as i64;
    let identities = CheckReport::new(vec![
        Identity::new(
            "general_tc",
            2 * d,
            -r.euler() + r.ends.len() as i64 + index,
        ),
        Identity::new(
            "general_rh",
            2 * d,
            r.euler() + interior + beta_e0 + beta_einf,
        ),
        Identity::new("general_missed_fiber", y * d, einf + beta_einf),
    ]);
    let bound = Identity::new("bound", (4 - y) * d, e0 + interior + beta_e0 + index);
    let bound_positive = bound.rhs > 0;
    GeneralReport {
        identities,
        bound_holds: bound.holds && bound_positive,
        bound_positive,
        bound,
        omitted_at_most_three: y <= 3,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    /// One omitted value: `♯E = n = 1`, `M` is the plane.
    SphereMinusPoint,
    /// Two omitted values: genus 0, two ends.
    CoveringOfTwicePuncturedSphere {
        degree: u64,
    },
    /// Three omitted values: excluded by the lifting obstruction.
    NoExample,
    /// `χ(M̄) = ♯E + n(2 − ℓ)` fails.
    Infeasible {
        lhs: i64,
        rhs: i64,
    },
    Unconstrained,
}

/// Classification when the Gauss map is an unbranched covering of the
/// complement of the omitted set: no interior branching and every end over
/// an omitted value.
pub fn classify_covering(r: &FgtRecord) -> Result<Classification> {
    r.validate()?;
    if r.interior_beta != 0 {
        return Err(Error::PreconditionViolated(format!(
            "interior branching {} present",
            r.interior_beta
        )));
    }
    if let Some(e) = r.ends_regular().next() {
        return Err(Error::PreconditionViolated(format!(
            "end of class {} is not over an omitted value",
            e.class
        )));
    }
    let (lhs, rhs) = (
        r.euler(),
        r.ends.len() as i64 + r.n() * (2 - r.ell() as i64),
    );
    if lhs != rhs {
        return Ok(Classification::Infeasible { lhs, rhs });
    }
    Ok(match r.ell() {
        1 => Classification::SphereMinusPoint,
        2 => Classification::CoveringOfTwicePuncturedSphere { degree: r.degree },
        3 => Classification::NoExample,
        _ => Classification::Unconstrained,
    })
}

/// Moves every end of class `from` to the fresh value `to`. `to` is either
/// a bare id or a class string of the same kind as `from`.
pub fn bend(r: &FgtRecord, from: &EndClass, to: &str) -> Result<FgtRecord> {
    r.validate()?;
    if !r.ends.iter().any(|e| &e.class == from) {
        return Err(Error::UnknownValueClass(from.to_string()));
    }
    let id = match to.parse::<EndClass>() {
        Ok(EndClass::Missed(id)) if from.is_missed() => id,
        Ok(EndClass::Regular(Some(id))) if !from.is_missed() => id,
        Ok(c) => {
            return Err(Error::InvalidInput(format!(
                "cannot bend {from} to a value of class {c}"
            )));
        }
        Err(_) if !to.is_empty() && !to.contains(':') => to.to_string(),
        Err(e) => return Err(e),
    };
    let in_use = r.ends.iter().any(|e| match &e.class {
        EndClass::Missed(x) | EndClass::Regular(Some(x)) => x == &id,
        EndClass::Regular(None) => false,
    });
    if in_use {
        return Err(Error::InvalidInput(format!("value id {id} is not fresh")));
    }
    let target = match from {
        EndClass::Missed(_) => EndClass::Missed(id.clone()),
        EndClass::Regular(_) => EndClass::Regular(Some(id.clone())),
    };
    let mut out = r.clone();
    for e in &mut out.ends {
        if &e.class == from {
            e.class = target.clone();
        }
    }
    if let EndClass::Missed(old) = from {
        out.missed.remove(old);
        out.missed.insert(id);
    }
    let same_shape = out.ell() == r.ell()
        && out.ends.len() == r.ends.len()
        && out
            .ends
            .iter()
            .zip(&r.ends)
            .all(|(a, b)| a.index == b.index && a.beta == b.beta)
        && base_verdicts(&out) == base_verdicts(r);
    if !same_shape {
        return Err(Error::VerificationFailure(format!(
            "bending {from} changed an invariant"
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub g_max: u64,
    pub n_max: u64,
    pub m_max: u64,
    pub b_max: u64,
}

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// A multiset of `(β, I)` pairs, sorted descending.
type EndShape = Vec<(u64, u64)>;

struct Shapes {
    list: Vec<EndShape>,
}

/// All multisets of `(β, I)` with `β ≤ b`, `Σ(I + 1) ≤ cost`, at most
/// `count` elements and `Σβ ≤ beta`, filtered by `keep`. Pairs are chosen
/// in descending order so each multiset is produced once.
fn shapes(
    b: u64,
    cost: u64,
    count: u64,
    beta: u64,
    keep: &dyn Fn(&EndShape) -> bool,
    nodes: &NodeCounter,
) -> Result<Shapes> {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        cur: &mut EndShape,
        max: (u64, u64),
        cost: u64,
        count: u64,
        beta: u64,
        keep: &dyn Fn(&EndShape) -> bool,
        out: &mut Vec<EndShape>,
        nodes: &NodeCounter,
    ) -> Result<()> {
        nodes.tick()?;
        if keep(cur) {
            out.push(cur.clone());
        }
        if count == 0 {
            return Ok(());
        }
        for bt in (0..=max.0.min(beta)).rev() {
            let i_cap = if bt == max.0 { max.1 } else { u64::MAX };
            let i_hi = i_cap.min(cost.saturating_sub(1));
            for i in (1..=i_hi).rev() {
                cur.push((bt, i));
                rec(
                    cur,
                    (bt, i),
                    cost - i - 1,
                    count - 1,
                    beta - bt,
                    keep,
                    out,
                    nodes,
                )?;
                cur.pop();
            }
        }
        Ok(())
    }
    let mut list = Vec::new();
    rec(
        &mut Vec::new(),
        (b, u64::MAX),
        cost,
        count,
        beta,
        keep,
        &mut list,
        nodes,
    )?;
    Ok(Shapes { list })
}

struct NodeCounter<'a> {
    used: &'a AtomicU64,
    budget: u64,
    exceeded: &'a AtomicBool,
}

impl NodeCounter<'_> {
    fn tick(&self) -> Result<()> {
        if self.exceeded.load(Ordering::Relaxed)
            || self.used.fetch_add(1, Ordering::Relaxed) >= self.budget
        {
            self.exceeded.store(true, Ordering::Relaxed);
            return Err(Error::BoundsTooLarge(self.budget));
        }
        Ok(())
    }
}

fn shape_cost(s: &EndShape) -> u64 {
    s.iter().map(|(_, i)| i + 1).sum()
}

fn shape_beta(s: &EndShape) -> u64 {
    s.iter().map(|(b, _)| b).sum()
}

fn shape_sheets(s: &EndShape) -> u64 {
    s.iter().map(|(b, _)| b + 1).sum()
}

/// Records for one `(genus, degree)`.
fn enumerate_cell(g: u64, n: u64, bounds: &Bounds, nodes: &NodeCounter) -> Result<Vec<FgtRecord>> {
    let chi = 2 - 2 * g as i64;
    // TC: Σ(I + 1) over all ends = 2n + χ
    let cost = 2 * n as i64 + chi;
    // RH: β(M) = 2n − χ − β(E) ≥ 0
    let beta_cap = 2 * n as i64 - chi;
    if cost < 2 || beta_cap < 0 {
        return Ok(Vec::new());
    }
    let (cost, beta_cap) = (cost as u64, beta_cap as u64);
    let m = bounds.m_max;
    let b = bounds.b_max;
    let fibers = shapes(
        b,
        cost,
        m,
        beta_cap,
        &|s| !s.is_empty() && shape_sheets(s) == n,
        nodes,
    )?;
    let mut regular_by_cost: Vec<Vec<EndShape>> = vec![Vec::new(); cost as usize + 1];
    for s in shapes(b, cost, m, beta_cap, &|_| true, nodes)?.list {
        regular_by_cost[shape_cost(&s) as usize].push(s);
    }
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    let emit = |chosen: &[usize], out: &mut Vec<FgtRecord>| -> Result<()> {
        let used_cost: u64 = chosen.iter().map(|&i| shape_cost(&fibers.list[i])).sum();
        let used_count: u64 = chosen.iter().map(|&i| fibers.list[i].len() as u64).sum();
        let used_beta: u64 = chosen.iter().map(|&i| shape_beta(&fibers.list[i])).sum();
        for reg in &regular_by_cost[(cost - used_cost) as usize] {
            nodes.tick()?;
            if used_count + reg.len() as u64 > m
                || used_count + reg.len() as u64 == 0
                || used_beta + shape_beta(reg) > beta_cap
            {
                continue;
            }
            let mut ends = Vec::new();
            for (k, &i) in chosen.iter().enumerate() {
                let id = (k + 1).to_string();
                ends.extend(
                    fibers.list[i]
                        .iter()
                        .map(|&(bt, idx)| EndRecord::new(idx, bt, EndClass::Missed(id.clone()))),
                );
            }
            ends.extend(
                reg.iter()
                    .map(|&(bt, idx)| EndRecord::new(idx, bt, EndClass::Regular(None))),
            );
            out.push(FgtRecord {
                genus: g,
                degree: n,
                ends,
                interior_beta: beta_cap - used_beta - shape_beta(reg),
                missed: (1..=chosen.len()).map(|k| k.to_string()).collect(),
            });
        }
        Ok(())
    };
    type Emit<'a> = dyn Fn(&[usize], &mut Vec<FgtRecord>) -> Result<()> + 'a;
    // fibers over the omitted values in nondecreasing shape order
    fn rec(
        chosen: &mut Vec<usize>,
        start: usize,
        fibers: &Shapes,
        budget: (u64, u64, u64),
        emit: &Emit<'_>,
        out: &mut Vec<FgtRecord>,
        nodes: &NodeCounter,
    ) -> Result<()> {
        nodes.tick()?;
        emit(chosen, out)?;
        for i in start..fibers.list.len() {
            let s = &fibers.list[i];
            let (c, k, bt) = (shape_cost(s), s.len() as u64, shape_beta(s));
            if c > budget.0 || k > budget.1 || bt > budget.2 {
                continue;
            }
            chosen.push(i);
            rec(
                chosen,
                i,
                fibers,
                (budget.0 - c, budget.1 - k, budget.2 - bt),
                emit,
                out,
                nodes,
            )?;
            chosen.pop();
        }
        Ok(())
    }
    rec(
        &mut chosen,
        0,
        &fibers,
        (cost, m, beta_cap),
        &emit,
        &mut out,
        nodes,
    )?;
    Ok(out)
}

/// All records within `bounds` satisfying the three base identities, in
/// order of genus, then degree, then a fixed order within each cell.
/// Fails with `BoundsTooLarge` once `node_budget` search nodes are spent.
pub fn enumerate_admissible(bounds: &Bounds, node_budget: u64) -> Result<Vec<FgtRecord>> {
    if bounds.n_max == 0 || bounds.m_max == 0 {
        return Err(Error::InvalidInput(
            "degree and end bounds must be at least 1".into(),
        ));
    }
    let used = AtomicU64::new(0);
    let exceeded = AtomicBool::new(false);
    let nodes = NodeCounter {
        used: &used,
        budget: node_budget,
        exceeded: &exceeded,
    };
    let cells: Vec<(u64, u64)> = (0..=bounds.g_max)
        .flat_map(|g| (1..=bounds.n_max).map(move |n| (g, n)))
        .collect();
    let parts = cells
        .par_iter()
        .map(|&(g, n)| enumerate_cell(g, n, bounds, &nodes))
        .collect::<Vec<_>>();
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// How one end over a target value is routed through the covering `h`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SheetAssignment {
    /// Position in the record's end list.
    pub end: usize,
    pub value: String,
    /// Id of the preimage under `h`.
    pub preimage: String,
    /// Local degree of the lift at the end.
    pub k: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisibilityFailure {
    pub value: String,
    /// `None` for points of the surface that are not ends.
    pub end: Option<usize>,
    pub beta: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstructionExit {
    /// Some `1 + β` over the target set is not divisible by 3: the lift has no
    /// continuous extension.
    NoC0Extension,
    /// The lift extends and omits more than three values, contradicting the
    /// bound for branched coverings.
    CardinalityContradiction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionReport {
    /// Omitted or auxiliary ids, sent to `0, 1, ∞` in this order.
    pub targets: Vec<String>,
    /// Passport of the covering `h` over the targets.
    pub covering_passport: Passport<Approx>,
    pub divisor: u64,
    pub divisibility_failures: Vec<DivisibilityFailure>,
    pub exit: ObstructionExit,
    pub assignments: Vec<SheetAssignment>,
    /// Sheet sums of the lift are all equal.
    pub balanced: bool,
    pub lifted: Option<FgtRecord>,
    pub lifted_check: Option<GeneralReport>,
    /// The lifted record satisfies every constraint; never expected.
    pub record_passes: bool,
}

/// Ends over one target value plus unramified non-end points over it.
struct TargetFiber {
    id: String,
    ends: Vec<usize>,
    extra_unramified: u64,
    /// Class of the lifted ends: omitted in the lift or attained.
    lifted_missed: bool,
}

fn lift_pipeline(r: &FgtRecord, fibers: Vec<TargetFiber>) -> Result<ObstructionReport> {
    let standard: [SpherePoint<Exact>; 3] = [
        SpherePoint::zero(),
        SpherePoint::from_i64(1),
        SpherePoint::Infinity,
    ];
    let h = TargetedPicard::construct(&standard)?;
    let points: Vec<SpherePoint<Approx>> = standard.iter().map(SpherePoint::to_approx).collect();
    let mut ends_over = Vec::new();
    for (t, f) in fibers.iter().enumerate() {
        for &e in &f.ends {
            ends_over.push(EndOverValue {
                value: points[t].clone(),
                beta: r.ends[e].beta,
            });
        }
    }
    let feasibility = passport_lift_feasibility(
        &h.composite_passport,
        &ends_over,
        SheetPolicy::ForceRamified,
    )?;
    let ramified_degree = 3;
    let mut failures = Vec::new();
    let mut k = 0;
    for f in &fibers {
        for &e in &f.ends {
            if !feasibility.ends[k].liftable {
                failures.push(DivisibilityFailure {
                    value: f.id.clone(),
                    end: Some(e),
                    beta: r.ends[e].beta,
                });
            }
            k += 1;
        }
        if f.extra_unramified > 0 {
            failures.push(DivisibilityFailure {
                value: f.id.clone(),
                end: None,
                beta: 0,
            });
        }
    }
    let targets: Vec<String> = fibers.iter().map(|f| f.id.clone()).collect();
    let mut report = ObstructionReport {
        targets,
        covering_passport: h.composite_passport.clone(),
        divisor: ramified_degree,
        divisibility_failures: failures,
        exit: ObstructionExit::NoC0Extension,
        assignments: Vec::new(),
        balanced: false,
        lifted: None,
        lifted_check: None,
        record_passes: false,
    };
    if feasibility.verdict == Feasibility::Infeasible || !report.divisibility_failures.is_empty() {
        return Ok(report);
    }

    // greedy: fill the unramified sheet up to ⌈n/4⌉, the rest goes through
    // the ramified preimage
    let n = r.degree;
    let quota = n.div_ceil(4);
    let mut lifted_ends = r.ends.clone();
    let mut missed = BTreeSet::new();
    let mut sheet_sums = Vec::new();
    for f in &fibers {
        let (unram, ram) = (format!("{}/1", f.id), format!("{}/3", f.id));
        let mut sums = (f.extra_unramified, 0u64);
        for &e in &f.ends {
            let local = 1 + r.ends[e].beta;
            let (preimage, k) = if sums.0 + local <= quota {
                sums.0 += local;
                (unram.clone(), local)
            } else {
                sums.1 += local / ramified_degree;
                (ram.clone(), local / ramified_degree)
            };
            lifted_ends[e].beta = k - 1;
            lifted_ends[e].class = if f.lifted_missed {
                EndClass::Missed(preimage.clone())
            } else {
                EndClass::Regular(Some(preimage.clone()))
            };
            report.assignments.push(SheetAssignment {
                end: e,
                value: f.id.clone(),
                preimage,
                k,
            });
        }
        if f.lifted_missed {
            missed.insert(unram);
            missed.insert(ram);
            sheet_sums.extend([sums.0, sums.1]);
        }
    }
    let degree = sheet_sums.iter().copied().max().unwrap_or(0).max(1);
    report.balanced = sheet_sums.iter().all(|&s| s == degree);
    let lifted = FgtRecord {
        genus: r.genus,
        degree,
        ends: lifted_ends,
        interior_beta: r.interior_beta,
        missed,
    };
    let check = check_general_covering(&lifted);
    report.record_passes =
        check.identities.verdict && check.bound_holds && check.omitted_at_most_three;
    report.exit = ObstructionExit::CardinalityContradiction;
    report.lifted = Some(lifted);
    report.lifted_check = Some(check);
    Ok(report)
}

/// Lifts a record omitting three values through the degree-4 covering
/// branched over them. Either some `1 + β` over the omitted values is not
/// divisible by 3, or the lift omits six values and violates the bound.
pub fn obstruct_three_missed(r: &FgtRecord) -> Result<ObstructionReport> {
    r.validate()?;
    if r.ell() != 3 {
        return Err(Error::PreconditionViolated(format!(
            "{} omitted values, expected 3",
            r.ell()
        )));
    }
    if base_verdicts(r) != [true; 3] {
        return Err(Error::PreconditionViolated(
            "base identities do not hold".into(),
        ));
    }
    let fibers = r
        .missed
        .iter()
        .map(|y| TargetFiber {
            id: y.clone(),
            ends: (0..r.ends.len())
                .filter(|&e| r.ends[e].class.missed_id() == Some(y))
                .collect(),
            extra_unramified: 0,
            lifted_missed: true,
        })
        .collect();
    lift_pipeline(r, fibers)
}

/// With two omitted values `a₁, a₂` and an attained value `w`, lifts through
/// the covering branched over `{a₁, a₂, w}`. Ends of class `regular:w` lie
/// over `w`; the remaining preimages of `w` are taken to be unramified
/// points of the surface.
pub fn no_extension_two_missed(r: &FgtRecord, w: &str) -> Result<ObstructionReport> {
    r.validate()?;
    if r.ell() != 2 {
        return Err(Error::PreconditionViolated(format!(
            "{} omitted values, expected 2",
            r.ell()
        )));
    }
    if w.is_empty() || r.missed.contains(w) {
        return Err(Error::InvalidInput(format!(
            "auxiliary value {w:?} must be a fresh id"
        )));
    }
    let mut fibers: Vec<TargetFiber> = r
        .missed
        .iter()
        .map(|y| TargetFiber {
            id: y.clone(),
            ends: (0..r.ends.len())
                .filter(|&e| r.ends[e].class.missed_id() == Some(y))
                .collect(),
            extra_unramified: 0,
            lifted_missed: true,
        })
        .collect();
    let over_w: Vec<usize> = (0..r.ends.len())
        .filter(|&e| r.ends[e].class == EndClass::Regular(Some(w.to_string())))
        .collect();
    let used: u64 = over_w.iter().map(|&e| 1 + r.ends[e].beta).sum();
    if used > r.degree {
        return Err(Error::InvalidRecord(format!(
            "ends over {w} account for {used} sheets, more than the degree {}",
            r.degree
        )));
    }
    fibers.push(TargetFiber {
        id: w.to_string(),
        ends: over_w,
        extra_unramified: r.degree - used,
        lifted_missed: false,
    });
    lift_pipeline(r, fibers)
}
