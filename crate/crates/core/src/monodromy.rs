//! Permutation monodromy of a rational map by numerical path lifting.
//!
//! Fibers are continued along paths in the target by Newton iteration with
//! adaptive bisection. Loops about finite punctures are circles in the
//! `y` chart; the loop about `∞` is a circle in the `v = 1/y` chart.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational_map::{Passport, RationalMap};
use crate::scalar::{Approx, Scalar};
use crate::sphere::{chordal_approx, ApproxPoint, SpherePoint, Tolerances};

const MAX_BISECTION_DEPTH: usize = 32;
const NEWTON_ITERATIONS: usize = 16;
/// A step is trusted only if every point moves less than this fraction of
/// its distance to the nearest other sheet.
const STEP_FRACTION: f64 = 0.25;

/// A permutation of `{0, …, n−1}`; `images[i]` is the sheet that sheet `i`
/// reaches.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Checks that `images` is a bijection.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidInput(format!(
                    "{images:?} is not a permutation"
                )));
            }
        }
        Ok(Permutation { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// First `self`, then `next`.
    pub fn then(&self, next: &Permutation) -> Permutation {
        Permutation {
            images: self.images.iter().map(|&i| next.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Cycles in 0-based labels, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.images[i];
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle lengths, descending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    /// Cycle notation on `{1, …, n}` including fixed points, e.g. `(1 2 3)(4)`.
    pub fn cycle_notation(&self) -> String {
        self.cycles()
            .iter()
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
                format!("({})", inner.join(" "))
            })
            .collect()
    }
}

impl Serialize for Permutation {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        let one_based: Vec<usize> = self.images.iter().map(|i| i + 1).collect();
        one_based.serialize(s)
    }
}

/// True iff the permutations generate a group acting transitively.
pub fn is_transitive(perms: &[&Permutation], n: usize) -> bool {
    if n == 0 {
        return true;
    }
    let mut reached = vec![false; n];
    let mut stack = vec![0];
    reached[0] = true;
    while let Some(i) = stack.pop() {
        for p in perms {
            for j in [p.apply(i), p.inverse().apply(i)] {
                if !reached[j] {
                    reached[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    reached.into_iter().all(|r| r)
}

/// Homogeneous equation `α·P(w) − β·Q(w) = 0` for `f(z) = y` in one domain
/// chart (`w = z` or `w = 1/z`) and one target chart.
struct ChartEquation {
    p: Vec<Complex64>,
    q: Vec<Complex64>,
}

fn horner(c: &[Complex64], w: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dv = dv * w + v;
        v = v * w + a;
    }
    (v, dv)
}

/// Target value as `(α, β)` with `y = β/α` and `max(|α|, |β|) = 1`.
fn target_weights(y: &ApproxPoint) -> (Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    match y {
        SpherePoint::Infinity => (Complex64::new(0.0, 0.0), one),
        SpherePoint::Finite(v) if v.norm() <= 1.0 => (one, *v),
        SpherePoint::Finite(v) => (v.inv(), one),
    }
}

/// The two domain charts of `f`.
struct Charts {
    near: ChartEquation,
    far: ChartEquation,
}

impl Charts {
    fn new(f: &RationalMap<Approx>) -> Self {
        let d = f.degree();
        let pad = |c: &[Complex64]| {
            let mut v = c.to_vec();
            v.resize(d + 1, Complex64::new(0.0, 0.0));
            v
        };
        let n = pad(f.num().coeffs());
        let q = pad(f.den().coeffs());
        let rev = |v: &[Complex64]| v.iter().rev().copied().collect::<Vec<_>>();
        Charts {
            far: ChartEquation {
                p: rev(&n),
                q: rev(&q),
            },
            near: ChartEquation { p: n, q },
        }
    }

    /// Newton's method for `f = y` from `z`. Returns the root and the size
    /// of the first correction, both as sphere points / chordal lengths.
    fn newton(&self, z: &ApproxPoint, y: &ApproxPoint) -> Option<(ApproxPoint, f64)> {
        let (chart, mut w, far) = match z {
            SpherePoint::Finite(z) if z.norm() <= 1.0 => (&self.near, *z, false),
            SpherePoint::Finite(z) => (&self.far, z.inv(), true),
            SpherePoint::Infinity => (&self.far, Complex64::new(0.0, 0.0), true),
        };
        let (alpha, beta) = target_weights(y);
        let back = |w: Complex64| -> ApproxPoint {
            if !far {
                SpherePoint::Finite(w)
            } else if w.norm() == 0.0 {
                SpherePoint::Infinity
            } else {
                SpherePoint::Finite(w.inv())
            }
        };
        let mut first = None;
        for _ in 0..NEWTON_ITERATIONS {
            let (p, dp) = horner(&chart.p, w);
            let (q, dq) = horner(&chart.q, w);
            let g = alpha * p - beta * q;
            let dg = alpha * dp - beta * dq;
            if g.norm() == 0.0 {
                let root = back(w);
                return Some((root.clone(), first.unwrap_or(0.0)));
            }
            if dg.norm() == 0.0 {
                return None;
            }
            let next = w - g / dg;
            if !(next.re.is_finite() && next.im.is_finite()) {
                return None;
            }
            let moved = chordal_approx(&back(w), &back(next));
            first.get_or_insert(moved);
            let step = (next - w).norm();
            w = next;
            if step <= 4.0 * f64::EPSILON * w.norm().max(1.0) {
                return Some((back(w), first.unwrap_or(0.0)));
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StepFailure {
    Diverged,
    Collision,
}

fn min_separation(points: &[ApproxPoint]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min(chordal_approx(a, b));
        }
    }
    best
}

struct Tracker<'a> {
    charts: Charts,
    tol: &'a Tolerances,
}

impl Tracker<'_> {
    fn step(
        &self,
        fiber: &[ApproxPoint],
        y: &ApproxPoint,
    ) -> std::result::Result<Vec<ApproxPoint>, StepFailure> {
        let mut next = Vec::with_capacity(fiber.len());
        for (i, z) in fiber.iter().enumerate() {
            let nearest = fiber
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, w)| chordal_approx(z, w))
                .fold(f64::INFINITY, f64::min);
            let limit = if nearest.is_finite() {
                STEP_FRACTION * nearest
            } else {
                0.5
            };
            let (root, first) = self.charts.newton(z, y).ok_or(StepFailure::Diverged)?;
            if first > limit || chordal_approx(z, &root) > limit {
                return Err(StepFailure::Diverged);
            }
            next.push(root);
        }
        if min_separation(&next) < self.tol.collision {
            return Err(StepFailure::Collision);
        }
        Ok(next)
    }

    fn advance(
        &self,
        fiber: Vec<ApproxPoint>,
        from: &ApproxPoint,
        to: &ApproxPoint,
        depth: usize,
    ) -> Result<Vec<ApproxPoint>> {
        match self.step(&fiber, to) {
            Ok(next) => Ok(next),
            Err(kind) => {
                if depth >= MAX_BISECTION_DEPTH {
                    return Err(match kind {
                        StepFailure::Collision => Error::TrackingCollision(to.display()),
                        StepFailure::Diverged => Error::PathThroughBranchValue(to.display()),
                    });
                }
                let mid = sphere_midpoint(from, to);
                let half = self.advance(fiber, from, &mid, depth + 1)?;
                self.advance(half, &mid, to, depth + 1)
            }
        }
    }
}

fn sphere_midpoint(a: &ApproxPoint, b: &ApproxPoint) -> ApproxPoint {
    let (u, v) = (a.to_unit_vector(), b.to_unit_vector());
    let m = [u[0] + v[0], u[1] + v[1], u[2] + v[2]];
    if m.iter().map(|x| x * x).sum::<f64>() < 1e-24 {
        // antipodal endpoints: any great circle works, take one through the equator
        return SpherePoint::from_unit_vector([-u[1], u[0], 0.0]);
    }
    SpherePoint::from_unit_vector(m)
}

/// Continues `start`, a fiber over `path[0]`, along `path`. Returns the
/// fiber over the last path point in the order of `start`.
pub fn track_fiber(
    f: &RationalMap<Approx>,
    path: &[ApproxPoint],
    start: &[ApproxPoint],
) -> Result<Vec<ApproxPoint>> {
    let Some(first) = path.first() else {
        return Ok(start.to_vec());
    };
    let tol = f.tolerances();
    for z in start {
        let v = f.evaluate(z);
        if chordal_approx(&v, first) > tol.cluster {
            return Err(Error::PreconditionViolated(format!(
                "{} maps to {}, not to the path start {}",
                z.display(),
                v.display(),
                first.display()
            )));
        }
    }
    let tracker = Tracker {
        charts: Charts::new(f),
        tol,
    };
    let mut fiber = tracker.advance(start.to_vec(), first, first, 0)?;
    for pair in path.windows(2) {
        fiber = tracker.advance(fiber, &pair[0], &pair[1], 0)?;
    }
    Ok(fiber)
}

/// A circle about `target` starting and ending at the point facing `base`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopSpec {
    pub base: ApproxPoint,
    pub target: ApproxPoint,
    /// Radius in the chart where `target` is finite (`v = 1/y` for ∞).
    pub radius: f64,
    pub samples: usize,
}

impl LoopSpec {
    /// Chart coordinate of the target and of a point in that chart.
    fn chart(&self, y: &ApproxPoint) -> Complex64 {
        match (&self.target, y) {
            (SpherePoint::Infinity, SpherePoint::Finite(y)) => y.inv(),
            (SpherePoint::Infinity, SpherePoint::Infinity) => Complex64::new(0.0, 0.0),
            (_, SpherePoint::Finite(y)) => *y,
            (_, SpherePoint::Infinity) => Complex64::new(f64::INFINITY, 0.0),
        }
    }

    fn unchart(&self, c: Complex64) -> ApproxPoint {
        match self.target {
            SpherePoint::Infinity if c.norm() == 0.0 => SpherePoint::Infinity,
            SpherePoint::Infinity => SpherePoint::Finite(c.inv()),
            _ => SpherePoint::Finite(c),
        }
    }

    /// Point of the circle where the loop starts and ends.
    pub fn start_point(&self) -> ApproxPoint {
        let center = self.chart(&self.target);
        let toward = self.chart(&self.base) - center;
        let dir = if toward.norm() > 0.0 && toward.norm().is_finite() {
            toward / toward.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.unchart(center + dir * self.radius)
    }

    /// `samples + 1` points, counterclockwise in the target's chart, first
    /// and last equal to `start_point`.
    pub fn path(&self) -> Result<Vec<ApproxPoint>> {
        if self.samples < 16 {
            return Err(Error::InvalidInput(format!(
                "a loop needs at least 16 samples, got {}",
                self.samples
            )));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "loop radius {} is not positive",
                self.radius
            )));
        }
        let center = self.chart(&self.target);
        let start = self.chart(&self.start_point()) - center;
        let theta0 = start.arg();
        Ok((0..=self.samples)
            .map(|k| {
                if k == self.samples {
                    return self.start_point();
                }
                let t = theta0 + TAU * k as f64 / self.samples as f64;
                self.unchart(center + Complex64::from_polar(self.radius, t))
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyOptions {
    /// Loop radius as a fraction of the distance to the nearest other
    /// special point.
    pub radius_factor: f64,
    pub samples: usize,
    /// Samples per straight piece of a connecting path.
    pub segment_samples: usize,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        MonodromyOptions {
            radius_factor: 0.2,
            samples: 64,
            segment_samples: 16,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PunctureMonodromy {
    pub puncture: ApproxPoint,
    pub loop_spec: LoopSpec,
    /// 1-based images.
    pub permutation: Permutation,
    pub cycles: String,
    pub cycle_type: Vec<usize>,
    pub local_degrees: Vec<usize>,
    /// The connecting path had to leave the straight segment.
    pub detoured: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonodromyRep {
    pub degree: usize,
    pub base: ApproxPoint,
    pub base_fiber: Vec<ApproxPoint>,
    /// In the sphere-relation order.
    pub punctures: Vec<PunctureMonodromy>,
    /// Product of the permutations in the listed order.
    pub product: Permutation,
    pub product_is_identity: bool,
    pub transitive: bool,
    /// Index of the image of `π₁` of the domain: the number of sheets.
    pub subgroup_index: usize,
}

impl MonodromyRep {
    pub fn permutation(&self, puncture: &ApproxPoint, tol: f64) -> Option<&Permutation> {
        self.punctures
            .iter()
            .find(|p| chordal_approx(&p.puncture, puncture) <= tol)
            .map(|p| &p.permutation)
    }
}

fn finite_punctures(punctures: &[ApproxPoint]) -> Vec<Complex64> {
    punctures
        .iter()
        .filter_map(|p| p.as_finite().copied())
        .collect()
}

/// Minimal angular gap between the directions from `b` to the points.
fn angular_spread(b: Complex64, pts: &[Complex64]) -> f64 {
    let mut angles: Vec<f64> = pts.iter().map(|p| (p - b).arg()).collect();
    if angles.len() < 2 {
        return PI;
    }
    angles.sort_by(f64::total_cmp);
    let mut gap = angles[0] + TAU - angles[angles.len() - 1];
    for w in angles.windows(2) {
        gap = gap.min(w[1] - w[0]);
    }
    gap
}

/// A deterministic base point with well separated directions to the finite
/// punctures, away from all of them.
pub fn default_base(punctures: &[ApproxPoint]) -> Complex64 {
    let pts = finite_punctures(punctures);
    let n = pts.len().max(1) as f64;
    let center = pts.iter().sum::<Complex64>() / n;
    let scale = pts.iter().map(|p| (p - center).norm()).fold(1.0, f64::max);
    let mut best = (
        f64::NEG_INFINITY,
        center + Complex64::new(0.5 * scale, 0.3 * scale),
    );
    for ring in [0.3, 0.5, 0.7] {
        for k in 0..24 {
            let b = center + Complex64::from_polar(ring * scale, 0.1 + TAU * k as f64 / 24.0);
            let nearest = pts
                .iter()
                .map(|p| (p - b).norm())
                .fold(f64::INFINITY, f64::min);
            let score = angular_spread(b, &pts).min(PI / 2.0) * nearest.min(scale) / scale;
            if score > best.0 {
                best = (score, b);
            }
        }
    }
    best.1
}

/// Straight segment from `a` to `c` in the `y` chart, with a detour around
/// every finite puncture it passes within `2r` of.
fn connecting_path(
    a: Complex64,
    c: Complex64,
    avoid: &[(Complex64, f64)],
    samples: usize,
) -> (Vec<ApproxPoint>, bool) {
    let dir = c - a;
    let len = dir.norm();
    let mut waypoints = vec![(0.0, a)];
    if len > 0.0 {
        let e = dir / len;
        let normal = e * Complex64::i();
        for &(p, r) in avoid {
            let rel = (p - a) * e.conj();
            if rel.re <= 0.0 || rel.re >= len || rel.im.abs() >= 2.0 * r {
                continue;
            }
            let side = if rel.im >= 0.0 { -1.0 } else { 1.0 };
            let offset = normal * (side * 2.5 * r);
            waypoints.push((rel.re - 2.5 * r, p - e * (2.5 * r) + offset));
            waypoints.push((rel.re + 2.5 * r, p + e * (2.5 * r) + offset));
        }
    }
    let detoured = waypoints.len() > 1;
    waypoints.sort_by(|x, y| x.0.total_cmp(&y.0));
    waypoints.push((len, c));
    let mut path = vec![SpherePoint::Finite(a)];
    for w in waypoints.windows(2) {
        let (p, q) = (w[0].1, w[1].1);
        for k in 1..=samples {
            path.push(SpherePoint::Finite(
                p + (q - p) * (k as f64 / samples as f64),
            ));
        }
    }
    (path, detoured)
}

/// Monodromy of `f` about each puncture, based at `base` (a default is
/// chosen when `None`). The punctures must include every branch value.
pub fn monodromy_rep(
    f: &RationalMap<Approx>,
    punctures: &[ApproxPoint],
    base: Option<Complex64>,
    options: &MonodromyOptions,
) -> Result<MonodromyRep> {
    let tol = *f.tolerances();
    for (i, a) in punctures.iter().enumerate() {
        if punctures[i + 1..]
            .iter()
            .any(|b| chordal_approx(a, b) <= tol.cluster)
        {
            return Err(Error::InvalidInput(format!(
                "puncture {} listed twice",
                a.display()
            )));
        }
    }
    for v in f.branch_values()? {
        if !punctures
            .iter()
            .any(|p| chordal_approx(p, &v) <= tol.cluster)
        {
            return Err(Error::PreconditionViolated(format!(
                "branch value {} is not a puncture",
                v.display()
            )));
        }
    }
    let b = base.unwrap_or_else(|| default_base(punctures));
    let base_point = SpherePoint::Finite(b);
    if punctures
        .iter()
        .any(|p| chordal_approx(p, &base_point) <= tol.cluster)
    {
        return Err(Error::PreconditionViolated(format!(
            "base {} is a puncture",
            base_point.display()
        )));
    }
    let degree = f.degree();
    let base_fiber: Vec<ApproxPoint> = f
        .fiber(&base_point)?
        .into_iter()
        .map(|p| p.location.approx())
        .collect();
    if base_fiber.len() != degree {
        return Err(Error::PreconditionViolated(format!(
            "base {} is not a regular value",
            base_point.display()
        )));
    }

    let finite = finite_punctures(punctures);
    let radius = |p: &ApproxPoint| -> f64 {
        let nearest = match p {
            SpherePoint::Finite(y) => finite
                .iter()
                .filter(|q| *q != y)
                .map(|q| (q - y).norm())
                .chain(std::iter::once((b - y).norm()))
                .fold(f64::INFINITY, f64::min),
            SpherePoint::Infinity => finite
                .iter()
                .filter(|q| q.norm() > 0.0)
                .map(|q| 1.0 / q.norm())
                .chain(std::iter::once(1.0 / b.norm().max(f64::MIN_POSITIVE)))
                .fold(f64::INFINITY, f64::min),
        };
        options.radius_factor * nearest
    };
    let avoid: Vec<(Complex64, f64)> = punctures
        .iter()
        .filter_map(|p| p.as_finite().map(|y| (*y, radius(p))))
        .collect();

    // the ray to ∞ bisects the widest angular gap seen from the base
    let ray_angle = {
        let mut angles: Vec<f64> = finite.iter().map(|p| (p - b).arg()).collect();
        angles.sort_by(f64::total_cmp);
        match angles.len() {
            0 => 0.0,
            1 => angles[0] + PI,
            _ => {
                let mut best = (
                    angles[0] + TAU - angles[angles.len() - 1],
                    angles[angles.len() - 1],
                );
                for w in angles.windows(2) {
                    if w[1] - w[0] > best.0 {
                        best = (w[1] - w[0], w[0]);
                    }
                }
                best.1 + best.0 / 2.0
            }
        }
    };
    let angle_of = |p: &ApproxPoint| match p {
        SpherePoint::Finite(y) => ((y - b).arg() - ray_angle).rem_euclid(TAU),
        SpherePoint::Infinity => 0.0,
    };
    let mut order: Vec<usize> = (0..punctures.len()).collect();
    order.sort_by(|&i, &j| angle_of(&punctures[i]).total_cmp(&angle_of(&punctures[j])));

    let results: Vec<Result<PunctureMonodromy>> = order
        .par_iter()
        .map(|&i| {
            let p = &punctures[i];
            let spec = LoopSpec {
                base: base_point.clone(),
                target: p.clone(),
                radius: radius(p),
                samples: options.samples,
            };
            let start = match p {
                SpherePoint::Finite(_) => spec.start_point(),
                SpherePoint::Infinity => {
                    // point of the ray at |y| = 1/r
                    let e = Complex64::from_polar(1.0, ray_angle);
                    let big = 1.0 / spec.radius;
                    let along = (b * e.conj()).re;
                    let t = -along + (along * along - b.norm_sqr() + big * big).sqrt();
                    SpherePoint::Finite(b + e * t)
                }
            };
            let start_c = *start.as_finite().expect("loop starts are finite");
            let others: Vec<(Complex64, f64)> = avoid
                .iter()
                .filter(|(y, _)| Some(y) != p.as_finite())
                .copied()
                .collect();
            let (out, detoured) = connecting_path(b, start_c, &others, options.segment_samples);
            let back: Vec<ApproxPoint> = out.iter().rev().cloned().collect();
            let mut circle = spec.path()?;
            if let SpherePoint::Infinity = p {
                // the circle is traced from the ray's end point
                let v0 = start_c.inv();
                circle = (0..=spec.samples)
                    .map(|k| {
                        let t = v0.arg() + TAU * k as f64 / spec.samples as f64;
                        let v = Complex64::from_polar(spec.radius, t);
                        if k == spec.samples {
                            start.clone()
                        } else {
                            SpherePoint::Finite(v.inv())
                        }
                    })
                    .collect();
            }
            let mut path = out;
            path.extend(circle.into_iter().skip(1));
            path.extend(back.into_iter().skip(1));
            let end = track_fiber(f, &path, &base_fiber)?;
            let images = end
                .iter()
                .map(|z| {
                    base_fiber
                        .iter()
                        .enumerate()
                        .map(|(k, w)| (chordal_approx(z, w), k))
                        .min_by(|x, y| x.0.total_cmp(&y.0))
                        .filter(|(d, _)| *d <= tol.cluster)
                        .map(|(_, k)| k)
                        .ok_or_else(|| Error::TrackingCollision(z.display()))
                })
                .collect::<Result<Vec<_>>>()?;
            let permutation = Permutation::new(images)
                .map_err(|_| Error::TrackingCollision(format!("loop about {}", p.display())))?;
            let local_degrees: Vec<usize> = {
                let mut d: Vec<usize> = f.fiber(p)?.iter().map(|q| q.local_degree).collect();
                d.sort_unstable_by(|a, b| b.cmp(a));
                d
            };
            let cycle_type = permutation.cycle_type();
            if cycle_type != local_degrees {
                return Err(Error::CycleTypeMismatch {
                    puncture: p.display(),
                    expected: local_degrees,
                    found: cycle_type,
                });
            }
            Ok(PunctureMonodromy {
                puncture: p.clone(),
                loop_spec: spec,
                cycles: permutation.cycle_notation(),
                permutation,
                cycle_type,
                local_degrees,
                detoured,
            })
        })
        .collect();
    let punctures_out = results.into_iter().collect::<Result<Vec<_>>>()?;
    let product = punctures_out
        .iter()
        .fold(Permutation::identity(degree), |acc, p| {
            acc.then(&p.permutation)
        });
    let perms: Vec<&Permutation> = punctures_out.iter().map(|p| &p.permutation).collect();
    Ok(MonodromyRep {
        degree,
        base: base_point,
        base_fiber,
        transitive: is_transitive(&perms, degree),
        product_is_identity: product.is_identity(),
        product,
        punctures: punctures_out,
        subgroup_index: degree,
    })
}

/// Every value has an unramified preimage.
pub fn surjectivity_criterion<S: Scalar>(passport: &Passport<S>) -> bool {
    passport
        .entries
        .iter()
        .all(|e| e.local_degrees.contains(&1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub trials: usize,
    pub degree: usize,
    pub min_fiber: usize,
    pub max_fiber: usize,
    pub all_simple: bool,
    /// Every sampled fiber has `degree` simple points.
    pub regular: bool,
}

/// Samples `trials` values uniformly on the sphere, away from `excluded`,
/// and checks that each fiber has `deg f` simple points.
pub fn regularity_probe<S: Scalar>(
    f: &RationalMap<S>,
    excluded: &[SpherePoint<S>],
    trials: usize,
    seed: u64,
) -> Result<ProbeReport> {
    let tol = *f.tolerances();
    let excluded: Vec<ApproxPoint> = excluded.iter().map(SpherePoint::to_approx).collect();
    for v in f.branch_values()? {
        if !excluded
            .iter()
            .any(|p| chordal_approx(p, &v) <= tol.cluster)
        {
            return Err(Error::PreconditionViolated(format!(
                "branch value {} is not excluded",
                v.display()
            )));
        }
    }
    let approx = f.to_approx();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ProbeReport {
        trials,
        degree: f.degree(),
        min_fiber: usize::MAX,
        max_fiber: 0,
        all_simple: true,
        regular: true,
    };
    let mut done = 0;
    while done < trials {
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..TAU);
        let s = (1.0 - z * z).sqrt();
        let y = SpherePoint::from_unit_vector([s * phi.cos(), s * phi.sin(), z]);
        if excluded.iter().any(|p| chordal_approx(p, &y) < 1e-3) {
            continue;
        }
        done += 1;
        let fiber = approx.fiber(&y)?;
        report.min_fiber = report.min_fiber.min(fiber.len());
        report.max_fiber = report.max_fiber.max(fiber.len());
        report.all_simple &= fiber.iter().all(|p| p.local_degree == 1);
    }
    if trials == 0 {
        report.min_fiber = 0;
    }
    report.regular =
        report.all_simple && report.min_fiber == report.degree && report.max_fiber == report.degree;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn c(re: f64, im: f64) -> ApproxPoint {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    fn z_pow(n: u32) -> RationalMap<Approx> {
        RationalMap::polynomial(Polynomial::z().pow(n)).unwrap()
    }

    #[test]
    fn permutation_basics() {
        let p = Permutation::new(vec![1, 2, 0, 3]).unwrap();
        assert_eq!(p.cycle_type(), vec![3, 1]);
        assert_eq!(p.cycle_notation(), "(1 2 3)(4)");
        assert!(p.then(&p.inverse()).is_identity());
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert_eq!(serde_json::to_string(&p).unwrap(), "[2,3,1,4]");
    }

    #[test]
    fn constant_path_keeps_fiber() {
        let f = z_pow(2);
        let fiber = vec![c(1.0, 0.0), c(-1.0, 0.0)];
        let out = track_fiber(&f, &[c(1.0, 0.0), c(1.0, 0.0)], &fiber).unwrap();
        assert!(chordal_approx(&out[0], &fiber[0]) < 1e-12);
        assert!(chordal_approx(&out[1], &fiber[1]) < 1e-12);
    }

    #[test]
    fn square_root_swaps_sheets() {
        let f = z_pow(2);
        let path: Vec<ApproxPoint> = (0..=64)
            .map(|k| SpherePoint::Finite(Complex64::from_polar(1.0, TAU * k as f64 / 64.0)))
            .collect();
        let out = track_fiber(&f, &path, &[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert!(chordal_approx(&out[0], &c(-1.0, 0.0)) < 1e-10);
        assert!(chordal_approx(&out[1], &c(1.0, 0.0)) < 1e-10);
    }

    #[test]
    fn tracking_rejects_wrong_start() {
        let f = z_pow(2);
        assert!(matches!(
            track_fiber(&f, &[c(1.0, 0.0)], &[c(2.0, 0.0)]),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn path_through_branch_value_fails() {
        let f = z_pow(2);
        let path = vec![c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)];
        let err = track_fiber(&f, &path, &[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap_err();
        assert!(matches!(
            err,
            Error::PathThroughBranchValue(_) | Error::TrackingCollision(_)
        ));
    }

    #[test]
    fn cube_map_monodromy() {
        let f = z_pow(3);
        let rep = monodromy_rep(
            &f,
            &[c(0.0, 0.0), SpherePoint::Infinity],
            None,
            &MonodromyOptions::default(),
        )
        .unwrap();
        let p0 = rep.permutation(&c(0.0, 0.0), 1e-9).unwrap();
        let pinf = rep.permutation(&SpherePoint::Infinity, 1e-9).unwrap();
        assert_eq!(p0.cycle_type(), vec![3]);
        assert_eq!(pinf, &p0.inverse());
        assert!(rep.product_is_identity && rep.transitive);
    }

    #[test]
    fn missing_branch_value_rejected() {
        let f = z_pow(2);
        assert!(matches!(
            monodromy_rep(&f, &[c(0.0, 0.0)], None, &MonodromyOptions::default()),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn loop_spec_starts_facing_base() {
        let spec = LoopSpec {
            base: c(2.0, 0.0),
            target: c(0.0, 0.0),
            radius: 0.5,
            samples: 16,
        };
        assert_eq!(spec.start_point(), c(0.5, 0.0));
        let path = spec.path().unwrap();
        assert_eq!(path.len(), 17);
        assert_eq!(path[0], path[16]);
        assert!(LoopSpec { samples: 8, ..spec }.path().is_err());
    }

    #[test]
    fn surjectivity_examples() {
        let sq = RationalMap::<Approx>::polynomial(Polynomial::z().pow(2)).unwrap();
        let p = sq
            .passport_over(&[c(0.0, 0.0), SpherePoint::Infinity])
            .unwrap();
        assert!(!surjectivity_criterion(&p));
        let p = sq.passport_over(&[c(1.0, 0.0)]).unwrap();
        assert!(surjectivity_criterion(&p));
    }

    #[test]
    fn probe_identity_and_square() {
        let id = RationalMap::<Approx>::identity();
        let r = regularity_probe(&id, &[], 50, 1).unwrap();
        assert!(r.regular && r.min_fiber == 1);
        let sq = z_pow(2);
        let r = regularity_probe(&sq, &[c(0.0, 0.0), SpherePoint::Infinity], 50, 1).unwrap();
        assert!(r.regular && r.max_fiber == 2);
        assert!(regularity_probe(&sq, &[c(0.0, 0.0)], 5, 1).is_err());
    }
}
