//! Polynomial root finding for both backends.
//!
//! The approximate backend runs Aberth–Ehrlich iteration and then groups the
//! approximations into clusters. A group is accepted as one multiple root
//! when its members lie within `Tolerances::cluster` of each other, or when
//! the Taylor coefficients of the polynomial at the group centroid vanish to
//! working precision up to order `m − 2`. Cluster centres are polished by
//! Newton's method on the `(m − 1)`-th derivative, which has a simple root
//! there.
//!
//! The exact backend computes multiplicities symbolically (square-free
//! decomposition over ℚ(i)), recognises Gaussian-rational roots by rounding
//! and exact verification, and returns the remaining roots as numerically
//! certified enclosures.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::scalar::{snap_exact, Approx, Exact, Scalar};
use crate::sphere::{chordal_approx, SpherePoint, Tolerances};
use crate::MAX_DEGREE;

/// A finite root: either a value of the backend's field or, in the exact
/// backend, a disc known to contain exactly one root of an irreducible-over-
/// the-snapping factor.
#[derive(Debug, Clone, PartialEq)]
pub enum Root<S> {
    Point(S),
    Enclosure { center: Complex64, radius: f64 },
}

impl<S: Scalar> Root<S> {
    pub fn approx(&self) -> Complex64 {
        match self {
            Root::Point(s) => s.to_complex(),
            Root::Enclosure { center, .. } => *center,
        }
    }

    pub fn as_point(&self) -> Option<&S> {
        match self {
            Root::Point(s) => Some(s),
            Root::Enclosure { .. } => None,
        }
    }
}

/// Relative size of Taylor coefficients treated as zero when confirming a
/// multiple root.
const MULTIPLICITY_REL: f64 = 1e-10;
const ABERTH_MAX_ITER: usize = 600;

fn check_degree(n: usize) -> Result<()> {
    if n > MAX_DEGREE {
        Err(Error::DegreeTooLarge(n))
    } else {
        Ok(())
    }
}

/// Simultaneous approximation of all roots of `coeffs` (ascending,
/// nonzero leading and constant coefficients).
pub fn aberth(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    if n == 1 {
        return vec![-monic[0]];
    }
    let radius = {
        let r = monic[0].norm().powf(1.0 / n as f64);
        if r.is_finite() && r > 0.0 {
            r
        } else {
            1.0
        }
    };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    for _ in 0..ABERTH_MAX_ITER {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (pv, dv) = eval_with_derivative(&monic, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dv;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let mut step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                step = Complex64::new(1e-3 * (1.0 + z[i].norm()), 0.0);
            }
            z[i] -= step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step <= 4.0 * f64::EPSILON {
            break;
        }
    }
    z
}

fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

fn eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// Taylor coefficients of the polynomial at `c`: `a_j = p^{(j)}(c) / j!`.
fn taylor_at(coeffs: &[Complex64], c: Complex64) -> Vec<Complex64> {
    let mut a = coeffs.to_vec();
    let n = a.len();
    for k in 0..n {
        for j in (k..n - 1).rev() {
            let next = a[j + 1];
            a[j] += c * next;
        }
    }
    a
}

/// Backward-error scale of each Taylor coefficient at `c`.
fn taylor_scale(coeffs: &[Complex64], c: Complex64) -> Vec<f64> {
    let abs: Vec<Complex64> = coeffs
        .iter()
        .map(|x| Complex64::new(x.norm(), 0.0))
        .collect();
    taylor_at(&abs, Complex64::new(c.norm(), 0.0))
        .into_iter()
        .map(|x| x.re)
        .collect()
}

fn is_multiple_root(coeffs: &[Complex64], c: Complex64, m: usize) -> bool {
    let a = taylor_at(coeffs, c);
    let s = taylor_scale(coeffs, c);
    (0..m.saturating_sub(1)).all(|j| a[j].norm() <= MULTIPLICITY_REL * s[j])
        && a[m].norm() > MULTIPLICITY_REL * s[m]
}

fn derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

fn newton_polish(coeffs: &[Complex64], start: Complex64, max_move: f64) -> Complex64 {
    let mut z = start;
    let mut best = (eval(coeffs, z).norm(), z);
    for _ in 0..20 {
        let (p, dp) = eval_with_derivative(coeffs, z);
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        if !(next.re.is_finite() && next.im.is_finite()) || (next - start).norm() > max_move {
            break;
        }
        let r = eval(coeffs, next).norm();
        if r < best.0 {
            best = (r, next);
        }
        if (next - z).norm() <= 2.0 * f64::EPSILON * next.norm() {
            break;
        }
        z = next;
    }
    best.1
}

/// Relative residual `|p(z)| / Σ |p_k| |z|^k`.
pub fn relative_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let scale = coeffs
        .iter()
        .rev()
        .fold(0.0, |acc, c| acc * z.norm() + c.norm());
    if scale == 0.0 {
        return 0.0;
    }
    eval(coeffs, z).norm() / scale
}

struct Cluster {
    center: Complex64,
    multiplicity: usize,
}

fn cluster_roots(coeffs: &[Complex64], approx: &[Complex64], tol: &Tolerances) -> Vec<Cluster> {
    let mut assigned = vec![false; approx.len()];
    let mut clusters = Vec::new();
    for i in 0..approx.len() {
        if assigned[i] {
            continue;
        }
        let mut near: Vec<usize> = (0..approx.len())
            .filter(|&j| j != i && !assigned[j])
            .filter(|&j| (approx[j] - approx[i]).norm() <= 0.1 * approx[i].norm().max(1.0))
            .collect();
        near.sort_by(|&a, &b| {
            (approx[a] - approx[i])
                .norm()
                .total_cmp(&(approx[b] - approx[i]).norm())
        });
        let mut chosen = vec![i];
        for m in (2..=near.len() + 1).rev() {
            let group: Vec<usize> = std::iter::once(i)
                .chain(near[..m - 1].iter().copied())
                .collect();
            let center = group.iter().map(|&k| approx[k]).sum::<Complex64>() / m as f64;
            let tight = group.iter().all(|&a| {
                group.iter().all(|&b| {
                    chordal_approx(
                        &SpherePoint::Finite(approx[a]),
                        &SpherePoint::Finite(approx[b]),
                    ) <= tol.cluster
                })
            });
            if tight || is_multiple_root(coeffs, center, m) {
                chosen = group;
                break;
            }
        }
        for &k in &chosen {
            assigned[k] = true;
        }
        let m = chosen.len();
        let centroid = chosen.iter().map(|&k| approx[k]).sum::<Complex64>() / m as f64;
        let spread = chosen
            .iter()
            .map(|&k| (approx[k] - centroid).norm())
            .fold(0.0, f64::max);
        let center = if m == 1 {
            newton_polish(coeffs, centroid, 0.1 * centroid.norm().max(1.0))
        } else {
            let mut d = coeffs.to_vec();
            for _ in 0..m - 1 {
                d = derivative(&d);
            }
            let allowed = (4.0 * spread).max(64.0 * f64::EPSILON * centroid.norm().max(1.0));
            let polished = newton_polish(&d, centroid, allowed);
            // near a multiple root both residuals sit at rounding level, so
            // comparing them says nothing; the derivative root is the better estimate
            if relative_residual(coeffs, polished) <= tol.res {
                polished
            } else {
                centroid
            }
        };
        clusters.push(Cluster {
            center,
            multiplicity: m,
        });
    }
    clusters
}

/// Roots of a nonzero approximate polynomial with multiplicities.
pub fn approx_roots(
    p: &Polynomial<Approx>,
    tol: &Tolerances,
) -> Result<Vec<(Root<Approx>, usize)>> {
    let n = p.degree().ok_or_else(|| {
        Error::RootFindingFailure("the zero polynomial has every point as a root".into())
    })?;
    check_degree(n)?;
    let coeffs = p.coeffs();
    let zeros = coeffs.iter().take_while(|c| Scalar::is_zero(*c)).count();
    let reduced = &coeffs[zeros..];
    let approx = aberth(reduced);
    let mut clusters = cluster_roots(reduced, &approx, tol);
    for c in &clusters {
        let r = relative_residual(reduced, c.center);
        if r.is_nan() || r > tol.res {
            return Err(Error::RootFindingFailure(format!(
                "residual {r:.3e} at {} exceeds {:.1e}",
                c.center, tol.res
            )));
        }
    }
    if zeros > 0 {
        let origin = SpherePoint::Finite(Complex64::new(0.0, 0.0));
        match clusters
            .iter_mut()
            .find(|c| chordal_approx(&SpherePoint::Finite(c.center), &origin) <= tol.cluster)
        {
            Some(c) => {
                c.center = Complex64::new(0.0, 0.0);
                c.multiplicity += zeros;
            }
            None => clusters.push(Cluster {
                center: Complex64::new(0.0, 0.0),
                multiplicity: zeros,
            }),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|c| (Root::Point(c.center), c.multiplicity))
        .collect())
}

/// Roots of a nonzero Gaussian-rational polynomial with exact
/// multiplicities.
pub fn exact_roots(p: &Polynomial<Exact>, tol: &Tolerances) -> Result<Vec<(Root<Exact>, usize)>> {
    let n = p.degree().ok_or_else(|| {
        Error::RootFindingFailure("the zero polynomial has every point as a root".into())
    })?;
    check_degree(n)?;
    let mut out = Vec::new();
    let mut enclosures: Vec<(Complex64, f64)> = Vec::new();
    for (factor, multiplicity) in p.square_free_decomposition() {
        let mut rest = factor.clone();
        let numeric = simple_roots(&factor.to_approx());
        let mut unresolved = Vec::new();
        for z in numeric {
            match snap_exact(z) {
                Some(r) if rest.eval(&r).is_zero() => {
                    rest = rest.div_rem(&Polynomial::linear_root(r.clone())).0;
                    out.push((Root::Point(r), multiplicity));
                }
                _ => unresolved.push(z),
            }
        }
        if unresolved.len() != rest.degree().unwrap_or(0) {
            return Err(Error::RootFindingFailure(format!(
                "{} unresolved approximations for a factor of degree {}",
                unresolved.len(),
                rest.degree().unwrap_or(0)
            )));
        }
        let rest_c: Vec<Complex64> = rest.coeffs().iter().map(Scalar::to_complex).collect();
        let deg = unresolved.len() as f64;
        for z in unresolved {
            let center = newton_polish(&rest_c, z, 0.1 * z.norm().max(1.0));
            let (pv, dv) = eval_with_derivative(&rest_c, center);
            // Newton inclusion: a root lies within n·|p/p'| of the centre.
            let radius =
                (deg * pv.norm() / dv.norm()).max(8.0 * f64::EPSILON * center.norm().max(1.0));
            if !radius.is_finite() || relative_residual(&rest_c, center) > tol.res {
                return Err(Error::RootFindingFailure(format!(
                    "could not certify a root near {center}"
                )));
            }
            enclosures.push((center, radius));
            out.push((Root::Enclosure { center, radius }, multiplicity));
        }
    }
    for (i, (ci, ri)) in enclosures.iter().enumerate() {
        for (cj, rj) in &enclosures[i + 1..] {
            if (ci - cj).norm() <= ri + rj {
                return Err(Error::RootFindingFailure(format!(
                    "root enclosures around {ci} and {cj} overlap"
                )));
            }
        }
    }
    Ok(out)
}

/// Approximations of the roots of a square-free polynomial, polished one
/// by one, without any merging.
fn simple_roots(p: &Polynomial<Approx>) -> Vec<Complex64> {
    let coeffs = p.coeffs();
    let zeros = coeffs.iter().take_while(|c| Scalar::is_zero(*c)).count();
    let reduced = &coeffs[zeros..];
    let mut out: Vec<Complex64> = aberth(reduced)
        .into_iter()
        .map(|z| newton_polish(reduced, z, 0.1 * z.norm().max(1.0)))
        .collect();
    out.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), zeros));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_roots(roots: &[Complex64]) -> Polynomial<Approx> {
        roots.iter().fold(Polynomial::one(), |acc, r| {
            &acc * &Polynomial::linear_root(*r)
        })
    }

    fn sorted(mut v: Vec<(Root<Approx>, usize)>) -> Vec<(Complex64, usize)> {
        let mut out: Vec<_> = v.drain(..).map(|(r, m)| (r.approx(), m)).collect();
        out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        out
    }

    #[test]
    fn simple_roots_are_found() {
        let roots = [c(1.0, 0.0), c(-2.0, 0.5), c(0.0, 3.0)];
        let found = sorted(approx_roots(&from_roots(&roots), &Tolerances::default()).unwrap());
        assert_eq!(found.len(), 3);
        assert!((found[0].0 - roots[1]).norm() < 1e-12);
        assert!(found.iter().all(|&(_, m)| m == 1));
    }

    #[test]
    fn triple_root_is_merged_and_accurate() {
        // (z - x)^3 (z + 3x) for an irrational complex x
        let x = c(0.7937005259840998, 0.31);
        let p = from_roots(&[x, x, x, -3.0 * x]);
        let found = sorted(approx_roots(&p, &Tolerances::default()).unwrap());
        assert_eq!(found.len(), 2);
        assert_eq!(found[1].1, 3);
        assert!(
            (found[1].0 - x).norm() < 1e-11,
            "{}",
            (found[1].0 - x).norm()
        );
        assert!((found[0].0 + 3.0 * x).norm() < 1e-12);
    }

    #[test]
    fn zero_roots_are_counted() {
        let p = Polynomial::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]);
        let found = sorted(approx_roots(&p, &Tolerances::default()).unwrap());
        assert_eq!(found, vec![(c(0.0, 0.0), 2), (c(1.0, 0.0), 1)]);
    }

    #[test]
    fn close_but_distinct_roots_stay_apart() {
        let p = from_roots(&[c(1.0, 0.0), c(1.001, 0.0), c(-1.0, 0.0)]);
        let found = approx_roots(&p, &Tolerances::default()).unwrap();
        assert_eq!(found.len(), 3);
    }

    #[test]
    fn exact_roots_mix_points_and_enclosures() {
        let q = |n: i64| Exact::from_i64(n);
        // (z - 1)^3 (z + 3) (z^2 - 2)
        let p = &(&Polynomial::linear_root(q(1)).pow(3) * &Polynomial::linear_root(q(-3)))
            * &Polynomial::new(vec![q(-2), q(0), q(1)]);
        let found = exact_roots(&p, &Tolerances::default()).unwrap();
        let points: Vec<_> = found
            .iter()
            .filter_map(|(r, m)| r.as_point().map(|s| (s.clone(), *m)))
            .collect();
        assert!(points.contains(&(q(1), 3)));
        assert!(points.contains(&(q(-3), 1)));
        let encl: Vec<_> = found
            .iter()
            .filter(|(r, _)| matches!(r, Root::Enclosure { .. }))
            .collect();
        assert_eq!(encl.len(), 2);
        for (r, m) in encl {
            assert_eq!(*m, 1);
            assert!((r.approx().norm() - 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn degree_cap_is_enforced() {
        let p = Polynomial::new(vec![c(1.0, 0.0); 70]);
        assert_eq!(
            approx_roots(&p, &Tolerances::default()),
            Err(Error::DegreeTooLarge(69))
        );
    }
}
