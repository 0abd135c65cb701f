//! Choice of the half-space and projection to a 1D integer stepset.
//!
//! The inventory `S` is minimized over the open positive octant. The
//! logarithm of the minimizer gives the direction `v` of a half-space
//! `{p : v·p >= 0}` containing the orthant whose walks share the orthant
//! walks' exponential growth. `v` is rationalized to an integer vector
//! `(p, q, r)` and each 3D step `s` becomes the 1D value `(p, q, r)·s`.

use std::cmp::Ordering;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stepset::{Step3, WeightedStepSet3};

/// Threshold on `|log c|` below which a minimizer coordinate counts as 1.
pub const UNIT_LOG_EPS: f64 = 1e-8;

pub const DEFAULT_MINIMIZE_TOL: f64 = 1e-12;

pub const DEFAULT_MAX_DEN: u32 = 8;

const NEWTON_BUDGET: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Minimizer {
    pub point: [f64; 3],
    pub s_min: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
}

/// Minimizes the inventory by damped Newton iteration in log-coordinates.
///
/// With `theta = log(x, y, z)` the objective `sum w * exp(s·theta)` is strictly
/// convex whenever the steps positively span Z^3, so the iteration from
/// `theta = 0` converges to the unique minimizer. Stops once the Euclidean
/// norm of the gradient in the original coordinates is at most `tol * s_min`.
pub fn minimize_inventory(w: &WeightedStepSet3, tol: f64) -> Result<Minimizer> {
    let entries: Vec<(Vector3<f64>, f64)> = w
        .entries()
        .iter()
        .map(|(s, wt)| {
            (
                Vector3::new(s.dx as f64, s.dy as f64, s.dz as f64),
                *wt as f64,
            )
        })
        .collect();
    let objective = |theta: &Vector3<f64>| -> f64 {
        entries.iter().map(|(s, wt)| wt * s.dot(theta).exp()).sum()
    };

    let mut theta = Vector3::zeros();
    let mut last_norm = f64::INFINITY;
    for iter in 0..NEWTON_BUDGET {
        let mut f = 0.0;
        let mut grad = Vector3::zeros();
        let mut hess = Matrix3::zeros();
        for (s, wt) in &entries {
            let t = wt * s.dot(&theta).exp();
            f += t;
            grad += s * t;
            hess += s * s.transpose() * t;
        }
        let point = theta.map(f64::exp);
        // d/dx S = (d/dtheta_x f) / x
        let norm = grad.component_div(&point).norm();
        last_norm = norm;
        if norm <= tol * f {
            return Ok(Minimizer {
                point: [point.x, point.y, point.z],
                s_min: f,
                gradient_norm: norm,
                iterations: iter,
            });
        }
        let dir = match hess.lu().solve(&(-grad)) {
            Some(d) => d,
            None => -grad,
        };
        let slope = grad.dot(&dir);
        let mut step = 1.0;
        let mut next = theta + dir;
        let mut halvings = 0;
        // Once the predicted decrease is below rounding in f, the Armijo
        // test is meaningless and the full Newton step is taken.
        let resolvable = -slope > 1e-13 * f;
        let sufficient = |next: &Vector3<f64>, step: f64| {
            matches!(
                objective(next).partial_cmp(&(f + 1e-4 * step * slope)),
                Some(Ordering::Less | Ordering::Equal)
            )
        };
        while resolvable && !sufficient(&next, step) && halvings < 60 {
            step *= 0.5;
            next = theta + dir * step;
            halvings += 1;
        }
        if next == theta {
            break;
        }
        theta = next;
    }
    Err(Error::NoConvergence {
        what: "inventory minimization",
        iterations: NEWTON_BUDGET,
        residual: last_norm,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionBranch {
    /// No minimizer coordinate equals 1.
    Generic,
    /// Some, but not all, minimizer coordinates equal 1; the projection
    /// ignores those axes.
    UnitZ,
    /// The minimizer is (1,1,1); any half-space containing the orthant has the
    /// right growth and (1,1,1) is used.
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionVector {
    components: [f64; 3],
    branch: ProjectionBranch,
    /// Axis whose logarithm normalizes the others.
    reference_axis: Option<usize>,
}

impl ProjectionVector {
    /// A vector given directly; components must be finite, nonnegative and
    /// not all zero.
    pub fn from_components(components: [f64; 3]) -> Result<Self> {
        if components.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::OrthantNotContained(components));
        }
        if components.iter().all(|c| *c == 0.0) {
            return Err(Error::Degenerate("zero"));
        }
        let branch = if components.contains(&0.0) {
            ProjectionBranch::UnitZ
        } else {
            ProjectionBranch::Generic
        };
        Ok(ProjectionVector {
            components,
            branch,
            reference_axis: None,
        })
    }

    pub fn components(&self) -> [f64; 3] {
        self.components
    }

    pub fn branch(&self) -> ProjectionBranch {
        self.branch
    }

    pub fn reference_axis(&self) -> Option<usize> {
        self.reference_axis
    }
}

/// Derives the half-space normal from the minimizer.
///
/// The axis with the largest `|log|` is the reference and the vector is
/// `log(minimizer) / log(reference)`, reported in the original axis order.
/// Coordinates within `eps` of 1 in log scale contribute 0.
pub fn projection_vector(min: &Minimizer, eps: f64) -> Result<ProjectionVector> {
    let logs = min.point.map(f64::ln);
    if logs.iter().all(|l| l.abs() <= eps) {
        return Ok(ProjectionVector {
            components: [1.0; 3],
            branch: ProjectionBranch::Trivial,
            reference_axis: None,
        });
    }
    let reference = (0..3)
        .max_by(|&a, &b| logs[a].abs().total_cmp(&logs[b].abs()))
        .expect("three axes");
    let mut components = [0.0; 3];
    let mut any_unit = false;
    for k in 0..3 {
        if logs[k].abs() <= eps {
            any_unit = true;
        } else {
            components[k] = logs[k] / logs[reference];
        }
    }
    if components.iter().any(|c| *c < 0.0) {
        return Err(Error::OrthantNotContained(components));
    }
    Ok(ProjectionVector {
        components,
        branch: if any_unit {
            ProjectionBranch::UnitZ
        } else {
            ProjectionBranch::Generic
        },
        reference_axis: Some(reference),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegerProjection {
    pub coefficients: [i64; 3],
    pub denominator: u32,
    /// Largest `|v_k / v_min - n_k / d|` after scaling the smallest nonzero
    /// component of `v` to 1.
    pub max_abs_error: f64,
}

impl IntegerProjection {
    pub fn project(&self, s: &Step3) -> i64 {
        s.dot(self.coefficients)
    }
}

/// Best rational approximation of `v` with a shared denominator `d <= max_den`.
///
/// `v` is first scaled so its smallest nonzero component is 1. Every
/// denominator is tried and the one with the smallest maximum absolute error
/// wins, ties going to the smaller denominator. The numerators are divided by
/// their gcd.
pub fn rationalize(v: &ProjectionVector, max_den: u32) -> IntegerProjection {
    let comps = v.components();
    let smallest = comps
        .iter()
        .copied()
        .filter(|c| *c > 0.0)
        .fold(f64::INFINITY, f64::min);
    let scaled = comps.map(|c| c / smallest);

    let mut best: Option<([i64; 3], u32, f64)> = None;
    for d in 1..=max_den.max(1) {
        let df = d as f64;
        let nums = scaled.map(|c| (c * df).round() as i64);
        if nums.iter().all(|n| *n == 0) {
            continue;
        }
        let err = scaled
            .iter()
            .zip(nums)
            .map(|(c, n)| (c - n as f64 / df).abs())
            .fold(0.0, f64::max);
        if best.is_none_or(|(_, _, e)| err < e - 1e-12) {
            best = Some((nums, d, err));
        }
    }
    let (nums, d, err) = best.expect("d = 1 gives a nonzero numerator");
    let g = nums.iter().fold(0i64, |acc, n| gcd(acc, *n));
    IntegerProjection {
        coefficients: nums.map(|n| n / g),
        denominator: d,
        max_abs_error: err,
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// One letter of the 1D alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub id: usize,
    pub value: i64,
    pub weight: u64,
    /// The 3D step this atom lifts to; absent for stepsets built directly
    /// from 1D values.
    pub source: Option<Step3>,
}

/// A weighted 1D stepset. Atoms with equal values stay separate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSet1D {
    atoms: Vec<Atom>,
}

impl StepSet1D {
    fn from_atoms(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.iter().all(|a| a.value >= 0) {
            return Err(Error::Degenerate("non-negative"));
        }
        if atoms.iter().all(|a| a.value <= 0) {
            return Err(Error::Degenerate("non-positive"));
        }
        Ok(StepSet1D { atoms })
    }

    /// A stepset given by `(value, weight)` pairs, without 3D sources.
    pub fn from_weighted_values(values: &[(i64, u64)]) -> Result<Self> {
        if values.iter().any(|(_, w)| *w == 0) {
            return Err(Error::Parse("1D weights must be positive".into()));
        }
        Self::from_atoms(
            values
                .iter()
                .enumerate()
                .map(|(id, &(value, weight))| Atom {
                    id,
                    value,
                    weight,
                    source: None,
                })
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, id: usize) -> Option<&Atom> {
        self.atoms.get(id)
    }

    /// Largest downward amplitude `m`.
    pub fn max_down(&self) -> i64 {
        self.atoms.iter().map(|a| -a.value).max().unwrap_or(0)
    }

    /// Largest upward amplitude `M`.
    pub fn max_up(&self) -> i64 {
        self.atoms.iter().map(|a| a.value).max().unwrap_or(0)
    }

    pub fn total_weight(&self) -> u64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `sum weight * value`
    pub fn drift(&self) -> i64 {
        self.atoms.iter().map(|a| a.weight as i64 * a.value).sum()
    }

    /// A(u) = sum weight * u^value
    pub fn inventory(&self, u: f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.weight as f64 * u.powi(a.value as i32))
            .sum()
    }

    /// Sorted `(value, total weight)` pairs.
    pub fn value_multiset(&self) -> Vec<(i64, u64)> {
        let mut out: Vec<(i64, u64)> = Vec::new();
        for a in &self.atoms {
            match out.iter_mut().find(|(v, _)| *v == a.value) {
                Some((_, w)) => *w += a.weight,
                None => out.push((a.value, a.weight)),
            }
        }
        out.sort();
        out
    }
}

/// One atom per 3D entry, with value `(p, q, r)·s` and the entry's weight.
pub fn project_stepset(w: &WeightedStepSet3, ip: &IntegerProjection) -> Result<StepSet1D> {
    StepSet1D::from_atoms(
        w.entries()
            .iter()
            .enumerate()
            .map(|(id, (s, wt))| Atom {
                id,
                value: ip.project(s),
                weight: *wt,
                source: Some(*s),
            })
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Growth1D {
    /// Positive critical point of A.
    pub tau: f64,
    pub a_tau: f64,
    /// Radius of convergence of the meander generating function,
    /// `1 / A(max(tau, 1))`.
    pub rho: f64,
}

/// Critical point of the 1D inventory and the meanders' dominant singularity.
///
/// Solved in `t = log u`, where `A'(e^t) e^t = sum w v e^{v t}` is strictly
/// increasing; Newton steps are safeguarded by a bracketing interval.
pub fn analyze_1d(a: &StepSet1D) -> Result<Growth1D> {
    let g = |t: f64| -> (f64, f64) {
        a.atoms().iter().fold((0.0, 0.0), |(g, dg), at| {
            let v = at.value as f64;
            let e = at.weight as f64 * (v * t).exp();
            (g + v * e, dg + v * v * e)
        })
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut expansions = 0;
    while g(lo).0 > 0.0 || g(hi).0 < 0.0 {
        lo *= 2.0;
        hi *= 2.0;
        expansions += 1;
        if expansions > 60 {
            return Err(Error::NoConvergence {
                what: "critical point bracketing",
                iterations: expansions,
                residual: f64::NAN,
            });
        }
    }
    let mut t = 0.0f64.clamp(lo, hi);
    let mut converged = false;
    for _ in 0..200 {
        let (val, der) = g(t);
        if val == 0.0 {
            converged = true;
            break;
        }
        if val < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let mut next = t - val / der;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) {
            t = next;
            converged = true;
            break;
        }
        t = next;
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "critical point",
            iterations: 200,
            residual: g(t).0,
        });
    }
    let tau = t.exp();
    let a_tau = a.inventory(tau);
    Ok(Growth1D {
        tau,
        a_tau,
        rho: 1.0 / a.inventory(tau.max(1.0)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn minus_e2_doubled() -> WeightedStepSet3 {
        WeightedStepSet3::axis_model([1, 1, 1, 2, 1, 1]).unwrap()
    }

    #[test]
    fn flagship_minimizer() {
        let m = minimize_inventory(&WeightedStepSet3::flagship(), DEFAULT_MINIMIZE_TOL).unwrap();
        for c in m.point {
            assert!((c - SQRT2).abs() < 1e-9);
        }
        assert!((m.s_min - 6.0 * SQRT2).abs() < 1e-9);
        assert!(m.gradient_norm <= 1e-9 * m.s_min);
    }

    #[test]
    fn zero_drift_minimizer_is_one() {
        let w = WeightedStepSet3::axis_model([1; 6]).unwrap();
        let m = minimize_inventory(&w, DEFAULT_MINIMIZE_TOL).unwrap();
        assert_eq!(m.point, [1.0; 3]);
        assert_eq!(m.s_min, 6.0);
    }

    #[test]
    fn separable_minimizer() {
        let w = minus_e2_doubled();
        let m = minimize_inventory(&w, DEFAULT_MINIMIZE_TOL).unwrap();
        assert!((m.point[0] - 1.0).abs() < 1e-9);
        assert!((m.point[1] - SQRT2).abs() < 1e-9);
        assert!((m.point[2] - 1.0).abs() < 1e-9);
        assert!((m.s_min - (4.0 + 2.0 * SQRT2)).abs() < 1e-9);
        let g = w.inventory_grad(m.point).unwrap();
        assert!(g.iter().all(|c| c.abs() < 1e-10));
    }

    #[test]
    fn minimizer_handles_long_steps() {
        let w = WeightedStepSet3::validate([
            (Step3::new(2, 0, 0), 1),
            (Step3::new(-1, 0, 0), 5),
            (Step3::new(0, 3, 1), 1),
            (Step3::new(0, -1, 0), 2),
            (Step3::new(0, 0, -1), 3),
            (Step3::new(1, 1, 1), 1),
        ])
        .unwrap();
        let m = minimize_inventory(&w, DEFAULT_MINIMIZE_TOL).unwrap();
        assert!(m.s_min <= w.total_weight() as f64);
        assert!(m.gradient_norm <= 1e-12 * m.s_min);
    }

    #[test]
    fn projection_branches() {
        let flag = minimize_inventory(&WeightedStepSet3::flagship(), 1e-12).unwrap();
        let v = projection_vector(&flag, UNIT_LOG_EPS).unwrap();
        assert_eq!(v.branch(), ProjectionBranch::Generic);
        for c in v.components() {
            assert!((c - 1.0).abs() < 1e-9);
        }

        let m = minimize_inventory(&minus_e2_doubled(), 1e-12).unwrap();
        let v = projection_vector(&m, UNIT_LOG_EPS).unwrap();
        assert_eq!(v.branch(), ProjectionBranch::UnitZ);
        assert_eq!(v.reference_axis(), Some(1));
        assert_eq!(v.components(), [0.0, 1.0, 0.0]);

        let one = Minimizer {
            point: [1.0; 3],
            s_min: 6.0,
            gradient_norm: 0.0,
            iterations: 0,
        };
        let v = projection_vector(&one, UNIT_LOG_EPS).unwrap();
        assert_eq!(v.branch(), ProjectionBranch::Trivial);
        assert_eq!(v.components(), [1.0; 3]);
    }

    #[test]
    fn mixed_log_signs_are_rejected() {
        // drift (+1, -1, 0): minimizer has x* < 1 < y*.
        let w = WeightedStepSet3::axis_model([2, 1, 1, 2, 1, 1]).unwrap();
        let m = minimize_inventory(&w, 1e-12).unwrap();
        assert!(matches!(
            projection_vector(&m, UNIT_LOG_EPS),
            Err(Error::OrthantNotContained(_))
        ));
    }

    #[test]
    fn rationalize_examples() {
        let ip = rationalize(&ProjectionVector::from_components([1.0; 3]).unwrap(), 8);
        assert_eq!(ip.coefficients, [1, 1, 1]);
        assert_eq!(ip.max_abs_error, 0.0);

        let l = 3f64.ln() / 2f64.ln();
        let ip = rationalize(
            &ProjectionVector::from_components([l, 1.0, 1.0]).unwrap(),
            8,
        );
        assert_eq!(ip.coefficients, [11, 7, 7]);
        assert_eq!(ip.denominator, 7);
        assert!((ip.max_abs_error - (l - 11.0 / 7.0).abs()).abs() < 1e-12);
        assert!((ip.max_abs_error - 0.0135).abs() < 1e-4);

        let ip = rationalize(
            &ProjectionVector::from_components([0.0, 1.0, 0.0]).unwrap(),
            8,
        );
        assert_eq!(ip.coefficients, [0, 1, 0]);
        assert_eq!(ip.max_abs_error, 0.0);
    }

    /// Exhaustive reference: every numerator triple over every denominator.
    fn brute_force_error(scaled: [f64; 3], max_den: u32) -> f64 {
        let mut best = f64::INFINITY;
        for d in 1..=max_den {
            let df = d as f64;
            let mut worst: f64 = 0.0;
            for c in scaled {
                let lo = (c * df).floor();
                let e = (c - lo / df).abs().min((c - (lo + 1.0) / df).abs());
                worst = worst.max(e);
            }
            best = best.min(worst);
        }
        best
    }

    #[test]
    fn rationalize_ties_prefer_small_denominators() {
        let ip = rationalize(
            &ProjectionVector::from_components([1.5, 1.0, 1.0]).unwrap(),
            8,
        );
        assert_eq!(ip.denominator, 2);
        assert_eq!(ip.coefficients, [3, 2, 2]);
    }

    #[test]
    fn project_flagship() {
        let ip = IntegerProjection {
            coefficients: [1, 1, 1],
            denominator: 1,
            max_abs_error: 0.0,
        };
        let a = project_stepset(&WeightedStepSet3::flagship(), &ip).unwrap();
        assert_eq!(a.atoms().len(), 6);
        assert_eq!(a.value_multiset(), vec![(-1, 6), (1, 3)]);
        assert_eq!((a.max_down(), a.max_up()), (1, 1));
        assert_eq!(a.atoms()[0].source, Some(Step3::E1));
        assert_eq!(a.atoms()[3].source, Some(Step3::E1.neg()));
    }

    #[test]
    fn project_unit_z_model() {
        let ip = IntegerProjection {
            coefficients: [0, 1, 0],
            denominator: 1,
            max_abs_error: 0.0,
        };
        let a = project_stepset(&minus_e2_doubled(), &ip).unwrap();
        let vals: Vec<(i64, u64)> = a.atoms().iter().map(|x| (x.value, x.weight)).collect();
        assert_eq!(vals, vec![(0, 1), (0, 1), (1, 1), (-1, 2), (0, 1), (0, 1)]);
    }

    #[test]
    fn project_stress_model() {
        let w = WeightedStepSet3::axis_model([1, 3, 1, 2, 1, 2]).unwrap();
        let ip = IntegerProjection {
            coefficients: [11, 7, 7],
            denominator: 7,
            max_abs_error: 0.0,
        };
        let a = project_stepset(&w, &ip).unwrap();
        let vals: Vec<(i64, u64)> = a.atoms().iter().map(|x| (x.value, x.weight)).collect();
        assert_eq!(
            vals,
            vec![(11, 1), (-11, 3), (7, 1), (-7, 2), (7, 1), (-7, 2)]
        );
        assert_eq!((a.max_down(), a.max_up()), (11, 11));
    }

    #[test]
    fn degenerate_projection() {
        let ip = IntegerProjection {
            coefficients: [1, 0, 0],
            denominator: 1,
            max_abs_error: 0.0,
        };
        let w = WeightedStepSet3::validate([
            (Step3::E1, 1),
            (Step3::E2, 1),
            (Step3::E2.neg(), 1),
            (Step3::E3, 1),
            (Step3::new(0, 0, -1), 1),
            (Step3::new(-1, 0, 0), 1),
        ])
        .unwrap();
        assert!(project_stepset(&w, &ip).is_ok());
        assert!(matches!(
            StepSet1D::from_weighted_values(&[(0, 1), (2, 1)]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn analyze_1d_examples() {
        let flag = StepSet1D::from_weighted_values(&[(1, 3), (-1, 6)]).unwrap();
        let g = analyze_1d(&flag).unwrap();
        assert!((g.tau - SQRT2).abs() < 1e-12);
        assert!((g.a_tau - 6.0 * SQRT2).abs() < 1e-12);
        assert!((g.rho - 1.0 / (6.0 * SQRT2)).abs() < 1e-12);

        let dyck = StepSet1D::from_weighted_values(&[(1, 1), (-1, 1)]).unwrap();
        let g = analyze_1d(&dyck).unwrap();
        assert_eq!((g.tau, g.a_tau, g.rho), (1.0, 2.0, 0.5));

        let lazy = StepSet1D::from_weighted_values(&[(0, 4), (1, 1), (-1, 2)]).unwrap();
        let g = analyze_1d(&lazy).unwrap();
        assert!((g.tau - SQRT2).abs() < 1e-12);
        assert!((g.a_tau - (4.0 + 2.0 * SQRT2)).abs() < 1e-12);
        assert!((g.rho - 1.0 / (4.0 + 2.0 * SQRT2)).abs() < 1e-12);
    }

    #[test]
    fn positive_drift_uses_total_weight() {
        let a = StepSet1D::from_weighted_values(&[(1, 3), (-1, 1)]).unwrap();
        let g = analyze_1d(&a).unwrap();
        assert!(g.tau < 1.0);
        assert!((g.rho - 0.25).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn rationalize_is_optimal(a in 0.0f64..4.0, b in 0.0f64..4.0, max_den in 1u32..10) {
            let v = ProjectionVector::from_components([a, b, 1.0]).unwrap();
            let ip = rationalize(&v, max_den);
            let smallest = [a, b, 1.0].into_iter().filter(|c| *c > 0.0).fold(f64::INFINITY, f64::min);
            let scaled = [a, b, 1.0].map(|c| c / smallest);
            prop_assert!((ip.max_abs_error - brute_force_error(scaled, max_den)).abs() < 1e-9);
            prop_assert!(ip.coefficients.iter().all(|c| *c >= 0));
        }

        #[test]
        fn minimizer_invariant_under_axis_permutation(
            weights in prop::array::uniform6(1u64..5),
            perm in prop::sample::select(vec![[0usize, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]),
        ) {
            let w = WeightedStepSet3::axis_model(weights).unwrap();
            let permuted = WeightedStepSet3::validate(w.entries().iter().map(|(s, wt)| {
                let a = s.as_array();
                (Step3::new(a[perm[0]], a[perm[1]], a[perm[2]]), *wt)
            })).unwrap();
            let m = minimize_inventory(&w, 1e-12).unwrap();
            let mp = minimize_inventory(&permuted, 1e-12).unwrap();
            for k in 0..3 {
                prop_assert!((mp.point[k] - m.point[perm[k]]).abs() < 1e-8);
            }
            prop_assert!((mp.s_min - m.s_min).abs() < 1e-8);
        }

        #[test]
        fn projection_identities(weights in prop::array::uniform6(1u64..6)) {
            let w = WeightedStepSet3::axis_model(weights).unwrap();
            let m = minimize_inventory(&w, 1e-12).unwrap();
            prop_assert!(m.s_min <= w.total_weight() as f64 + 1e-12);
            let Ok(v) = projection_vector(&m, UNIT_LOG_EPS) else { return Ok(()) };
            let ip = rationalize(&v, DEFAULT_MAX_DEN);
            let Ok(a) = project_stepset(&w, &ip) else { return Ok(()) };
            prop_assert_eq!(a.total_weight(), w.total_weight());
            prop_assert_eq!(a.drift(), w.drift().as_array().iter().zip(ip.coefficients).map(|(d, c)| d * c).sum::<i64>());
            for at in a.atoms() {
                prop_assert_eq!(at.value, ip.project(&at.source.unwrap()));
            }
            if ip.max_abs_error == 0.0 {
                let g = analyze_1d(&a).unwrap();
                prop_assert!(g.a_tau >= m.s_min * (1.0 - 1e-9));
                prop_assert!(g.a_tau <= w.total_weight() as f64 + 1e-9);
                prop_assert!((g.a_tau - m.s_min).abs() <= 1e-8 * m.s_min);
                prop_assert!(g.rho <= 1.0 / m.s_min + 1e-12);
            }
        }
    }
}
