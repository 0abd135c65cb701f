//! Weighted 3D stepsets: validation, drift and the inventory Laurent polynomial
//!
//! A model is a finite set of integer steps, each with a positive integer
//! weight. Multisets such as `{e1, -e1, -e1}` are written with weights
//! (`-e1` with weight 2). The inventory of a model is
//!
//! ```text
//! S(x, y, z) = sum over entries of  w * x^i * y^j * z^k
//! ```
//!
//! and its minimum over the open positive octant governs the exponential
//! growth of walks confined to the first orthant.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A lattice displacement in Z^3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Step3 {
    pub dx: i64,
    pub dy: i64,
    pub dz: i64,
}

impl Step3 {
    pub const E1: Step3 = Step3::new(1, 0, 0);
    pub const E2: Step3 = Step3::new(0, 1, 0);
    pub const E3: Step3 = Step3::new(0, 0, 1);

    pub const fn new(dx: i64, dy: i64, dz: i64) -> Self {
        Step3 { dx, dy, dz }
    }

    pub fn as_array(&self) -> [i64; 3] {
        [self.dx, self.dy, self.dz]
    }

    pub fn is_zero(&self) -> bool {
        self.dx == 0 && self.dy == 0 && self.dz == 0
    }

    pub fn dot(&self, u: [i64; 3]) -> i64 {
        self.dx * u[0] + self.dy * u[1] + self.dz * u[2]
    }

    pub fn neg(&self) -> Self {
        Step3::new(-self.dx, -self.dy, -self.dz)
    }
}

impl From<[i64; 3]> for Step3 {
    fn from(a: [i64; 3]) -> Self {
        Step3::new(a[0], a[1], a[2])
    }
}

impl fmt::Display for Step3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.dx, self.dy, self.dz)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftClass {
    Zero,
    /// Every component strictly negative.
    Reluctant,
    /// Every component non-positive, some zero, some negative.
    NonPositiveMixed,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Drift3 {
    pub dx: i64,
    pub dy: i64,
    pub dz: i64,
    pub class: DriftClass,
}

impl Drift3 {
    pub fn from_components(d: [i64; 3]) -> Self {
        let class = if d.iter().all(|&c| c == 0) {
            DriftClass::Zero
        } else if d.iter().all(|&c| c < 0) {
            DriftClass::Reluctant
        } else if d.iter().all(|&c| c <= 0) {
            DriftClass::NonPositiveMixed
        } else {
            DriftClass::Other
        };
        Drift3 {
            dx: d[0],
            dy: d[1],
            dz: d[2],
            class,
        }
    }

    pub fn as_array(&self) -> [i64; 3] {
        [self.dx, self.dy, self.dz]
    }
}

/// A validated model: distinct nonzero steps with positive weights whose
/// positive span is all of Z^3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedStepSet3 {
    entries: Vec<(Step3, u64)>,
}

impl WeightedStepSet3 {
    /// Validates a raw list of weighted steps.
    ///
    /// Repeated steps are merged by adding their weights, so a multiset can be
    /// given either with repetition or with explicit weights. Entry order is
    /// the order of first appearance.
    pub fn validate<I>(raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Step3, u64)>,
    {
        let mut entries: Vec<(Step3, u64)> = Vec::new();
        for (step, weight) in raw {
            if step.is_zero() {
                return Err(Error::ZeroStep);
            }
            if weight == 0 {
                return Err(Error::ZeroWeight(step));
            }
            match entries.iter_mut().find(|(s, _)| *s == step) {
                Some((_, w)) => *w += weight,
                None => entries.push((step, weight)),
            }
        }
        if entries.is_empty() {
            return Err(Error::EmptyStepSet);
        }
        let steps: Vec<Step3> = entries.iter().map(|(s, _)| *s).collect();
        if let Some(witness) = span_witness(&steps) {
            return Err(Error::SpanViolation { witness });
        }
        Ok(WeightedStepSet3 { entries })
    }

    /// The reluctant model `{e1, e2, e3}` with weight 1 and `{-e1, -e2, -e3}`
    /// with weight 2, drift (-1,-1,-1).
    pub fn flagship() -> Self {
        Self::validate([
            (Step3::E1, 1),
            (Step3::E2, 1),
            (Step3::E3, 1),
            (Step3::E1.neg(), 2),
            (Step3::E2.neg(), 2),
            (Step3::E3.neg(), 2),
        ])
        .expect("flagship model is valid")
    }

    /// `{±e1, ±e2, ±e3}` with the given weights in the order
    /// `e1, -e1, e2, -e2, e3, -e3`.
    pub fn axis_model(weights: [u64; 6]) -> Result<Self> {
        let steps = [
            Step3::E1,
            Step3::E1.neg(),
            Step3::E2,
            Step3::E2.neg(),
            Step3::E3,
            Step3::E3.neg(),
        ];
        Self::validate(steps.into_iter().zip(weights))
    }

    pub fn entries(&self) -> &[(Step3, u64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    pub fn drift(&self) -> Drift3 {
        let mut d = [0i64; 3];
        for (s, w) in &self.entries {
            let w = *w as i64;
            d[0] += w * s.dx;
            d[1] += w * s.dy;
            d[2] += w * s.dz;
        }
        Drift3::from_components(d)
    }

    /// S(x,y,z) at a point of the open positive octant.
    pub fn inventory(&self, point: [f64; 3]) -> Result<f64> {
        check_positive(point)?;
        Ok(self
            .entries
            .iter()
            .map(|(s, w)| *w as f64 * monomial(point, s))
            .sum())
    }

    /// Analytic gradient of S.
    pub fn inventory_grad(&self, point: [f64; 3]) -> Result<[f64; 3]> {
        check_positive(point)?;
        let mut g = [0.0; 3];
        for (s, w) in &self.entries {
            let m = *w as f64 * monomial(point, s);
            for (k, e) in s.as_array().into_iter().enumerate() {
                g[k] += m * e as f64 / point[k];
            }
        }
        Ok(g)
    }

    /// Short content hash identifying the model in walk records.
    pub fn digest(&self) -> String {
        let mut sorted = self.entries.clone();
        sorted.sort();
        let canonical: Vec<String> = sorted
            .iter()
            .map(|(s, w)| format!("{},{},{}:{}", s.dx, s.dy, s.dz, w))
            .collect();
        let hash = Sha256::digest(canonical.join(";").as_bytes());
        hex::encode(&hash[..8])
    }
}

fn check_positive(point: [f64; 3]) -> Result<()> {
    if point.iter().all(|&c| c > 0.0 && c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonPositivePoint(point))
    }
}

fn monomial(point: [f64; 3], s: &Step3) -> f64 {
    point[0].powi(s.dx as i32) * point[1].powi(s.dy as i32) * point[2].powi(s.dz as i32)
}

fn cross(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn primitive(u: [i64; 3]) -> [i64; 3] {
    let g = gcd(gcd(u[0], u[1]), u[2]);
    if g == 0 {
        u
    } else {
        [u[0] / g, u[1] / g, u[2] / g]
    }
}

/// Returns a nonzero `u` with `u·s >= 0` for every step, if one exists.
///
/// When the steps fail to positively span Z^3 the dual cone is nonzero and
/// contains a ray orthogonal to two independent steps, or (for planar and
/// collinear sets) a normal built from a step and a coordinate axis. The
/// candidates enumerated here cover all those cases. The reported witness is
/// the sum of every valid candidate (still in the dual cone), falling back to
/// the first one when the sum cancels.
pub(crate) fn span_witness(steps: &[Step3]) -> Option<[i64; 3]> {
    let axes = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    let arrays: Vec<[i64; 3]> = steps.iter().map(Step3::as_array).collect();

    let mut candidates: Vec<[i64; 3]> = Vec::new();
    let mut push = |u: [i64; 3]| {
        if u != [0, 0, 0] {
            for v in [primitive(u), primitive([-u[0], -u[1], -u[2]])] {
                if !candidates.contains(&v) {
                    candidates.push(v);
                }
            }
        }
    };
    for a in axes {
        push(a);
    }
    for (i, a) in arrays.iter().enumerate() {
        for b in &arrays[i + 1..] {
            push(cross(*a, *b));
        }
        for e in axes {
            push(cross(*a, e));
        }
    }

    let valid: Vec<[i64; 3]> = candidates
        .into_iter()
        .filter(|u| steps.iter().all(|s| s.dot(*u) >= 0))
        .collect();
    let first = *valid.first()?;
    let sum = valid.iter().fold([0i64; 3], |acc, u| {
        [acc[0] + u[0], acc[1] + u[1], acc[2] + u[2]]
    });
    if sum == [0, 0, 0] {
        Some(first)
    } else {
        Some(primitive(sum))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unweighted_axes() -> WeightedStepSet3 {
        WeightedStepSet3::axis_model([1; 6]).unwrap()
    }

    #[test]
    fn flagship_is_valid_and_reluctant() {
        let w = WeightedStepSet3::flagship();
        assert_eq!(w.len(), 6);
        assert_eq!(w.total_weight(), 9);
        let d = w.drift();
        assert_eq!(d.as_array(), [-1, -1, -1]);
        assert_eq!(d.class, DriftClass::Reluctant);
    }

    #[test]
    fn repeated_steps_merge() {
        let w = WeightedStepSet3::validate([
            (Step3::E1, 1),
            (Step3::E2, 1),
            (Step3::E3, 1),
            (Step3::E1.neg(), 1),
            (Step3::E1.neg(), 1),
            (Step3::E2.neg(), 1),
            (Step3::E2.neg(), 1),
            (Step3::E3.neg(), 1),
            (Step3::E3.neg(), 1),
        ])
        .unwrap();
        assert_eq!(w, WeightedStepSet3::flagship());
    }

    #[test]
    fn positive_steps_only_violate_span() {
        let err = WeightedStepSet3::validate([(Step3::E1, 1), (Step3::E2, 1), (Step3::E3, 1)])
            .unwrap_err();
        match err {
            Error::SpanViolation { witness } => assert_eq!(witness, [1, 1, 1]),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn planar_stepset_violates_span() {
        let err = WeightedStepSet3::validate([
            (Step3::E1, 1),
            (Step3::E1.neg(), 1),
            (Step3::E2, 1),
            (Step3::E2.neg(), 1),
        ])
        .unwrap_err();
        match err {
            Error::SpanViolation { witness } => assert_eq!(witness, [0, 0, 1]),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn collinear_and_half_space_cases() {
        assert!(matches!(
            WeightedStepSet3::validate([(Step3::E1, 1), (Step3::E1.neg(), 1)]),
            Err(Error::SpanViolation { .. })
        ));
        // Spans R^3 but every step has x + y + z >= 0.
        let err = WeightedStepSet3::validate([
            (Step3::new(1, -1, 0), 1),
            (Step3::new(-1, 1, 0), 1),
            (Step3::new(0, 1, -1), 1),
            (Step3::new(0, -1, 1), 1),
            (Step3::new(1, 1, 1), 1),
        ])
        .unwrap_err();
        let Error::SpanViolation { witness } = err else {
            panic!("expected span violation")
        };
        assert_eq!(witness, [1, 1, 1]);
        // Tetrahedral set positively spans.
        WeightedStepSet3::validate([
            (Step3::new(1, 1, 1), 1),
            (Step3::new(-1, -1, 1), 1),
            (Step3::new(-1, 1, -1), 1),
            (Step3::new(1, -1, -1), 1),
        ])
        .unwrap();
    }

    #[test]
    fn zero_step_and_weight_rejected() {
        assert!(matches!(
            WeightedStepSet3::validate([(Step3::new(0, 0, 0), 1)]),
            Err(Error::ZeroStep)
        ));
        assert!(matches!(
            WeightedStepSet3::validate([(Step3::E1, 0)]),
            Err(Error::ZeroWeight(_))
        ));
        assert!(matches!(
            WeightedStepSet3::validate(Vec::new()),
            Err(Error::EmptyStepSet)
        ));
    }

    #[test]
    fn drift_classes() {
        assert_eq!(unweighted_axes().drift().class, DriftClass::Zero);
        let w = WeightedStepSet3::axis_model([1, 1, 1, 2, 1, 1]).unwrap();
        let d = w.drift();
        assert_eq!(d.as_array(), [0, -1, 0]);
        assert_eq!(d.class, DriftClass::NonPositiveMixed);
        let w = WeightedStepSet3::axis_model([2, 1, 1, 2, 1, 1]).unwrap();
        assert_eq!(w.drift().class, DriftClass::Other);
    }

    #[test]
    fn inventory_values() {
        let w = WeightedStepSet3::flagship();
        assert_eq!(w.inventory([1.0; 3]).unwrap(), 9.0);
        let r = 2f64.sqrt();
        let v = w.inventory([r; 3]).unwrap();
        assert!((v - 6.0 * r).abs() < 1e-12);
        let g = w.inventory_grad([r; 3]).unwrap();
        assert!(g.iter().all(|c| c.abs() < 1e-12));
        assert!((w.inventory([2.0, 1.0, 1.0]).unwrap() - 9.0).abs() < 1e-12);
        assert!(matches!(
            w.inventory([0.0, 1.0, 1.0]),
            Err(Error::NonPositivePoint(_))
        ));
        assert!(w.inventory_grad([1.0, -1.0, 1.0]).is_err());
    }

    #[test]
    fn gradient_at_one_is_drift() {
        for weights in [[1, 2, 1, 2, 1, 2], [1, 1, 1, 2, 1, 1], [3, 1, 1, 4, 2, 5]] {
            let w = WeightedStepSet3::axis_model(weights).unwrap();
            let g = w.inventory_grad([1.0; 3]).unwrap();
            let d = w.drift().as_array();
            for k in 0..3 {
                assert_eq!(g[k], d[k] as f64);
            }
        }
    }

    #[test]
    fn digest_ignores_entry_order() {
        let a = WeightedStepSet3::axis_model([1, 2, 1, 2, 1, 2]).unwrap();
        assert_eq!(a.digest(), WeightedStepSet3::flagship().digest());
        assert_eq!(a.digest().len(), 16);
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(
            x in 0.2f64..5.0, y in 0.2f64..5.0, z in 0.2f64..5.0,
            weights in prop::array::uniform6(1u64..6),
        ) {
            let w = WeightedStepSet3::axis_model(weights).unwrap();
            let p = [x, y, z];
            let g = w.inventory_grad(p).unwrap();
            for k in 0..3 {
                let h = 1e-6 * p[k];
                let mut hi = p;
                let mut lo = p;
                hi[k] += h;
                lo[k] -= h;
                let fd = (w.inventory(hi).unwrap() - w.inventory(lo).unwrap()) / (2.0 * h);
                let scale = g[k].abs().max(w.inventory(p).unwrap() / p[k]);
                prop_assert!((fd - g[k]).abs() <= 1e-6 * scale, "axis {k}: fd {fd} vs {}", g[k]);
            }
        }

        #[test]
        fn valid_stepsets_have_a_negative_step_per_axis(
            weights in prop::array::uniform6(1u64..4),
            extra in prop::collection::vec((-2i64..3, -2i64..3, -2i64..3), 0..4),
        ) {
            let mut raw: Vec<(Step3, u64)> = WeightedStepSet3::axis_model(weights)
                .unwrap()
                .entries()
                .to_vec();
            raw.extend(
                extra
                    .into_iter()
                    .map(|(a, b, c)| (Step3::new(a, b, c), 1))
                    .filter(|(s, _)| !s.is_zero()),
            );
            let w = WeightedStepSet3::validate(raw).unwrap();
            for u in [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]] {
                prop_assert!(w.entries().iter().any(|(s, _)| s.dot(u) < 0));
            }
        }
    }
}
