//! Incremental convex hull for small 3D point sets.

use std::collections::HashSet;

use crate::error::{Error, Result};

pub type P3 = [f64; 3];

/// Triangulated hull. Faces are counter-clockwise seen from outside.
#[derive(Clone, Debug, PartialEq)]
pub struct HullMesh {
    pub vertices: Vec<P3>,
    pub faces: Vec<[usize; 3]>,
}

fn sub(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: P3, b: P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Six times the signed volume of (a, b, c, d); positive when d lies on the
/// side of triangle abc its counter-clockwise normal points to.
pub fn orient(a: P3, b: P3, c: P3, d: P3) -> f64 {
    dot(cross(sub(b, a), sub(c, a)), sub(d, a))
}

impl HullMesh {
    /// Largest signed volume of `p` against any face; at most `eps` means
    /// inside or on the hull.
    pub fn max_violation(&self, p: P3) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                orient(
                    self.vertices[f[0]],
                    self.vertices[f[1]],
                    self.vertices[f[2]],
                    p,
                )
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Tolerance on signed volumes for points spread over `points`.
    pub fn tolerance(points: &[P3]) -> f64 {
        1e-9 * bbox_scale(points).powi(3).max(1.0)
    }
}

fn bbox_scale(points: &[P3]) -> f64 {
    (0..3)
        .map(|k| {
            let lo = points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
            let hi = points
                .iter()
                .map(|p| p[k])
                .fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
        .fold(0.0, f64::max)
}

fn farthest_by<F: Fn(P3) -> f64>(points: &[P3], f: F) -> (usize, f64) {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| (i, f(*p)))
        .fold((0, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        })
}

pub fn convex_hull_3d(points: &[P3]) -> Result<HullMesh> {
    if points.len() < 4 {
        return Err(Error::DegenerateHull);
    }
    let eps = HullMesh::tolerance(points);
    let scale = bbox_scale(points);
    if scale == 0.0 {
        return Err(Error::DegenerateHull);
    }

    let i0 = 0;
    let (i1, d1) = farthest_by(points, |p| dot(sub(p, points[i0]), sub(p, points[i0])));
    if d1.sqrt() <= 1e-9 * scale {
        return Err(Error::DegenerateHull);
    }
    let axis = sub(points[i1], points[i0]);
    let (i2, d2) = farthest_by(points, |p| {
        let c = cross(axis, sub(p, points[i0]));
        dot(c, c)
    });
    if d2.sqrt() <= 1e-9 * scale * scale {
        return Err(Error::DegenerateHull);
    }
    let (i3, v3) = farthest_by(points, |p| {
        orient(points[i0], points[i1], points[i2], p).abs()
    });
    if v3 <= eps {
        return Err(Error::DegenerateHull);
    }

    let mut faces: Vec<[usize; 3]> = Vec::new();
    let base = if orient(points[i0], points[i1], points[i2], points[i3]) > 0.0 {
        [i0, i2, i1]
    } else {
        [i0, i1, i2]
    };
    faces.push(base);
    faces.push([base[1], base[0], i3]);
    faces.push([base[2], base[1], i3]);
    faces.push([base[0], base[2], i3]);

    for (pi, &p) in points.iter().enumerate() {
        if [i0, i1, i2, i3].contains(&pi) {
            continue;
        }
        let visible: Vec<bool> = faces
            .iter()
            .map(|f| orient(points[f[0]], points[f[1]], points[f[2]], p) > eps)
            .collect();
        if !visible.iter().any(|v| *v) {
            continue;
        }
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, v)| **v) {
            for k in 0..3 {
                edges.insert((f[k], f[(k + 1) % 3]));
            }
        }
        let mut kept: Vec<[usize; 3]> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, v)| !**v)
            .map(|(f, _)| *f)
            .collect();
        let mut horizon: Vec<(usize, usize)> = edges
            .iter()
            .filter(|(a, b)| !edges.contains(&(*b, *a)))
            .copied()
            .collect();
        horizon.sort_unstable();
        kept.extend(horizon.into_iter().map(|(a, b)| [a, b, pi]));
        faces = kept;
    }

    let mut remap = vec![usize::MAX; points.len()];
    let mut vertices = Vec::new();
    for f in &faces {
        for &i in f {
            if remap[i] == usize::MAX {
                remap[i] = vertices.len();
                vertices.push(points[i]);
            }
        }
    }
    let faces = faces.iter().map(|f| f.map(|i| remap[i])).collect();
    Ok(HullMesh { vertices, faces })
}
