//! Small dense geometry helpers: affine frames, simplex and hull volumes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Orthonormal frame of the affine hull of `points`: an origin and
/// orthonormal directions, found by greedy Gram-Schmidt on the differences
/// to the first point. Directions with residual below `tol` times the
/// point spread are dropped.
pub fn affine_frame(points: &[DVector<f64>], tol: f64) -> (DVector<f64>, Vec<DVector<f64>>) {
    let origin = points[0].clone();
    let spread = points.iter().map(|p| (p - &origin).norm()).fold(0.0, f64::max);
    let mut frame: Vec<DVector<f64>> = Vec::new();
    loop {
        // Take the point farthest from the current span.
        let mut best: Option<DVector<f64>> = None;
        for p in points {
            let mut r = p - &origin;
            for f in &frame {
                let c = r.dot(f);
                r.axpy(-c, f, 1.0);
            }
            if best.as_ref().map_or(true, |b| r.norm() > b.norm()) {
                best = Some(r);
            }
        }
        match best {
            Some(r) if r.norm() > tol * spread.max(f64::MIN_POSITIVE) && spread > 0.0 => frame.push(r.normalize()),
            _ => break,
        }
    }
    (origin, frame)
}

/// Coordinates of `p` in an affine frame.
pub fn frame_coordinates(origin: &DVector<f64>, frame: &[DVector<f64>], p: &DVector<f64>) -> Vec<f64> {
    let d = p - origin;
    frame.iter().map(|f| d.dot(f)).collect()
}

/// Distance from `p` to the affine span of a frame.
pub fn distance_to_flat(origin: &DVector<f64>, frame: &[DVector<f64>], p: &DVector<f64>) -> f64 {
    let mut r = p - origin;
    for f in frame {
        let c = r.dot(f);
        r.axpy(-c, f, 1.0);
    }
    r.norm()
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Volume of the n-simplex with the given n + 1 vertices in Rⁿ.
pub fn simplex_volume(points: &[DVector<f64>]) -> Result<f64> {
    let n = points.len().saturating_sub(1);
    if n == 0 || points.iter().any(|p| p.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: points.first().map_or(0, |p| p.len()) });
    }
    let m = DMatrix::from_fn(n, n, |i, j| points[j + 1][i] - points[0][i]);
    Ok(m.determinant().abs() / factorial(n))
}

/// m-dimensional volume of the convex hull of points given by m
/// coordinates each. Points need not all be hull vertices.
///
/// Facets are found by testing every m-subset for a supporting hyperplane;
/// the hull is the union of cones from the centroid over the facets. This
/// is exponential in the point count and meant for a handful of points.
pub fn hull_volume(points: &[Vec<f64>], tol: f64) -> Result<f64> {
    let m = points.first().map_or(0, |p| p.len());
    if m == 0 {
        return Err(Error::Degenerate("zero-dimensional hull".into()));
    }
    if m == 1 {
        let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        return Ok(hi - lo);
    }
    let pts: Vec<DVector<f64>> = points.iter().map(|p| DVector::from_column_slice(p)).collect();
    let (_, frame) = affine_frame(&pts, tol);
    if frame.len() < m {
        return Ok(0.0);
    }
    let scale = pts.iter().map(|p| p.amax()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let centroid = pts.iter().fold(DVector::zeros(m), |a, p| a + p) / pts.len() as f64;
    let mut facets: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut volume = 0.0;
    for subset in combinations(pts.len(), m) {
        let sub: Vec<DVector<f64>> = subset.iter().map(|&i| pts[i].clone()).collect();
        let (o, fr) = affine_frame(&sub, tol);
        if fr.len() != m - 1 {
            continue;
        }
        let normal = complement_direction(&fr, m);
        let offset = normal.dot(&o);
        let side: Vec<f64> = pts.iter().map(|p| normal.dot(p) - offset).collect();
        let (normal, offset) = if side.iter().all(|&s| s <= tol * scale) {
            (normal, offset)
        } else if side.iter().all(|&s| s >= -tol * scale) {
            (-normal, -offset)
        } else {
            continue;
        };
        if facets.iter().any(|(nv, off)| (nv - &normal).amax() < 1e-9 && (off - offset).abs() <= tol * scale) {
            continue;
        }
        let on_facet: Vec<Vec<f64>> = pts
            .iter()
            .filter(|p| (normal.dot(p) - offset).abs() <= tol * scale)
            .map(|p| frame_coordinates(&o, &fr, p))
            .collect();
        let area = hull_volume(&on_facet, tol)?;
        let height = offset - normal.dot(&centroid);
        volume += area * height / m as f64;
        facets.push((normal, offset));
    }
    Ok(volume)
}

/// A unit vector orthogonal to the m − 1 orthonormal `frame` vectors.
fn complement_direction(frame: &[DVector<f64>], m: usize) -> DVector<f64> {
    let mut best = DVector::zeros(m);
    for i in 0..m {
        let mut r = DVector::zeros(m);
        r[i] = 1.0;
        for f in frame {
            let c = r.dot(f);
            r.axpy(-c, f, 1.0);
        }
        if r.norm() > best.norm() {
            best = r;
        }
    }
    best.normalize()
}

/// All size-r subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + n - r) else { break };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}
