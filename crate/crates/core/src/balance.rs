//! Edge forces, balance tests and the geometric median.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Multigraph;
use crate::network::PeriodicNetwork;

pub const DEFAULT_MEDIAN_TOL: f64 = 1e-10;
pub const DEFAULT_MEDIAN_MAX_ITER: usize = 10_000;

/// Iterates closer than this to an input point are treated as landing on it.
const SNAP_DIST: f64 = 1e-12;
const ESCAPE_STEP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ForceResult {
    pub forces: Vec<DVector<f64>>,
    pub max_norm: f64,
}

/// F(p) = Σ (p − q)/|p − q| over the edge ends at `v`, the gradient of the
/// star length at `v`. Loop ends cancel.
pub fn force(net: &PeriodicNetwork, v: usize) -> Result<DVector<f64>> {
    let mut f = DVector::zeros(net.dim());
    for (_, dir) in net.outgoing_directions(v)? {
        f -= dir;
    }
    Ok(f)
}

pub fn forces(net: &PeriodicNetwork) -> Result<ForceResult> {
    let forces = (0..net.graph().vertex_count()).map(|v| force(net, v)).collect::<Result<Vec<_>>>()?;
    let max_norm = forces.iter().map(|f| f.norm()).fold(0.0, f64::max);
    Ok(ForceResult { forces, max_norm })
}

/// True iff every vertex force has norm at most `tol`. Networks whose forces
/// are undefined (zero-length edges) are not balanced.
pub fn is_balanced(net: &PeriodicNetwork, tol: f64) -> bool {
    forces(net).map(|r| r.max_norm <= tol).unwrap_or(false)
}

/// Total length of the edges incident to `v`, loops counted once.
pub fn star_length(net: &PeriodicNetwork, v: usize) -> Result<f64> {
    let mut total = 0.0;
    for (e, edge) in net.graph().edges().iter().enumerate() {
        if edge.tail == v || edge.head == v {
            total += net.edge_vector(e)?.norm();
        }
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct MedianResult {
    pub point: DVector<f64>,
    /// Index of the input point the minimizer coincides with, if any.
    pub at_vertex: Option<usize>,
    pub iterations: usize,
    /// Objective value at every iterate, starting point included.
    pub trace: Vec<f64>,
}

fn sum_dist(points: &[DVector<f64>], x: &DVector<f64>) -> f64 {
    points.iter().map(|q| (x - q).norm()).sum()
}

/// Σ (x − q)/|x − q| over points distinct from x, and the multiplicity of x
/// among the points.
fn pull(points: &[DVector<f64>], x: &DVector<f64>, scale: f64) -> (DVector<f64>, usize) {
    let mut f = DVector::zeros(x.len());
    let mut hits = 0;
    for q in points {
        let d = x - q;
        let r = d.norm();
        if r <= SNAP_DIST * scale {
            hits += 1;
        } else {
            f += d / r;
        }
    }
    (f, hits)
}

/// Minimizer of p ↦ Σ|p − qᵢ| by Weiszfeld iteration.
///
/// Each input point is first tested for vertex optimality
/// (|Σ unit vectors to the other points| ≤ multiplicity). Otherwise the
/// iteration starts at the centroid and stops once the gradient norm is at
/// most `tol`, or when the objective no longer decreases in floating point.
/// Every iteration also tries a Newton step and keeps whichever point has
/// the smaller objective, so the trace is non-increasing up to rounding.
pub fn geometric_median(points: &[DVector<f64>], tol: f64, max_iter: usize) -> Result<MedianResult> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("no points".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: points.iter().map(|p| p.len()).find(|&l| l != dim).unwrap_or(dim) });
    }
    let scale = points.iter().map(|p| p.amax()).fold(0.0, f64::max).max(1.0);
    if points.iter().all(|p| (p - &points[0]).norm() <= SNAP_DIST * scale) {
        return Err(Error::IdenticalPoints);
    }

    for (i, p) in points.iter().enumerate() {
        let (f, hits) = pull(points, p, scale);
        if f.norm() <= hits as f64 + tol {
            let obj = sum_dist(points, p);
            return Ok(MedianResult { point: p.clone(), at_vertex: Some(i), iterations: 0, trace: vec![obj] });
        }
    }

    let mut x = points.iter().fold(DVector::zeros(dim), |acc, p| acc + p) / points.len() as f64;
    let mut trace = vec![sum_dist(points, &x)];
    for it in 1..=max_iter {
        let (f, hits) = pull(points, &x, scale);
        if hits > 0 {
            // Landed on an input point that is not optimal: step off it
            // along the descent direction.
            let dir = if f.norm() > 0.0 { -&f / f.norm() } else { DVector::from_element(dim, 1.0).normalize() };
            x += dir * (ESCAPE_STEP * scale);
            trace.push(sum_dist(points, &x));
            continue;
        }
        if f.norm() <= tol {
            return Ok(MedianResult { point: x, at_vertex: None, iterations: it - 1, trace });
        }
        let mut num = DVector::zeros(dim);
        let mut den = 0.0;
        let mut hess = DMatrix::zeros(dim, dim);
        for q in points {
            let d = &x - q;
            let r = d.norm();
            num.axpy(1.0 / r, q, 1.0);
            den += 1.0 / r;
            let u = d / r;
            hess += (DMatrix::identity(dim, dim) - &u * u.transpose()) / r;
        }
        // Weiszfeld step, or a Newton step when it does better. Close to
        // the minimizer the objective stops resolving progress, so a Newton
        // step that keeps it and shrinks the gradient is taken as well.
        let prev = trace[trace.len() - 1];
        let mut next = num / den;
        let mut obj = sum_dist(points, &next);
        let mut improves = obj < prev;
        // Pseudo-inverse: the Hessian is singular along directions normal
        // to a flat point set.
        let svd = hess.svd(true, true);
        let cut = 1e-12 * svd.singular_values.max();
        if let Ok(step) = svd.solve(&f, cut) {
            let cand = &x - step;
            let c = sum_dist(points, &cand);
            let (fc, hc) = pull(points, &cand, scale);
            let flat = c <= prev * (1.0 + 4.0 * f64::EPSILON);
            if c < obj || (flat && hc == 0 && fc.norm() < f.norm()) {
                improves = c < prev || fc.norm() < f.norm();
                next = cand;
                obj = c;
            }
        }
        if !improves || (&next - &x).norm() <= 1e-15 * scale {
            // Floating-point fixed point.
            return Ok(MedianResult { point: x, at_vertex: None, iterations: it - 1, trace });
        }
        x = next;
        trace.push(obj);
    }
    let (f, hits) = pull(points, &x, scale);
    if hits == 0 && f.norm() <= tol {
        return Ok(MedianResult { point: x, at_vertex: None, iterations: max_iter, trace });
    }
    Err(Error::NoConvergence(max_iter))
}

/// Lifted positions of the non-loop neighbors of `v`, one per edge end.
pub fn lifted_neighbors(net: &PeriodicNetwork, v: usize) -> Result<Vec<DVector<f64>>> {
    let p = net.position(v)?;
    let mut out = Vec::new();
    for (e, edge) in net.graph().edges().iter().enumerate() {
        if edge.is_loop() {
            continue;
        }
        let vec = net.edge_vector(e)?;
        if edge.tail == v {
            out.push(p + vec);
        } else if edge.head == v {
            out.push(p - vec);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Rebalanced {
    pub network: PeriodicNetwork,
    /// The median coincides with a neighbor, so some edge has collapsed.
    pub degenerate: bool,
    pub at_neighbor: Option<usize>,
}

/// Moves `v` to the geometric median of its lifted neighbors. Loops are
/// translation invariant and do not take part.
pub fn rebalance_vertex(net: &PeriodicNetwork, v: usize) -> Result<Rebalanced> {
    let neighbors = lifted_neighbors(net, v)?;
    if neighbors.is_empty() {
        return Ok(Rebalanced { network: net.clone(), degenerate: false, at_neighbor: None });
    }
    if neighbors.len() == 1 {
        let network = net.with_position(v, neighbors[0].clone())?;
        return Ok(Rebalanced { network, degenerate: true, at_neighbor: Some(0) });
    }
    let med = geometric_median(&neighbors, DEFAULT_MEDIAN_TOL, DEFAULT_MEDIAN_MAX_ITER)?;
    let network = net.with_position(v, med.point)?;
    Ok(Rebalanced { network, degenerate: med.at_vertex.is_some(), at_neighbor: med.at_vertex })
}
