//! Periodic networks: a shift-labeled quotient graph realized by a lattice
//! and Cartesian vertex positions.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Multigraph, QuotientGraph};
use crate::lattice::Lattice;

/// Two outgoing unit directions closer than this in max norm coincide.
pub const DIRECTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicNetwork {
    graph: QuotientGraph,
    lattice: Lattice,
    positions: Vec<DVector<f64>>,
}

/// Outcome of [`PeriodicNetwork::validate`]. Violations are collected, not
/// raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub regular: bool,
    pub degree: Option<usize>,
    pub immersed: bool,
    pub simple: bool,
    pub connected: bool,
    pub lattice_rank: usize,
    pub full_rank: bool,
    pub lift_connected: bool,
    pub invariant_factors: Vec<i64>,
    pub violations: Vec<String>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl PeriodicNetwork {
    pub fn new(graph: QuotientGraph, lattice: Lattice, positions: Vec<DVector<f64>>) -> Result<Self> {
        let n = graph.dim();
        if lattice.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: lattice.dim() });
        }
        if positions.len() != graph.vertex_count() {
            return Err(Error::InvalidGraph(format!(
                "{} positions for {} vertices",
                positions.len(),
                graph.vertex_count()
            )));
        }
        for p in &positions {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.len() });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("non-finite vertex position".into()));
            }
        }
        Ok(PeriodicNetwork { graph, lattice, positions })
    }

    pub fn from_coordinates(graph: QuotientGraph, lattice: Lattice, positions: &[Vec<f64>]) -> Result<Self> {
        let pos = positions.iter().map(|p| DVector::from_vec(p.clone())).collect();
        Self::new(graph, lattice, pos)
    }

    pub fn dim(&self) -> usize {
        self.graph.dim()
    }

    pub fn graph(&self) -> &QuotientGraph {
        &self.graph
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn positions(&self) -> &[DVector<f64>] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> Result<&DVector<f64>> {
        self.positions.get(v).ok_or(Error::UnknownVertex(v))
    }

    pub fn with_positions(&self, positions: Vec<DVector<f64>>) -> Result<Self> {
        Self::new(self.graph.clone(), self.lattice.clone(), positions)
    }

    pub fn with_position(&self, v: usize, p: DVector<f64>) -> Result<Self> {
        let mut positions = self.positions.clone();
        *positions.get_mut(v).ok_or(Error::UnknownVertex(v))? = p;
        self.with_positions(positions)
    }

    pub fn with_lattice(&self, lattice: Lattice) -> Result<Self> {
        Self::new(self.graph.clone(), lattice, self.positions.clone())
    }

    pub fn with_graph(&self, graph: QuotientGraph) -> Result<Self> {
        Self::new(graph, self.lattice.clone(), self.positions.clone())
    }

    /// Uniform scaling of positions and basis by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let positions = self.positions.iter().map(|p| p * c).collect();
        Self::new(self.graph.clone(), Lattice::new(self.lattice.basis() * c)?, positions)
    }

    /// Moves vertex `v` by the lattice vector B·k and compensates the shifts
    /// of its incident edges, leaving every edge vector unchanged.
    pub fn translate_vertex(&self, v: usize, k: &[i64]) -> Result<Self> {
        if v >= self.positions.len() {
            return Err(Error::UnknownVertex(v));
        }
        if k.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: k.len() });
        }
        let mut positions = self.positions.clone();
        positions[v] += self.lattice.vector(k);
        let mut edges = self.graph.edges().to_vec();
        for e in edges.iter_mut() {
            if e.is_loop() {
                continue;
            }
            if e.head == v {
                e.shift.iter_mut().zip(k).for_each(|(s, d)| *s -= d);
            }
            if e.tail == v {
                e.shift.iter_mut().zip(k).for_each(|(s, d)| *s += d);
            }
        }
        let graph = QuotientGraph::new(self.dim(), self.graph.vertex_count(), edges)?;
        Self::new(graph, self.lattice.clone(), positions)
    }

    /// positions[head] + B·shift − positions[tail].
    pub fn edge_vector(&self, e: usize) -> Result<DVector<f64>> {
        let edge = self.graph.edge(e)?;
        Ok(&self.positions[edge.head] + self.lattice.vector(&edge.shift) - &self.positions[edge.tail])
    }

    pub fn edge_vectors(&self) -> Vec<DVector<f64>> {
        (0..self.graph.edge_count()).map(|e| self.edge_vector(e).expect("edge id in range")).collect()
    }

    fn length_scale(&self) -> f64 {
        let lat = self.lattice.columns().iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
        let pos = self.positions.iter().map(|p| p.norm()).fold(0.0, f64::max);
        lat.max(pos).max(f64::MIN_POSITIVE)
    }

    fn is_zero_length(&self, len: f64) -> bool {
        !(len > 1e-14 * self.length_scale())
    }

    pub fn edge_lengths(&self) -> Result<Vec<f64>> {
        self.edge_vectors()
            .iter()
            .enumerate()
            .map(|(e, v)| {
                let len = v.norm();
                if self.is_zero_length(len) {
                    Err(Error::ZeroLengthEdge { edge: e })
                } else {
                    Ok(len)
                }
            })
            .collect()
    }

    /// Total length L of the quotient edges.
    pub fn length(&self) -> Result<f64> {
        Ok(self.edge_lengths()?.iter().sum())
    }

    /// Covolume V = |det B|.
    pub fn volume(&self) -> Result<f64> {
        self.lattice.volume()
    }

    /// The scale-invariant quotient Lⁿ/V.
    pub fn length_quotient(&self) -> Result<f64> {
        let l = self.length()?;
        let v = self.volume()?;
        Ok(l.powi(self.dim() as i32) / v)
    }

    /// Unit directions leaving vertex `v`, one per incident edge end.
    pub fn outgoing_directions(&self, v: usize) -> Result<Vec<(usize, DVector<f64>)>> {
        if v >= self.positions.len() {
            return Err(Error::UnknownVertex(v));
        }
        let mut out = Vec::new();
        for (e, edge) in self.graph.edges().iter().enumerate() {
            if edge.tail != v && edge.head != v {
                continue;
            }
            let vec = self.edge_vector(e)?;
            let len = vec.norm();
            if self.is_zero_length(len) {
                return Err(Error::ZeroLengthEdge { edge: e });
            }
            let unit = vec / len;
            if edge.tail == v {
                out.push((e, unit.clone()));
            }
            if edge.head == v {
                out.push((e, -unit));
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> ValidityReport {
        let g = &self.graph;
        let mut violations = Vec::new();

        let degree = g.regular_degree();
        let regular = matches!(degree, Some(d) if d >= 3);
        if !regular {
            violations.push(match degree {
                Some(d) => format!("regular of degree {d} < 3"),
                None => "vertex degrees differ".to_string(),
            });
        }

        let mut immersed = true;
        for v in 0..g.vertex_count() {
            match self.outgoing_directions(v) {
                Ok(dirs) => {
                    for i in 0..dirs.len() {
                        for j in i + 1..dirs.len() {
                            if (&dirs[i].1 - &dirs[j].1).amax() < DIRECTION_TOL {
                                immersed = false;
                                violations.push(format!(
                                    "edges {} and {} leave vertex {v} in the same direction",
                                    dirs[i].0, dirs[j].0
                                ));
                            }
                        }
                    }
                }
                Err(e) => {
                    immersed = false;
                    violations.push(format!("vertex {v}: {e}"));
                }
            }
        }

        let dup = g.simplicity_violations();
        for (i, j) in &dup {
            violations.push(format!("edges {i} and {j} have equal or reversed triples"));
        }

        let connected = g.is_connected();
        if !connected {
            violations.push("quotient graph is disconnected".into());
        }

        let invariant_factors = match g.cycle_invariants() {
            Ok(f) => f,
            Err(e) => {
                violations.push(format!("cycle shift analysis failed: {e}"));
                Vec::new()
            }
        };
        let lattice_rank = invariant_factors.len();
        let full_rank = lattice_rank == self.dim();
        if !full_rank {
            violations.push(format!("cycle shifts have rank {lattice_rank} < {}", self.dim()));
        }
        let lift_connected = connected && full_rank && invariant_factors.iter().all(|&f| f == 1);
        if full_rank && !lift_connected && connected {
            violations.push(format!("cycle shifts generate a sublattice, invariant factors {invariant_factors:?}"));
        }

        if self.volume().is_err() {
            violations.push("lattice basis is singular".into());
        }

        ValidityReport {
            regular,
            degree,
            immersed,
            simple: dup.is_empty(),
            connected,
            lattice_rank,
            full_rank,
            lift_connected,
            invariant_factors,
            violations,
        }
    }
}
