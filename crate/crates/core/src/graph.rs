//! Quotient multigraphs labeled with integer lattice shifts.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intmat::{self, IntMatrix};

/// An oriented quotient edge. Its lift joins `tail` in cell 0 to `head` in
/// the cell translated by `shift`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub shift: Vec<i64>,
}

impl Edge {
    pub fn new(tail: usize, head: usize, shift: Vec<i64>) -> Self {
        Edge { tail, head, shift }
    }

    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }

    /// The same lift edge traversed in the opposite direction.
    pub fn reversed(&self) -> Edge {
        Edge { tail: self.head, head: self.tail, shift: self.shift.iter().map(|s| -s).collect() }
    }
}

/// Combinatorial access shared by labeled quotient graphs and bare skeletons.
pub trait Multigraph {
    fn vertex_count(&self) -> usize;
    fn edge_count(&self) -> usize;
    fn endpoints(&self, e: usize) -> (usize, usize);

    /// Degree with loops counted twice.
    fn degree(&self, v: usize) -> usize {
        (0..self.edge_count())
            .map(|e| {
                let (t, h) = self.endpoints(e);
                usize::from(t == v) + usize::from(h == v)
            })
            .sum()
    }

    /// The common degree when the graph is regular.
    fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        (1..self.vertex_count()).all(|v| self.degree(v) == d).then_some(d)
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return false;
        }
        spanning_tree(self).1.iter().all(|&seen| seen)
    }

    fn loop_count(&self, v: usize) -> usize {
        (0..self.edge_count()).filter(|&e| self.endpoints(e) == (v, v)).count()
    }
}

/// BFS spanning forest from vertex 0: returns the tree edge ids in
/// discovery order and the reached flags.
pub(crate) fn spanning_tree<G: Multigraph + ?Sized>(g: &G) -> (Vec<usize>, Vec<bool>) {
    let n = g.vertex_count();
    let mut adj = vec![Vec::new(); n];
    for e in 0..g.edge_count() {
        let (t, h) = g.endpoints(e);
        if t != h {
            adj[t].push(e);
            adj[h].push(e);
        }
    }
    let mut seen = vec![false; n];
    let mut tree = Vec::new();
    if n == 0 {
        return (tree, seen);
    }
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        for &e in &adj[v] {
            let (t, h) = g.endpoints(e);
            let w = if t == v { h } else { t };
            if !seen[w] {
                seen[w] = true;
                tree.push(e);
                queue.push_back(w);
            }
        }
    }
    (tree, seen)
}

/// A multigraph without shift labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Multigraph for Skeleton {
    fn vertex_count(&self) -> usize {
        self.vertex_count
    }
    fn edge_count(&self) -> usize {
        self.edges.len()
    }
    fn endpoints(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }
}

/// A finite multigraph whose edges carry shift vectors in Z^n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGraph {
    dim: usize,
    vertex_count: usize,
    edges: Vec<Edge>,
}

impl Multigraph for QuotientGraph {
    fn vertex_count(&self) -> usize {
        self.vertex_count
    }
    fn edge_count(&self) -> usize {
        self.edges.len()
    }
    fn endpoints(&self, e: usize) -> (usize, usize) {
        (self.edges[e].tail, self.edges[e].head)
    }
}

impl QuotientGraph {
    /// Checks vertex ids, shift lengths and that every loop has a nonzero
    /// shift. Connectivity and regularity are left to validation.
    pub fn new(dim: usize, vertex_count: usize, edges: Vec<Edge>) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if vertex_count < 1 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.tail >= vertex_count {
                return Err(Error::UnknownVertex(e.tail));
            }
            if e.head >= vertex_count {
                return Err(Error::UnknownVertex(e.head));
            }
            if e.shift.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: e.shift.len() });
            }
            if e.is_loop() && e.shift.iter().all(|&s| s == 0) {
                return Err(Error::InvalidGraph(format!("edge {i} is a loop with zero shift")));
            }
        }
        Ok(QuotientGraph { dim, vertex_count, edges })
    }

    /// Labels a skeleton with the given shifts, one per edge.
    pub fn from_skeleton(skel: &Skeleton, dim: usize, shifts: Vec<Vec<i64>>) -> Result<Self> {
        if shifts.len() != skel.edges.len() {
            return Err(Error::InvalidParameter(format!(
                "{} shifts for {} edges",
                shifts.len(),
                skel.edges.len()
            )));
        }
        let edges = skel.edges.iter().zip(shifts).map(|(&(t, h), s)| Edge::new(t, h, s)).collect();
        Self::new(dim, skel.vertex_count, edges)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Result<&Edge> {
        self.edges.get(e).ok_or(Error::UnknownEdge(e))
    }

    pub fn skeleton(&self) -> Skeleton {
        Skeleton { vertex_count: self.vertex_count, edges: self.edges.iter().map(|e| (e.tail, e.head)).collect() }
    }

    pub fn shifts(&self) -> Vec<Vec<i64>> {
        self.edges.iter().map(|e| e.shift.clone()).collect()
    }

    /// Net shift of every fundamental cycle of the BFS spanning tree, one row
    /// per non-tree edge. Loop rows are the loop shifts themselves.
    pub fn cycle_shift_matrix(&self) -> IntMatrix {
        let (tree, _) = spanning_tree(self);
        let mut pot: Vec<Option<Vec<i64>>> = vec![None; self.vertex_count];
        pot[0] = Some(vec![0; self.dim]);
        // Tree edges are in BFS discovery order, so one endpoint is known.
        for &e in &tree {
            let edge = &self.edges[e];
            match (&pot[edge.tail], &pot[edge.head]) {
                (Some(pt), None) => {
                    pot[edge.head] = Some(pt.iter().zip(&edge.shift).map(|(a, b)| a + b).collect());
                }
                (None, Some(ph)) => {
                    pot[edge.tail] = Some(ph.iter().zip(&edge.shift).map(|(a, b)| a - b).collect());
                }
                _ => unreachable!("tree edge with both or neither endpoint placed"),
            }
        }
        let in_tree: HashSet<usize> = tree.into_iter().collect();
        let mut rows = Vec::new();
        for (i, edge) in self.edges.iter().enumerate() {
            if in_tree.contains(&i) {
                continue;
            }
            let (Some(pt), Some(ph)) = (&pot[edge.tail], &pot[edge.head]) else { continue };
            rows.push((0..self.dim).map(|k| pt[k] + edge.shift[k] - ph[k]).collect());
        }
        rows
    }

    /// Nonzero Smith invariant factors of the cycle-shift matrix.
    pub fn cycle_invariants(&self) -> Result<Vec<i64>> {
        let m = self.cycle_shift_matrix();
        if m.is_empty() {
            return Ok(Vec::new());
        }
        intmat::smith_invariants(&m)
    }

    /// Rank over Q of the cycle shifts.
    pub fn lattice_rank(&self) -> Result<usize> {
        Ok(self.cycle_invariants()?.len())
    }

    /// The cycle shifts generate all of Z^n and the quotient is connected.
    pub fn is_lift_connected(&self) -> Result<bool> {
        if !self.is_connected() {
            return Ok(false);
        }
        let inv = self.cycle_invariants()?;
        Ok(inv.len() == self.dim && inv.iter().all(|&f| f == 1))
    }

    /// Pairs of edges with equal or reversed-equal triples.
    pub fn simplicity_violations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.edges.len() {
            for j in i + 1..self.edges.len() {
                if self.edges[i] == self.edges[j] || self.edges[i] == self.edges[j].reversed() {
                    out.push((i, j));
                }
            }
        }
        // A loop equal to its own reverse would need a zero shift, which
        // construction already rejects.
        out
    }

    /// Replaces the shift of one edge.
    pub fn with_shift(&self, e: usize, shift: Vec<i64>) -> Result<Self> {
        let mut edges = self.edges.clone();
        edges.get_mut(e).ok_or(Error::UnknownEdge(e))?.shift = shift;
        Self::new(self.dim, self.vertex_count, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pcu3(third: i64) -> QuotientGraph {
        QuotientGraph::new(
            3,
            1,
            vec![Edge::new(0, 0, vec![1, 0, 0]), Edge::new(0, 0, vec![0, 1, 0]), Edge::new(0, 0, vec![0, 0, third])],
        )
        .unwrap()
    }

    #[test]
    fn zero_loop_rejected() {
        assert!(QuotientGraph::new(2, 1, vec![Edge::new(0, 0, vec![0, 0])]).is_err());
    }

    #[test]
    fn loops_count_twice() {
        let g = pcu3(1);
        assert_eq!(g.degree(0), 6);
        assert_eq!(g.regular_degree(), Some(6));
    }

    #[test]
    fn doubled_loop_breaks_lift_connectivity() {
        let g = pcu3(2);
        assert_eq!(g.cycle_invariants().unwrap(), vec![1, 1, 2]);
        assert_eq!(g.lattice_rank().unwrap(), 3);
        assert!(!g.is_lift_connected().unwrap());
        assert!(pcu3(1).is_lift_connected().unwrap());
    }

    #[test]
    fn cycle_matrix_uses_tree_potentials() {
        // Dipole with a nonzero tree shift: cycle rows are differences.
        let g = QuotientGraph::new(
            2,
            2,
            vec![Edge::new(0, 1, vec![1, 1]), Edge::new(0, 1, vec![2, 1]), Edge::new(1, 0, vec![0, -2])],
        )
        .unwrap();
        let m = g.cycle_shift_matrix();
        assert_eq!(m, vec![vec![1, 0], vec![1, -1]]);
    }

    #[test]
    fn reversed_duplicate_detected() {
        let g = QuotientGraph::new(1, 2, vec![Edge::new(0, 1, vec![1]), Edge::new(1, 0, vec![-1])]).unwrap();
        assert_eq!(g.simplicity_violations(), vec![(0, 1)]);
    }
}
