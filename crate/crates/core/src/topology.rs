//! Quotient combinatorics: circuit rank, the bouquet / double bouquet /
//! dipole families, admissible types per (n, d), and shift enumeration.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{spanning_tree, Edge, Multigraph, QuotientGraph, Skeleton};
use crate::intmat::{self, IntMatrix};

/// Raw assignment counts above this are refused by [`enumerate_shifts`].
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TopologyTag {
    /// One vertex with ℓ loops.
    Bouquet(usize),
    /// Two vertices with ℓ loops each and k bridges.
    DoubleBouquet(usize, usize),
    /// Two vertices joined by k parallel edges.
    Dipole(usize),
    Other,
}

impl TopologyTag {
    /// Writes D₀,ₖ as the dipole Dₖ.
    pub fn normalized(self) -> Self {
        match self {
            TopologyTag::DoubleBouquet(0, k) => TopologyTag::Dipole(k),
            t => t,
        }
    }

    /// (loops per vertex, bridges) for the two-vertex families.
    pub fn two_vertex_parts(self) -> Option<(usize, usize)> {
        match self.normalized() {
            TopologyTag::DoubleBouquet(l, k) => Some((l, k)),
            TopologyTag::Dipole(k) => Some((0, k)),
            _ => None,
        }
    }

    pub fn degree(self) -> Option<usize> {
        match self.normalized() {
            TopologyTag::Bouquet(l) => Some(2 * l),
            TopologyTag::DoubleBouquet(l, k) => Some(2 * l + k),
            TopologyTag::Dipole(k) => Some(k),
            TopologyTag::Other => None,
        }
    }
}

impl fmt::Display for TopologyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.normalized() {
            TopologyTag::Bouquet(l) => write!(f, "B{l}"),
            TopologyTag::DoubleBouquet(l, k) => write!(f, "D{l},{k}"),
            TopologyTag::Dipole(k) => write!(f, "D{k}"),
            TopologyTag::Other => write!(f, "other"),
        }
    }
}

impl FromStr for TopologyTag {
    type Err = Error;

    /// Accepts `B3`, `D4`, `D1,3` and `D1_3` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse topology `{s}`"));
        let t = s.trim();
        let (head, rest) = t.split_at(t.chars().next().ok_or_else(bad)?.len_utf8());
        let nums: Vec<usize> = rest
            .split([',', '_'])
            .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (head.to_ascii_uppercase().as_str(), nums.as_slice()) {
            ("B", [l]) if *l >= 1 => Ok(TopologyTag::Bouquet(*l)),
            ("D", [k]) if *k >= 1 => Ok(TopologyTag::Dipole(*k)),
            ("D", [l, k]) if *k >= 1 => Ok(TopologyTag::DoubleBouquet(*l, *k).normalized()),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopologyClass {
    pub tag: TopologyTag,
    pub circuit_rank: usize,
    pub degree: usize,
    pub vertex_count: usize,
}

impl TopologyClass {
    fn of_tag(tag: TopologyTag) -> Self {
        let skel = build_abstract(tag).expect("valid family tag");
        TopologyClass {
            tag: tag.normalized(),
            circuit_rank: skel.edges.len() + 1 - skel.vertex_count,
            degree: tag.degree().expect("family tag"),
            vertex_count: skel.vertex_count,
        }
    }
}

/// 1 − #vertices + #edges of a connected multigraph.
pub fn circuit_rank<G: Multigraph + ?Sized>(g: &G) -> Result<usize> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(g.edge_count() + 1 - g.vertex_count())
}

/// Matches a connected regular multigraph against the named families.
pub fn classify<G: Multigraph + ?Sized>(g: &G) -> Result<TopologyClass> {
    let rank = circuit_rank(g)?;
    let degree = g.regular_degree().ok_or(Error::NotRegular)?;
    let vc = g.vertex_count();
    let tag = match vc {
        1 => TopologyTag::Bouquet(g.edge_count()),
        2 => {
            let l0 = g.loop_count(0);
            let l1 = g.loop_count(1);
            let k = g.edge_count() - l0 - l1;
            if l0 == l1 && k >= 1 {
                TopologyTag::DoubleBouquet(l0, k).normalized()
            } else {
                TopologyTag::Other
            }
        }
        _ => TopologyTag::Other,
    };
    Ok(TopologyClass { tag, circuit_rank: rank, degree, vertex_count: vc })
}

/// Lower bound on the quotient vertex count of a balanced degree-d network
/// in Rⁿ, with the admissible irreducible types where they are known.
pub fn min_vertex_count(n: usize, d: usize) -> Result<(usize, Vec<TopologyClass>)> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!("degree {d} < 3")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension {n} < 2")));
    }
    if d % 2 == 0 && d >= 2 * n {
        return Ok((1, vec![TopologyClass::of_tag(TopologyTag::Bouquet(d / 2))]));
    }
    if d > n {
        let types = (0..)
            .map(|l| (l, d - 2 * l))
            .take_while(|&(_, k)| k >= 2)
            .map(|(l, k)| TopologyClass::of_tag(TopologyTag::DoubleBouquet(l, k).normalized()))
            .collect();
        return Ok((2, types));
    }
    Ok(((2 * n - 2).div_ceil(d - 2), Vec::new()))
}

/// The unlabeled multigraph of a family tag. Edge order: loops at vertex 0,
/// loops at vertex 1, then bridges 0 → 1.
pub fn build_abstract(tag: TopologyTag) -> Result<Skeleton> {
    if let TopologyTag::Bouquet(l @ 1..) = tag {
        return Ok(Skeleton { vertex_count: 1, edges: vec![(0, 0); l] });
    }
    match tag.two_vertex_parts() {
        Some((l, k)) if k >= 1 => {
            let mut edges = vec![(0, 0); l];
            edges.extend(std::iter::repeat((1, 1)).take(l));
            edges.extend(std::iter::repeat((0, 1)).take(k));
            Ok(Skeleton { vertex_count: 2, edges })
        }
        _ => Err(Error::InvalidParameter(format!("no abstract graph for {tag:?}"))),
    }
}

/// Lazy walk over shift assignments with entries in [−s_max, s_max].
///
/// Shifts on BFS spanning-tree edges are fixed to zero; any assignment is
/// gauge-equivalent (by translating vertices) to one of this form. The free
/// edges are filled depth-first in lexicographic order, pruning a prefix as
/// soon as it has a zero loop or an equal or reversed edge triple, so only
/// lift connectivity is left to test on complete assignments.
pub struct ShiftAssignments {
    skel: Skeleton,
    dim: usize,
    s_max: i64,
    free: Vec<usize>,
    tree: Vec<usize>,
    candidates: Vec<Vec<i64>>,
    choice: Vec<usize>,
    depth: usize,
    finished: bool,
}

impl ShiftAssignments {
    pub fn new(skel: &Skeleton, dim: usize, s_max: usize) -> Result<Self> {
        if s_max < 1 {
            return Err(Error::InvalidParameter("s_max must be at least 1".into()));
        }
        if dim < 1 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !skel.is_connected() {
            return Err(Error::Disconnected);
        }
        let (tree, _) = spanning_tree(skel);
        let tree_set: HashSet<usize> = tree.iter().copied().collect();
        let free: Vec<usize> = (0..skel.edges.len()).filter(|e| !tree_set.contains(e)).collect();
        let s = s_max as i64;
        let width = (2 * s + 1) as usize;
        let total = u32::try_from(dim).ok().and_then(|d| width.checked_pow(d)).ok_or(Error::Overflow)?;
        let candidates = (0..total)
            .map(|mut i| {
                let mut v = vec![0i64; dim];
                for x in v.iter_mut().rev() {
                    *x = (i % width) as i64 - s;
                    i /= width;
                }
                v
            })
            .collect();
        Ok(ShiftAssignments {
            skel: skel.clone(),
            dim,
            s_max: s,
            choice: vec![0; free.len()],
            free,
            tree,
            candidates,
            depth: 0,
            finished: false,
        })
    }

    /// Number of raw assignments, (2 s_max + 1)^(n · #free edges).
    pub fn raw_count(&self) -> u128 {
        let base = (2 * self.s_max + 1) as u128;
        u32::try_from(self.free.len() * self.dim).ok().and_then(|e| base.checked_pow(e)).unwrap_or(u128::MAX)
    }

    /// Whether free edge number `pos` with its current candidate is
    /// compatible with the tree edges and the free edges before it.
    fn consistent(&self, pos: usize) -> bool {
        let e = self.free[pos];
        let s = &self.candidates[self.choice[pos]];
        let (t, h) = self.skel.edges[e];
        if t == h && s.iter().all(|&x| x == 0) {
            return false;
        }
        let zero = vec![0i64; self.dim];
        let earlier = self
            .tree
            .iter()
            .map(|&f| (f, zero.as_slice()))
            .chain((0..pos).map(|q| (self.free[q], self.candidates[self.choice[q]].as_slice())));
        for (f, sf) in earlier {
            let (tf, hf) = self.skel.edges[f];
            let same = (tf, hf) == (t, h) && sf == s.as_slice();
            let reversed = (hf, tf) == (t, h) && sf.iter().zip(s).all(|(a, b)| *a == -b);
            if same || reversed {
                return false;
            }
        }
        true
    }

    /// Next complete assignment passing the pairwise checks.
    fn next_candidate(&mut self) -> Option<Vec<Vec<i64>>> {
        let k = self.free.len();
        let c = self.candidates.len();
        loop {
            if self.finished {
                return None;
            }
            if self.depth == k {
                let mut shifts = vec![vec![0i64; self.dim]; self.skel.edges.len()];
                for (pos, &e) in self.free.iter().enumerate() {
                    shifts[e] = self.candidates[self.choice[pos]].clone();
                }
                if k == 0 {
                    self.finished = true;
                } else {
                    self.depth = k - 1;
                    self.choice[k - 1] += 1;
                }
                return Some(shifts);
            }
            if self.choice[self.depth] >= c {
                if self.depth == 0 {
                    self.finished = true;
                    return None;
                }
                self.choice[self.depth] = 0;
                self.depth -= 1;
                self.choice[self.depth] += 1;
                continue;
            }
            if self.consistent(self.depth) {
                self.depth += 1;
            } else {
                self.choice[self.depth] += 1;
            }
        }
    }
}

impl Iterator for ShiftAssignments {
    type Item = QuotientGraph;

    fn next(&mut self) -> Option<QuotientGraph> {
        while let Some(shifts) = self.next_candidate() {
            let Ok(g) = QuotientGraph::from_skeleton(&self.skel, self.dim, shifts) else { continue };
            if g.is_lift_connected().unwrap_or(false) {
                return Some(g);
            }
        }
        None
    }
}

/// All lift-connected simple shift assignments in [−s_max, s_max] (tree
/// edges gauged to zero), one of each pair related by global negation.
pub fn enumerate_shifts(skel: &Skeleton, n: usize, s_max: usize) -> Result<Vec<QuotientGraph>> {
    let it = ShiftAssignments::new(skel, n, s_max)?;
    let raw = it.raw_count();
    if raw > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge(raw));
    }
    Ok(it
        .filter(|g| {
            let flat: Vec<i64> = g.edges().iter().flat_map(|e| e.shift.iter().copied()).collect();
            let neg: Vec<i64> = flat.iter().map(|s| -s).collect();
            flat <= neg
        })
        .collect())
}

/// A relabeling of a family skeleton that maps it onto itself: new edge i
/// carries `sign[i]` times the shift of old edge `perm[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automorphism {
    pub perm: Vec<usize>,
    pub sign: Vec<i64>,
}

impl Automorphism {
    pub fn apply(&self, g: &QuotientGraph) -> Result<QuotientGraph> {
        let edges = g.edges();
        let shifts = self
            .perm
            .iter()
            .zip(&self.sign)
            .map(|(&p, &s)| edges[p].shift.iter().map(|x| s * x).collect())
            .collect();
        QuotientGraph::from_skeleton(&g.skeleton(), g.dim(), shifts)
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

fn sign_patterns(len: usize) -> Vec<Vec<i64>> {
    (0..1usize << len).map(|m| (0..len).map(|i| if m >> i & 1 == 1 { -1 } else { 1 }).collect()).collect()
}

/// The automorphism group of a skeleton laid out as by [`build_abstract`]:
/// vertex swap, loop and bridge permutations and loop reversals. Other
/// skeletons get the identity only.
pub fn family_automorphisms(skel: &Skeleton) -> Vec<Automorphism> {
    let m = skel.edges.len();
    let identity = vec![Automorphism { perm: (0..m).collect(), sign: vec![1; m] }];
    let Ok(class) = classify(skel) else { return identity };
    if build_abstract(class.tag).ok().as_ref() != Some(skel) {
        return identity;
    }
    let (l, k, two) = match class.tag {
        TopologyTag::Bouquet(l) => (l, 0, false),
        t => match t.two_vertex_parts() {
            Some((l, k)) => (l, k, true),
            None => return identity,
        },
    };
    let loops0: Vec<usize> = (0..l).collect();
    let loops1: Vec<usize> = if two { (l..2 * l).collect() } else { Vec::new() };
    let bridges: Vec<usize> = if two { (2 * l..2 * l + k).collect() } else { Vec::new() };
    let mut out = Vec::new();
    for swap in [false, true] {
        if swap && !two {
            continue;
        }
        for p0 in permutations(&loops0) {
            for p1 in permutations(&loops1) {
                for pb in permutations(&bridges) {
                    let (a, b) = if swap { (&p1, &p0) } else { (&p0, &p1) };
                    let mut perm: Vec<usize> = a.clone();
                    perm.extend(b);
                    perm.extend(&pb);
                    let loop_count = a.len() + b.len();
                    for signs in sign_patterns(loop_count) {
                        let mut sign = signs.clone();
                        sign.extend(std::iter::repeat(if swap { -1 } else { 1 }).take(pb.len()));
                        out.push(Automorphism { perm: perm.clone(), sign });
                    }
                }
            }
        }
    }
    out
}

/// Hermite normal form of the transposed cycle-shift matrix. Assignments
/// on the same skeleton with equal keys differ by a change of lattice basis
/// and vertex translations, so they define the same optimization problem.
pub fn lattice_class_key(g: &QuotientGraph) -> Result<IntMatrix> {
    let m = g.cycle_shift_matrix();
    if m.is_empty() {
        return Ok(Vec::new());
    }
    intmat::hermite_normal_form(&intmat::transpose(&m))
}

/// Representatives of the assignments from [`enumerate_shifts`] up to
/// change of lattice basis, vertex translation and graph automorphism, in
/// enumeration order.
pub fn shift_classes(skel: &Skeleton, n: usize, s_max: usize) -> Result<Vec<QuotientGraph>> {
    let all = enumerate_shifts(skel, n, s_max)?;
    let mut seen: HashMap<IntMatrix, ()> = HashMap::new();
    let mut reps = Vec::new();
    for g in all {
        let key = lattice_class_key(&g)?;
        if seen.insert(key, ()).is_none() {
            reps.push(g);
        }
    }
    let autos = family_automorphisms(skel);
    let mut canon_seen = HashSet::new();
    let mut out = Vec::new();
    for g in reps {
        let mut best: Option<IntMatrix> = None;
        for a in &autos {
            let key = lattice_class_key(&a.apply(&g)?)?;
            if best.as_ref().map_or(true, |b| key < *b) {
                best = Some(key);
            }
        }
        if canon_seen.insert(best.unwrap_or_default()) {
            out.push(g);
        }
    }
    Ok(out)
}

/// Labels a family skeleton with explicit shifts, checking the layout.
pub fn labeled(tag: TopologyTag, n: usize, shifts: Vec<Vec<i64>>) -> Result<QuotientGraph> {
    let skel = build_abstract(tag)?;
    QuotientGraph::from_skeleton(&skel, n, shifts)
}

/// Reverses any bridge stored as 1 → 0 so that a two-vertex graph follows
/// the [`build_abstract`] layout, reordering edges as loops at 0, loops at
/// 1, bridges.
pub fn to_family_layout(g: &QuotientGraph) -> Result<QuotientGraph> {
    let mut loops0 = Vec::new();
    let mut loops1 = Vec::new();
    let mut bridges = Vec::new();
    for e in g.edges() {
        match (e.tail, e.head) {
            (0, 0) => loops0.push(e.clone()),
            (1, 1) => loops1.push(e.clone()),
            (0, 1) => bridges.push(e.clone()),
            (1, 0) => bridges.push(e.reversed()),
            _ => return Err(Error::Unsupported("layout needs at most two vertices".into())),
        }
    }
    let mut edges: Vec<Edge> = loops0;
    edges.extend(loops1);
    edges.extend(bridges);
    QuotientGraph::new(g.dim(), g.vertex_count(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_parsing() {
        assert_eq!("B3".parse::<TopologyTag>().unwrap(), TopologyTag::Bouquet(3));
        assert_eq!("d4".parse::<TopologyTag>().unwrap(), TopologyTag::Dipole(4));
        assert_eq!("D1,3".parse::<TopologyTag>().unwrap(), TopologyTag::DoubleBouquet(1, 3));
        assert_eq!("D1_2".parse::<TopologyTag>().unwrap(), TopologyTag::DoubleBouquet(1, 2));
        assert_eq!("D0,5".parse::<TopologyTag>().unwrap(), TopologyTag::Dipole(5));
        assert!("X3".parse::<TopologyTag>().is_err());
        assert_eq!(TopologyTag::DoubleBouquet(1, 3).to_string(), "D1,3");
    }

    #[test]
    fn build_then_classify() {
        for tag in [TopologyTag::Bouquet(4), TopologyTag::DoubleBouquet(1, 2), TopologyTag::Dipole(5), TopologyTag::DoubleBouquet(2, 3)] {
            let s = build_abstract(tag).unwrap();
            assert_eq!(classify(&s).unwrap().tag, tag);
        }
        assert!(build_abstract(TopologyTag::Bouquet(0)).is_err());
        assert!(build_abstract(TopologyTag::Other).is_err());
    }

    #[test]
    fn circuit_ranks() {
        assert_eq!(circuit_rank(&build_abstract(TopologyTag::Bouquet(3)).unwrap()).unwrap(), 3);
        assert_eq!(circuit_rank(&build_abstract(TopologyTag::DoubleBouquet(1, 3)).unwrap()).unwrap(), 4);
        assert_eq!(circuit_rank(&build_abstract(TopologyTag::Dipole(4)).unwrap()).unwrap(), 3);
        let split = Skeleton { vertex_count: 2, edges: vec![(0, 0), (1, 1)] };
        assert!(matches!(circuit_rank(&split), Err(Error::Disconnected)));
    }

    #[test]
    fn irregular_graph_rejected() {
        let s = Skeleton { vertex_count: 2, edges: vec![(0, 0), (0, 1)] };
        assert!(matches!(classify(&s), Err(Error::NotRegular)));
    }

    #[test]
    fn automorphism_group_sizes() {
        let size = |t| family_automorphisms(&build_abstract(t).unwrap()).len();
        assert_eq!(size(TopologyTag::Bouquet(3)), 48);
        assert_eq!(size(TopologyTag::Dipole(4)), 48);
        assert_eq!(size(TopologyTag::DoubleBouquet(1, 3)), 48);
    }

    #[test]
    fn full_rank_dipole_has_one_class() {
        let skel = build_abstract(TopologyTag::Dipole(4)).unwrap();
        assert_eq!(shift_classes(&skel, 3, 1).unwrap().len(), 1);
    }
}
