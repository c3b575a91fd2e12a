//! Balanced constructions for arbitrary (n, d) and the catalog of known
//! minimizers.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::balance::{geometric_median, DEFAULT_MEDIAN_MAX_ITER, DEFAULT_MEDIAN_TOL};
use crate::error::{Error, Result};
use crate::graph::{Edge, QuotientGraph};
use crate::lattice::Lattice;
use crate::network::{PeriodicNetwork, DIRECTION_TOL};
use crate::topology::TopologyTag;

/// Candidate shifts have entries in [−POOL_RANGE, POOL_RANGE].
pub const POOL_RANGE: i64 = 2;

/// Nonzero shifts with entries in [−2, 2], by increasing length of the
/// lattice vector; equal lengths put the lexicographically larger shift
/// first.
pub fn lattice_vector_pool(lattice: &Lattice) -> Vec<Vec<i64>> {
    let n = lattice.dim();
    let side = (2 * POOL_RANGE + 1) as usize;
    let total = side.pow(n as u32);
    let scale = lattice.columns().iter().map(|c| c.iter().map(|x| x * x).sum::<f64>()).fold(0.0, f64::max);
    let mut keyed: Vec<(i64, Vec<i64>)> = (0..total)
        .map(|mut flat| {
            (0..n)
                .map(|_| {
                    let d = (flat % side) as i64 - POOL_RANGE;
                    flat /= side;
                    d
                })
                .collect::<Vec<i64>>()
        })
        .filter(|s| s.iter().any(|&x| x != 0))
        .map(|s| {
            // Quantized squared length so that ties compare exactly.
            let q = (lattice.vector(&s).norm_squared() / scale * (1u64 << 36) as f64).round() as i64;
            (q, s)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)));
    keyed.into_iter().map(|(_, s)| s).collect()
}

fn parallel(u: &DVector<f64>, v: &DVector<f64>) -> bool {
    let a = u.normalize();
    let b = v.normalize();
    (&a - &b).amax() < DIRECTION_TOL || (&a + &b).amax() < DIRECTION_TOL
}

fn unit_shift(n: usize, i: usize) -> Vec<i64> {
    let mut s = vec![0; n];
    s[i] = 1;
    s
}

/// Fills `loops` up to `count` shifts with pool vectors not parallel to any
/// direction already present at the vertex.
fn supplement_loops(
    lattice: &Lattice,
    pool: &[Vec<i64>],
    loops: &mut Vec<Vec<i64>>,
    fixed_dirs: &[DVector<f64>],
    count: usize,
    admit: impl Fn(&[i64]) -> bool,
) -> Result<()> {
    let mut dirs: Vec<DVector<f64>> = fixed_dirs.to_vec();
    dirs.extend(loops.iter().map(|s| lattice.vector(s)));
    for s in pool {
        if loops.len() >= count {
            break;
        }
        if !admit(s) {
            continue;
        }
        let v = lattice.vector(s);
        if dirs.iter().any(|d| parallel(d, &v)) {
            continue;
        }
        dirs.push(v);
        loops.push(s.clone());
    }
    if loops.len() < count {
        return Err(Error::ConstructionFailed(format!(
            "only {} of {count} non-parallel loop vectors available",
            loops.len()
        )));
    }
    Ok(())
}

/// One vertex with d/2 loops: the n generators plus further non-parallel
/// lattice vectors. Quotient B_{d/2}.
pub fn construct_bouquet(n: usize, d: usize, lattice: &Lattice) -> Result<PeriodicNetwork> {
    if d % 2 != 0 || d < 2 * n {
        return Err(Error::InvalidParameter(format!("bouquet needs even d ≥ 2n, got n={n}, d={d}")));
    }
    check_dim(n, lattice)?;
    let mut loops: Vec<Vec<i64>> = (0..n).map(|i| unit_shift(n, i)).collect();
    let pool = lattice_vector_pool(lattice);
    supplement_loops(lattice, &pool, &mut loops, &[], d / 2, |_| true)?;
    let edges = loops.into_iter().map(|s| Edge::new(0, 0, s)).collect();
    let g = QuotientGraph::new(n, 1, edges)?;
    PeriodicNetwork::new(g, lattice.clone(), vec![DVector::zeros(n)])
}

fn check_dim(n: usize, lattice: &Lattice) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("dimension {n} < 2")));
    }
    if lattice.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: lattice.dim() });
    }
    Ok(())
}

/// Assembles a two-vertex network in family layout.
fn two_vertex(
    n: usize,
    lattice: Lattice,
    q: DVector<f64>,
    loops0: Vec<Vec<i64>>,
    loops1: Vec<Vec<i64>>,
    bridges: Vec<Vec<i64>>,
) -> Result<PeriodicNetwork> {
    let mut edges: Vec<Edge> = loops0.into_iter().map(|s| Edge::new(0, 0, s)).collect();
    edges.extend(loops1.into_iter().map(|s| Edge::new(1, 1, s)));
    edges.extend(bridges.into_iter().map(|s| Edge::new(0, 1, s)));
    let g = QuotientGraph::new(n, 2, edges)?;
    PeriodicNetwork::new(g, lattice, vec![DVector::zeros(n), q])
}

/// Odd degree: the Fermat point q of (0, g₁, g₂) joined to those three
/// points, plus (d−3)/2 loops at each vertex. Quotient D_{(d−3)/2,3}.
///
/// g₁, g₂ are Lagrange-Gauss reduced first; the network carries the reduced
/// basis.
pub fn construct_odd(n: usize, d: usize, lattice: &Lattice) -> Result<PeriodicNetwork> {
    if d % 2 != 1 || d < n + 1 {
        return Err(Error::InvalidParameter(format!("odd construction needs odd d ≥ n+1, got n={n}, d={d}")));
    }
    check_dim(n, lattice)?;
    let lattice = lattice.reduce_pair(0, 1).lattice;
    let g1 = lattice.generator(0);
    let g2 = lattice.generator(1);
    let corners = [DVector::zeros(n), g1.clone(), g2.clone()];
    let med = geometric_median(&corners, DEFAULT_MEDIAN_TOL * g1.norm().max(1.0), DEFAULT_MEDIAN_MAX_ITER)?;
    if let Some(i) = med.at_vertex {
        return Err(Error::ConstructionFailed(format!("Fermat point coincides with triangle corner {i}")));
    }
    let q = med.point;
    let neg = |i: usize| {
        let mut s = vec![0; n];
        s[i] = -1;
        s
    };
    let bridges = vec![vec![0; n], neg(0), neg(1)];
    let bridge_dirs = [q.clone(), &q - &g1, &q - &g2];

    let per_vertex = (d - 3) / 2;
    let (mut loops0, mut loops1) = (Vec::new(), Vec::new());
    for (j, i) in (2..n).enumerate() {
        if j % 2 == 0 {
            loops0.push(unit_shift(n, i));
        } else {
            loops1.push(unit_shift(n, i));
        }
    }
    let pool = lattice_vector_pool(&lattice);
    let out_of_plane = |s: &[i64]| n == 2 || s[2..].iter().any(|&x| x != 0);
    supplement_loops(&lattice, &pool, &mut loops0, &bridge_dirs, per_vertex, out_of_plane)?;
    supplement_loops(&lattice, &pool, &mut loops1, &bridge_dirs, per_vertex, out_of_plane)?;
    two_vertex(n, lattice, q, loops0, loops1, bridges)
}

/// Even degree below 2n: vertex q = q_param·g₁ splits the segment [0, g₁]
/// into two bridges, plus d/2 − 1 loops at each vertex. Quotient
/// D_{d/2−1,2}.
pub fn construct_even_two_vertex(n: usize, d: usize, lattice: &Lattice, q_param: f64) -> Result<PeriodicNetwork> {
    if d % 2 != 0 || d < n + 1 {
        return Err(Error::InvalidParameter(format!("two-vertex even construction needs even d ≥ n+1, got n={n}, d={d}")));
    }
    if !(q_param > 0.0 && q_param < 1.0) {
        return Err(Error::InvalidParameter(format!("q_param {q_param} outside (0, 1)")));
    }
    check_dim(n, lattice)?;
    let g1 = lattice.generator(0);
    let q = &g1 * q_param;
    let mut back = vec![0; n];
    back[0] = -1;
    let bridges = vec![vec![0; n], back];

    let per_vertex = d / 2 - 1;
    let (mut loops0, mut loops1) = (Vec::new(), Vec::new());
    for (j, i) in (1..n).enumerate() {
        if j % 2 == 0 {
            loops0.push(unit_shift(n, i));
        } else {
            loops1.push(unit_shift(n, i));
        }
    }
    let pool = lattice_vector_pool(lattice);
    supplement_loops(lattice, &pool, &mut loops0, &[g1.clone()], per_vertex, |_| true)?;
    supplement_loops(lattice, &pool, &mut loops1, &[g1], per_vertex, |_| true)?;
    two_vertex(n, lattice.clone(), q, loops0, loops1, bridges)
}

/// Picks the balanced construction for (n, d): bouquet for even d ≥ 2n,
/// the odd construction for odd d, the two-vertex even one otherwise.
pub fn construct_for(n: usize, d: usize, lattice: &Lattice) -> Result<PeriodicNetwork> {
    if d % 2 == 0 && d >= 2 * n {
        construct_bouquet(n, d, lattice)
    } else if d % 2 == 1 {
        construct_odd(n, d, lattice)
    } else {
        construct_even_two_vertex(n, d, lattice, 0.5)
    }
}

/// The quotient type produced by [`construct_for`].
pub fn construction_tag(n: usize, d: usize) -> TopologyTag {
    if d % 2 == 0 && d >= 2 * n {
        TopologyTag::Bouquet(d / 2)
    } else if d % 2 == 1 {
        TopologyTag::DoubleBouquet((d - 3) / 2, 3).normalized()
    } else {
        TopologyTag::DoubleBouquet(d / 2 - 1, 2).normalized()
    }
}

/// A closed-form number with its expression.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactValue {
    pub expr: String,
    pub value: f64,
}

impl ExactValue {
    pub fn new(expr: impl Into<String>, value: f64) -> Self {
        ExactValue { expr: expr.into(), value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub dim: usize,
    pub degree: usize,
    pub topology: String,
    pub params: Vec<(String, f64)>,
    pub expected_quotient: ExactValue,
}

pub const CATALOG_NAMES: [&str; 9] = ["hcb", "sql", "dia", "cds", "bnn", "sqp", "pcu", "simplex_net", "cube_net"];

/// Parameters of a catalog request. `t` is the cds parameter, `dim` the
/// dimension of pcu / cube_net / simplex_net.
#[derive(Debug, Clone, Copy, Default)]
pub struct CatalogParams {
    pub t: Option<f64>,
    pub dim: Option<usize>,
}

fn net(dim: usize, vertex_count: usize, edges: Vec<Edge>, basis: &[Vec<f64>], positions: &[Vec<f64>]) -> Result<PeriodicNetwork> {
    let g = QuotientGraph::new(dim, vertex_count, edges)?;
    PeriodicNetwork::from_coordinates(g, Lattice::from_columns(basis)?, positions)
}

fn e(tail: usize, head: usize, shift: &[i64]) -> Edge {
    Edge::new(tail, head, shift.to_vec())
}

/// The dipole over a regular n-simplex: vertex 0 at the circumcenter,
/// vertex 1 at v₀, lattice gᵢ = vᵢ − v₀.
pub fn simplex_net(n: usize) -> Result<PeriodicNetwork> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("simplex_net needs n ≥ 2, got {n}")));
    }
    let verts = regular_simplex(n)?;
    let v0 = verts[0].clone();
    let basis: Vec<Vec<f64>> = verts[1..].iter().map(|v| (v - &v0).iter().copied().collect()).collect();
    let mut edges = vec![Edge::new(0, 1, vec![0; n])];
    edges.extend((0..n).map(|i| Edge::new(0, 1, unit_shift(n, i))));
    let g = QuotientGraph::new(n, 2, edges)?;
    PeriodicNetwork::new(g, Lattice::from_columns(&basis)?, vec![DVector::zeros(n), v0])
}

/// Vertices v₀, …, vₙ of a regular simplex with circumradius 1 centered at
/// the origin, from the Cholesky factor of the Gram matrix of v₁, …, vₙ.
pub fn regular_simplex(n: usize) -> Result<Vec<DVector<f64>>> {
    let gram = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { -1.0 / n as f64 });
    let chol = gram.cholesky().ok_or_else(|| Error::ConstructionFailed("simplex Gram matrix not positive definite".into()))?;
    let l = chol.l();
    let vs: Vec<DVector<f64>> = (0..n).map(|i| l.row(i).transpose()).collect();
    let v0 = -vs.iter().fold(DVector::zeros(n), |a, v| a + v);
    let mut out = vec![v0];
    out.extend(vs);
    Ok(out)
}

/// One vertex with the n unit loops of the identity lattice.
pub fn cube_net(n: usize) -> Result<PeriodicNetwork> {
    if n < 1 {
        return Err(Error::InvalidParameter("cube_net needs n ≥ 1".into()));
    }
    let edges = (0..n).map(|i| Edge::new(0, 0, unit_shift(n, i))).collect();
    let g = QuotientGraph::new(n, 1, edges)?;
    PeriodicNetwork::new(g, Lattice::identity(n), vec![DVector::zeros(n)])
}

pub fn cds(t: f64) -> Result<PeriodicNetwork> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("cds parameter {t} outside (0, 1)")));
    }
    let id = [vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
    net(
        3,
        2,
        vec![e(0, 0, &[1, 0, 0]), e(1, 1, &[0, 1, 0]), e(0, 1, &[0, 0, 0]), e(0, 1, &[0, 0, -1])],
        &id,
        &[vec![0.0; 3], vec![0.0, 0.0, t]],
    )
}

fn dipole_value(n: usize) -> ExactValue {
    let v = (((n + 1) as f64).powi(n as i32 - 1) * (n as f64).powi(n as i32)).sqrt();
    ExactValue::new(format!("sqrt({}^{}*{}^{})", n + 1, n - 1, n, n), v)
}

/// Builds a catalog network and its metadata.
pub fn catalog(name: &str, params: CatalogParams) -> Result<(PeriodicNetwork, CatalogEntry)> {
    let s3 = 3f64.sqrt();
    let entry = |name: &str, dim, degree, topology: TopologyTag, params: Vec<(String, f64)>, exp: ExactValue| CatalogEntry {
        name: name.to_string(),
        dim,
        degree,
        topology: topology.to_string(),
        params,
        expected_quotient: exp,
    };
    let dim_param = |default: usize| -> Result<usize> {
        let n = params.dim.unwrap_or(default);
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension {n} < 2")));
        }
        Ok(n)
    };
    match name {
        "hcb" => {
            let nw = net(
                2,
                2,
                vec![e(0, 1, &[0, 0]), e(0, 1, &[-1, 0]), e(0, 1, &[0, -1])],
                &[vec![1.5, s3 / 2.0], vec![1.5, -s3 / 2.0]],
                &[vec![0.0, 0.0], vec![1.0, 0.0]],
            )?;
            Ok((nw, entry(name, 2, 3, TopologyTag::Dipole(3), vec![], ExactValue::new("2*sqrt(3)", 2.0 * s3))))
        }
        "sql" => {
            let nw = cube_net(2)?;
            Ok((nw, entry(name, 2, 4, TopologyTag::Bouquet(2), vec![], ExactValue::new("4", 4.0))))
        }
        "pcu" | "cube_net" => {
            let n = dim_param(3)?;
            let nw = cube_net(n)?;
            let v = (n as f64).powi(n as i32);
            let exp = ExactValue::new(format!("{n}^{n}"), v);
            Ok((nw, entry(name, n, 2 * n, TopologyTag::Bouquet(n), vec![("dim".into(), n as f64)], exp)))
        }
        "dia" => {
            let nw = net(
                3,
                2,
                vec![e(0, 1, &[0, 0, 0]), e(0, 1, &[-1, 0, 0]), e(0, 1, &[0, -1, 0]), e(0, 1, &[0, 0, -1])],
                &[vec![0.5, 0.5, 0.0], vec![0.5, 0.0, 0.5], vec![0.0, 0.5, 0.5]],
                &[vec![0.0; 3], vec![0.25; 3]],
            )?;
            Ok((nw, entry(name, 3, 4, TopologyTag::Dipole(4), vec![], ExactValue::new("12*sqrt(3)", 12.0 * s3))))
        }
        "cds" => {
            let t = params.t.unwrap_or(0.5);
            let nw = cds(t)?;
            let tag = TopologyTag::DoubleBouquet(1, 2);
            Ok((nw, entry(name, 3, 4, tag, vec![("t".into(), t)], ExactValue::new("27", 27.0))))
        }
        "bnn" => {
            let nw = net(
                3,
                2,
                vec![e(0, 0, &[0, 0, 1]), e(1, 1, &[0, 0, 1]), e(0, 1, &[0, 0, 0]), e(0, 1, &[-1, 1, 0]), e(0, 1, &[-1, 0, 0])],
                &[vec![-1.5, s3 / 2.0, 0.0], vec![0.0, s3, 0.0], vec![0.0, 0.0, 0.75]],
                &[vec![0.0; 3], vec![-1.0, 0.0, 0.0]],
            )?;
            let tag = TopologyTag::DoubleBouquet(1, 3);
            Ok((nw, entry(name, 3, 5, tag, vec![], ExactValue::new("27*sqrt(3)", 27.0 * s3))))
        }
        "sqp" => {
            let rho = 15f64.sqrt() / 4.0;
            let h = -15.0 / 8.0;
            let nw = net(
                3,
                2,
                vec![e(0, 1, &[0, 0, 0]), e(0, 1, &[1, 0, 0]), e(0, 1, &[0, 1, 0]), e(0, 1, &[0, 0, 1]), e(0, 1, &[1, -1, 1])],
                &[vec![rho, 0.0, h], vec![0.0, rho, h], vec![-rho, 0.0, h]],
                &[vec![0.0; 3], vec![0.0, 0.0, 13.0 / 8.0]],
            )?;
            Ok((nw, entry(name, 3, 5, TopologyTag::Dipole(5), vec![], ExactValue::new("405/8", 405.0 / 8.0))))
        }
        "simplex_net" => {
            let n = dim_param(3)?;
            let nw = simplex_net(n)?;
            let tag = TopologyTag::Dipole(n + 1);
            Ok((nw, entry(name, n, n + 1, tag, vec![("dim".into(), n as f64)], dipole_value(n))))
        }
        other => Err(Error::UnknownCatalogName(other.to_string())),
    }
}

/// One row of the length-quotient summary table.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub name: String,
    pub degree: usize,
    pub topology: String,
    pub quotient: f64,
    /// (Lⁿ/V)^{1/n} = L/V^{1/n}.
    pub root: f64,
    /// `root` relative to the first row, in percent.
    pub percent: f64,
}

/// Summary rows: for n = 3 the minimizers of degree 4, 5 and 6; otherwise
/// the simplex dipole and the cube bouquet in dimension n.
pub fn summary_table(n: usize) -> Result<Vec<TableRow>> {
    let picks: Vec<(&str, CatalogParams)> = if n == 3 {
        ["dia", "cds", "bnn", "sqp", "pcu"].iter().map(|&s| (s, CatalogParams::default())).collect()
    } else {
        let p = CatalogParams { t: None, dim: Some(n) };
        vec![("simplex_net", p), ("cube_net", p)]
    };
    let mut rows = Vec::new();
    for (name, p) in picks {
        let (nw, entry) = catalog(name, p)?;
        let quotient = nw.length_quotient()?;
        let root = quotient.powf(1.0 / n as f64);
        rows.push(TableRow { name: name.into(), degree: entry.degree, topology: entry.topology, quotient, root, percent: 0.0 });
    }
    let base = rows[0].root;
    for r in rows.iter_mut() {
        r.percent = 100.0 * r.root / base;
    }
    Ok(rows)
}
