//! Closed-form lower bounds for Lⁿ/V, the simplex and pyramid estimates
//! behind them, and equality certificates.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::balance::geometric_median;
use crate::construct::{simplex_net, ExactValue};
use crate::error::{Error, Result};
use crate::geometry::{affine_frame, distance_to_flat, factorial, frame_coordinates, hull_volume, simplex_volume};
use crate::graph::Multigraph;
use crate::intmat;
use crate::lattice::Lattice;
use crate::network::PeriodicNetwork;
use crate::topology::{classify, min_vertex_count, to_family_layout, TopologyTag};

/// Relative tolerance for inequality slack.
pub const SLACK_TOL: f64 = 1e-9;
/// Tolerance for the geometric relations of equality certificates.
pub const STRUCTURE_TOL: f64 = 1e-6;

const FLAT_TOL: f64 = 1e-10;

/// √((n+1)^{n−1} nⁿ), the dipole bound.
pub fn bound_dipole(n: usize) -> f64 {
    let (a, b) = ((n + 1) as f64, n as f64);
    (a.powi(n as i32 - 1) * b.powi(n as i32)).sqrt()
}

fn dipole_exact(n: usize) -> ExactValue {
    ExactValue::new(format!("sqrt({}^{}*{}^{})", n + 1, n - 1, n, n), bound_dipole(n))
}

/// (d/2 − n + 1)·nⁿ for even d ≥ 2n.
pub fn bound_even(n: usize, d: usize) -> Result<f64> {
    if d % 2 != 0 || d < 2 * n {
        return Err(Error::InvalidParameter(format!("even-degree bound needs even d ≥ 2n, got n={n}, d={d}")));
    }
    Ok((d / 2 + 1 - n) as f64 * (n as f64).powi(n as i32))
}

fn even_exact(n: usize, d: usize) -> Result<ExactValue> {
    Ok(ExactValue::new(format!("{}*{n}^{n}", d / 2 + 1 - n), bound_even(n, d)?))
}

/// Bound for n = 3 by degree and quotient type, with its theorem id and
/// whether it is strict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound {
    pub theorem: String,
    pub value: ExactValue,
    pub strict: bool,
}

fn bound(theorem: &str, value: ExactValue, strict: bool) -> Bound {
    Bound { theorem: theorem.into(), value, strict }
}

/// Lower bounds in R³: D₄ → 12√3, D₁,₂ → 27, D₁,₃ → 27√3, D₅ → 405/8,
/// B₃ → 27, and 405/8 (strict) for any irreducible type of degree ≥ 7.
pub fn bound_degree3d(d: usize, topology: TopologyTag) -> Result<Bound> {
    let s3 = 3f64.sqrt();
    let tag = topology.normalized();
    let unsupported = || Error::Unsupported(format!("no three-dimensional bound for degree {d} and {tag}"));
    if d >= 7 {
        let (_, admissible) = min_vertex_count(3, d)?;
        if tag != TopologyTag::Other && admissible.iter().all(|c| c.tag != tag) {
            return Err(unsupported());
        }
        return Ok(bound("high-degree-3d", ExactValue::new("405/8", 405.0 / 8.0), true));
    }
    match (d, tag) {
        (4, TopologyTag::Dipole(4)) => Ok(bound("degree4-dipole", ExactValue::new("12*sqrt(3)", 12.0 * s3), false)),
        (4, TopologyTag::DoubleBouquet(1, 2)) => Ok(bound("degree4-double-bouquet", ExactValue::new("27", 27.0), false)),
        (5, TopologyTag::DoubleBouquet(1, 3)) => Ok(bound("degree5-prism", ExactValue::new("27*sqrt(3)", 27.0 * s3), false)),
        (5, TopologyTag::Dipole(5)) => Ok(bound("degree5-square-pyramid", ExactValue::new("405/8", 405.0 / 8.0), false)),
        (6, TopologyTag::Bouquet(3)) => Ok(bound("even-degree-bouquet", ExactValue::new("1*3^3", 27.0), false)),
        _ => Err(unsupported()),
    }
}

/// Bound values for d = 2n, 2n + 2, …, d_max.
pub fn monotonicity_table(n: usize, d_max: usize) -> Result<Vec<(usize, f64)>> {
    (2 * n..=d_max).step_by(2).map(|d| Ok((d, bound_even(n, d)?))).collect()
}

/// Pyramid with apex p₀ over base points p₁…p_k in a hyperplane, and a
/// probe point q joined to all of them.
#[derive(Debug, Clone)]
pub struct PyramidInstance {
    pub apex: DVector<f64>,
    pub base: Vec<DVector<f64>>,
    pub probe: DVector<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PyramidCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub equality: bool,
    /// dist(q, P) ≤ s/k², the height estimate a balanced probe satisfies.
    pub height_condition: bool,
    /// q is the geometric median of the pyramid vertices.
    pub balanced_probe: bool,
    pub s: f64,
    pub z: f64,
    pub h: f64,
    pub base_volume: f64,
    pub volume: f64,
}

impl PyramidInstance {
    /// Instance whose probe is the point minimizing the star length.
    pub fn with_balanced_probe(apex: DVector<f64>, base: Vec<DVector<f64>>) -> Result<Self> {
        let mut pts = vec![apex.clone()];
        pts.extend(base.iter().cloned());
        let med = geometric_median(&pts, 1e-12, 100_000)?;
        Ok(PyramidInstance { apex, base, probe: med.point })
    }

    pub fn dim(&self) -> usize {
        self.apex.len()
    }
}

/// Evaluates (L(G_q))ⁿ/V(Δ) against (n²/V_E)((k²−1)/k² · ns/(n−1))^{n−1}.
///
/// The estimate is guaranteed when dist(q, P) ≤ s/k², in particular at the
/// balanced probe; for arbitrary probes it can fail, so `holds` is reported
/// rather than assumed. `equality` needs equal sides to 1e-9 relative and
/// the structural conditions: apex perpendicular over q, equal base
/// distances x = k(n−1)/(k²−n)·z, and dist(q, P) = s/k².
pub fn check_pyramid(inst: &PyramidInstance) -> Result<PyramidCheck> {
    let n = inst.dim();
    let k = inst.base.len();
    if n < 2 || k < n {
        return Err(Error::InvalidParameter(format!("pyramid needs k ≥ n ≥ 2, got n={n}, k={k}")));
    }
    if inst.base.iter().chain([&inst.probe]).any(|p| p.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: inst.base.iter().map(|p| p.len()).find(|&l| l != n).unwrap_or(inst.probe.len()) });
    }
    let (origin, frame) = affine_frame(&inst.base, FLAT_TOL);
    if frame.len() != n - 1 {
        return Err(Error::Degenerate(format!("base spans dimension {}, expected {}", frame.len(), n - 1)));
    }
    let coords: Vec<Vec<f64>> = inst.base.iter().map(|p| frame_coordinates(&origin, &frame, p)).collect();
    let flat_err = inst.base.iter().map(|p| distance_to_flat(&origin, &frame, p)).fold(0.0, f64::max);
    let spread = coords.iter().flatten().fold(0.0f64, |a, &x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    if flat_err > 1e-9 * spread {
        return Err(Error::Degenerate("base points are not in a common hyperplane".into()));
    }
    let base_volume = hull_volume(&coords, FLAT_TOL)?;
    let apex_height = distance_to_flat(&origin, &frame, &inst.apex);
    if !(base_volume > 0.0) || !(apex_height > 1e-12 * spread) {
        return Err(Error::Degenerate("pyramid has zero volume".into()));
    }
    let volume = base_volume * apex_height / n as f64;

    let q = &inst.probe;
    let xs: Vec<f64> = inst.base.iter().map(|p| (p - q).norm()).collect();
    let s: f64 = xs.iter().sum();
    let z = (&inst.apex - q).norm();
    let h = distance_to_flat(&origin, &frame, q);
    let nf = n as f64;
    let kf = k as f64;
    let lhs = (s + z).powi(n as i32) / volume;
    let rhs = nf * nf / base_volume * ((kf * kf - 1.0) / (kf * kf) * nf * s / (nf - 1.0)).powi(n as i32 - 1);
    let holds = lhs >= rhs * (1.0 - SLACK_TOL);

    let scale = s.max(z);
    let mean_x = s / kf;
    let equal_x = xs.iter().all(|x| (x - mean_x).abs() <= STRUCTURE_TOL * scale);
    let ratio = (mean_x - kf * (nf - 1.0) / (kf * kf - nf) * z).abs() <= STRUCTURE_TOL * scale;
    let height = (h - s / (kf * kf)).abs() <= STRUCTURE_TOL * scale;
    let apex_dir = &inst.apex - q;
    let perpendicular = frame.iter().all(|f| f.dot(&apex_dir).abs() <= STRUCTURE_TOL * scale);
    let equality = (lhs - rhs).abs() <= SLACK_TOL * rhs && equal_x && ratio && height && perpendicular;

    let mut pts = vec![inst.apex.clone()];
    pts.extend(inst.base.iter().cloned());
    let mut f = DVector::zeros(n);
    let mut on_vertex = false;
    for p in &pts {
        let d = q - p;
        if d.norm() <= 1e-12 * scale {
            on_vertex = true;
        } else {
            f += &d / d.norm();
        }
    }
    let balanced_probe = !on_vertex && f.norm() <= 1e-6;

    Ok(PyramidCheck {
        lhs,
        rhs,
        holds,
        equality,
        height_condition: h <= s / (kf * kf) * (1.0 + 1e-12),
        balanced_probe,
        s,
        z,
        h,
        base_volume,
        volume,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SimplexCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub equality: bool,
}

/// Star from the origin to the vertices of an n-simplex:
/// (Σ|pᵢ|)ⁿ/V(Δ) ≥ n!·√((n+1)^{n−1}nⁿ), with equality exactly for regular
/// simplices centered at the origin.
pub fn check_simplex(points: &[DVector<f64>]) -> Result<SimplexCheck> {
    let n = points.len().saturating_sub(1);
    if n < 2 {
        return Err(Error::InvalidParameter("simplex needs at least three points".into()));
    }
    let vol = simplex_volume(points)?;
    let norms: Vec<f64> = points.iter().map(|p| p.norm()).collect();
    let len: f64 = norms.iter().sum();
    let scale = norms.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    if !(vol > 1e-14 * scale.powi(n as i32)) {
        return Err(Error::Degenerate("simplex has zero volume".into()));
    }
    let lhs = len.powi(n as i32) / vol;
    let rhs = factorial(n) * bound_dipole(n);
    let holds = lhs >= rhs * (1.0 - SLACK_TOL);

    // Regular and centered: equal radii and pairwise cosines of −1/n.
    let r = len / (n + 1) as f64;
    let mut regular = norms.iter().all(|x| (x - r).abs() <= STRUCTURE_TOL * r);
    for i in 0..=n {
        for j in i + 1..=n {
            let c = points[i].dot(&points[j]) / (norms[i] * norms[j]);
            regular &= (c + 1.0 / n as f64).abs() <= STRUCTURE_TOL;
        }
    }
    let equality = regular && (lhs - rhs).abs() <= 1e-10 * rhs;
    Ok(SimplexCheck { lhs, rhs, holds, equality })
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateCheck {
    pub name: String,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EqualityCertificate {
    pub kind: String,
    pub checks: Vec<CertificateCheck>,
    pub passed: bool,
}

impl EqualityCertificate {
    fn new(kind: &str, checks: Vec<(&str, f64)>, tol: f64) -> Self {
        let checks: Vec<CertificateCheck> = checks
            .into_iter()
            .map(|(name, residual)| CertificateCheck { name: name.into(), residual, passed: residual <= tol })
            .collect();
        let passed = checks.iter().all(|c| c.passed);
        EqualityCertificate { kind: kind.into(), checks, passed }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub dim: usize,
    pub degree: Option<usize>,
    pub topology: String,
    pub theorem: Option<String>,
    pub bound: Option<ExactValue>,
    pub strict: bool,
    pub measured: f64,
    pub slack: Option<f64>,
    /// The measured value contradicts the bound (below it, or equal to a
    /// strict bound).
    pub violation: bool,
    pub equality_certificate: Option<EqualityCertificate>,
    pub note: Option<String>,
}

/// Picks the strongest bound applying to the network's (n, d, quotient
/// type), measures the slack and, when the slack is within 1e-6, attaches
/// the matching equality certificate. Networks without an applicable bound
/// get a report with `theorem = None` and a note.
pub fn verify(net: &PeriodicNetwork) -> Result<BoundReport> {
    let n = net.dim();
    let measured = net.length_quotient()?;
    let mut report = BoundReport {
        dim: n,
        degree: None,
        topology: "unknown".into(),
        theorem: None,
        bound: None,
        strict: false,
        measured,
        slack: None,
        violation: false,
        equality_certificate: None,
        note: None,
    };
    let validity = net.validate();
    if !validity.is_valid() {
        report.note = Some(format!("network is not valid: {}", validity.violations.join("; ")));
        return Ok(report);
    }
    let class = classify(net.graph())?;
    let d = class.degree;
    report.degree = Some(d);
    report.topology = class.tag.to_string();
    if d <= n {
        report.note = Some(format!("no bound for degree {d} ≤ dimension {n}"));
        return Ok(report);
    }
    let (min_count, admissible) = min_vertex_count(n, d)?;
    if class.vertex_count != min_count || admissible.iter().all(|c| c.tag != class.tag) {
        report.note = Some(format!("quotient {} is not an irreducible type for n={n}, d={d}", class.tag));
        return Ok(report);
    }

    let mut candidates: Vec<Bound> = Vec::new();
    if n == 3 {
        if let Ok(b) = bound_degree3d(d, class.tag) {
            candidates.push(b);
        }
    }
    if d % 2 == 0 && d >= 2 * n {
        candidates.push(bound("even-degree-bouquet", even_exact(n, d)?, false));
    }
    if d == n + 1 {
        candidates.push(bound("dipole-simplex", dipole_exact(n), false));
    } else {
        candidates.push(bound("degree-above-dim", dipole_exact(n), true));
    }
    // Strongest value first; ties keep the earlier, more specific bound.
    let best = candidates
        .into_iter()
        .fold(None::<Bound>, |acc, b| match acc {
            Some(a) if a.value.value >= b.value.value * (1.0 - 1e-15) => Some(a),
            _ => Some(b),
        })
        .expect("at least one candidate");

    let slack = measured - best.value.value;
    let tol = SLACK_TOL * best.value.value;
    report.violation = if best.strict { slack <= tol } else { slack < -tol };
    if slack <= STRUCTURE_TOL * best.value.value {
        report.equality_certificate = certificate(net, class.tag, &best.theorem)?;
    }
    report.theorem = Some(best.theorem);
    report.strict = best.strict;
    report.bound = Some(best.value);
    report.slack = Some(slack);
    Ok(report)
}

fn certificate(net: &PeriodicNetwork, tag: TopologyTag, theorem: &str) -> Result<Option<EqualityCertificate>> {
    let n = net.dim();
    Ok(match (tag, theorem) {
        (TopologyTag::Dipole(k), "dipole-simplex" | "degree4-dipole") if k == n + 1 => Some(simplex_certificate(net)?),
        (TopologyTag::DoubleBouquet(1, 2), _) if n == 3 => Some(cds_certificate(net)?),
        (TopologyTag::DoubleBouquet(1, 3), _) if n == 3 => Some(prism_certificate(net)?),
        (TopologyTag::Dipole(5), _) if n == 3 => Some(square_pyramid_certificate(net)?),
        (TopologyTag::Bouquet(l), "even-degree-bouquet") if l == n => Some(cubic_certificate(net)?),
        _ => None,
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Bridge vectors leaving vertex 0 and loop vectors at vertices 0 and 1, in
/// family layout.
fn family_parts(net: &PeriodicNetwork) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>, Vec<DVector<f64>>)> {
    let g = to_family_layout(net.graph())?;
    let laid = net.with_graph(g)?;
    let mut loops0 = Vec::new();
    let mut loops1 = Vec::new();
    let mut bridges = Vec::new();
    for (i, e) in laid.graph().edges().iter().enumerate() {
        let v = laid.edge_vector(i)?;
        match (e.tail, e.head) {
            (0, 0) => loops0.push(v),
            (1, 1) => loops1.push(v),
            _ => bridges.push(v),
        }
    }
    Ok((bridges, loops0, loops1))
}

fn cos(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(b) / (a.norm() * b.norm())
}

fn simplex_certificate(net: &PeriodicNetwork) -> Result<EqualityCertificate> {
    let n = net.dim();
    let (bridges, _, _) = family_parts(net)?;
    let lens: Vec<f64> = bridges.iter().map(|b| b.norm()).collect();
    let mean = lens.iter().sum::<f64>() / lens.len() as f64;
    let equal = lens.iter().map(|l| rel(*l, mean)).fold(0.0, f64::max);
    let mut gram = 0.0f64;
    for i in 0..bridges.len() {
        for j in i + 1..bridges.len() {
            gram = gram.max((cos(&bridges[i], &bridges[j]) + 1.0 / n as f64).abs());
        }
    }
    let reference = simplex_net(n)?;
    let similar = lattice_similarity_residual(net.lattice(), reference.lattice())?;
    Ok(EqualityCertificate::new(
        "regular-simplex-star",
        vec![("equal edge lengths", equal), ("regular simplex directions", gram), ("lattice similar to simplex lattice", similar)],
        STRUCTURE_TOL,
    ))
}

/// Loops x₁, x₂ and bridges x₃, x₄: x₁ = x₂ = x₃ + x₄, loops orthogonal to
/// each other and to the bridges, bridges forming one straight segment.
fn cds_certificate(net: &PeriodicNetwork) -> Result<EqualityCertificate> {
    let (bridges, l0, l1) = family_parts(net)?;
    let (a, b) = (&l0[0], &l1[0]);
    let (x1, x2) = (a.norm(), b.norm());
    let x34 = bridges[0].norm() + bridges[1].norm();
    let ortho = [cos(a, b), cos(a, &bridges[0]), cos(b, &bridges[0])].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let straight = 1.0 + cos(&bridges[0], &bridges[1]);
    Ok(EqualityCertificate::new(
        "cds-family",
        vec![("x1 = x2", rel(x1, x2)), ("x1 = x3 + x4", rel(x1, x34)), ("orthogonality", ortho), ("straight bridges", straight)],
        STRUCTURE_TOL,
    ))
}

/// Bridges x₁, x₂, x₃ at 120° in a plane, loops y, z perpendicular to it
/// with 2y + 2z = 3x₁ = 3x₂ = 3x₃ and y = z.
fn prism_certificate(net: &PeriodicNetwork) -> Result<EqualityCertificate> {
    let (br, l0, l1) = family_parts(net)?;
    let xs: Vec<f64> = br.iter().map(|b| b.norm()).collect();
    let (y, z) = (l0[0].norm(), l1[0].norm());
    let normal = br[0].cross(&br[1]);
    let coplanar = if normal.norm() > 0.0 { cos(&normal, &br[2]).abs() } else { 1.0 };
    let perp = [cos(&l0[0], &normal).abs(), cos(&l1[0], &normal).abs()].iter().fold(0.0f64, |m, c| m.max((1.0 - c).abs()));
    let mut angles = 0.0f64;
    for i in 0..3 {
        for j in i + 1..3 {
            angles = angles.max((cos(&br[i], &br[j]) + 0.5).abs());
        }
    }
    Ok(EqualityCertificate::new(
        "hexagonal-prism",
        vec![
            ("2y + 2z = 3x1", rel(2.0 * y + 2.0 * z, 3.0 * xs[0])),
            ("x1 = x2 = x3", rel(xs[0], xs[1]).max(rel(xs[0], xs[2]))),
            ("y = z", rel(y, z)),
            ("coplanar bridges", coplanar),
            ("bridges at 120 degrees", angles),
            ("loops perpendicular to bridge plane", perp),
        ],
        STRUCTURE_TOL,
    ))
}

/// The five neighbors of a vertex form a square pyramid: the apex edge x₀
/// and four base edges x₁…x₄ with x₀ = 13/8·x₁, a square base at distance
/// x₁/4 from the vertex, the apex perpendicular over it, and apex height
/// L/3.
fn square_pyramid_certificate(net: &PeriodicNetwork) -> Result<EqualityCertificate> {
    let (mut br, _, _) = family_parts(net)?;
    let total: f64 = br.iter().map(|b| b.norm()).sum();
    // The apex edge is the longest.
    let apex_idx = (0..5).max_by(|&a, &b| br[a].norm().total_cmp(&br[b].norm())).expect("five bridges");
    let apex = br.remove(apex_idx);
    let x0 = apex.norm();
    let x1 = br.iter().map(|b| b.norm()).sum::<f64>() / 4.0;
    let equal = br.iter().map(|b| rel(b.norm(), x1)).fold(0.0, f64::max);
    let (origin, frame) = affine_frame(&br, FLAT_TOL);
    let planar = if frame.len() == 2 { br.iter().map(|b| distance_to_flat(&origin, &frame, b)).fold(0.0, f64::max) / x1 } else { 1.0 };
    let zero = DVector::zeros(3);
    let dist = if frame.len() >= 2 { distance_to_flat(&origin, &frame[..2], &zero) } else { 0.0 };
    let perp = frame.iter().take(2).map(|f| cos(f, &apex).abs()).fold(0.0, f64::max);
    // Square: the four base points are at equal distance from their
    // centroid and consecutive ones (by angle) are 90° apart.
    let c = br.iter().fold(DVector::zeros(3), |a, b| a + b) / 4.0;
    let arms: Vec<DVector<f64>> = br.iter().map(|b| b - &c).collect();
    let arm = arms.iter().map(|a| a.norm()).sum::<f64>() / 4.0;
    let mut square = arms.iter().map(|a| rel(a.norm(), arm)).fold(0.0, f64::max);
    for i in 0..4 {
        let nearest = (0..4).filter(|&j| j != i).map(|j| cos(&arms[i], &arms[j])).fold(f64::NEG_INFINITY, f64::max);
        square = square.max(nearest.abs());
    }
    let apex_height = x0 + dist;
    Ok(EqualityCertificate::new(
        "square-pyramid",
        vec![
            ("equal base edges", equal),
            ("x0 = 13/8 x1", rel(x0, 13.0 / 8.0 * x1)),
            ("planar base", planar),
            ("dist(q, base) = x1/4", rel(dist, x1 / 4.0)),
            ("apex perpendicular to base", perp),
            ("square base", square),
            ("apex height = L/3", rel(apex_height, total / 3.0)),
        ],
        STRUCTURE_TOL,
    ))
}

/// Loops of a bouquet of degree 2n are orthogonal with equal length.
fn cubic_certificate(net: &PeriodicNetwork) -> Result<EqualityCertificate> {
    let vs = net.edge_vectors();
    let mean = vs.iter().map(|v| v.norm()).sum::<f64>() / vs.len() as f64;
    let equal = vs.iter().map(|v| rel(v.norm(), mean)).fold(0.0, f64::max);
    let mut ortho = 0.0f64;
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            ortho = ortho.max(cos(&vs[i], &vs[j]).abs());
        }
    }
    Ok(EqualityCertificate::new("primitive-lattice", vec![("equal loop lengths", equal), ("orthogonal loops", ortho)], STRUCTURE_TOL))
}

/// Sorted squared lengths of the shortest lattice vectors after scaling to
/// unit covolume, with the cosines between them.
fn shell_signature(lattice: &Lattice, count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = lattice.dim();
    let v = lattice.volume()?;
    let red = lattice.scaled(v.powf(-1.0 / n as f64)).reduce().lattice;
    let range = 2i64;
    let side = (2 * range + 1) as usize;
    let mut vecs: Vec<DVector<f64>> = (0..side.pow(n as u32))
        .map(|mut flat| {
            let s: Vec<i64> = (0..n)
                .map(|_| {
                    let d = (flat % side) as i64 - range;
                    flat /= side;
                    d
                })
                .collect();
            red.vector(&s)
        })
        .filter(|x| x.norm() > 1e-12)
        .collect();
    vecs.sort_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()));
    vecs.truncate(count);
    let norms = vecs.iter().map(|x| x.norm_squared()).collect();
    let mut cosines = Vec::new();
    for i in 0..vecs.len() {
        for j in i + 1..vecs.len() {
            cosines.push(cos(&vecs[i], &vecs[j]));
        }
    }
    cosines.sort_by(f64::total_cmp);
    Ok((norms, cosines))
}

/// Largest discrepancy between the unit-covolume shortest-vector shells
/// (norms and mutual angles) of two lattices; zero for similar lattices.
pub fn lattice_similarity_residual(a: &Lattice, b: &Lattice) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let n = a.dim();
    let count = n * (n + 1);
    let (na, ca) = shell_signature(a, count)?;
    let (nb, cb) = shell_signature(b, count)?;
    let dn = na.iter().zip(&nb).map(|(x, y)| rel(*x, *y)).fold(0.0, f64::max);
    let dc = ca.iter().zip(&cb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(dn.max(dc))
}

/// Integer coefficients expressing the fifth neighbor of a D₅ vertex in
/// terms of three others, and the signed volume they span.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DipoleCoefficients {
    /// λ sorted ascending.
    pub lambda: [i64; 3],
    pub signed_volume: f64,
}

/// With neighbor vectors p₀…p₄ of vertex 0 (bridge order), writes
/// p₄ − p₀ = λ₁(p₁ − p₀) + λ₂(p₂ − p₀) + λ₃(p₃ − p₀) exactly from the shift
/// differences, and 𝒱 = det(p₁ − p₀, p₂ − p₀, p₃ − p₀).
pub fn dipole5_coefficients(net: &PeriodicNetwork) -> Result<DipoleCoefficients> {
    if net.dim() != 3 {
        return Err(Error::Unsupported("dipole coefficients need dimension 3".into()));
    }
    let class = classify(net.graph())?;
    if class.tag != TopologyTag::Dipole(5) || net.graph().vertex_count() != 2 {
        return Err(Error::Unsupported(format!("dipole coefficients need quotient D5, got {}", class.tag)));
    }
    let g = to_family_layout(net.graph())?;
    let shifts = g.shifts();
    let diff = |i: usize| -> Vec<i64> { (0..3).map(|c| shifts[i][c] - shifts[0][c]).collect() };
    let cols = [diff(1), diff(2), diff(3)];
    let a: intmat::IntMatrix = (0..3).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let x = intmat::solve_integral(&a, &diff(4))?;
    let laid = net.with_graph(g)?;
    let p0 = laid.edge_vector(0)?;
    let m = DMatrix::from_fn(3, 3, |r, c| laid.edge_vector(c + 1).expect("bridge")[r] - p0[r]);
    let mut lambda = [x[0], x[1], x[2]];
    lambda.sort();
    Ok(DipoleCoefficients { lambda, signed_volume: m.determinant() })
}
