//! Minimization of Lⁿ/V over vertex positions and lattice basis for fixed
//! shift labels, with seeded multistart over shift assignments.
//!
//! The objective is f = n·ln L − ln|det B|. Vertex 0 is pinned at the
//! origin, the basis is rescaled to |det B| = 1 after every accepted step
//! and size-reduced when it becomes skewed.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Multigraph, QuotientGraph};
use crate::lattice::{apply_int, Lattice};
use crate::network::PeriodicNetwork;
use crate::topology::{build_abstract, min_vertex_count, shift_classes, TopologyTag};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizeConfig {
    pub max_iter: usize,
    pub g_tol: f64,
    /// Edges shorter than ε_edge·V^{1/n} end a run as collapsed.
    pub eps_edge: f64,
    pub restarts: usize,
    pub seed: u64,
    pub s_max: usize,
    /// First trial step, relative to the gradient max-norm.
    pub initial_step: f64,
    pub backtrack: f64,
    pub armijo_c: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            max_iter: 50_000,
            g_tol: 1e-9,
            eps_edge: 1e-4,
            restarts: 50,
            seed: 0,
            s_max: 1,
            initial_step: 0.05,
            backtrack: 0.5,
            armijo_c: 1e-4,
        }
    }
}

impl OptimizeConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.max_iter == 0 || self.restarts == 0 || self.s_max == 0 {
            return bad("max_iter, restarts and s_max must be positive");
        }
        if !(self.g_tol > 0.0 && self.initial_step > 0.0) {
            return bad("g_tol and initial_step must be positive");
        }
        if !(self.eps_edge > 0.0 && self.eps_edge < 0.5) {
            return bad("eps_edge must lie in (0, 0.5)");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0 && self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("backtrack and armijo_c must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    CollapsedEdge,
    DegenerateLattice,
    MaxIter,
}

/// Outcome of one descent.
#[derive(Debug, Clone)]
pub struct Descent {
    pub network: PeriodicNetwork,
    pub value: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub gradient_norm: f64,
    /// Every accepted step decreased f.
    pub monotone: bool,
    /// Largest change of f caused by the volume rescaling.
    pub max_gauge_drift: f64,
    /// Backtracking found no acceptable step (floating-point floor).
    pub line_search_failed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RestartTrace {
    pub class: usize,
    pub restart: usize,
    pub final_value: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub monotone: bool,
    pub max_gauge_drift: f64,
    pub line_search_failed: bool,
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub best: PeriodicNetwork,
    pub best_value: f64,
    pub best_termination: Termination,
    /// Position of the best run in `traces`.
    pub best_index: usize,
    /// Shift assignment the best run started from.
    pub assignment: QuotientGraph,
    /// Number of inequivalent shift assignments searched.
    pub classes: usize,
    pub traces: Vec<RestartTrace>,
}

// Flat working representation.

struct Problem {
    n: usize,
    nv: usize,
    tails: Vec<usize>,
    heads: Vec<usize>,
    shifts: Vec<i64>,
}

impl Problem {
    fn new(g: &QuotientGraph) -> Self {
        Problem {
            n: g.dim(),
            nv: g.vertex_count(),
            tails: g.edges().iter().map(|e| e.tail).collect(),
            heads: g.edges().iter().map(|e| e.head).collect(),
            shifts: g.edges().iter().flat_map(|e| e.shift.iter().copied()).collect(),
        }
    }

    fn m(&self) -> usize {
        self.tails.len()
    }

    /// Edge vectors into `w` (m·n).
    fn edge_vectors(&self, pos: &[f64], b: &[f64], w: &mut [f64]) {
        let n = self.n;
        for e in 0..self.m() {
            let (t, h) = (self.tails[e], self.heads[e]);
            for i in 0..n {
                let mut v = pos[h * n + i] - pos[t * n + i];
                for j in 0..n {
                    let s = self.shifts[e * n + j];
                    if s != 0 {
                        v += b[i + n * j] * s as f64;
                    }
                }
                w[e * n + i] = v;
            }
        }
    }
}

/// LU decomposition with partial pivoting of an n×n column-major matrix.
/// Returns the determinant and the inverse, or None if singular.
fn det_inv(a: &[f64], n: usize) -> Option<(f64, Vec<f64>)> {
    let mut lu = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| lu[x + n * k].abs().total_cmp(&lu[y + n * k].abs()))?;
        if lu[p + n * k] == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                lu.swap(p + n * j, k + n * j);
            }
            perm.swap(p, k);
            det = -det;
        }
        let piv = lu[k + n * k];
        det *= piv;
        for i in k + 1..n {
            let f = lu[i + n * k] / piv;
            lu[i + n * k] = f;
            for j in k + 1..n {
                lu[i + n * j] -= f * lu[k + n * j];
            }
        }
    }
    let mut inv = vec![0.0; n * n];
    for c in 0..n {
        // Solve A x = e_c.
        let mut x: Vec<f64> = (0..n).map(|i| if perm[i] == c { 1.0 } else { 0.0 }).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= lu[i + n * j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= lu[i + n * j] * x[j];
            }
            x[i] /= lu[i + n * i];
        }
        for i in 0..n {
            inv[i + n * c] = x[i];
        }
    }
    Some((det, inv))
}

fn det_only(a: &[f64], n: usize) -> f64 {
    det_inv(a, n).map_or(0.0, |(d, _)| d)
}

struct Eval {
    w: Vec<f64>,
    lens: Vec<f64>,
    length: f64,
    det: f64,
    inv: Vec<f64>,
}

impl Eval {
    fn f(&self, n: usize) -> f64 {
        n as f64 * self.length.ln() - self.det.abs().ln()
    }
}

fn evaluate(p: &Problem, pos: &[f64], b: &[f64]) -> Option<Eval> {
    let n = p.n;
    let mut w = vec![0.0; p.m() * n];
    p.edge_vectors(pos, b, &mut w);
    let lens: Vec<f64> = w.chunks(n).map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let length = lens.iter().sum();
    let (det, inv) = det_inv(b, n)?;
    Some(Eval { w, lens, length, det, inv })
}

/// Gradient of f: positions (nv·n, vertex 0 entries zero when pinned) then
/// basis (n·n column-major).
fn gradient(p: &Problem, ev: &Eval, pin: bool) -> Vec<f64> {
    let n = p.n;
    let mut g = vec![0.0; p.nv * n + n * n];
    let scale = n as f64 / ev.length;
    for e in 0..p.m() {
        let len = ev.lens[e];
        let (t, h) = (p.tails[e], p.heads[e]);
        for i in 0..n {
            let u = scale * ev.w[e * n + i] / len;
            g[h * n + i] += u;
            g[t * n + i] -= u;
            for j in 0..n {
                let s = p.shifts[e * n + j];
                if s != 0 {
                    g[p.nv * n + i + n * j] += u * s as f64;
                }
            }
        }
    }
    // − ∂ ln|det B| / ∂B = −B^{-T}.
    for i in 0..n {
        for j in 0..n {
            g[p.nv * n + i + n * j] -= ev.inv[j + n * i];
        }
    }
    if pin {
        g[..n].iter_mut().for_each(|x| *x = 0.0);
    }
    g
}

/// f(x + step) − f(x) evaluated without cancellation.
fn objective_change(p: &Problem, ev: &Eval, step: &[f64]) -> Option<f64> {
    let n = p.n;
    let off = p.nv * n;
    let mut dl = 0.0;
    for e in 0..p.m() {
        let (t, h) = (p.tails[e], p.heads[e]);
        let mut dot = 0.0;
        let mut dd = 0.0;
        let mut new2 = 0.0;
        for i in 0..n {
            let mut d = step[h * n + i] - step[t * n + i];
            for j in 0..n {
                let s = p.shifts[e * n + j];
                if s != 0 {
                    d += step[off + i + n * j] * s as f64;
                }
            }
            let w = ev.w[e * n + i];
            dot += w * d;
            dd += d * d;
            new2 += (w + d) * (w + d);
        }
        let denom = new2.sqrt() + ev.lens[e];
        if denom == 0.0 {
            return None;
        }
        dl += (2.0 * dot + dd) / denom;
    }
    // det(B + ΔB)/det B = det(I + B⁻¹ΔB).
    let mut e_mat = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut v = if i == j { 1.0 } else { 0.0 };
            for k in 0..n {
                v += ev.inv[i + n * k] * step[off + k + n * j];
            }
            e_mat[i + n * j] = v;
        }
    }
    let ratio = det_only(&e_mat, n);
    if !(ratio > 0.0) {
        // Crossing det = 0 is never a descent step.
        return None;
    }
    Some(n as f64 * (dl / ev.length).ln_1p() - ratio.ln())
}

/// f = n·ln L − ln V of a network.
pub fn objective(net: &PeriodicNetwork) -> Result<f64> {
    let n = net.dim() as f64;
    Ok(n * net.length()?.ln() - net.volume()?.ln())
}

/// Analytic gradient of f with respect to every vertex position and every
/// basis entry (row i, column j of the returned matrix is ∂f/∂B_ij).
pub fn objective_gradient(net: &PeriodicNetwork) -> Result<(Vec<DVector<f64>>, DMatrix<f64>)> {
    net.length()?;
    let p = Problem::new(net.graph());
    let (pos, b) = flatten(net);
    let ev = evaluate(&p, &pos, &b).ok_or(Error::SingularBasis)?;
    let g = gradient(&p, &ev, false);
    let n = p.n;
    let gp = (0..p.nv).map(|v| DVector::from_column_slice(&g[v * n..(v + 1) * n])).collect();
    let gb = DMatrix::from_column_slice(n, n, &g[p.nv * n..]);
    Ok((gp, gb))
}

fn flatten(net: &PeriodicNetwork) -> (Vec<f64>, Vec<f64>) {
    let pos = net.positions().iter().flat_map(|p| p.iter().copied()).collect();
    let b = net.lattice().basis().as_slice().to_vec();
    (pos, b)
}

fn rebuild(p: &Problem, template: &QuotientGraph, pos: &[f64], b: &[f64]) -> Result<PeriodicNetwork> {
    let n = p.n;
    let mut edges = template.edges().to_vec();
    for (e, edge) in edges.iter_mut().enumerate() {
        edge.shift = p.shifts[e * n..(e + 1) * n].to_vec();
    }
    let g = QuotientGraph::new(n, p.nv, edges)?;
    let lattice = Lattice::new(DMatrix::from_column_slice(n, n, b))?;
    let positions = pos.chunks(n).map(DVector::from_column_slice).collect();
    PeriodicNetwork::new(g, lattice, positions)
}

fn column_norms(b: &[f64], n: usize) -> Vec<f64> {
    b.chunks(n).map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect()
}

fn condition(b: &[f64], n: usize) -> f64 {
    let m = DMatrix::from_column_slice(n, n, b);
    let sv = m.singular_values();
    let lo = sv.min();
    if lo > 0.0 {
        sv.max() / lo
    } else {
        f64::INFINITY
    }
}

/// Steepest descent with Barzilai-Borwein trial steps and Armijo
/// backtracking from the given network.
pub fn descend(start: &PeriodicNetwork, cfg: &OptimizeConfig) -> Result<Descent> {
    cfg.check()?;
    let mut p = Problem::new(start.graph());
    let n = p.n;
    let (mut pos, mut b) = flatten(start);
    // Translation gauge: vertex 0 at the origin.
    let p0: Vec<f64> = pos[..n].to_vec();
    for v in 0..p.nv {
        for i in 0..n {
            pos[v * n + i] -= p0[i];
        }
    }
    rescale(&mut pos, &mut b, n)?;

    let mut monotone = true;
    let mut max_drift = 0.0f64;
    let mut line_search_failed = false;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None; // (step, gradient)
    let mut alpha_prev = 0.0;
    let mut iterations = 0;
    let termination;
    let mut gnorm;

    loop {
        let ev = evaluate(&p, &pos, &b).ok_or(Error::SingularBasis)?;
        let vol_scale = ev.det.abs().powf(1.0 / n as f64);
        let min_len = ev.lens.iter().copied().fold(f64::INFINITY, f64::min);
        let g = gradient(&p, &ev, true);
        gnorm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if min_len < cfg.eps_edge * vol_scale {
            termination = Termination::CollapsedEdge;
            break;
        }
        if gnorm <= cfg.g_tol {
            termination = Termination::Converged;
            break;
        }
        if iterations % 10 == 0 && condition(&b, n) > 1e6 {
            termination = Termination::DegenerateLattice;
            break;
        }
        if iterations >= cfg.max_iter {
            termination = Termination::MaxIter;
            break;
        }
        let g2: f64 = g.iter().map(|x| x * x).sum();
        let mut alpha = match &prev {
            Some((s, gp)) => {
                let y: Vec<f64> = g.iter().zip(gp).map(|(a, b)| a - b).collect();
                let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
                let ss: f64 = s.iter().map(|x| x * x).sum();
                if sy > 0.0 {
                    ss / sy
                } else {
                    alpha_prev * 2.0
                }
            }
            None => cfg.initial_step / gnorm,
        };
        // Never move an edge endpoint by more than a fraction of the
        // shortest edge in one trial.
        alpha = alpha.min(0.5 * min_len / gnorm);

        let mut accepted = None;
        for _ in 0..80 {
            let step: Vec<f64> = g.iter().map(|x| -alpha * x).collect();
            if let Some(df) = objective_change(&p, &ev, &step) {
                if df <= -cfg.armijo_c * alpha * g2 {
                    accepted = Some((step, df));
                    break;
                }
            }
            alpha *= cfg.backtrack;
        }
        let Some((step, df)) = accepted else {
            line_search_failed = true;
            termination = Termination::MaxIter;
            break;
        };
        monotone &= df <= 0.0;
        for (x, s) in pos.iter_mut().chain(b.iter_mut()).zip(&step) {
            *x += s;
        }
        let before = evaluate(&p, &pos, &b).ok_or(Error::SingularBasis)?.f(n);
        rescale(&mut pos, &mut b, n)?;
        let after = evaluate(&p, &pos, &b).ok_or(Error::SingularBasis)?.f(n);
        max_drift = max_drift.max((after - before).abs());
        alpha_prev = alpha;
        prev = Some((step, g));

        let norms = column_norms(&b, n);
        let (lo, hi) = norms.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        if hi > 3.0 * lo {
            reduce_basis(&mut p, &mut b)?;
            prev = None;
        }
        iterations += 1;
    }

    let network = rebuild(&p, start.graph(), &pos, &b)?;
    let value = network.length_quotient().unwrap_or(f64::INFINITY);
    Ok(Descent {
        network,
        value,
        iterations,
        termination,
        gradient_norm: gnorm,
        monotone,
        max_gauge_drift: max_drift,
        line_search_failed,
    })
}

/// Scales positions and basis so that |det B| = 1.
fn rescale(pos: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    let det = det_only(b, n);
    if !(det.abs() > 0.0) || !det.is_finite() {
        return Err(Error::SingularBasis);
    }
    let c = det.abs().powf(-1.0 / n as f64);
    pos.iter_mut().chain(b.iter_mut()).for_each(|x| *x *= c);
    Ok(())
}

/// Replaces B by a reduced basis B·U and every shift s by U⁻¹s.
fn reduce_basis(p: &mut Problem, b: &mut [f64]) -> Result<()> {
    let n = p.n;
    let lattice = Lattice::new(DMatrix::from_column_slice(n, n, b))?;
    let red = lattice.reduce();
    b.copy_from_slice(red.lattice.basis().as_slice());
    for e in 0..p.m() {
        let s = p.shifts[e * n..(e + 1) * n].to_vec();
        let t = apply_int(&red.inverse_transform, &s);
        p.shifts[e * n..(e + 1) * n].copy_from_slice(&t);
    }
    Ok(())
}

/// Random start: basis I + U[−0.3, 0.3]^{n×n} with |det| > 0.1, positions
/// uniform in the unit cell; redrawn until the network is immersed with
/// nonzero edges (at most 100 draws).
pub fn random_network(g: &QuotientGraph, seed: u64) -> Result<PeriodicNetwork> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_network_with(g, &mut rng)
}

fn random_network_with(g: &QuotientGraph, rng: &mut ChaCha8Rng) -> Result<PeriodicNetwork> {
    let n = g.dim();
    for _ in 0..100 {
        let basis = loop {
            let m = DMatrix::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) + rng.gen_range(-0.3..=0.3));
            if m.determinant().abs() > 0.1 {
                break m;
            }
        };
        let lattice = Lattice::new(basis)?;
        let positions: Vec<DVector<f64>> = (0..g.vertex_count())
            .map(|_| {
                let u = DVector::from_fn(n, |_, _| rng.gen_range(0.0..1.0));
                lattice.basis() * u
            })
            .collect();
        let net = PeriodicNetwork::new(g.clone(), lattice, positions)?;
        let report = net.validate();
        if report.immersed && net.length().is_ok() {
            return Ok(net);
        }
    }
    Err(Error::ConstructionFailed("no immersed random start in 100 draws".into()))
}

fn run_rng(seed: u64, class: usize, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((class as u64) << 32) | restart as u64);
    rng
}

fn require_searchable(g: &QuotientGraph) -> Result<()> {
    let r = g.lattice_rank()?;
    if r != g.dim() || !g.is_lift_connected()? {
        return Err(Error::InvalidGraph(format!("shift labels have rank {r} or do not generate Z^{}", g.dim())));
    }
    Ok(())
}

/// Runs `cfg.restarts` seeded descents on each graph and keeps the smallest
/// final value (ties within 1e-9 go to the earliest run).
fn multistart(graphs: &[QuotientGraph], cfg: &OptimizeConfig) -> Result<OptimizeResult> {
    cfg.check()?;
    let jobs: Vec<(usize, usize)> = (0..graphs.len()).flat_map(|c| (0..cfg.restarts).map(move |r| (c, r))).collect();
    let runs: Vec<Result<Descent>> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let mut rng = run_rng(cfg.seed, c, r);
            let start = random_network_with(&graphs[c], &mut rng)?;
            descend(&start, cfg)
        })
        .collect();
    let mut traces = Vec::with_capacity(runs.len());
    let mut best: Option<(usize, Descent)> = None;
    for (idx, (run, &(c, r))) in runs.into_iter().zip(&jobs).enumerate() {
        let d = run?;
        traces.push(RestartTrace {
            class: c,
            restart: r,
            final_value: d.value,
            iterations: d.iterations,
            termination: d.termination,
            monotone: d.monotone,
            max_gauge_drift: d.max_gauge_drift,
            line_search_failed: d.line_search_failed,
        });
        let better = match &best {
            None => true,
            Some((_, b)) => d.value < b.value - 1e-9,
        };
        if better {
            best = Some((idx, d));
        }
    }
    let (best_index, d) = best.ok_or_else(|| Error::InvalidParameter("nothing to optimize".into()))?;
    Ok(OptimizeResult {
        best: d.network,
        best_value: d.value,
        best_termination: d.termination,
        best_index,
        assignment: graphs[jobs[best_index].0].clone(),
        classes: graphs.len(),
        traces,
    })
}

/// Multistart minimization for one shift-labeled quotient graph.
pub fn minimize_fixed_shifts(g: &QuotientGraph, cfg: &OptimizeConfig) -> Result<OptimizeResult> {
    require_searchable(g)?;
    multistart(std::slice::from_ref(g), cfg)
}

/// Multistart minimization over every shift assignment of a quotient type.
/// Assignments related by a change of lattice basis, vertex translation or
/// graph automorphism define the same problem; one representative of each
/// class is searched.
pub fn minimize_topology(tag: TopologyTag, n: usize, cfg: &OptimizeConfig) -> Result<OptimizeResult> {
    let tag = tag.normalized();
    let d = tag.degree().ok_or_else(|| Error::InvalidParameter(format!("{tag:?} is not a family tag")))?;
    let (_, admissible) = min_vertex_count(n, d)?;
    if !admissible.iter().any(|c| c.tag == tag) {
        return Err(Error::InvalidParameter(format!("{tag} is not an irreducible type for degree {d} in dimension {n}")));
    }
    let skel = build_abstract(tag)?;
    let classes = shift_classes(&skel, n, cfg.s_max)?;
    if classes.is_empty() {
        return Err(Error::InvalidGraph(format!("{tag} admits no lift-connected shifts in dimension {n}")));
    }
    multistart(&classes, cfg)
}
