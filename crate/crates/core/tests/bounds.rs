use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use periodic_nets::bounds::{
    bound_degree3d, bound_dipole, bound_even, check_pyramid, check_simplex, dipole5_coefficients, monotonicity_table,
    verify, PyramidInstance,
};
use periodic_nets::construct::{catalog, regular_simplex, CatalogParams};
use periodic_nets::graph::{Edge, Multigraph, QuotientGraph};
use periodic_nets::lattice::Lattice;
use periodic_nets::network::PeriodicNetwork;
use periodic_nets::optimize::{descend, random_network, OptimizeConfig};
use periodic_nets::topology::TopologyTag;

fn cat(name: &str) -> PeriodicNetwork {
    catalog(name, CatalogParams::default()).unwrap().0
}

fn sqp_pyramid() -> PyramidInstance {
    let sqp = cat("sqp");
    let q = sqp.position(0).unwrap().clone();
    let mut ends: Vec<DVector<f64>> = (0..sqp.graph().edge_count()).map(|e| &q + sqp.edge_vector(e).unwrap()).collect();
    let apex = ends.remove(0);
    PyramidInstance { apex, base: ends, probe: q }
}

#[test]
fn closed_forms() {
    assert!((bound_dipole(2) - 2.0 * 3f64.sqrt()).abs() < 1e-14);
    assert!((bound_dipole(3) - 12.0 * 3f64.sqrt()).abs() < 1e-12);
    assert!((bound_dipole(4) - 80.0 * 5f64.sqrt()).abs() < 1e-10);
    assert_eq!(bound_even(3, 6).unwrap(), 27.0);
    assert_eq!(bound_even(3, 8).unwrap(), 54.0);
    assert_eq!(bound_even(2, 4).unwrap(), 4.0);
    assert!(bound_even(3, 7).is_err());
    assert!(bound_even(3, 4).is_err());
}

#[test]
fn dipole_sits_below_the_cube_value() {
    for n in 2..=8usize {
        let cube = (n as f64).powi(n as i32);
        assert!(bound_dipole(n) < cube);
        assert_eq!(bound_even(n, 2 * n).unwrap(), cube);
    }
}

#[test]
fn three_dimensional_bounds() {
    let b = |d, t: &str| bound_degree3d(d, t.parse().unwrap()).unwrap();
    assert!((b(4, "D4").value.value - 12.0 * 3f64.sqrt()).abs() < 1e-12);
    assert_eq!(b(4, "D1,2").value.value, 27.0);
    assert!((b(5, "D1,3").value.value - 27.0 * 3f64.sqrt()).abs() < 1e-12);
    assert_eq!(b(5, "D5").value.value, 50.625);
    assert_eq!(b(6, "B3").value.value, 27.0);
    let high = bound_degree3d(7, TopologyTag::Other).unwrap();
    assert!(high.strict);
    assert_eq!(high.value.value, 50.625);
    assert!(!b(5, "D5").strict);
    assert!(bound_degree3d(4, "B3".parse().unwrap()).is_err());
}

#[test]
fn monotone_in_degree() {
    let t = monotonicity_table(3, 12).unwrap();
    assert_eq!(t, vec![(6, 27.0), (8, 54.0), (10, 81.0), (12, 108.0)]);
    for w in t.windows(2) {
        assert_eq!(w[1].1 - w[0].1, 27.0);
    }
    assert_eq!(monotonicity_table(2, 8).unwrap(), vec![(4, 4.0), (6, 8.0), (8, 12.0)]);
}

#[test]
fn sqp_pyramid_is_an_equality_case() {
    let c = check_pyramid(&sqp_pyramid()).unwrap();
    assert!(c.equality, "{c:?}");
    assert!((c.lhs - 151.875).abs() < 1e-9);
    assert!((c.rhs - 151.875).abs() < 1e-9);
    assert!((c.s - 4.0).abs() < 1e-12);
    assert!((c.h - 0.25).abs() < 1e-12);
    assert!(c.height_condition);
}

#[test]
fn regular_tetrahedron_at_its_center() {
    let v = regular_simplex(3).unwrap();
    let c = check_pyramid(&PyramidInstance { apex: v[0].clone(), base: v[1..].to_vec(), probe: DVector::zeros(3) }).unwrap();
    assert!(c.equality && c.holds);
}

#[test]
fn pyramid_input_errors() {
    let inst = sqp_pyramid();
    let short = PyramidInstance { base: inst.base[..2].to_vec(), ..inst.clone() };
    assert!(check_pyramid(&short).is_err());
    let mut bent = inst.clone();
    bent.base[0][2] += 0.5;
    assert!(check_pyramid(&bent).is_err());
}

#[test]
fn simplex_estimate() {
    for n in 2..=5 {
        let v = regular_simplex(n).unwrap();
        let c = check_simplex(&v).unwrap();
        assert!(c.equality && c.holds, "n={n}");
        let shift = DVector::from_fn(n, |i, _| if i == 0 { 0.3 } else { 0.0 });
        let moved: Vec<DVector<f64>> = v.iter().map(|p| p + &shift).collect();
        let c = check_simplex(&moved).unwrap();
        assert!(c.holds && !c.equality && c.lhs > c.rhs);
    }
}

#[test]
fn catalog_networks_meet_their_bounds() {
    for name in ["hcb", "sql", "dia", "cds", "bnn", "sqp", "pcu", "simplex_net"] {
        let r = verify(&cat(name)).unwrap();
        let slack = r.slack.unwrap_or_else(|| panic!("{name}: {:?}", r.note));
        assert!(slack.abs() <= 1e-9 * r.measured, "{name}: {slack}");
        assert!(!r.violation);
        if r.dim == 3 {
            assert!(r.equality_certificate.as_ref().is_some_and(|c| c.passed), "{name}");
        }
    }
}

#[test]
fn partial_descent_leaves_positive_slack() {
    let g = QuotientGraph::new(
        3,
        2,
        vec![
            Edge::new(0, 1, vec![0, 0, 0]),
            Edge::new(0, 1, vec![1, 0, 0]),
            Edge::new(0, 1, vec![0, 1, 0]),
            Edge::new(0, 1, vec![0, 0, 1]),
            Edge::new(0, 1, vec![1, -1, 1]),
        ],
    )
    .unwrap();
    let start = random_network(&g, 7).unwrap();
    let d = descend(&start, &OptimizeConfig { max_iter: 5, ..Default::default() }).unwrap();
    let r = verify(&d.network).unwrap();
    assert_eq!(r.theorem.as_deref(), Some("degree5-square-pyramid"));
    assert!(r.slack.unwrap() > 0.0);
}

#[test]
fn networks_without_a_bound_get_a_note() {
    let moved = cat("dia").with_position(1, DVector::from_vec(vec![0.25, 0.25, 0.0])).unwrap();
    let r = verify(&moved).unwrap();
    assert!(r.slack.unwrap() > 0.0);
    let bad = cat("pcu");
    let g = bad.graph().with_shift(2, vec![0, 0, 2]).unwrap();
    let r = verify(&bad.with_graph(g).unwrap()).unwrap();
    assert!(r.theorem.is_none() && r.note.is_some());
}

#[test]
fn dipole5_coefficients_of_sqp() {
    let sqp = cat("sqp");
    let c = dipole5_coefficients(&sqp).unwrap();
    assert_eq!(c.lambda, [-1, 1, 1]);
    assert!((c.signed_volume.abs() - 225.0 / 64.0).abs() < 1e-12);

    let g = sqp.graph().with_shift(4, vec![1, 1, 1]).unwrap();
    assert_eq!(dipole5_coefficients(&sqp.with_graph(g).unwrap()).unwrap().lambda, [1, 1, 1]);
    assert!(dipole5_coefficients(&cat("dia")).is_err());
}

#[test]
fn dipole5_coefficients_ignore_generator_order() {
    let sqp = cat("sqp");
    let mut cols = sqp.lattice().columns();
    cols.swap(0, 1);
    let edges = sqp
        .graph()
        .edges()
        .iter()
        .map(|e| Edge::new(e.tail, e.head, vec![e.shift[1], e.shift[0], e.shift[2]]))
        .collect();
    let g = QuotientGraph::new(3, 2, edges).unwrap();
    let swapped = PeriodicNetwork::new(g, Lattice::from_columns(&cols).unwrap(), sqp.positions().to_vec()).unwrap();
    assert!((swapped.length_quotient().unwrap() - 50.625).abs() < 1e-12);
    assert_eq!(dipole5_coefficients(&swapped).unwrap().lambda, dipole5_coefficients(&sqp).unwrap().lambda);
}

fn rotation(raw: &[f64]) -> DMatrix<f64> {
    DMatrix::from_column_slice(3, 3, raw).qr().q()
}

proptest! {
    #[test]
    fn pyramid_check_is_invariant_under_similarities(raw in prop::collection::vec(-1.0f64..1.0, 9), t in prop::collection::vec(-5.0f64..5.0, 3), c in 0.2f64..5.0) {
        let m = DMatrix::from_column_slice(3, 3, &raw);
        prop_assume!(m.determinant().abs() > 0.1);
        let r = rotation(&raw);
        let t = DVector::from_vec(t);
        let inst = sqp_pyramid();
        let map = |p: &DVector<f64>| &r * p * c + &t;
        let moved = PyramidInstance { apex: map(&inst.apex), base: inst.base.iter().map(map).collect(), probe: map(&inst.probe) };
        let a = check_pyramid(&inst).unwrap();
        let b = check_pyramid(&moved).unwrap();
        prop_assert!((a.lhs - b.lhs).abs() <= 1e-9 * a.lhs);
        prop_assert!((a.rhs - b.rhs).abs() <= 1e-9 * a.rhs);
        prop_assert_eq!(a.equality, b.equality);
    }

    #[test]
    fn balanced_probe_satisfies_the_estimate(raw in prop::collection::vec(-1.0f64..1.0, 9), z in 0.3f64..3.0, off in prop::collection::vec(-1.0f64..1.0, 2)) {
        let base: Vec<DVector<f64>> = raw.chunks_exact(2).take(4).map(|c| DVector::from_vec(vec![c[0], c[1], 0.0])).collect();
        let apex = DVector::from_vec(vec![off[0], off[1], z]);
        let inst = PyramidInstance::with_balanced_probe(apex, base);
        if let Ok(inst) = inst {
            if let Ok(c) = check_pyramid(&inst) {
                prop_assert!(c.holds, "{:?}", c);
            }
        }
    }
}
