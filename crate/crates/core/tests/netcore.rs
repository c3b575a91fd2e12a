use nalgebra::DVector;
use proptest::prelude::*;

use periodic_nets::construct::{catalog, CatalogParams};
use periodic_nets::graph::{Edge, Multigraph, QuotientGraph};
use periodic_nets::io::{network_from_json, network_to_json};
use periodic_nets::lattice::Lattice;
use periodic_nets::network::PeriodicNetwork;
use periodic_nets::obj::export_obj;
use periodic_nets::topology::circuit_rank;
use periodic_nets::Error;

fn cat(name: &str) -> PeriodicNetwork {
    catalog(name, CatalogParams::default()).unwrap().0
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn vec_close(a: &DVector<f64>, b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
}

#[test]
fn edge_vectors_from_catalog_coordinates() {
    let pcu = cat("pcu");
    let e1 = pcu.graph().edges().iter().position(|e| e.shift == vec![1, 0, 0]).unwrap();
    assert!(vec_close(&pcu.edge_vector(e1).unwrap(), &[1.0, 0.0, 0.0]));

    let dia = cat("dia");
    let zero = dia.graph().edges().iter().position(|e| e.shift == vec![0, 0, 0]).unwrap();
    assert!(vec_close(&dia.edge_vector(zero).unwrap(), &[0.25, 0.25, 0.25]));

    let cds = catalog("cds", CatalogParams { t: Some(0.3), dim: None }).unwrap().0;
    let down = cds.graph().edges().iter().position(|e| e.shift == vec![0, 0, -1]).unwrap();
    assert!(vec_close(&cds.edge_vector(down).unwrap(), &[0.0, 0.0, -0.7]));

    assert!(matches!(pcu.edge_vector(99), Err(Error::UnknownEdge(99))));
}

#[test]
fn lengths_and_volumes() {
    assert!(close(cat("pcu").length().unwrap(), 3.0, 1e-15));
    assert!(close(cat("dia").length().unwrap(), 3f64.sqrt(), 1e-15));
    assert!(close(cat("bnn").length().unwrap(), 4.5, 1e-14));
    assert!(close(cat("pcu").volume().unwrap(), 1.0, 1e-15));
    assert!(close(cat("dia").volume().unwrap(), 0.25, 1e-15));
    assert!(close(cat("sqp").volume().unwrap(), 225.0 / 64.0, 1e-14));
}

#[test]
fn length_quotients() {
    assert!(close(cat("dia").length_quotient().unwrap(), 12.0 * 3f64.sqrt(), 1e-12));
    assert!(close(cat("sqp").length_quotient().unwrap(), 50.625, 1e-12));
    for t in [0.05, 0.3, 0.5, 0.95] {
        let cds = catalog("cds", CatalogParams { t: Some(t), dim: None }).unwrap().0;
        assert!(close(cds.length_quotient().unwrap(), 27.0, 1e-12));
    }
}

#[test]
fn validate_pcu() {
    let r = cat("pcu").validate();
    assert!(r.is_valid(), "{:?}", r.violations);
    assert_eq!(r.degree, Some(6));
    assert_eq!(r.lattice_rank, 3);
    assert!(r.lift_connected);
}

#[test]
fn doubled_loop_shift_breaks_lift_connectivity() {
    let pcu = cat("pcu");
    let e3 = pcu.graph().edges().iter().position(|e| e.shift == vec![0, 0, 1]).unwrap();
    let g = pcu.graph().with_shift(e3, vec![0, 0, 2]).unwrap();
    let r = pcu.with_graph(g).unwrap().validate();
    assert!(r.full_rank);
    assert_eq!(r.lattice_rank, 3);
    assert!(!r.lift_connected);
    assert_eq!(r.invariant_factors, vec![1, 1, 2]);
    assert!(!r.is_valid());
}

#[test]
fn duplicate_triple_is_a_simplicity_violation() {
    let dia = cat("dia");
    let s = dia.graph().edge(1).unwrap().shift.clone();
    let g = dia.graph().with_shift(2, s).unwrap();
    let r = dia.with_graph(g).unwrap().validate();
    assert!(!r.simple);
    assert!(!r.violations.is_empty());
}

#[test]
fn zero_loop_is_rejected() {
    let err = QuotientGraph::new(2, 1, vec![Edge::new(0, 0, vec![0, 0])]);
    assert!(err.is_err());
}

#[test]
fn zero_length_edge_is_an_error() {
    let g = QuotientGraph::new(
        2,
        2,
        vec![Edge::new(0, 1, vec![0, 0]), Edge::new(0, 1, vec![-1, 0]), Edge::new(0, 1, vec![0, -1])],
    )
    .unwrap();
    let net = PeriodicNetwork::from_coordinates(g, Lattice::identity(2), &[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
    assert!(matches!(net.length(), Err(Error::ZeroLengthEdge { edge: 0 })));
    let report = net.validate();
    assert!(!report.is_valid());
}

#[test]
fn singular_basis_is_rejected() {
    assert!(Lattice::from_columns(&[vec![1.0, 0.0], vec![2.0, 0.0]]).is_err());
}

#[test]
fn json_round_trip_keeps_measures() {
    for name in ["hcb", "sql", "dia", "cds", "bnn", "sqp", "pcu"] {
        let net = cat(name);
        let back = network_from_json(&network_to_json(&net).unwrap()).unwrap();
        assert!(close(back.length().unwrap(), net.length().unwrap(), 1e-15), "{name}");
        assert!(close(back.volume().unwrap(), net.volume().unwrap(), 1e-15), "{name}");
        assert_eq!(back.graph(), net.graph());
    }
}

#[test]
fn json_schema_fields() {
    let text = network_to_json(&cat("dia")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["dim"], 3);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 2);
    assert_eq!(v["lattice"].as_array().unwrap().len(), 3);
    assert_eq!(v["edges"][1]["shift"], serde_json::json!([-1, 0, 0]));
}

#[test]
fn json_rejects_bad_vertex_ids() {
    let text = r#"{"dim":2,"vertices":[{"id":0,"pos":[0,0]},{"id":0,"pos":[1,0]}],
        "lattice":[[1,0],[0,1]],"edges":[{"tail":0,"head":0,"shift":[1,0]}]}"#;
    assert!(network_from_json(text).is_err());
}

#[test]
fn obj_export_of_pcu() {
    let obj = export_obj(&cat("pcu"), 2).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("l ")).count(), 24);
    let hcb = export_obj(&cat("hcb"), 3).unwrap();
    assert_eq!(hcb.lines().filter(|l| l.starts_with("l ")).count(), 27);
    assert!(hcb.lines().filter(|l| l.starts_with("v ")).all(|l| l.ends_with(" 0")));
    let pcu4 = catalog("pcu", CatalogParams { t: None, dim: Some(4) }).unwrap().0;
    assert!(export_obj(&pcu4, 2).is_err());
}

fn random_dipole(coords: &[f64]) -> Option<PeriodicNetwork> {
    let g = QuotientGraph::new(
        3,
        2,
        vec![
            Edge::new(0, 1, vec![0, 0, 0]),
            Edge::new(0, 1, vec![-1, 0, 0]),
            Edge::new(0, 1, vec![0, -1, 0]),
            Edge::new(0, 1, vec![0, 0, -1]),
        ],
    )
    .ok()?;
    let basis: Vec<Vec<f64>> = (0..3).map(|j| (0..3).map(|i| f64::from(u8::from(i == j)) + coords[3 * j + i]).collect()).collect();
    let lattice = Lattice::from_columns(&basis).ok()?;
    let net = PeriodicNetwork::from_coordinates(g, lattice, &[vec![0.0; 3], coords[9..12].to_vec()]).ok()?;
    net.length_quotient().ok().map(|_| net)
}

proptest! {
    #[test]
    fn quotient_is_scale_invariant(coords in prop::collection::vec(-0.3f64..0.3, 12), c in 0.01f64..100.0) {
        if let Some(net) = random_dipole(&coords) {
            let q = net.length_quotient().unwrap();
            let s = net.scaled(c).unwrap().length_quotient().unwrap();
            prop_assert!((q - s).abs() <= 1e-12 * q);
        }
    }

    #[test]
    fn vertex_translation_is_a_gauge(coords in prop::collection::vec(-0.3f64..0.3, 12), k in prop::collection::vec(-3i64..=3, 3)) {
        if let Some(net) = random_dipole(&coords) {
            let moved = net.translate_vertex(1, &k).unwrap();
            prop_assert!((moved.length().unwrap() - net.length().unwrap()).abs() <= 1e-12 * net.length().unwrap());
            prop_assert_eq!(moved.volume().unwrap(), net.volume().unwrap());
            for (a, b) in moved.edge_vectors().iter().zip(net.edge_vectors()) {
                prop_assert!((a - b).amax() <= 1e-12);
            }
        }
    }

    #[test]
    fn lift_connected_implies_full_rank(shifts in prop::collection::vec(prop::collection::vec(-2i64..=2, 3), 4)) {
        let edges = shifts.into_iter().map(|s| Edge::new(0, 1, s)).collect();
        let g = QuotientGraph::new(3, 2, edges).unwrap();
        if g.is_lift_connected().unwrap() {
            prop_assert_eq!(g.lattice_rank().unwrap(), 3);
        }
    }

    #[test]
    fn circuit_rank_matches_degree(loops in 0usize..4, bridges in 1usize..6) {
        let mut edges = Vec::new();
        for i in 0..loops {
            let mut s = vec![0i64; 3];
            s[i % 3] = 1 + (i / 3) as i64;
            edges.push(Edge::new(0, 0, s.clone()));
            edges.push(Edge::new(1, 1, s));
        }
        for b in 0..bridges {
            edges.push(Edge::new(0, 1, vec![b as i64, 0, 0]));
        }
        let g = QuotientGraph::new(3, 2, edges).unwrap();
        let d = g.regular_degree().unwrap();
        prop_assert_eq!(2 * g.edge_count(), d * g.vertex_count());
        prop_assert_eq!(2 * circuit_rank(&g).unwrap() as i64, 2 + (d as i64 - 2) * g.vertex_count() as i64);
    }
}
