use proptest::prelude::*;

use periodic_nets::construct::{catalog, CatalogParams};
use periodic_nets::graph::{Multigraph, QuotientGraph};
use periodic_nets::topology::{
    build_abstract, circuit_rank, classify, enumerate_shifts, min_vertex_count, shift_classes, ShiftAssignments,
    TopologyTag,
};
use periodic_nets::Error;

fn tag(s: &str) -> TopologyTag {
    s.parse().unwrap()
}

fn graph_of(s: &str) -> QuotientGraph {
    let skel = build_abstract(tag(s)).unwrap();
    let shifts = (0..skel.edges.len()).map(|i| vec![i as i64 + 1, 0]).collect();
    QuotientGraph::from_skeleton(&skel, 2, shifts).unwrap()
}

fn contains_up_to_sign(list: &[QuotientGraph], shifts: &[Vec<i64>]) -> bool {
    let neg: Vec<Vec<i64>> = shifts.iter().map(|s| s.iter().map(|x| -x).collect()).collect();
    list.iter().any(|g| g.shifts() == shifts || g.shifts() == neg)
}

#[test]
fn circuit_ranks() {
    assert_eq!(circuit_rank(&graph_of("B3")).unwrap(), 3);
    assert_eq!(circuit_rank(&graph_of("D1,3")).unwrap(), 4);
    assert_eq!(circuit_rank(&graph_of("D4")).unwrap(), 3);
}

#[test]
fn catalog_quotients_classify() {
    let c = |n: &str| classify(catalog(n, CatalogParams::default()).unwrap().0.graph()).unwrap();
    assert_eq!(c("pcu").tag, TopologyTag::Bouquet(3));
    assert_eq!(c("bnn").tag, TopologyTag::DoubleBouquet(1, 3));
    assert_eq!(c("sqp").tag, TopologyTag::Dipole(5));
    assert_eq!(c("sqp").circuit_rank, 4);
    assert_eq!(c("dia").degree, 4);
}

#[test]
fn tag_strings() {
    assert_eq!(tag("D1,3").to_string(), "D1,3");
    assert_eq!(tag("d1_3"), TopologyTag::DoubleBouquet(1, 3));
    assert_eq!(tag("D0,4"), TopologyTag::Dipole(4));
    assert_eq!(TopologyTag::DoubleBouquet(0, 4).normalized().to_string(), "D4");
    assert!("X3".parse::<TopologyTag>().is_err());
}

#[test]
fn minimum_vertex_counts() {
    let tags = |n, d| min_vertex_count(n, d).map(|(c, l)| (c, l.into_iter().map(|t| t.tag).collect::<Vec<_>>())).unwrap();
    assert_eq!(tags(3, 4), (2, vec![tag("D4"), tag("D1,2")]));
    assert_eq!(tags(3, 6), (1, vec![tag("B3")]));
    assert_eq!(tags(3, 5), (2, vec![tag("D5"), tag("D1,3")]));
    assert_eq!(tags(4, 3), (6, vec![]));
    assert_eq!(tags(4, 4), (3, vec![]));
    assert!(matches!(min_vertex_count(3, 2), Err(Error::InvalidParameter(_))));
}

#[test]
fn abstract_graphs() {
    let b4 = build_abstract(tag("B4")).unwrap();
    assert_eq!((b4.vertex_count, b4.edges.len()), (1, 4));
    let d12 = build_abstract(tag("D1,2")).unwrap();
    assert_eq!((d12.vertex_count, d12.edges.len()), (2, 4));
    assert_eq!(d12.regular_degree(), Some(4));
    let d5 = build_abstract(tag("D5")).unwrap();
    assert_eq!(d5.edges.iter().filter(|e| e.0 != e.1).count(), 5);
    assert!(build_abstract(TopologyTag::Other).is_err());
    assert!(build_abstract(TopologyTag::DoubleBouquet(2, 0)).is_err());
}

#[test]
fn enumeration_contains_catalog_patterns() {
    let b3 = enumerate_shifts(&build_abstract(tag("B3")).unwrap(), 3, 1).unwrap();
    assert!(contains_up_to_sign(&b3, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]));

    let d4 = enumerate_shifts(&build_abstract(tag("D4")).unwrap(), 3, 1).unwrap();
    assert!(contains_up_to_sign(&d4, &[vec![0, 0, 0], vec![-1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]]));

    let d5 = enumerate_shifts(&build_abstract(tag("D5")).unwrap(), 3, 1).unwrap();
    assert!(contains_up_to_sign(&d5, &[vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![1, -1, 1]]));
}

#[test]
fn enumeration_drops_negations_and_checks_lifts() {
    let d4 = enumerate_shifts(&build_abstract(tag("D4")).unwrap(), 3, 1).unwrap();
    for g in &d4 {
        assert!(g.is_lift_connected().unwrap());
        assert!(g.simplicity_violations().is_empty());
        let neg: Vec<Vec<i64>> = g.shifts().iter().map(|s| s.iter().map(|x| -x).collect()).collect();
        assert!(neg == g.shifts() || !d4.iter().any(|h| h.shifts() == neg));
    }
}

#[test]
fn enumeration_guard() {
    let skel = build_abstract(tag("D7")).unwrap();
    assert!(matches!(enumerate_shifts(&skel, 4, 2), Err(Error::EnumerationTooLarge(_))));
    assert!(ShiftAssignments::new(&skel, 4, 2).unwrap().raw_count() > 10_000_000);
}

#[test]
fn dipole_classes_collapse_to_one() {
    let skel = build_abstract(tag("D4")).unwrap();
    assert_eq!(shift_classes(&skel, 3, 1).unwrap().len(), 1);
}

#[test]
fn every_admissible_type_has_a_lift_connected_labeling() {
    for n in 2..=4usize {
        for d in n + 1..=2 * n + 2 {
            let (_, admissible) = min_vertex_count(n, d).unwrap();
            assert!(!admissible.is_empty(), "n={n} d={d}");
            for class in admissible {
                let skel = build_abstract(class.tag).unwrap();
                let g = ShiftAssignments::new(&skel, n, 1).unwrap().next();
                let g = g.unwrap_or_else(|| panic!("no labeling for {} in dimension {n}", class.tag));
                assert!(circuit_rank(&g).unwrap() >= n);
                assert_eq!(g.lattice_rank().unwrap(), n);
            }
        }
    }
}

proptest! {
    #[test]
    fn classify_inverts_build(kind in 0usize..2, l in 0usize..5, k in 1usize..6) {
        let t = if kind == 0 { TopologyTag::Bouquet(l + 1) } else { TopologyTag::DoubleBouquet(l, k).normalized() };
        let skel = build_abstract(t).unwrap();
        let c = classify(&skel).unwrap();
        prop_assert_eq!(c.tag, t);
        prop_assert_eq!(c.degree, t.degree().unwrap());
        prop_assert_eq!(2 * skel.edges.len(), c.degree * skel.vertex_count);
        prop_assert_eq!(2 * c.circuit_rank as i64, 2 + (c.degree as i64 - 2) * skel.vertex_count as i64);
    }
}
