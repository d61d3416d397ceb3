use isoising::ising::CouplingAssignment;
use isoising::isoradial::{LatticeKind, PeriodicIsoradialGraph};
use isoising::oracle::{
    enumerate_crsf, enumerate_matchings, even_subgraph_sum, ising_partition, null_homologous_even_subgraph_sum,
    EnumerationBudget,
};
use isoising::Error;

fn budget() -> EnumerationBudget {
    EnumerationBudget::default()
}

#[test]
fn tiny_spin_systems() {
    assert_eq!(ising_partition(1, &[], &[], &budget()).unwrap(), 2.0);
    for j in [0.0, 0.3, 1.7] {
        let z = ising_partition(2, &[(0, 1)], &[j], &budget()).unwrap();
        assert!((z - 4.0 * f64::cosh(j)).abs() < 1e-12);
    }
    assert!(matches!(ising_partition(21, &[], &[], &budget()), Err(Error::BudgetExceeded(_))));
}

#[test]
fn matching_marginals_cover_each_vertex() {
    // the 6-cycle with a chord
    let edges = [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (3, 4, 1.5), (4, 5, 1.0), (5, 0, 3.0), (0, 3, 0.7)];
    let m = enumerate_matchings(6, &edges, &budget()).unwrap();
    assert_eq!(m.count, 3);
    for v in 0..6 {
        let s: f64 = edges.iter().zip(&m.marginals).filter(|(e, _)| e.0 == v || e.1 == v).map(|(_, p)| p).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
    assert_eq!(enumerate_matchings(3, &[(0, 1, 1.0)], &budget()).unwrap().count, 0);
}

fn torus_case(g: &PeriodicIsoradialGraph, n: usize) -> (f64, f64, f64) {
    let tg = g.quotient(n).unwrap();
    let j = CouplingAssignment::critical(g);
    let pairs: Vec<_> = tg.edges().iter().map(|e| (e.u, e.v)).collect();
    let js: Vec<f64> = tg.edges().iter().map(|e| j.couplings[e.base]).collect();
    let z = ising_partition(tg.vertex_count(), &pairs, &js, &budget()).unwrap();

    let x: Vec<f64> = js.iter().map(|j| j.tanh()).collect();
    let high = 2f64.powi(tg.vertex_count() as i32)
        * js.iter().map(|j| j.cosh()).product::<f64>()
        * even_subgraph_sum(tg.vertex_count(), &pairs, &x, &budget()).unwrap();

    let dtg = g.dual().unwrap().quotient(n).unwrap();
    let y: Vec<f64> = dtg.edges().iter().map(|e| (-2.0 * js[tg.edge_index(e.base, e.cell)]).exp()).collect();
    let low = 2.0 * js.iter().sum::<f64>().exp() * null_homologous_even_subgraph_sum(&dtg, &y, &budget()).unwrap();
    (z, high, low)
}

#[test]
fn expansions_agree_with_spin_sums() {
    for (g, n) in [
        (PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square), 2),
        (PeriodicIsoradialGraph::standard_lattice(LatticeKind::Triangular), 2),
        (PeriodicIsoradialGraph::standard_lattice(LatticeKind::Honeycomb), 1),
    ] {
        let (z, high, low) = torus_case(&g, n);
        assert!((z - high).abs() < 1e-10 * z, "{z} vs {high}");
        assert!((z - low).abs() < 1e-10 * z, "{z} vs {low}");
    }
}

#[test]
fn square_forests() {
    let g = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square);
    let f = enumerate_crsf(&g, &budget()).unwrap();
    assert_eq!(f.len(), 2);
    let mut classes: Vec<_> = f.iter().map(|x| x.homology.clone()).collect();
    classes.sort();
    assert_eq!(classes, vec![vec![[0, 1]], vec![[1, 0]]]);
}

#[test]
fn forest_cycles_are_parallel() {
    for g in [
        PeriodicIsoradialGraph::standard_lattice(LatticeKind::Honeycomb),
        PeriodicIsoradialGraph::generic_hexagonal(),
    ] {
        let forests = enumerate_crsf(&g, &budget()).unwrap();
        for f in &forests {
            assert_eq!(f.edges.len(), g.vertex_count());
            assert!(f.homology.iter().all(|h| *h == f.homology[0]));
        }
    }
}

#[test]
fn enumeration_is_deterministic() {
    let g = PeriodicIsoradialGraph::generic_hexagonal();
    let a = serde_json::to_string(&enumerate_crsf(&g, &budget()).unwrap()).unwrap();
    let b = serde_json::to_string(&enumerate_crsf(&g, &budget()).unwrap()).unwrap();
    assert_eq!(a, b);
    let tri = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Triangular);
    assert!(matches!(
        enumerate_crsf(&tri, &EnumerationBudget { max_crsf_edges: 2, ..budget() }),
        Err(Error::TooLarge(_))
    ));
}
