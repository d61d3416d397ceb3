use std::f64::consts::PI;

use isoising::isoradial::{load_graph, LatticeKind, PeriodicIsoradialGraph};
use isoising::Error;
use proptest::prelude::*;

const SQUARE_DOC: &str = r#"{
  "basis": [[1.4142135623730951, 0.0], [0.0, 1.4142135623730951]],
  "vertices": [{"id": "o", "pos": [0.0, 0.0]}],
  "edges": [
    {"u": "o", "v": "o", "offset": [1, 0]},
    {"u": "o", "v": "o", "offset": [0, 1]}
  ]
}"#;

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn sorted_thetas(g: &PeriodicIsoradialGraph) -> Vec<f64> {
    let mut t = g.thetas();
    t.sort_by(f64::total_cmp);
    t
}

#[test]
fn square_document() {
    let g = load_graph(SQUARE_DOC).unwrap();
    assert_eq!((g.vertex_count(), g.edge_count(), g.face_count()), (1, 2, 1));
    for t in g.thetas() {
        assert!((t - PI / 4.0).abs() < 1e-12);
    }
}

#[test]
fn moving_the_only_vertex_is_a_translation() {
    // a single vertex per cell cannot break isoradiality
    let doc = SQUARE_DOC.replace("\"pos\": [0.0, 0.0]", "\"pos\": [0.3, 0.0]");
    assert!(load_graph(&doc).is_ok());
}

#[test]
fn perturbed_honeycomb_vertex() {
    let mut spec = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Honeycomb).to_spec();
    spec.vertices[0].pos[1] += 0.3;
    let doc = serde_json::to_string(&spec).unwrap();
    assert!(matches!(load_graph(&doc), Err(Error::Isoradiality { .. })));
}

#[test]
fn honeycomb_document() {
    let spec = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Honeycomb).to_spec();
    let g = load_graph(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(g.vertex_count(), 2);
    assert!(g.thetas().iter().all(|t| (t - PI / 3.0).abs() < 1e-12));
}

#[test]
fn duals_of_standard_lattices() {
    let sq = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square);
    let d = sq.dual().unwrap();
    assert_eq!((d.vertex_count(), d.edge_count()), (1, 2));
    assert_eq!(sorted_thetas(&d), sorted_thetas(&sq));

    let tri = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Triangular);
    let d = tri.dual().unwrap();
    let hex = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Honeycomb);
    assert_eq!((d.vertex_count(), d.edge_count()), (hex.vertex_count(), hex.edge_count()));
    for (a, b) in sorted_thetas(&d).iter().zip(sorted_thetas(&hex)) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn double_dual_has_the_same_shape() {
    for g in [
        PeriodicIsoradialGraph::standard_lattice(LatticeKind::Honeycomb),
        PeriodicIsoradialGraph::generic_hexagonal(),
    ] {
        let dd = g.dual().unwrap().dual().unwrap();
        assert_eq!((dd.vertex_count(), dd.edge_count()), (g.vertex_count(), g.edge_count()));
        for (a, b) in dd.thetas().iter().zip(g.thetas()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn square_quotients() {
    let g = PeriodicIsoradialGraph::standard_lattice(LatticeKind::Square);
    let q1 = g.quotient(1).unwrap();
    assert_eq!((q1.vertex_count(), q1.edge_count()), (1, 2));
    assert!(q1.edges().iter().all(|e| e.u == 0 && e.v == 0));
    let q2 = g.quotient(2).unwrap();
    assert_eq!((q2.vertex_count(), q2.edge_count()), (4, 8));
}

#[test]
fn crossings_scale_with_n() {
    for g in [
        PeriodicIsoradialGraph::standard_lattice(LatticeKind::Triangular),
        PeriodicIsoradialGraph::generic_hexagonal(),
    ] {
        let w1 = g.quotient(1).unwrap().total_wraps();
        for n in 2..=4 {
            let wn = g.quotient(n).unwrap().total_wraps();
            assert_eq!(wn, [w1[0] * n as i64, w1[1] * n as i64]);
        }
    }
}

fn acute_triangle() -> impl Strategy<Value = [f64; 3]> {
    (0.2f64..1.5, 0.2f64..1.5)
        .prop_filter("acute", |(a, b)| {
            let c = PI - a - b;
            c > 0.2 && c < 1.5
        })
        .prop_map(|(a, b)| [a, b, PI - a - b])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn triangular_family_invariants(angles in acute_triangle(), n in 1usize..5) {
        let g = PeriodicIsoradialGraph::triangular_from_angles(angles).unwrap();
        for t in g.thetas() {
            prop_assert!(t > 1e-9 && t < PI / 2.0 - 1e-9);
        }
        for r in g.rhombi() {
            for (p, q) in [(r.u, r.center_left), (r.u, r.center_right), (r.v, r.center_left), (r.v, r.center_right)] {
                prop_assert!((dist(p, q) - 1.0).abs() < 1e-9);
            }
        }
        let d = g.dual().unwrap();
        for e in 0..g.edge_count() {
            prop_assert!((g.theta(e) + d.theta(e) - PI / 2.0).abs() < 1e-9);
        }
        let q = g.quotient(n).unwrap();
        prop_assert_eq!(q.vertex_count(), n * n * g.vertex_count());
        prop_assert_eq!(q.edge_count(), n * n * g.edge_count());
    }

    #[test]
    fn spec_round_trip(angles in acute_triangle()) {
        let g = PeriodicIsoradialGraph::triangular_from_angles(angles).unwrap();
        let doc = serde_json::to_string(&g.to_spec()).unwrap();
        let h = load_graph(&doc).unwrap();
        let (a, b) = (h.to_spec(), g.to_spec());
        prop_assert_eq!(&a.edges, &b.edges);
        prop_assert_eq!(a.vertices.len(), b.vertices.len());
        for i in 0..2 {
            prop_assert!(dist(a.basis[i], b.basis[i]) < 1e-12);
        }
        for (x, y) in a.vertices.iter().zip(&b.vertices) {
            prop_assert_eq!(&x.id, &y.id);
            prop_assert!(dist(x.pos, y.pos) < 1e-12);
        }
    }
}
